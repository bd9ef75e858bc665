#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cqc {

// Bad arguments or configuration. The CLI maps this to exit code 1.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input data that violates a precondition (single treatment arm, malformed
// CSV, too few rows). Exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure that survived every fallback. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No training point carries kernel mass at the query, even after the
// bandwidth-widening policy ran.
class DegenerateMass : public NumericalError {
public:
    DegenerateMass(std::vector<double> query, double bandwidth);

    const std::vector<double>& query() const noexcept { return query_; }
    double bandwidth() const noexcept { return bandwidth_; }

private:
    std::vector<double> query_;
    double bandwidth_;
};

} // namespace cqc
