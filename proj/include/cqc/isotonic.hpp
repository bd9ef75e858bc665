#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cqc {

struct IsotonicResult {
    std::vector<double> projected;
    std::size_t input_length = 0;
};

// Least-squares projection onto nondecreasing sequences by pooling adjacent
// violators. Exact; ties come out as equal-valued blocks. Throws UsageError on
// empty input.
IsotonicResult pava_project(std::span<const double> values);

// True when no adjacent pair decreases by more than tolerance.
bool is_nondecreasing(std::span<const double> values, double tolerance = 0.0) noexcept;

} // namespace cqc
