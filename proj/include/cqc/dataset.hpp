#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cqc {

// Row-major block of covariate vectors sharing one dimension.
class Points {
public:
    Points() = default;
    explicit Points(std::size_t dim);
    Points(std::size_t dim, std::vector<double> values);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const double> row(std::size_t i) const noexcept
    {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const double> values() const noexcept { return values_; }

    void push_back(std::span<const double> x);
    void reserve(std::size_t rows) { values_.reserve(rows * dim_); }

    Points subset(std::span<const std::size_t> rows) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

// The observed sample: outcome y, covariates x, binary treatment a.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : x_(dim) {}

    // Throws UsageError if x has the wrong dimension, a is not 0/1 or a
    // value is non-finite.
    void add(double y, std::span<const double> x, int a);

    std::size_t size() const noexcept { return y_.size(); }
    bool empty() const noexcept { return y_.empty(); }
    std::size_t dim() const noexcept { return x_.dim(); }

    double y(std::size_t i) const noexcept { return y_[i]; }
    int a(std::size_t i) const noexcept { return a_[i]; }
    std::span<const double> x(std::size_t i) const noexcept { return x_.row(i); }

    std::span<const double> outcomes() const noexcept { return y_; }
    std::span<const std::uint8_t> treatments() const noexcept { return a_; }
    const Points& covariates() const noexcept { return x_; }

    // Number of rows with a == arm.
    std::size_t arm_size(int arm) const noexcept;
    std::vector<std::size_t> arm_indices(int arm) const;

    Dataset subset(std::span<const std::size_t> rows) const;

    // Throws DataError unless both arms are represented.
    void require_both_arms(const char* what) const;

private:
    std::vector<double> y_;
    std::vector<std::uint8_t> a_;
    Points x_;
};

} // namespace cqc
