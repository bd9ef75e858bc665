#include "cqc/dataset.hpp"

#include "cqc/error.hpp"

#include <cmath>
#include <string>

namespace cqc {

Points::Points(std::size_t dim) : dim_(dim)
{
    if (dim == 0) throw UsageError("covariate dimension must be positive");
}

Points::Points(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values))
{
    if (dim == 0) throw UsageError("covariate dimension must be positive");
    if (values_.size() % dim != 0) throw UsageError("covariate buffer is not a whole number of rows");
}

void Points::push_back(std::span<const double> x)
{
    if (x.size() != dim_) {
        throw UsageError("covariate has dimension " + std::to_string(x.size()) + ", expected "
            + std::to_string(dim_));
    }
    values_.insert(values_.end(), x.begin(), x.end());
}

Points Points::subset(std::span<const std::size_t> rows) const
{
    Points out(dim_);
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(row(r));
    return out;
}

void Dataset::add(double y, std::span<const double> x, int a)
{
    if (a != 0 && a != 1) throw UsageError("treatment must be 0 or 1, got " + std::to_string(a));
    if (!std::isfinite(y)) throw UsageError("outcome must be finite");
    for (double v : x) {
        if (!std::isfinite(v)) throw UsageError("covariates must be finite");
    }
    x_.push_back(x);
    y_.push_back(y);
    a_.push_back(static_cast<std::uint8_t>(a));
}

std::size_t Dataset::arm_size(int arm) const noexcept
{
    std::size_t n = 0;
    for (auto a : a_) n += (a == arm);
    return n;
}

std::vector<std::size_t> Dataset::arm_indices(int arm) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        if (a_[i] == arm) out.push_back(i);
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    Dataset out(dim());
    out.y_.reserve(rows.size());
    out.a_.reserve(rows.size());
    out.x_ = x_.subset(rows);
    for (auto r : rows) {
        out.y_.push_back(y_[r]);
        out.a_.push_back(a_[r]);
    }
    return out;
}

void Dataset::require_both_arms(const char* what) const
{
    const auto treated = arm_size(1);
    if (treated == 0 || treated == size()) {
        throw DataError(std::string(what) + ": both treatment arms must be present ("
            + std::to_string(treated) + " of " + std::to_string(size()) + " rows treated)");
    }
}

} // namespace cqc
