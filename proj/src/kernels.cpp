#include "cqc/kernels.hpp"

#include "cqc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cqc {

namespace {

double squared_distance(std::span<const double> x, std::span<const double> x2) noexcept
{
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - x2[k];
        d2 += diff * diff;
    }
    return d2;
}

void check_mask(std::span<const std::uint8_t> mask, const Points& train)
{
    if (!mask.empty() && mask.size() != train.size()) {
        throw UsageError("mask length " + std::to_string(mask.size()) + " does not match "
            + std::to_string(train.size()) + " training points");
    }
}

bool included(std::span<const std::uint8_t> mask, std::size_t i) noexcept
{
    return mask.empty() || mask[i] != 0;
}

constexpr int kMaxWidenings = 10;
constexpr std::size_t kMinSupport = 5;

} // namespace

std::string_view to_string(KernelFamily family) noexcept
{
    return family == KernelFamily::box ? "box" : "gaussian";
}

KernelFamily parse_kernel_family(std::string_view name)
{
    if (name == "box") return KernelFamily::box;
    if (name == "gaussian") return KernelFamily::gaussian;
    throw UsageError("unknown kernel family '" + std::string(name) + "' (expected box or gaussian)");
}

void KernelSpec::validate() const
{
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw UsageError("kernel bandwidth must be positive and finite, got " + std::to_string(bandwidth));
    }
}

WeightVector::WeightVector(std::vector<double> weights, bool degenerate)
    : weights_(std::move(weights)), degenerate_(degenerate)
{
}

std::size_t WeightVector::support_size() const noexcept
{
    return static_cast<std::size_t>(std::count_if(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; }));
}

double WeightVector::l1_norm() const noexcept
{
    double s = 0.0;
    for (double w : weights_) s += std::abs(w);
    return s;
}

double WeightVector::l2_norm() const noexcept
{
    double s = 0.0;
    for (double w : weights_) s += w * w;
    return std::sqrt(s);
}

double WeightVector::linf_norm() const noexcept
{
    double m = 0.0;
    for (double w : weights_) m = std::max(m, std::abs(w));
    return m;
}

double WeightVector::dot(std::span<const double> targets) const
{
    if (targets.size() != weights_.size()) {
        throw UsageError("targets length " + std::to_string(targets.size()) + " does not match "
            + std::to_string(weights_.size()) + " weights");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] != 0.0) s += weights_[i] * targets[i];
    }
    return s;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2)
{
    if (x.size() != x2.size()) {
        throw UsageError("kernel arguments have dimensions " + std::to_string(x.size()) + " and "
            + std::to_string(x2.size()));
    }
    const double d2 = squared_distance(x, x2);
    if (spec.family == KernelFamily::box) {
        return d2 <= spec.bandwidth * spec.bandwidth ? 1.0 : 0.0;
    }
    return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
}

WeightVector nw_weights(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const std::uint8_t> mask)
{
    check_mask(mask, train);
    if (x.size() != train.dim()) {
        throw UsageError("query has dimension " + std::to_string(x.size()) + ", training points have "
            + std::to_string(train.dim()));
    }
    const std::size_t n = train.size();
    std::vector<double> w(n, 0.0);
    double total = 0.0;

    if (spec.family == KernelFamily::box) {
        const double r2 = spec.bandwidth * spec.bandwidth;
        for (std::size_t i = 0; i < n; ++i) {
            if (included(mask, i) && squared_distance(x, train.row(i)) <= r2) {
                w[i] = 1.0;
                total += 1.0;
            }
        }
    } else {
        // Shift by the nearest squared distance before exponentiating; the
        // normalised weights are unchanged and far queries do not underflow.
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!included(mask, i)) continue;
            w[i] = squared_distance(x, train.row(i));
            nearest = std::min(nearest, w[i]);
        }
        const double scale = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
        for (std::size_t i = 0; i < n; ++i) {
            if (!included(mask, i)) continue;
            w[i] = std::exp(-(w[i] - nearest) * scale);
            total += w[i];
        }
    }

    if (total <= 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        return WeightVector(std::move(w), true);
    }
    const double inv = 1.0 / total;
    for (auto& v : w) v *= inv;
    return WeightVector(std::move(w), false);
}

WeightVector smoother_weights(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const std::uint8_t> mask, MassPolicy policy)
{
    auto w = nw_weights(spec, x, train, mask);
    if (!w.degenerate()) return w;

    std::size_t eligible = train.size();
    if (!mask.empty()) eligible = static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
    if (policy == MassPolicy::strict || eligible == 0) {
        throw DegenerateMass({x.begin(), x.end()}, spec.bandwidth);
    }

    const std::size_t wanted = std::min(kMinSupport, eligible);
    KernelSpec wider = spec;
    for (int k = 0; k < kMaxWidenings; ++k) {
        wider = wider.widened(2.0);
        w = nw_weights(wider, x, train, mask);
        if (!w.degenerate() && w.support_size() >= wanted) return w;
    }
    throw DegenerateMass({x.begin(), x.end()}, wider.bandwidth);
}

double nw_regress(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const double> targets, std::span<const std::uint8_t> mask, MassPolicy policy)
{
    if (targets.size() != train.size()) {
        throw UsageError("targets length " + std::to_string(targets.size()) + " does not match "
            + std::to_string(train.size()) + " training points");
    }
    return smoother_weights(spec, x, train, mask, policy).dot(targets);
}

} // namespace cqc
