#pragma once

#include "cqc/dataset.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cqc {

enum class KernelFamily { box, gaussian };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily parse_kernel_family(std::string_view name);

// Kernel family plus bandwidth. For the box kernel the bandwidth is the ball
// radius; for the Gaussian kernel it is the length-scale.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 0.1;

    static KernelSpec box(double radius) { return {KernelFamily::box, radius}; }
    static KernelSpec gaussian(double length_scale) { return {KernelFamily::gaussian, length_scale}; }

    // Throws UsageError unless bandwidth is finite and positive.
    void validate() const;
    KernelSpec widened(double factor) const { return {family, bandwidth * factor}; }
};

// What to do when no training point carries kernel mass at a query.
enum class MassPolicy {
    widen,  // double the bandwidth (up to 10 times) until >= 5 points carry mass
    strict, // fail immediately
};

// Nadaraya-Watson weights, one per training point.
class WeightVector {
public:
    WeightVector() = default;
    WeightVector(std::vector<double> weights, bool degenerate);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const noexcept { return weights_[i]; }
    std::span<const double> values() const noexcept { return weights_; }

    // Set when every kernel value was zero; the weights are then all zero.
    bool degenerate() const noexcept { return degenerate_; }

    std::size_t support_size() const noexcept;

    double l1_norm() const noexcept;
    double l2_norm() const noexcept;
    double linf_norm() const noexcept;

    double dot(std::span<const double> targets) const;

private:
    std::vector<double> weights_;
    bool degenerate_ = false;
};

// Throws UsageError on dimension mismatch.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2);

// Raw NW weights. mask, if non-empty, must have one entry per training point;
// points with mask 0 get weight 0 and are excluded from the normaliser.
// Never throws on degeneracy: the returned vector is flagged instead.
WeightVector nw_weights(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const std::uint8_t> mask = {});

// nw_weights with the degenerate-mass policy applied. Throws DegenerateMass.
WeightVector smoother_weights(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const std::uint8_t> mask = {}, MassPolicy policy = MassPolicy::widen);

double nw_regress(const KernelSpec& spec, std::span<const double> x, const Points& train,
    std::span<const double> targets, std::span<const std::uint8_t> mask = {},
    MassPolicy policy = MassPolicy::widen);

} // namespace cqc
