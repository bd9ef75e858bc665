#pragma once

#include "cqc/dataset.hpp"
#include "cqc/kernels.hpp"
#include "cqc/nuisance.hpp"
#include "cqc/pseudo.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace cqc {

struct ContrastOptions {
    KernelSpec nuisance_kernel = KernelSpec::gaussian(0.03);
    KernelSpec outer_kernel = KernelSpec::gaussian(0.8);
    double xi = 0.05;
    PseudoKind kind = PseudoKind::dr;
    MassPolicy policy = MassPolicy::widen;

    void validate() const;
    NuisanceOptions nuisance_options() const;
};

// Estimate of the CCDF contrast h(y0, y1 | x) = F1(y1|x) - F0(y0|x) obtained
// by NW regression of pseudo-outcomes. Holds one replicate per data split
// (two when cross-fitted); evaluations average the replicates.
//
// Each replicate factors the pseudo-outcome of regression row j as
//   phi_j(y0, y1) = G1_j(y1) - G0_j(y0)
//   G1_j(y) = b1_j F1(y | X_j) + d1_j 1{Y_j <= y}
//   G0_j(y) = b0_j F0(y | X_j) + d0_j 1{Y_j <= y}
// so a batch of queries against a grid of y1 values is one matrix product.
class ContrastFit {
public:
    // Nuisances on split.first, outer regression on split.second.
    static ContrastFit fit(const Dataset& data, const SplitPlan& split, const ContrastOptions& options);
    // fit() plus the role-swapped replicate.
    static ContrastFit cross_fit(const Dataset& data, std::uint64_t seed, const ContrastOptions& options);
    // Outer regression over every row of data with the given nuisances
    // (exact truths for the oracle estimator).
    static ContrastFit with_nuisance(const Dataset& data, std::shared_ptr<const NuisanceSource> nuisance,
        const ContrastOptions& options);

    double evaluate(double y0, double y1, std::span<const double> x) const;
    std::vector<double> curve(double y0, std::span<const double> y1s, std::span<const double> x) const;
    double replicate_evaluate(std::size_t replicate, double y0, double y1, std::span<const double> x) const;

    // Row q, column l: h(y0s[q], y1s[l] | xs.row(q)).
    Eigen::MatrixXd contrast_matrix(std::span<const double> y0s, const Points& xs, std::span<const double> y1s) const;

    std::size_t replicate_count() const noexcept { return replicates_.size(); }
    const ContrastOptions& options() const noexcept { return options_; }
    PseudoKind kind() const noexcept { return options_.kind; }
    std::size_t dim() const noexcept { return dim_; }

    class Replicate;

    // Per-grid precomputation shared by every query against the same grid.
    class GridCache {
    public:
        GridCache(const ContrastFit& fit, std::span<const double> y1s);
        Eigen::MatrixXd contrast_matrix(std::span<const double> y0s, const Points& xs) const;
        std::size_t grid_size() const noexcept { return grid_size_; }

    private:
        const ContrastFit* fit_;
        std::vector<Eigen::MatrixXd> designs_;
        std::size_t grid_size_;
    };

private:
    ContrastFit(ContrastOptions options, std::size_t dim) : options_(options), dim_(dim) {}

    ContrastOptions options_;
    std::size_t dim_;
    std::vector<std::shared_ptr<const Replicate>> replicates_;
};

enum class GridKind { treated_outcomes, uniform };

struct GridPolicy {
    GridKind kind = GridKind::treated_outcomes;
    std::size_t count = 0;

    static GridPolicy treated() { return {GridKind::treated_outcomes, 0}; }
    static GridPolicy uniform(std::size_t n) { return {GridKind::uniform, n}; }
};

// Strictly increasing evaluation grid. treated_outcomes uses every arm-1
// outcome of data; uniform spans [min y, max y] over all outcomes.
std::vector<double> build_grid(const Dataset& data, const GridPolicy& policy);

struct CqcEstimate {
    double g_hat;
    std::size_t index;
    double residual;
};

// Grid point minimising |projected|, ties to the smallest index.
CqcEstimate invert_projected(std::span<const double> grid, std::span<const double> projected);

// Maximum decrease tolerated in IPW contrasts before projection.
inline constexpr double kIpwMonotoneTolerance = 1e-9;

// The CQC estimator: contrast evaluated on a fixed grid, isotonically
// projected in y1 and inverted at zero.
class CqcFit {
public:
    CqcFit(std::shared_ptr<const ContrastFit> contrast, std::vector<double> grid);
    CqcFit(ContrastFit contrast, std::vector<double> grid);

    const std::vector<double>& grid() const noexcept { return grid_; }
    const ContrastFit& contrast() const noexcept { return *contrast_; }

    CqcEstimate estimate(double y0, std::span<const double> x) const;
    std::vector<CqcEstimate> estimate_many(std::span<const double> y0s, const Points& xs) const;

    // Pre-projection contrasts over the grid.
    std::vector<double> raw_curve(double y0, std::span<const double> x) const;
    std::vector<double> projected_curve(double y0, std::span<const double> x) const;

private:
    std::vector<double> project(std::span<const double> raw) const;

    std::shared_ptr<const ContrastFit> contrast_;
    std::vector<double> grid_;
    std::shared_ptr<const ContrastFit::GridCache> cache_;
};

CqcEstimate estimate_cqc(const ContrastFit& contrast, std::span<const double> grid, double y0,
    std::span<const double> x);

inline double quantile_diff(const CqcEstimate& estimate, double y0) noexcept
{
    return estimate.g_hat - y0;
}

// CQTE at level alpha: y0 = arm-0 quantile at alpha, then g_hat(y0) - y0.
double cqc_to_cqte(const CqcFit& fit, const NuisanceSource& arm0_ccdf, double alpha, std::span<const double> x);

struct Surface {
    std::vector<double> ys;
    Points xs;
    std::vector<double> values; // row-major: values[i * xs.size() + j] = delta(ys[i] | xs.row(j))

    double at(std::size_t i, std::size_t j) const { return values[i * xs.size() + j]; }
};

// Quantile-difference surface. With monotone_in_y0 the g_hat values of each
// x-slice are isotonically projected over the (sorted) y grid first.
Surface surface_eval(const CqcFit& fit, std::span<const double> ys, const Points& xs, bool monotone_in_y0 = false);

} // namespace cqc
