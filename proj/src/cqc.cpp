#include "cqc/cqc.hpp"

#include "cqc/error.hpp"
#include "cqc/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cqc {

namespace {

constexpr Eigen::Index kQueryBlock = 256;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

} // namespace

void ContrastOptions::validate() const
{
    nuisance_kernel.validate();
    outer_kernel.validate();
    if (!(xi > 0.0 && xi <= 0.5)) throw UsageError("clip level xi must lie in (0, 0.5], got " + std::to_string(xi));
}

NuisanceOptions ContrastOptions::nuisance_options() const
{
    return {nuisance_kernel, nuisance_kernel, xi, policy};
}

// ---------------------------------------------------------------------------
// Replicate: one (nuisance, regression rows) pairing.

class ContrastFit::Replicate {
public:
    Replicate(Dataset rows, std::shared_ptr<const NuisanceSource> nuisance, const ContrastOptions& options)
        : rows_(std::move(rows)), nuisance_(std::move(nuisance)), kind_(options.kind),
          outer_(options.outer_kernel), policy_(options.policy)
    {
        if (rows_.empty()) throw DataError("contrast regression needs at least one row");
        const auto n = idx(rows_.size());
        b1_.resize(n);
        d1_.resize(n);
        b0_.resize(n);
        d0_.resize(n);
        const auto pi = nuisance_->propensities(rows_.covariates());
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            const double treated = rows_.a(j) == 1 ? 1.0 : 0.0;
            const double inv1 = treated / pi[j];
            const double inv0 = (1.0 - treated) / (1.0 - pi[j]);
            d1_[idx(j)] = inv1;
            d0_[idx(j)] = inv0;
            const bool plug_in = kind_ != PseudoKind::ipw;
            b1_[idx(j)] = plug_in ? 1.0 - inv1 : 0.0;
            b0_[idx(j)] = plug_in ? 1.0 - inv0 : 0.0;
        }
    }

    // Row q: outer-regression weights at xs.row(q).
    Eigen::MatrixXd weights(const Points& xs, Eigen::Index begin, Eigen::Index end) const
    {
        Eigen::MatrixXd w(end - begin, idx(rows_.size()));
        for (Eigen::Index q = begin; q < end; ++q) {
            const auto wv = smoother_weights(outer_, xs.row(static_cast<std::size_t>(q)), rows_.covariates(), {}, policy_);
            for (std::size_t j = 0; j < wv.size(); ++j) w(q - begin, idx(j)) = wv[j];
        }
        return w;
    }

    Eigen::MatrixXd design(int arm, std::span<const double> ys) const
    {
        const auto& b = arm == 1 ? b1_ : b0_;
        const auto& d = arm == 1 ? d1_ : d0_;
        Eigen::MatrixXd g;
        if (kind_ == PseudoKind::ipw) {
            g = Eigen::MatrixXd::Zero(idx(rows_.size()), idx(ys.size()));
        } else {
            g = nuisance_->ccdf_matrix(arm, rows_.covariates(), ys);
            g = b.asDiagonal() * g;
        }
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            const double yj = rows_.y(j);
            const double dj = d[idx(j)];
            if (dj == 0.0) continue;
            for (std::size_t l = 0; l < ys.size(); ++l) {
                if (yj <= ys[l]) g(idx(j), idx(l)) += dj;
            }
        }
        return g;
    }

    // Rows begin..end of the contrast matrix against a precomputed y1 design.
    Eigen::MatrixXd contrast_block(const Eigen::MatrixXd& design1, std::span<const double> y0s, const Points& xs,
        Eigen::Index begin, Eigen::Index end) const
    {
        const Eigen::MatrixXd w = weights(xs, begin, end);
        const Eigen::MatrixXd g0 = design(0, y0s.subspan(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin)));
        Eigen::MatrixXd out = w * design1;
        const Eigen::VectorXd h0 = (w.array() * g0.transpose().array()).rowwise().sum();
        out.colwise() -= h0;
        return out;
    }

private:
    Dataset rows_;
    std::shared_ptr<const NuisanceSource> nuisance_;
    PseudoKind kind_;
    KernelSpec outer_;
    MassPolicy policy_;
    Eigen::VectorXd b1_, d1_, b0_, d0_;
};

// ---------------------------------------------------------------------------

ContrastFit ContrastFit::fit(const Dataset& data, const SplitPlan& split, const ContrastOptions& options)
{
    options.validate();
    if (options.kind == PseudoKind::oracle_dr) {
        throw UsageError("the oracle pseudo-outcome needs exact nuisances; use ContrastFit::with_nuisance");
    }
    const auto first = data.subset(split.first);
    first.require_both_arms("nuisance split");
    auto nuisance = std::make_shared<const NuisanceModel>(first, options.nuisance_options());
    ContrastFit out(options, data.dim());
    out.replicates_.push_back(std::make_shared<const Replicate>(data.subset(split.second), std::move(nuisance), options));
    return out;
}

ContrastFit ContrastFit::cross_fit(const Dataset& data, std::uint64_t seed, const ContrastOptions& options)
{
    const auto split = make_split(data, seed);
    auto out = fit(data, split, options);
    auto swapped = fit(data, split.swapped(), options);
    out.replicates_.push_back(swapped.replicates_.front());
    return out;
}

ContrastFit ContrastFit::with_nuisance(const Dataset& data, std::shared_ptr<const NuisanceSource> nuisance,
    const ContrastOptions& options)
{
    options.outer_kernel.validate();
    if (!nuisance) throw UsageError("with_nuisance requires a nuisance source");
    ContrastFit out(options, data.dim());
    out.replicates_.push_back(std::make_shared<const Replicate>(data, std::move(nuisance), options));
    return out;
}

Eigen::MatrixXd ContrastFit::contrast_matrix(std::span<const double> y0s, const Points& xs,
    std::span<const double> y1s) const
{
    return GridCache(*this, y1s).contrast_matrix(y0s, xs);
}

double ContrastFit::evaluate(double y0, double y1, std::span<const double> x) const
{
    Points xs(x.size());
    xs.push_back(x);
    return contrast_matrix({&y0, 1}, xs, {&y1, 1})(0, 0);
}

std::vector<double> ContrastFit::curve(double y0, std::span<const double> y1s, std::span<const double> x) const
{
    Points xs(x.size());
    xs.push_back(x);
    const auto m = contrast_matrix({&y0, 1}, xs, y1s);
    return {m.data(), m.data() + m.size()};
}

double ContrastFit::replicate_evaluate(std::size_t replicate, double y0, double y1, std::span<const double> x) const
{
    const auto& rep = *replicates_.at(replicate);
    Points xs(x.size());
    xs.push_back(x);
    return rep.contrast_block(rep.design(1, {&y1, 1}), {&y0, 1}, xs, 0, 1)(0, 0);
}

ContrastFit::GridCache::GridCache(const ContrastFit& fit, std::span<const double> y1s)
    : fit_(&fit), grid_size_(y1s.size())
{
    designs_.reserve(fit.replicates_.size());
    for (const auto& rep : fit.replicates_) designs_.push_back(rep->design(1, y1s));
}

Eigen::MatrixXd ContrastFit::GridCache::contrast_matrix(std::span<const double> y0s, const Points& xs) const
{
    if (y0s.size() != xs.size()) throw UsageError("one covariate row is needed per query outcome");
    if (xs.dim() != fit_->dim_) {
        throw UsageError("queries have dimension " + std::to_string(xs.dim()) + ", fit has " + std::to_string(fit_->dim_));
    }
    const auto m = idx(y0s.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, idx(grid_size_));
    for (Eigen::Index begin = 0; begin < m; begin += kQueryBlock) {
        const auto end = std::min(m, begin + kQueryBlock);
        for (std::size_t r = 0; r < designs_.size(); ++r) {
            out.middleRows(begin, end - begin) += fit_->replicates_[r]->contrast_block(designs_[r], y0s, xs, begin, end);
        }
    }
    if (designs_.size() > 1) out /= static_cast<double>(designs_.size());
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> build_grid(const Dataset& data, const GridPolicy& policy)
{
    std::vector<double> grid;
    if (policy.kind == GridKind::treated_outcomes) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.a(i) == 1) grid.push_back(data.y(i));
        }
        if (grid.empty()) throw DataError("evaluation grid: no treated observations");
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        return grid;
    }
    if (policy.count < 2) throw UsageError("a uniform grid needs at least 2 points");
    if (data.empty()) throw DataError("evaluation grid: empty dataset");
    const auto [lo, hi] = std::minmax_element(data.outcomes().begin(), data.outcomes().end());
    if (*lo == *hi) return {*lo};
    grid.resize(policy.count);
    const double step = (*hi - *lo) / static_cast<double>(policy.count - 1);
    for (std::size_t l = 0; l < policy.count; ++l) grid[l] = *lo + step * static_cast<double>(l);
    grid.back() = *hi;
    return grid;
}

CqcEstimate invert_projected(std::span<const double> grid, std::span<const double> projected)
{
    if (grid.empty() || grid.size() != projected.size()) {
        throw UsageError("inversion needs one projected contrast per (nonempty) grid point");
    }
    std::size_t best = 0;
    for (std::size_t l = 1; l < projected.size(); ++l) {
        if (std::abs(projected[l]) < std::abs(projected[best])) best = l;
    }
    return {grid[best], best, std::abs(projected[best])};
}

CqcFit::CqcFit(std::shared_ptr<const ContrastFit> contrast, std::vector<double> grid)
    : contrast_(std::move(contrast)), grid_(std::move(grid))
{
    if (!contrast_) throw UsageError("CqcFit needs a contrast fit");
    if (grid_.empty()) throw UsageError("CqcFit needs a nonempty grid");
    for (std::size_t l = 1; l < grid_.size(); ++l) {
        if (!(grid_[l] > grid_[l - 1])) throw UsageError("evaluation grid must be strictly increasing");
    }
    cache_ = std::make_shared<const ContrastFit::GridCache>(*contrast_, grid_);
}

CqcFit::CqcFit(ContrastFit contrast, std::vector<double> grid)
    : CqcFit(std::make_shared<const ContrastFit>(std::move(contrast)), std::move(grid))
{
}

std::vector<double> CqcFit::project(std::span<const double> raw) const
{
    if (contrast_->kind() == PseudoKind::ipw && !is_nondecreasing(raw, kIpwMonotoneTolerance)) {
        throw std::logic_error("IPW contrast is not nondecreasing in y1 before projection");
    }
    return pava_project(raw).projected;
}

std::vector<double> CqcFit::raw_curve(double y0, std::span<const double> x) const
{
    Points xs(x.size());
    xs.push_back(x);
    const auto m = cache_->contrast_matrix({&y0, 1}, xs);
    return {m.data(), m.data() + m.size()};
}

std::vector<double> CqcFit::projected_curve(double y0, std::span<const double> x) const
{
    return project(raw_curve(y0, x));
}

CqcEstimate CqcFit::estimate(double y0, std::span<const double> x) const
{
    return invert_projected(grid_, projected_curve(y0, x));
}

std::vector<CqcEstimate> CqcFit::estimate_many(std::span<const double> y0s, const Points& xs) const
{
    const Eigen::MatrixXd alphas = cache_->contrast_matrix(y0s, xs);
    std::vector<CqcEstimate> out;
    out.reserve(y0s.size());
    std::vector<double> row(grid_.size());
    for (Eigen::Index q = 0; q < alphas.rows(); ++q) {
        for (std::size_t l = 0; l < grid_.size(); ++l) row[l] = alphas(q, idx(l));
        out.push_back(invert_projected(grid_, project(row)));
    }
    return out;
}

CqcEstimate estimate_cqc(const ContrastFit& contrast, std::span<const double> grid, double y0,
    std::span<const double> x)
{
    return CqcFit(std::make_shared<const ContrastFit>(contrast), {grid.begin(), grid.end()}).estimate(y0, x);
}

double cqc_to_cqte(const CqcFit& fit, const NuisanceSource& arm0_ccdf, double alpha, std::span<const double> x)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw UsageError("CQTE level must lie in (0, 1), got " + std::to_string(alpha));
    }
    const double y0 = arm0_ccdf.quantile(0, alpha, x);
    return quantile_diff(fit.estimate(y0, x), y0);
}

Surface surface_eval(const CqcFit& fit, std::span<const double> ys, const Points& xs, bool monotone_in_y0)
{
    if (ys.empty() || xs.empty()) throw UsageError("surface grids must be nonempty");
    if (monotone_in_y0 && !std::is_sorted(ys.begin(), ys.end())) {
        throw UsageError("the y0 isotonic pass needs an ascending y grid");
    }
    const std::size_t ny = ys.size();
    const std::size_t nx = xs.size();
    std::vector<double> y0s;
    Points qx(xs.dim());
    y0s.reserve(ny * nx);
    qx.reserve(ny * nx);
    for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            y0s.push_back(ys[i]);
            qx.push_back(xs.row(j));
        }
    }
    const auto estimates = fit.estimate_many(y0s, qx);

    Surface out{{ys.begin(), ys.end()}, xs, std::vector<double>(ny * nx)};
    std::vector<double> slice(ny);
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t i = 0; i < ny; ++i) slice[i] = estimates[i * nx + j].g_hat;
        if (monotone_in_y0) slice = pava_project(slice).projected;
        for (std::size_t i = 0; i < ny; ++i) out.values[i * nx + j] = slice[i] - ys[i];
    }
    return out;
}

} // namespace cqc
