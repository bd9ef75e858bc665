#include "cqc/nuisance.hpp"

#include "cqc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace cqc {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw UsageError("quantile level must lie in [0, 1], got " + std::to_string(alpha));
    }
}

void check_arm(int arm)
{
    if (arm != 0 && arm != 1) throw UsageError("arm must be 0 or 1, got " + std::to_string(arm));
}

// Indices that sort values ascending (stable, so ties keep input order).
std::vector<std::size_t> sort_order(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return values[l] < values[r]; });
    return order;
}

} // namespace

std::vector<double> NuisanceSource::propensities(const Points& at) const
{
    std::vector<double> out(at.size());
    for (std::size_t j = 0; j < at.size(); ++j) out[j] = propensity(at.row(j));
    return out;
}

Eigen::MatrixXd NuisanceSource::ccdf_matrix(int arm, const Points& at, std::span<const double> ys) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(at.size()), static_cast<Eigen::Index>(ys.size()));
    for (std::size_t j = 0; j < at.size(); ++j) {
        const auto x = at.row(j);
        for (std::size_t q = 0; q < ys.size(); ++q) {
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = ccdf(arm, ys[q], x);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// StepCdf

StepCdf::StepCdf(std::span<const double> sorted_points, std::span<const double> masses)
{
    if (sorted_points.size() != masses.size()) throw UsageError("step CDF needs one mass per point");
    double running = 0.0;
    for (std::size_t i = 0; i < sorted_points.size(); ++i) {
        if (i > 0 && sorted_points[i] < sorted_points[i - 1]) throw UsageError("step CDF points must be sorted");
        if (masses[i] < 0.0) throw UsageError("step CDF masses must be nonnegative");
        if (masses[i] == 0.0) continue;
        running += masses[i];
        if (!points_.empty() && points_.back() == sorted_points[i]) {
            cumulative_.back() = running;
        } else {
            points_.push_back(sorted_points[i]);
            cumulative_.push_back(running);
        }
    }
    if (points_.empty()) throw NumericalError("step CDF has no mass");
    // NW weights are normalised, so absorb the rounding of the running sum.
    if (std::abs(running - 1.0) < 1e-9) {
        for (auto& c : cumulative_) c = std::min(c, 1.0);
        cumulative_.back() = 1.0;
    }
}

double StepCdf::operator()(double y) const noexcept
{
    const auto it = std::upper_bound(points_.begin(), points_.end(), y);
    if (it == points_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double StepCdf::inverse(double alpha) const
{
    check_alpha(alpha);
    if (alpha > cumulative_.back()) {
        throw NumericalError("quantile level " + std::to_string(alpha) + " exceeds the CDF's total mass "
            + std::to_string(cumulative_.back()));
    }
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), alpha);
    return points_[static_cast<std::size_t>(it - cumulative_.begin())];
}

// ---------------------------------------------------------------------------
// Splitting

SplitPlan make_split(const Dataset& dataset, std::uint64_t seed)
{
    if (dataset.size() < 4) {
        throw DataError("sample splitting needs at least 4 rows, got " + std::to_string(dataset.size()));
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto half = static_cast<std::ptrdiff_t>(dataset.size() / 2);
    SplitPlan plan;
    plan.seed = seed;
    plan.first.assign(order.begin(), order.begin() + half);
    plan.second.assign(order.begin() + half, order.end());
    std::sort(plan.first.begin(), plan.first.end());
    std::sort(plan.second.begin(), plan.second.end());
    return plan;
}

// ---------------------------------------------------------------------------
// Propensity

PropensityModel::PropensityModel(const Dataset& train, KernelSpec spec, double xi, MassPolicy policy)
    : xs_(train.covariates()), spec_(spec), xi_(xi), policy_(policy)
{
    spec_.validate();
    if (!(xi > 0.0 && xi <= 0.5)) throw UsageError("clip level xi must lie in (0, 0.5], got " + std::to_string(xi));
    train.require_both_arms("propensity fit");
    treated_.reserve(train.size());
    for (auto a : train.treatments()) treated_.push_back(static_cast<double>(a));
}

double PropensityModel::raw(std::span<const double> x) const
{
    return nw_regress(spec_, x, xs_, treated_, {}, policy_);
}

double PropensityModel::operator()(std::span<const double> x) const
{
    return std::clamp(raw(x), xi_, 1.0 - xi_);
}

PropensityModel fit_propensity(const Dataset& train, const KernelSpec& spec, double xi, MassPolicy policy)
{
    return PropensityModel(train, spec, xi, policy);
}

// ---------------------------------------------------------------------------
// Conditional CDFs

CcdfModel::CcdfModel(const Dataset& train, KernelSpec spec, MassPolicy policy) : spec_(spec), policy_(policy)
{
    spec_.validate();
    for (int arm = 0; arm < 2; ++arm) {
        auto rows = train.arm_indices(arm);
        if (rows.empty()) {
            throw DataError("conditional CDF fit: arm " + std::to_string(arm) + " has no rows");
        }
        std::vector<double> ys(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) ys[k] = train.y(rows[k]);
        const auto order = sort_order(ys);
        std::vector<std::size_t> sorted_rows(rows.size());
        auto& target = arms_[arm];
        target.ys.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            sorted_rows[k] = rows[order[k]];
            target.ys[k] = ys[order[k]];
        }
        target.xs = train.covariates().subset(sorted_rows);
    }
}

const CcdfModel::Arm& CcdfModel::arm_rows(int arm) const
{
    check_arm(arm);
    return arms_[arm];
}

double CcdfModel::operator()(int arm, double y, std::span<const double> x) const
{
    const auto& rows = arm_rows(arm);
    const auto w = smoother_weights(spec_, x, rows.xs, {}, policy_);
    const auto stop = static_cast<std::size_t>(std::upper_bound(rows.ys.begin(), rows.ys.end(), y) - rows.ys.begin());
    double s = 0.0;
    for (std::size_t i = 0; i < stop; ++i) s += w[i];
    return std::clamp(s, 0.0, 1.0);
}

StepCdf CcdfModel::conditional(int arm, std::span<const double> x) const
{
    const auto& rows = arm_rows(arm);
    const auto w = smoother_weights(spec_, x, rows.xs, {}, policy_);
    return StepCdf(rows.ys, w.values());
}

double CcdfModel::quantile(int arm, double alpha, std::span<const double> x) const
{
    return conditional(arm, x).inverse(alpha);
}

Eigen::MatrixXd CcdfModel::ccdf_matrix(int arm, const Points& at, std::span<const double> ys) const
{
    const auto& rows = arm_rows(arm);
    const auto order = sort_order(ys);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(at.size()), static_cast<Eigen::Index>(ys.size()));
    for (std::size_t j = 0; j < at.size(); ++j) {
        const auto w = smoother_weights(spec_, at.row(j), rows.xs, {}, policy_);
        double running = 0.0;
        std::size_t i = 0;
        for (auto q : order) {
            while (i < rows.ys.size() && rows.ys[i] <= ys[q]) running += w[i++];
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = std::clamp(running, 0.0, 1.0);
        }
    }
    return out;
}

CcdfModel fit_ccdf(const Dataset& train, const KernelSpec& spec, MassPolicy policy)
{
    return CcdfModel(train, spec, policy);
}

double ccdf_generalised_inverse(const CcdfModel& model, int arm, double alpha, std::span<const double> x)
{
    return model.quantile(arm, alpha, x);
}

// ---------------------------------------------------------------------------

void NuisanceOptions::validate() const
{
    propensity_kernel.validate();
    ccdf_kernel.validate();
    if (!(xi > 0.0 && xi <= 0.5)) throw UsageError("clip level xi must lie in (0, 0.5], got " + std::to_string(xi));
}

NuisanceModel::NuisanceModel(const Dataset& train, const NuisanceOptions& options)
    : propensity_(train, options.propensity_kernel, options.xi, options.policy),
      ccdf_(train, options.ccdf_kernel, options.policy),
      training_size_(train.size())
{
}

} // namespace cqc
