#include "cqc/baselines.hpp"

#include "cqc/error.hpp"

#include <algorithm>
#include <cmath>

namespace cqc {

SeparatePlugin::SeparatePlugin(const Dataset& data, const KernelSpec& spec, MassPolicy policy)
    : ccdf_(data, spec, policy)
{
}

CqcEstimate SeparatePlugin::estimate(double y0, std::span<const double> x) const
{
    const double level = ccdf_(0, y0, x);
    const auto treated = ccdf_.conditional(1, x);
    const double g = treated.inverse(std::min(level, treated.cumulative().back()));
    const auto points = treated.points();
    const auto index = static_cast<std::size_t>(std::lower_bound(points.begin(), points.end(), g) - points.begin());
    return {g, index, std::abs(treated(g) - level)};
}

double separate_plugin_cqc(const Dataset& data, const KernelSpec& spec, double y0, std::span<const double> x)
{
    return SeparatePlugin(data, spec).estimate(y0, x).g_hat;
}

double ipw_cqc(const Dataset& data, const SplitPlan& split, const ContrastOptions& options, double y0,
    std::span<const double> x, std::span<const double> grid)
{
    auto opts = options;
    opts.kind = PseudoKind::ipw;
    return CqcFit(ContrastFit::fit(data, split, opts), {grid.begin(), grid.end()}).estimate(y0, x).g_hat;
}

double oracle_dr_cqc(const Dataset& data, std::shared_ptr<const NuisanceSource> truth, const KernelSpec& outer,
    double y0, std::span<const double> x, std::span<const double> grid)
{
    ContrastOptions opts;
    opts.kind = PseudoKind::oracle_dr;
    opts.outer_kernel = outer;
    return CqcFit(ContrastFit::with_nuisance(data, std::move(truth), opts), {grid.begin(), grid.end()})
        .estimate(y0, x)
        .g_hat;
}

std::string_view to_string(EstimatorKind kind) noexcept
{
    switch (kind) {
    case EstimatorKind::dr: return "DR";
    case EstimatorKind::ipw: return "IPW";
    case EstimatorKind::separate: return "Separate";
    case EstimatorKind::oracle: return "Oracle";
    }
    return "DR";
}

EstimatorKind parse_estimator_kind(std::string_view name)
{
    if (name == "dr" || name == "DR") return EstimatorKind::dr;
    if (name == "ipw" || name == "IPW") return EstimatorKind::ipw;
    if (name == "separate" || name == "Separate") return EstimatorKind::separate;
    if (name == "oracle" || name == "Oracle") return EstimatorKind::oracle;
    throw UsageError("unknown estimator '" + std::string(name) + "' (expected dr, ipw, separate or oracle)");
}

std::string EstimatorConfig::name() const
{
    return label.empty() ? std::string(to_string(kind)) : label;
}

std::vector<CqcEstimate> run_estimator(const EstimatorConfig& config, const Dataset& train,
    std::span<const double> y0s, const Points& xs, std::uint64_t seed, std::shared_ptr<const NuisanceSource> truth)
{
    if (config.kind == EstimatorKind::separate) {
        train.require_both_arms("separate estimator");
        const SeparatePlugin plugin(train, config.contrast.nuisance_kernel, config.contrast.policy);
        std::vector<CqcEstimate> out;
        out.reserve(y0s.size());
        for (std::size_t q = 0; q < y0s.size(); ++q) out.push_back(plugin.estimate(y0s[q], xs.row(q)));
        return out;
    }

    auto grid = build_grid(train, config.grid);
    auto options = config.contrast;
    if (config.kind == EstimatorKind::oracle) {
        if (!truth) throw UsageError("the oracle estimator needs exact nuisances (simulation only)");
        options.kind = PseudoKind::oracle_dr;
        const CqcFit fit(ContrastFit::with_nuisance(train, std::move(truth), options), std::move(grid));
        return fit.estimate_many(y0s, xs);
    }

    options.kind = config.kind == EstimatorKind::ipw ? PseudoKind::ipw : PseudoKind::dr;
    auto contrast = config.cross_fit ? ContrastFit::cross_fit(train, seed, options)
                                     : ContrastFit::fit(train, make_split(train, seed), options);
    const CqcFit fit(std::move(contrast), std::move(grid));
    return fit.estimate_many(y0s, xs);
}

} // namespace cqc
