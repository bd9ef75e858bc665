#pragma once

#include "cqc/cqc.hpp"
#include "cqc/dataset.hpp"
#include "cqc/kernels.hpp"
#include "cqc/nuisance.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cqc {

// Plug-in comparator F1^-1(F0(y0 | x) | x) from arm-masked NW CCDFs fitted on
// the full sample. The estimate is always an observed treated outcome.
class SeparatePlugin {
public:
    SeparatePlugin(const Dataset& data, const KernelSpec& spec, MassPolicy policy = MassPolicy::widen);

    CqcEstimate estimate(double y0, std::span<const double> x) const;
    const CcdfModel& ccdf() const noexcept { return ccdf_; }

private:
    CcdfModel ccdf_;
};

double separate_plugin_cqc(const Dataset& data, const KernelSpec& spec, double y0, std::span<const double> x);

// The DR pipeline with the IPW pseudo-outcome; the isotonic step is
// checked to be a no-op.
double ipw_cqc(const Dataset& data, const SplitPlan& split, const ContrastOptions& options, double y0,
    std::span<const double> x, std::span<const double> grid);

// Pipeline with exact nuisances; the outer regression uses every row.
double oracle_dr_cqc(const Dataset& data, std::shared_ptr<const NuisanceSource> truth, const KernelSpec& outer,
    double y0, std::span<const double> x, std::span<const double> grid);

enum class EstimatorKind { dr, ipw, separate, oracle };

std::string_view to_string(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator_kind(std::string_view name);

// One estimator of the benchmark harness. Every kind consumes the same
// training sample and query set and reports one CqcEstimate per query.
struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::dr;
    ContrastOptions contrast;
    bool cross_fit = true;
    GridPolicy grid = GridPolicy::treated();
    std::string label; // defaults to the kind name

    std::string name() const;
};

// truth may be null except for the oracle kind. seed drives the sample split.
std::vector<CqcEstimate> run_estimator(const EstimatorConfig& config, const Dataset& train,
    std::span<const double> y0s, const Points& xs, std::uint64_t seed,
    std::shared_ptr<const NuisanceSource> truth = nullptr);

} // namespace cqc
