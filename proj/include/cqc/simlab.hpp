#pragma once

#include "cqc/baselines.hpp"
#include "cqc/dataset.hpp"
#include "cqc/kernels.hpp"
#include "cqc/nuisance.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cqc {

// Simulation families with closed-form nuisances. With s = sin(gamma pi t)
// (t = x for the 1-d families, t = beta'x for tendim) and pi(x) = 0.4 s + 0.5:
//   illustrative  Y|A=0 ~ N(s, 1),            Y|A=1 ~ N(2s, 2^2)
//   tendim        Y|A=a ~ N(s, 1) for both arms, X ~ U[-1, 1]^10
//   linear_cqc    Y|A=0 ~ N(s/c, 1),          Y|A=1 ~ N(s + c/2, c^2), c = 0.5x + 1.5
//   uniform_h     Y|A=0 ~ U(s, s + 1),        Y|A=1 ~ U(2s, 2s + 2)
// The 1-d families draw X ~ U(0, 1).
enum class DgpFamily { illustrative, tendim, linear_cqc, uniform_h };

std::string_view to_string(DgpFamily family) noexcept;
DgpFamily parse_dgp_family(std::string_view name);

struct DgpSpec {
    DgpFamily family = DgpFamily::illustrative;
    double gamma = 0.0;
    std::size_t dim = 1;
    std::vector<double> beta; // tendim only
    std::uint64_t seed = 0;   // seeds beta

    // Fills in dim and, for tendim, draws beta ~ N(0, 0.2^2) from seed.
    static DgpSpec make(DgpFamily family, double gamma, std::uint64_t seed = 0);
    void validate() const;
};

// Exact nuisances and estimands of a DgpSpec.
class TruthOracle final : public NuisanceSource {
public:
    explicit TruthOracle(DgpSpec spec);

    const DgpSpec& spec() const noexcept { return spec_; }

    double propensity(std::span<const double> x) const override;
    double ccdf(int arm, double y, std::span<const double> x) const override;
    double quantile(int arm, double alpha, std::span<const double> x) const override;

    double g_star(double y, std::span<const double> x) const;
    double h_star(double y0, double y1, std::span<const double> x) const;
    double cqte(double alpha, std::span<const double> x) const;

    Points sample_covariates(std::size_t n, std::mt19937_64& rng) const;
    double sample_outcome(int arm, std::span<const double> x, std::mt19937_64& rng) const;
    Dataset sample(std::size_t n, std::mt19937_64& rng) const;

private:
    double signal(std::span<const double> x) const;

    DgpSpec spec_;
};

TruthOracle truth(const DgpSpec& spec);

// Throws UsageError for n_total < 4.
Dataset sample_dgp(const DgpSpec& spec, std::size_t n_total, std::uint64_t seed);

// Seed of replication i: a splitmix64 scramble of base xor i.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t i) noexcept;

struct ExperimentConfig {
    DgpSpec dgp;
    std::vector<EstimatorConfig> estimators;
    std::size_t n_total = 1000;
    std::size_t replications = 100;
    std::size_t holdout = 200;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct EstimatorSummary {
    std::string estimator;
    double mean_abs_error = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double ci_half_width = std::numeric_limits<double>::quiet_NaN();
    std::size_t replications = 0; // successful replications
    std::size_t failures = 0;
    std::vector<double> per_replication; // NaN where the estimator failed

    double ci_low() const noexcept { return mean_abs_error - ci_half_width; }
    double ci_high() const noexcept { return mean_abs_error + ci_half_width; }
};

struct ErrorReport {
    ExperimentConfig config;
    std::vector<EstimatorSummary> estimators;

    // Throws UsageError when absent.
    const EstimatorSummary& find(std::string_view name) const;
};

// Mean of |g_hat(Y|X) - g*(Y|X)| over a fresh holdout with Y drawn from the
// untreated conditional, aggregated over replications with 95% CIs.
ErrorReport run_experiment(const ExperimentConfig& config);

// mean, sample sd and 1.96 sd / sqrt(R) over the finite entries.
EstimatorSummary summarise(std::string name, std::vector<double> per_replication);

enum class CvTarget {
    treatment,          // NW regression of A on X
    outcome_indicators, // arm-masked NW regression of 1{Y <= q} at the outcome quartiles
};

// k-fold cross-validated bandwidth; ties go to the smaller bandwidth.
double cv_bandwidth(const Dataset& data, KernelFamily family, std::span<const double> candidates, std::size_t folds,
    std::uint64_t seed, CvTarget target = CvTarget::treatment);

} // namespace cqc
