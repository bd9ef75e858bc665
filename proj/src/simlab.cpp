#include "cqc/simlab.hpp"

#include "cqc/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace cqc {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double alpha)
{
    if (alpha <= 0.0) return -std::numeric_limits<double>::infinity();
    if (alpha >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::normal_distribution<double>(), alpha);
}

double uniform_cdf(double y, double lower, double width) { return std::clamp((y - lower) / width, 0.0, 1.0); }

struct Location {
    double mean;  // or lower end for uniform families
    double scale; // sd, or width for uniform families
};

} // namespace

std::string_view to_string(DgpFamily family) noexcept
{
    switch (family) {
    case DgpFamily::illustrative: return "illustrative";
    case DgpFamily::tendim: return "tendim";
    case DgpFamily::linear_cqc: return "linear_cqc";
    case DgpFamily::uniform_h: return "uniform_h";
    }
    return "illustrative";
}

DgpFamily parse_dgp_family(std::string_view name)
{
    if (name == "illustrative") return DgpFamily::illustrative;
    if (name == "tendim") return DgpFamily::tendim;
    if (name == "linear_cqc") return DgpFamily::linear_cqc;
    if (name == "uniform_h") return DgpFamily::uniform_h;
    throw UsageError("unknown DGP family '" + std::string(name) + "'");
}

DgpSpec DgpSpec::make(DgpFamily family, double gamma, std::uint64_t seed)
{
    DgpSpec spec;
    spec.family = family;
    spec.gamma = gamma;
    spec.seed = seed;
    if (family == DgpFamily::tendim) {
        spec.dim = 10;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> draw(0.0, 0.2);
        spec.beta.resize(10);
        for (auto& b : spec.beta) b = draw(rng);
    }
    spec.validate();
    return spec;
}

void DgpSpec::validate() const
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw UsageError("DGP frequency gamma must be finite and >= 0");
    if (family == DgpFamily::tendim) {
        if (dim != 10 || beta.size() != 10) throw UsageError("tendim needs dimension 10 and a 10-vector beta");
    } else if (dim != 1) {
        throw UsageError(std::string(to_string(family)) + " is one-dimensional");
    }
}

// ---------------------------------------------------------------------------

TruthOracle::TruthOracle(DgpSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

TruthOracle truth(const DgpSpec& spec) { return TruthOracle(spec); }

double TruthOracle::signal(std::span<const double> x) const
{
    if (x.size() != spec_.dim) throw UsageError("covariate dimension does not match the DGP");
    double t = x[0];
    if (spec_.family == DgpFamily::tendim) {
        t = std::inner_product(x.begin(), x.end(), spec_.beta.begin(), 0.0);
    }
    return std::sin(spec_.gamma * std::numbers::pi * t);
}

namespace {

Location location(DgpFamily family, int arm, double s, std::span<const double> x)
{
    switch (family) {
    case DgpFamily::illustrative: return arm == 1 ? Location{2.0 * s, 2.0} : Location{s, 1.0};
    case DgpFamily::tendim: return {s, 1.0};
    case DgpFamily::linear_cqc: {
        const double c = 0.5 * x[0] + 1.5;
        return arm == 1 ? Location{s + 0.25 * x[0] + 0.75, c} : Location{s / c, 1.0};
    }
    case DgpFamily::uniform_h: return arm == 1 ? Location{2.0 * s, 2.0} : Location{s, 1.0};
    }
    return {0.0, 1.0};
}

} // namespace

double TruthOracle::propensity(std::span<const double> x) const { return 0.4 * signal(x) + 0.5; }

double TruthOracle::ccdf(int arm, double y, std::span<const double> x) const
{
    const auto loc = location(spec_.family, arm, signal(x), x);
    if (spec_.family == DgpFamily::uniform_h) return uniform_cdf(y, loc.mean, loc.scale);
    return normal_cdf((y - loc.mean) / loc.scale);
}

double TruthOracle::quantile(int arm, double alpha, std::span<const double> x) const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("quantile level must lie in [0, 1]");
    const auto loc = location(spec_.family, arm, signal(x), x);
    if (spec_.family == DgpFamily::uniform_h) return loc.mean + alpha * loc.scale;
    return loc.mean + loc.scale * normal_quantile(alpha);
}

double TruthOracle::g_star(double y, std::span<const double> x) const
{
    switch (spec_.family) {
    case DgpFamily::illustrative:
    case DgpFamily::uniform_h: return 2.0 * y;
    case DgpFamily::tendim: return y;
    case DgpFamily::linear_cqc: return (y + 0.5) * (0.5 * x[0] + 1.5);
    }
    return y;
}

double TruthOracle::h_star(double y0, double y1, std::span<const double> x) const
{
    return ccdf(1, y1, x) - ccdf(0, y0, x);
}

double TruthOracle::cqte(double alpha, std::span<const double> x) const
{
    return quantile(1, alpha, x) - quantile(0, alpha, x);
}

Points TruthOracle::sample_covariates(std::size_t n, std::mt19937_64& rng) const
{
    Points xs(spec_.dim);
    xs.reserve(n);
    const bool cube = spec_.family == DgpFamily::tendim;
    std::uniform_real_distribution<double> unit(cube ? -1.0 : 0.0, 1.0);
    std::vector<double> x(spec_.dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = unit(rng);
        xs.push_back(x);
    }
    return xs;
}

double TruthOracle::sample_outcome(int arm, std::span<const double> x, std::mt19937_64& rng) const
{
    const auto loc = location(spec_.family, arm, signal(x), x);
    if (spec_.family == DgpFamily::uniform_h) {
        return std::uniform_real_distribution<double>(loc.mean, loc.mean + loc.scale)(rng);
    }
    return std::normal_distribution<double>(loc.mean, loc.scale)(rng);
}

Dataset TruthOracle::sample(std::size_t n, std::mt19937_64& rng) const
{
    if (n < 4) throw UsageError("a simulated sample needs at least 4 rows");
    const auto xs = sample_covariates(n, rng);
    Dataset data(spec_.dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = xs.row(i);
        const int a = std::bernoulli_distribution(propensity(x))(rng) ? 1 : 0;
        data.add(sample_outcome(a, x, rng), x, a);
    }
    return data;
}

Dataset sample_dgp(const DgpSpec& spec, std::size_t n_total, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return TruthOracle(spec).sample(n_total, rng);
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t i) noexcept
{
    std::uint64_t z = (base ^ i) + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Monte-Carlo runner

void ExperimentConfig::validate() const
{
    dgp.validate();
    if (estimators.empty()) throw UsageError("experiment needs at least one estimator");
    if (replications < 2) throw UsageError("experiment needs at least 2 replications for a confidence interval");
    if (n_total < 4) throw UsageError("experiment needs n_total >= 4");
    if (holdout == 0) throw UsageError("experiment needs a nonempty holdout");
    for (const auto& e : estimators) {
        e.contrast.validate();
        if (e.kind == EstimatorKind::oracle && e.contrast.outer_kernel.bandwidth <= 0.0) {
            throw UsageError("oracle estimator needs an outer bandwidth");
        }
    }
}

const EstimatorSummary& ErrorReport::find(std::string_view name) const
{
    for (const auto& e : estimators) {
        if (e.estimator == name) return e;
    }
    throw UsageError("no estimator named '" + std::string(name) + "' in report");
}

EstimatorSummary summarise(std::string name, std::vector<double> per_replication)
{
    EstimatorSummary out;
    out.estimator = std::move(name);
    double sum = 0.0;
    for (double e : per_replication) {
        if (std::isfinite(e)) {
            sum += e;
            ++out.replications;
        } else {
            ++out.failures;
        }
    }
    if (out.replications > 0) out.mean_abs_error = sum / static_cast<double>(out.replications);
    if (out.replications > 1) {
        double ss = 0.0;
        for (double e : per_replication) {
            if (std::isfinite(e)) ss += (e - out.mean_abs_error) * (e - out.mean_abs_error);
        }
        out.sd = std::sqrt(ss / static_cast<double>(out.replications - 1));
        out.ci_half_width = 1.96 * out.sd / std::sqrt(static_cast<double>(out.replications));
    }
    out.per_replication = std::move(per_replication);
    return out;
}

ErrorReport run_experiment(const ExperimentConfig& config)
{
    config.validate();
    const auto oracle = std::make_shared<const TruthOracle>(config.dgp);
    const std::size_t n_est = config.estimators.size();
    std::vector<double> errors(config.replications * n_est, std::numeric_limits<double>::quiet_NaN());

    auto run_one = [&](std::size_t r) {
        std::mt19937_64 rng(replication_seed(config.seed, r));
        const auto train = oracle->sample(config.n_total, rng);
        const auto hx = oracle->sample_covariates(config.holdout, rng);
        std::vector<double> hy(config.holdout);
        std::vector<double> target(config.holdout);
        for (std::size_t q = 0; q < config.holdout; ++q) {
            hy[q] = oracle->sample_outcome(0, hx.row(q), rng);
            target[q] = oracle->g_star(hy[q], hx.row(q));
        }
        const std::uint64_t split_seed = rng();
        for (std::size_t e = 0; e < n_est; ++e) {
            try {
                const auto est = run_estimator(config.estimators[e], train, hy, hx, split_seed, oracle);
                double sum = 0.0;
                for (std::size_t q = 0; q < config.holdout; ++q) sum += std::abs(est[q].g_hat - target[q]);
                errors[r * n_est + e] = sum / static_cast<double>(config.holdout);
            } catch (const std::exception&) {
                // recorded as a failure (NaN)
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.replications)));
    if (threads == 1) {
        for (std::size_t r = 0; r < config.replications; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < config.replications; r = next++) run_one(r);
            });
        }
    }

    ErrorReport report;
    report.config = config;
    for (std::size_t e = 0; e < n_est; ++e) {
        std::vector<double> column(config.replications);
        for (std::size_t r = 0; r < config.replications; ++r) column[r] = errors[r * n_est + e];
        report.estimators.push_back(summarise(config.estimators[e].name(), std::move(column)));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Bandwidth cross-validation

double cv_bandwidth(const Dataset& data, KernelFamily family, std::span<const double> candidates, std::size_t folds,
    std::uint64_t seed, CvTarget target)
{
    if (candidates.size() < 2) throw UsageError("bandwidth cross-validation needs at least 2 candidates");
    if (folds < 2) throw UsageError("bandwidth cross-validation needs at least 2 folds");
    if (folds > data.size()) {
        throw UsageError("cannot make " + std::to_string(folds) + " folds from " + std::to_string(data.size()) + " rows");
    }
    for (double h : candidates) KernelSpec{family, h}.validate();

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold_of(data.size());
    for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = k % folds;

    std::vector<double> thresholds;
    if (target == CvTarget::outcome_indicators) {
        std::vector<double> ys(data.outcomes().begin(), data.outcomes().end());
        std::sort(ys.begin(), ys.end());
        for (double p : {0.25, 0.5, 0.75}) thresholds.push_back(ys[static_cast<std::size_t>(p * static_cast<double>(ys.size() - 1))]);
    }

    std::vector<std::vector<std::size_t>> train_rows(folds);
    std::vector<std::vector<std::size_t>> test_rows(folds);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t f = 0; f < folds; ++f) (f == fold_of[i] ? test_rows : train_rows)[f].push_back(i);
    }
    for (std::size_t f = 0; f < folds; ++f) {
        const auto train = data.subset(train_rows[f]);
        if (target == CvTarget::outcome_indicators) {
            if (train.arm_size(0) == 0 || train.arm_size(1) == 0) throw DataError("degenerate fold: an arm is missing");
        } else if (train.empty()) {
            throw DataError("degenerate fold: no training rows");
        }
    }

    double best_h = std::numeric_limits<double>::quiet_NaN();
    double best_loss = std::numeric_limits<double>::infinity();
    for (double h : candidates) {
        const KernelSpec spec{family, h};
        double loss = 0.0;
        std::size_t count = 0;
        try {
            for (std::size_t f = 0; f < folds; ++f) {
                const auto train = data.subset(train_rows[f]);
                std::vector<std::uint8_t> mask(train.size());
                std::vector<double> response(train.size());
                for (std::size_t i : test_rows[f]) {
                    const auto x = data.x(i);
                    if (target == CvTarget::treatment) {
                        for (std::size_t j = 0; j < train.size(); ++j) response[j] = train.a(j);
                        const double err = nw_regress(spec, x, train.covariates(), response) - data.a(i);
                        loss += err * err;
                        ++count;
                        continue;
                    }
                    for (std::size_t j = 0; j < train.size(); ++j) mask[j] = train.a(j) == data.a(i);
                    const auto w = smoother_weights(spec, x, train.covariates(), mask);
                    for (double t : thresholds) {
                        for (std::size_t j = 0; j < train.size(); ++j) response[j] = train.y(j) <= t ? 1.0 : 0.0;
                        const double err = w.dot(response) - (data.y(i) <= t ? 1.0 : 0.0);
                        loss += err * err;
                        ++count;
                    }
                }
            }
        } catch (const DegenerateMass&) {
            continue;
        }
        loss /= static_cast<double>(count);
        if (loss < best_loss || (loss == best_loss && h < best_h)) {
            best_loss = loss;
            best_h = h;
        }
    }
    if (!std::isfinite(best_loss)) throw NumericalError("no bandwidth candidate produced finite validation error");
    return best_h;
}

} // namespace cqc
