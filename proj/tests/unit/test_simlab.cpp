#include "cqc/baselines.hpp"
#include "cqc/error.hpp"
#include "cqc/io.hpp"
#include "cqc/simlab.hpp"

#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace cqc;

namespace {

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal(), p);
}

} // namespace

TEST_CASE("closed-form truths")
{
    const auto ill = truth(DgpSpec::make(DgpFamily::illustrative, 6.0));
    for (double x : {0.0, 0.31, 0.9}) CHECK(ill.g_star(0.7, std::vector<double>{x}) == doctest::Approx(1.4));
    const auto lin = truth(DgpSpec::make(DgpFamily::linear_cqc, 3.0));
    CHECK(lin.g_star(1.0, std::vector<double>{0.0}) == doctest::Approx(2.25));
    const auto uni = truth(DgpSpec::make(DgpFamily::uniform_h, 0.0));
    CHECK(uni.h_star(0.2, 1.0, std::vector<double>{0.4}) == doctest::Approx(0.3));
    CHECK(uni.g_star(0.3, std::vector<double>{0.4}) == doctest::Approx(0.6));
    const auto ten = truth(DgpSpec::make(DgpFamily::tendim, 1.0, 5));
    const std::vector<double> x10(10, 0.1);
    CHECK(ten.g_star(-0.4, x10) == -0.4);
}

TEST_CASE("illustrative conditional quantile effect")
{
    const double gamma = 3.0;
    const auto t = truth(DgpSpec::make(DgpFamily::illustrative, gamma));
    for (double x : {0.1, 0.4}) {
        const std::vector<double> xv{x};
        const double s = std::sin(gamma * std::numbers::pi * x);
        for (double alpha : {0.1, 0.5, 0.8}) {
            CHECK(t.cqte(alpha, xv) == doctest::Approx(normal_quantile(alpha) + s).epsilon(1e-9));
        }
    }
    const auto flat = truth(DgpSpec::make(DgpFamily::illustrative, 0.0));
    CHECK(std::abs(flat.cqte(0.5, std::vector<double>{0.3})) < 1e-9);
    CHECK(flat.cqte(0.25, std::vector<double>{0.3}) == doctest::Approx(-flat.cqte(0.75, std::vector<double>{0.3})));
}

TEST_CASE("truth identities on grids")
{
    for (auto family : {DgpFamily::illustrative, DgpFamily::linear_cqc, DgpFamily::uniform_h}) {
        const auto t = truth(DgpSpec::make(family, 4.0));
        for (int i = 0; i < 20; ++i) {
            const std::vector<double> x{i / 19.0};
            CHECK(t.propensity(x) >= 0.1 - 1e-12);
            CHECK(t.propensity(x) <= 0.9 + 1e-12);
            for (double y : {-1.0, 0.2, 0.5, 1.1}) {
                const double g = t.g_star(y, x);
                CHECK(std::abs(t.ccdf(1, g, x) - t.ccdf(0, y, x)) <= 1e-9);
                CHECK(std::abs(t.h_star(y, g, x)) <= 1e-9);
            }
            CHECK(t.quantile(0, 0.3, x) == doctest::Approx(t.quantile(0, 0.3, x)));
            CHECK(t.ccdf(0, t.quantile(0, 0.3, x), x) == doctest::Approx(0.3).epsilon(1e-9));
        }
    }
}

TEST_CASE("dgp specs validate")
{
    CHECK_THROWS_AS(DgpSpec::make(DgpFamily::illustrative, -1.0), UsageError);
    auto bad = DgpSpec::make(DgpFamily::tendim, 1.0);
    bad.beta.pop_back();
    CHECK_THROWS_AS(bad.validate(), UsageError);
    auto ten = DgpSpec::make(DgpFamily::tendim, 1.0, 3);
    CHECK(ten.dim == 10);
    CHECK(ten.beta == DgpSpec::make(DgpFamily::tendim, 1.0, 3).beta);
    CHECK(ten.beta != DgpSpec::make(DgpFamily::tendim, 1.0, 4).beta);
    CHECK(parse_dgp_family("uniform_h") == DgpFamily::uniform_h);
    CHECK_THROWS_AS(parse_dgp_family("colon"), UsageError);
    CHECK_THROWS_AS(sample_dgp(DgpSpec::make(DgpFamily::illustrative, 0.0), 3, 1), UsageError);
}

TEST_CASE("simulated samples have the right marginals")
{
    const auto ill = sample_dgp(DgpSpec::make(DgpFamily::illustrative, 0.0), 20000, 42);
    double sum = 0.0;
    std::size_t n0 = 0;
    for (std::size_t i = 0; i < ill.size(); ++i) {
        if (ill.a(i) == 0) {
            sum += ill.y(i);
            ++n0;
        }
    }
    CHECK(std::abs(sum / static_cast<double>(n0)) < 4.0 / std::sqrt(static_cast<double>(n0)));

    const auto uni = sample_dgp(DgpSpec::make(DgpFamily::uniform_h, 0.0), 2000, 42);
    for (std::size_t i = 0; i < uni.size(); ++i) {
        if (uni.a(i) == 0) REQUIRE((uni.y(i) >= 0.0 && uni.y(i) <= 1.0));
    }

    const auto spec = DgpSpec::make(DgpFamily::illustrative, 6.0);
    const auto t = truth(spec);
    const auto data = sample_dgp(spec, 20000, 7);
    double treated = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        treated += data.a(i);
        expected += t.propensity(data.x(i));
    }
    // Bernoulli sd at n = 20000 is at most 0.0036.
    CHECK(std::abs(treated - expected) / 20000.0 < 0.015);

    CHECK(io::dataset_csv(sample_dgp(spec, 50, 3)) == io::dataset_csv(sample_dgp(spec, 50, 3)));
    CHECK(io::dataset_csv(sample_dgp(spec, 50, 3)) != io::dataset_csv(sample_dgp(spec, 50, 4)));
}

TEST_CASE("summaries use the normal confidence interval")
{
    const auto s = summarise("x", {1.0, 2.0, 3.0, std::nan("")});
    CHECK(s.mean_abs_error == 2.0);
    CHECK(s.sd == doctest::Approx(1.0));
    CHECK(s.ci_half_width == doctest::Approx(1.96 / std::sqrt(3.0)));
    CHECK(s.replications == 3);
    CHECK(s.failures == 1);
}

namespace {

ExperimentConfig small_experiment()
{
    ExperimentConfig c;
    c.dgp = DgpSpec::make(DgpFamily::illustrative, 6.0);
    for (auto kind : {EstimatorKind::dr, EstimatorKind::ipw, EstimatorKind::separate, EstimatorKind::oracle}) {
        EstimatorConfig e;
        e.kind = kind;
        e.contrast.nuisance_kernel = KernelSpec::gaussian(0.03);
        e.contrast.outer_kernel = KernelSpec::gaussian(0.8);
        c.estimators.push_back(e);
    }
    c.n_total = 300;
    c.replications = 4;
    c.holdout = 50;
    c.seed = 99;
    return c;
}

} // namespace

TEST_CASE("experiments are deterministic and thread-count independent")
{
    auto c = small_experiment();
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    CHECK(io::error_report_json(a) == io::error_report_json(b));
    c.threads = 3;
    const auto threaded = run_experiment(c);
    CHECK(io::error_report_csv(threaded) == io::error_report_csv(a));
    CHECK(a.estimators.size() == 4);
    CHECK(a.find("Oracle").replications == 4);
    CHECK_THROWS_AS(a.find("Kallus"), UsageError);

    c.replications = 1;
    CHECK_THROWS_AS(run_experiment(c), UsageError);
}

TEST_CASE("duplicate estimators give identical columns")
{
    auto c = small_experiment();
    c.estimators.resize(1);
    c.estimators.push_back(c.estimators[0]);
    c.estimators[1].label = "DR-copy";
    const auto r = run_experiment(c);
    CHECK(r.estimators[0].per_replication == r.estimators[1].per_replication);
}

TEST_CASE("oracle error falls with sample size on the identity family")
{
    ExperimentConfig c;
    c.dgp = DgpSpec::make(DgpFamily::tendim, 1.0, 2);
    EstimatorConfig e;
    e.kind = EstimatorKind::oracle;
    e.contrast.outer_kernel = KernelSpec::gaussian(3.0);
    c.estimators = {e};
    c.replications = 6;
    c.holdout = 100;
    c.n_total = 200;
    const double small = run_experiment(c).estimators[0].mean_abs_error;
    c.n_total = 1000;
    const double large = run_experiment(c).estimators[0].mean_abs_error;
    CHECK(large < small);
}

TEST_CASE("bandwidth cross-validation")
{
    const auto data = sample_dgp(DgpSpec::make(DgpFamily::illustrative, 6.0), 1000, 5);
    // Propensity varies on a 1/6 scale: a huge bandwidth flattens it, a tiny one is noise.
    const std::vector<double> candidates{0.002, 0.03, 5.0};
    CHECK(cv_bandwidth(data, KernelFamily::gaussian, candidates, 5, 1) == 0.03);
    const std::vector<double> dup{0.03, 0.03};
    CHECK(cv_bandwidth(data, KernelFamily::gaussian, dup, 5, 1) == 0.03);
    CHECK(cv_bandwidth(data, KernelFamily::gaussian, candidates, 5, 1, CvTarget::outcome_indicators) > 0.0);

    const std::vector<double> one{0.1};
    CHECK_THROWS_AS(cv_bandwidth(data, KernelFamily::gaussian, one, 5, 1), UsageError);
    CHECK_THROWS_AS(cv_bandwidth(data, KernelFamily::gaussian, candidates, 1, 1), UsageError);
    const auto tiny = sample_dgp(DgpSpec::make(DgpFamily::illustrative, 6.0), 6, 5);
    CHECK_THROWS_AS(cv_bandwidth(tiny, KernelFamily::gaussian, candidates, 7, 1), UsageError);
}
