#include "cqc/baselines.hpp"
#include "cqc/error.hpp"
#include "cqc/simlab.hpp"

#include <doctest.h>

#include <memory>
#include <vector>

using namespace cqc;

namespace {

const std::vector<double> kX{0.0};

Dataset arms(std::vector<double> control, std::vector<double> treated)
{
    Dataset d(1);
    for (double y : control) d.add(y, kX, 0);
    for (double y : treated) d.add(y, kX, 1);
    return d;
}

} // namespace

TEST_CASE("separate plug-in inverts the treated step cdf")
{
    const auto d = arms({0.0, 10.0}, {1, 2, 3, 4});
    const SeparatePlugin plugin(d, KernelSpec::box(1.0));
    CHECK(plugin.estimate(5.0, kX).g_hat == 2.0);
    CHECK(plugin.estimate(-1.0, kX).g_hat == 1.0);
    CHECK(plugin.estimate(20.0, kX).g_hat == 4.0);
    CHECK(separate_plugin_cqc(d, KernelSpec::box(1.0), 5.0, kX) == 2.0);

    const auto same = arms({1, 2, 3, 4}, {1, 2, 3, 4});
    const SeparatePlugin equal(same, KernelSpec::box(1.0));
    for (double y : {1.0, 2.0, 3.0, 4.0}) CHECK(equal.estimate(y, kX).g_hat == y);
    CHECK(equal.estimate(2.5, kX).g_hat == 2.0);
}

TEST_CASE("ipw and oracle pipelines run end to end")
{
    const auto spec = DgpSpec::make(DgpFamily::illustrative, 6.0);
    const auto data = sample_dgp(spec, 400, 3);
    const auto grid = build_grid(data, GridPolicy::treated());
    ContrastOptions o;
    o.nuisance_kernel = KernelSpec::gaussian(0.03);
    o.outer_kernel = KernelSpec::gaussian(0.8);
    const std::vector<double> x{0.5};
    const double g_ipw = ipw_cqc(data, make_split(data, 1), o, 0.0, x, grid);
    const double g_oracle = oracle_dr_cqc(data, std::make_shared<TruthOracle>(spec), o.outer_kernel, 0.0, x, grid);
    CHECK(std::find(grid.begin(), grid.end(), g_ipw) != grid.end());
    CHECK(std::find(grid.begin(), grid.end(), g_oracle) != grid.end());
}

TEST_CASE("run_estimator covers every kind")
{
    const auto spec = DgpSpec::make(DgpFamily::illustrative, 6.0);
    const auto data = sample_dgp(spec, 300, 4);
    Points xs(1);
    xs.push_back(std::vector<double>{0.2});
    xs.push_back(std::vector<double>{0.7});
    const std::vector<double> y0s{0.0, 1.0};
    auto truth = std::make_shared<TruthOracle>(spec);
    for (auto kind : {EstimatorKind::dr, EstimatorKind::ipw, EstimatorKind::separate, EstimatorKind::oracle}) {
        EstimatorConfig c;
        c.kind = kind;
        const auto a = run_estimator(c, data, y0s, xs, 9, truth);
        const auto b = run_estimator(c, data, y0s, xs, 9, truth);
        REQUIRE(a.size() == 2);
        CHECK(a[0].g_hat == b[0].g_hat);
        CHECK(a[1].g_hat == b[1].g_hat);
    }
    EstimatorConfig oracle;
    oracle.kind = EstimatorKind::oracle;
    CHECK_THROWS_AS(run_estimator(oracle, data, y0s, xs, 9), UsageError);

    EstimatorConfig named;
    CHECK(named.name() == "DR");
    named.label = "DR-wide";
    CHECK(named.name() == "DR-wide");
    CHECK(parse_estimator_kind("separate") == EstimatorKind::separate);
    CHECK(parse_estimator_kind("IPW") == EstimatorKind::ipw);
    CHECK_THROWS_AS(parse_estimator_kind("x-learner"), UsageError);
}
