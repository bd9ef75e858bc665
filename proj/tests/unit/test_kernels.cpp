#include "cqc/error.hpp"
#include "cqc/kernels.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

using namespace cqc;

namespace {

Points line(std::vector<double> xs)
{
    return Points(1, std::move(xs));
}

std::vector<double> at(double v)
{
    return {v};
}

} // namespace

TEST_CASE("kernel evaluation")
{
    CHECK(kernel_eval(KernelSpec::box(1.0), at(0.0), at(0.5)) == 1.0);
    CHECK(kernel_eval(KernelSpec::box(1.0), at(0.0), at(2.0)) == 0.0);
    CHECK(kernel_eval(KernelSpec::gaussian(1.0), at(0.0), at(0.0)) == 1.0);
    CHECK(kernel_eval(KernelSpec::box(1.0), at(0.0), at(1.0)) == 1.0); // closed ball
    CHECK(kernel_eval(KernelSpec::gaussian(1.0), at(0.0), at(1.0)) == doctest::Approx(std::exp(-0.5)));
    CHECK_THROWS_AS(kernel_eval(KernelSpec::box(1.0), at(0.0), std::vector<double>{0.0, 0.0}), UsageError);
}

TEST_CASE("kernel names and bandwidth validation")
{
    CHECK(parse_kernel_family("box") == KernelFamily::box);
    CHECK(to_string(KernelFamily::gaussian) == "gaussian");
    CHECK_THROWS_AS(parse_kernel_family("epanechnikov"), UsageError);
    CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), UsageError);
    CHECK_THROWS_AS(KernelSpec::box(-1.0).validate(), UsageError);
}

TEST_CASE("nadaraya-watson weights")
{
    const auto w = nw_weights(KernelSpec::box(1.0), at(0.0), line({-0.5, 0.1, 2.0}));
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
    CHECK(w[2] == 0.0);
    CHECK(!w.degenerate());
    CHECK(w.support_size() == 2);
    CHECK(w.dot(std::vector<double>{2.0, 4.0, 100.0}) == 3.0);

    for (auto spec : {KernelSpec::box(0.3), KernelSpec::gaussian(0.3)}) {
        const auto lone = nw_weights(spec, at(0.7), line({0.7}));
        CHECK(lone[0] == 1.0);
    }

    const auto empty = nw_weights(KernelSpec::box(0.1), at(0.0), line({5.0, 6.0}));
    CHECK(empty.degenerate());
    CHECK(empty.l1_norm() == 0.0);
}

TEST_CASE("gaussian weights survive far queries")
{
    // Every raw kernel value underflows here; normalised weights must not.
    const auto w = nw_weights(KernelSpec::gaussian(0.01), at(100.0), line({0.0, 1.0, 2.0}));
    CHECK(!w.degenerate());
    CHECK(w[2] == doctest::Approx(1.0));
    CHECK(w.l1_norm() == doctest::Approx(1.0));
}

TEST_CASE("masked weights ignore masked rows")
{
    const std::vector<std::uint8_t> mask{1, 0, 1};
    const auto w = nw_weights(KernelSpec::box(1.0), at(0.0), line({0.0, 0.0, 5.0}), mask);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 0.0);
    CHECK_THROWS_AS(nw_weights(KernelSpec::box(1.0), at(0.0), line({0.0}), mask), UsageError);
}

TEST_CASE("weights form a convex combination")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(200);
    for (auto& v : xs) v = u(rng);
    const auto train = line(xs);
    for (auto spec : {KernelSpec::box(0.1), KernelSpec::gaussian(0.05)}) {
        for (int q = 0; q < 20; ++q) {
            const auto w = nw_weights(spec, at(u(rng)), train);
            double sum = 0.0;
            for (double v : w.values()) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(w.linf_norm() <= w.l2_norm());
            const std::vector<double> constant(train.size(), 3.25);
            CHECK(w.dot(constant) == doctest::Approx(3.25).epsilon(1e-12));
        }
    }
}

TEST_CASE("degenerate mass policy")
{
    const auto train = line({0.0, 0.05, 0.1, 0.15, 0.2, 0.25});
    const std::vector<double> targets{1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(nw_regress(KernelSpec::box(0.1), at(5.0), train, targets, {}, MassPolicy::strict), DegenerateMass);
    // Widening from 0.1 reaches 0.1 * 2^6 = 6.4 > 5, which covers every point.
    CHECK(nw_regress(KernelSpec::box(0.1), at(5.0), train, targets, {}, MassPolicy::widen) == doctest::Approx(3.5));
    CHECK_THROWS_AS(nw_regress(KernelSpec::box(0.1), at(1e6), train, targets, {}, MassPolicy::widen), DegenerateMass);
    try {
        smoother_weights(KernelSpec::box(0.1), at(5.0), train, {}, MassPolicy::strict);
    } catch (const DegenerateMass& e) {
        CHECK(e.query() == std::vector<double>{5.0});
        CHECK(e.bandwidth() == 0.1);
    }
}

TEST_CASE("regression stays inside the weighted targets and box weights commute with permutations")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(50), ys(50);
    for (auto& v : xs) v = u(rng);
    for (auto& v : ys) v = 10.0 * u(rng) - 5.0;
    const auto train = line(xs);
    const auto spec = KernelSpec::box(0.2);
    for (int q = 0; q < 20; ++q) {
        const auto x = at(u(rng));
        const auto w = smoother_weights(spec, x, train);
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] > 0.0) {
                lo = std::min(lo, ys[i]);
                hi = std::max(hi, ys[i]);
            }
        }
        const double v = nw_regress(spec, x, train, ys);
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);

        std::vector<std::size_t> perm(xs.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto permuted = nw_weights(spec, x, train.subset(perm));
        for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == w[perm[i]]);
    }
}
