#include "cqc/error.hpp"
#include "cqc/isotonic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace cqc;

namespace {

double sse(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// Best monotone fit among all partitions into contiguous blocks of means.
std::vector<double> brute_force(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    std::vector<double> best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (unsigned cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 == n || (cuts >> i) & 1u) {
                double m = 0.0;
                for (std::size_t k = start; k <= i; ++k) m += v[k];
                m /= static_cast<double>(i + 1 - start);
                for (std::size_t k = start; k <= i; ++k) fit[k] = m;
                start = i + 1;
            }
        }
        if (!is_nondecreasing(fit)) continue;
        const double s = sse(fit, v);
        if (s < best_sse) {
            best_sse = s;
            best = fit;
        }
    }
    return best;
}

} // namespace

TEST_CASE("pava examples")
{
    CHECK(pava_project(std::vector<double>{1, 2, 3}).projected == std::vector<double>{1, 2, 3});
    CHECK(pava_project(std::vector<double>{3, 1}).projected == std::vector<double>{2, 2});
    CHECK(pava_project(std::vector<double>{1, 3, 2, 4}).projected == std::vector<double>{1, 2.5, 2.5, 4});
    CHECK(pava_project(std::vector<double>{5}).input_length == 1);
    CHECK_THROWS_AS(pava_project(std::vector<double>{}), UsageError);
}

TEST_CASE("pava matches block enumeration on short integer sequences")
{
    for (std::size_t n = 1; n <= 5; ++n) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= 5;
        for (std::size_t code = 0; code < total; ++code) {
            std::vector<double> v(n);
            std::size_t c = code;
            for (auto& e : v) {
                e = static_cast<double>(c % 5) - 2.0;
                c /= 5;
            }
            const auto got = pava_project(v).projected;
            const auto want = brute_force(v);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("pava invariants on random input")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + trial % 40);
        for (auto& e : v) e = z(rng);
        const auto p = pava_project(v).projected;
        CHECK(is_nondecreasing(p));
        double sv = 0.0, sp = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            sv += v[i];
            sp += p[i];
        }
        CHECK(std::abs(sv - sp) <= 1e-12 * (1.0 + std::abs(sv)));
        CHECK(pava_project(p).projected == p);
    }
}

TEST_CASE("nondecreasing check honours the tolerance")
{
    const std::vector<double> v{0.0, 1.0, 1.0 - 1e-12};
    CHECK(!is_nondecreasing(v));
    CHECK(is_nondecreasing(v, 1e-9));
}
