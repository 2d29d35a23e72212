#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dml/common/error.hpp"
#include "dml/common/folds.hpp"
#include "dml/common/rng.hpp"
#include "dml/common/stats.hpp"
#include "dml/engine/solve.hpp"

using namespace dml;

namespace {

// Quantile by bisection on the erfc-based CDF.
double bisect_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("fold sizes follow the remainder rule") {
    const auto f = make_folds(10, 3, 1);
    CHECK(f.fold(0).size() == 4);
    CHECK(f.fold(1).size() == 3);
    CHECK(f.fold(2).size() == 3);
    const auto g = make_folds(10, 5, 1);
    for (int k = 0; k < 5; ++k) CHECK(g.fold(k).size() == 2);
}

TEST_CASE("folds are deterministic and reject bad K") {
    const auto a = make_folds(57, 4, 99);
    const auto b = make_folds(57, 4, 99);
    CHECK(a.labels() == b.labels());
    CHECK(make_folds(57, 4, 100).labels() != a.labels());
    CHECK_THROWS_AS(make_folds(5, 6, 0), ConfigError);
    CHECK_THROWS_AS(make_folds(5, 1, 0), ConfigError);
}

TEST_CASE("partition invariants over random triples") {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 300));
        const int k = 2 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 1)));
        const auto f = make_folds(n, k, rng());
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        std::size_t lo = static_cast<std::size_t>(n), hi = 0;
        for (int j = 0; j < k; ++j) {
            lo = std::min(lo, f.fold(j).size());
            hi = std::max(hi, f.fold(j).size());
            for (int i : f.fold(j)) ++seen[static_cast<std::size_t>(i)];
            CHECK(f.complement(j).size() + f.fold(j).size() == static_cast<std::size_t>(n));
        }
        REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        REQUIRE(hi - lo <= 1);
    }
}

TEST_CASE("normal quantile matches bisection") {
    for (double p : {1e-10, 1e-6, 0.001, 0.025, 0.16, 0.5, 0.84, 0.975, 0.999})
        CHECK(normal_quantile(p) == doctest::Approx(bisect_quantile(p)).epsilon(1e-9).scale(1.0));
    // 1 - 1e-9 carries a relative rounding error of 1e-7, amplified by 1/phi(6)
    CHECK(normal_quantile(1 - 1e-9) == doctest::Approx(-normal_quantile(1e-9)).epsilon(1e-6));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
    CHECK(normal_cdf(0.0) == 0.5);
}

TEST_CASE("confidence interval examples") {
    auto [lo, hi] = confidence_interval(0.0, 1.0, 100, 0.05);
    CHECK(lo == doctest::Approx(-0.19600).epsilon(1e-4));
    CHECK(hi == doctest::Approx(0.19600).epsilon(1e-4));
    std::tie(lo, hi) = confidence_interval(2.0, 4.0, 400, 0.32);
    const double half = bisect_quantile(0.84) * 0.1;
    CHECK(hi - 2.0 == doctest::Approx(half).epsilon(1e-9));
    CHECK(2.0 - lo == doctest::Approx(half).epsilon(1e-9));
    CHECK(half == doctest::Approx(0.0994).epsilon(1e-3));
    std::tie(lo, hi) = confidence_interval(3.0, 2.0, 10, 1.0);
    CHECK(lo == 3.0);
    CHECK(hi == 3.0);
}

TEST_CASE("lower median and moments") {
    CHECK(lower_median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(lower_median({4.0, 1.0, 3.0, 2.0}) == 2.0);
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(mean(v) == 2.5);
    CHECK(sample_sd(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("seed derivation and bounded draws") {
    CHECK(derive_seed(1, {2}) == derive_seed(1, {2}));
    CHECK(derive_seed(1, {2}) != derive_seed(1, {3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    Rng rng(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto u = uniform_index(rng, 7);
        REQUIRE(u < 7);
        ++counts[u];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    shuffle(perm, rng);
    CHECK(std::set<int>(perm.begin(), perm.end()).size() == 6);
}
