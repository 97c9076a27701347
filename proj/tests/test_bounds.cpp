#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "viewsize/bounds.hpp"

using namespace viewsize::bounds;

TEST_CASE("theoretical standard errors") {
    CHECK(pc_theoretical_stderr(1024) == doctest::Approx(0.78 / 32.0));
    CHECK(ll_theoretical_stderr(1024) == doctest::Approx(1.3 / 32.0));
    CHECK(pc_theoretical_stderr(1) == doctest::Approx(0.78));
    CHECK(ll_theoretical_stderr(1) == doctest::Approx(1.3));
    CHECK_THROWS_AS(pc_theoretical_stderr(0), std::invalid_argument);
}

TEST_CASE("gc_delta evaluates the reliability bound") {
    // 4*2 / (e^(2/3) * 0.01 * 10000) = 8 / (100 e^(2/3)) = 0.041073...
    CHECK(gc_delta(0.1, 1e4, 2) == doctest::Approx(0.0411).epsilon(2e-3));
    // Independent route: log-space evaluation of the same formula.
    const double log_delta = (2.0 / 2.0) * (std::log(4.0 * 2.0) - 2.0 / 3.0 -
                                            2.0 * std::log(0.1) - std::log(1e4));
    CHECK(gc_delta(0.1, 1e4, 2) == doctest::Approx(std::exp(log_delta)).epsilon(1e-12));
}

TEST_CASE("gc_delta enforces its preconditions and the report clamp") {
    CHECK_THROWS_AS(gc_delta(0.6, 1e4, 2), std::invalid_argument);  // epsilon >= 1/2
    CHECK_THROWS_AS(gc_delta(0.1, 3.0, 2), std::invalid_argument);  // M < 2k
    CHECK_THROWS_AS(gc_delta(0.1, 1e4, 1), std::invalid_argument);  // k < 2
    CHECK(gc_delta(0.01, 8.0, 4) == 1.0);  // raw value above one is clamped
}

TEST_CASE("gc_delta shrinks as memory grows") {
    double prev = 1.0;
    for (double m : {100.0, 1e3, 1e4, 1e5, 1e6}) {
        const double d = gc_delta(0.1, m, 2);
        CHECK(d <= prev);
        prev = d;
    }
}

TEST_CASE("gc_min_bits pins the hash width") {
    CHECK(gc_min_bits(1000.0, 0.1, 1e4) == 1);  // F0 = eps * M
    CHECK(gc_min_bits(2e21, 0.1, 1e4) <= 64);   // wide views fit in 64 bits
    // Doubling F0 costs exactly one extra bit.
    const double f0 = 3.7e9;
    CHECK(gc_min_bits(2.0 * f0, 0.05, 2048) == gc_min_bits(f0, 0.05, 2048) + 1);
}

TEST_CASE("gt_delta matches a direct evaluation and validates arguments") {
    const double k = 4, m = 1e4, alpha = 0.9, eps = 0.05;
    const double prefactor = std::pow(k, k / 2) / (std::exp(k / 3) * std::pow(m, k / 2));
    const double bracket = std::pow(alpha, k / 2) / std::pow(1 - alpha, k) +
                           std::pow(4.0, k / 2) /
                               (std::pow(alpha, k / 2) * std::pow(eps, k) *
                                (std::pow(2.0, k / 2) - 1.0));
    CHECK(gt_delta(eps, m, 4, alpha) == doctest::Approx(prefactor * bracket).epsilon(1e-12));
    CHECK_THROWS_AS(gt_delta(eps, 16.0, 4, 0.9), std::invalid_argument);   // M < 8k
    CHECK_THROWS_AS(gt_delta(eps, m, 4, 1.0), std::invalid_argument);      // alpha = 1
    CHECK_THROWS_AS(gt_delta(eps, m, 4, 1e-4), std::invalid_argument);     // alpha < 4k/M
}

TEST_CASE("gt_delta_opt lower-bounds every admissible alpha") {
    const double eps = 0.08, m = 20000;
    for (int k : {2, 4, 8}) {
        const double opt = gt_delta_opt(eps, m, k);
        for (double alpha : {0.01, 0.2, 0.5, 0.8, 0.95, 0.999}) {
            if (alpha < 4.0 * k / m) continue;
            CHECK(opt <= gt_delta(eps, m, k, alpha) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("gt_delta_opt decreases in memory on a grid") {
    for (int k : {2, 4}) {
        double prev = 1e300;
        for (double m : {256.0, 1024.0, 4096.0, 16384.0, 65536.0}) {
            const double d = gt_delta_opt(0.1, m, k);
            CHECK(d < prev);
            prev = d;
        }
    }
}

TEST_CASE("epsilon inversions satisfy the target reliability") {
    for (int k : {2, 4, 8}) {
        for (double m : {1024.0, 16384.0, 1e6}) {
            if (m < 8.0 * k) continue;
            const double eps_gt = gt_epsilon_for_delta(0.05, m, k);
            CHECK(std::abs(gt_delta_opt(eps_gt, m, k) - 0.05) < 1e-4);
            const double eps_gc = gc_epsilon_for_delta(0.05, m, k);
            // Closed-form inverse: check through the log-space route.
            const double log_delta = (k / 2.0) * (std::log(4.0 * k) - 2.0 / 3.0 -
                                                  2.0 * std::log(eps_gc) - std::log(m));
            CHECK(std::exp(log_delta) == doctest::Approx(0.05).epsilon(1e-9));
        }
    }
}

TEST_CASE("gt corollary: eps at 19-out-of-20 tracks 5/sqrt(M) for k = 4") {
    for (double m : {1e4, 1e5, 1e6}) {
        const double eps = gt_epsilon_for_delta(0.05, m, 4);
        const double approx = 5.0 / std::sqrt(m);
        CHECK(std::abs(eps - approx) / approx < 0.10);
    }
}

TEST_CASE("bound curves: shape, constraints, and the k = 2 ordering") {
    std::vector<double> budgets;
    for (int e = 4; e <= 20; ++e) budgets.push_back(std::ldexp(1.0, e));
    const std::vector<int> ks{2, 4, 8};
    const auto points = bound_curves(budgets, ks);

    // Every curve decreases in M.
    for (const char* tech : {"gc", "gt"}) {
        for (int k : ks) {
            double prev = 1e300;
            for (const auto& p : points) {
                if (p.technique != tech || p.k != k) continue;
                CHECK(p.epsilon < prev);
                prev = p.epsilon;
            }
        }
    }
    // Constraint rows are absent: gt needs M >= 8k.
    for (const auto& p : points) {
        if (p.technique == "gt") CHECK(p.m >= 8.0 * p.k);
        if (p.technique == "gc") CHECK(p.m >= 2.0 * p.k);
    }
    // With pairwise-independent hashing (k = 2) the gc bound is the tighter
    // one at every budget; at k >= 4 the optimized gt bound overtakes it.
    auto epsilon_at = [&](const char* tech, int k, double m) {
        for (const auto& p : points) {
            if (p.technique == tech && p.k == k && p.m == m) return p.epsilon;
        }
        REQUIRE(false);
        return 0.0;
    };
    for (double m : budgets) {
        if (m < 16) continue;
        CHECK(epsilon_at("gc", 2, m) < epsilon_at("gt", 2, m));
    }
    CHECK(epsilon_at("gt", 8, 16384.0) < epsilon_at("gc", 8, 16384.0));

    std::ostringstream out;
    write_bound_curves(out, points);
    CHECK(out.str().find("technique\tk\tM\tepsilon_at_delta_0.05") == 0);
}
