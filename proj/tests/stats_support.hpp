#pragma once

// Shared statistical helpers for the test suites: a regularized incomplete
// gamma implementation backing the chi-square survival function, plus a
// chi-square goodness-of-fit runner.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace teststats {

// Regularized lower incomplete gamma P(a, x) via series expansion.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) via continued fraction.
inline double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

// Survival function of the chi-square distribution with `dof` degrees of
// freedom: P(X >= statistic).
inline double chi_square_survival(double statistic, double dof) {
    return gamma_q(dof / 2.0, statistic / 2.0);
}

// Pearson statistic for observed counts against expected counts.
inline double chi_square_statistic(std::span<const double> observed,
                                   std::span<const double> expected) {
    if (observed.size() != expected.size()) throw std::invalid_argument("bin count mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

// p-value of a goodness-of-fit test with dof = bins - 1.
inline double chi_square_p_value(std::span<const double> observed,
                                 std::span<const double> expected) {
    return chi_square_survival(chi_square_statistic(observed, expected),
                               static_cast<double>(observed.size() - 1));
}

}  // namespace teststats
