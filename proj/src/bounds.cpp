#include "viewsize/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace viewsize::bounds {

namespace {

// Bracketed term of the Gibbons-Tirthapura bound; unimodal in alpha.
double gt_bracket(double epsilon, int k, double alpha) {
    const double kd = static_cast<double>(k);
    const double term1 = std::pow(alpha, kd / 2.0) / std::pow(1.0 - alpha, kd);
    const double term2 = std::pow(4.0, kd / 2.0) /
                         (std::pow(alpha, kd / 2.0) * std::pow(epsilon, kd) *
                          (std::pow(2.0, kd / 2.0) - 1.0));
    return term1 + term2;
}

double gt_prefactor(double m, int k) {
    const double kd = static_cast<double>(k);
    return std::pow(kd, kd / 2.0) / (std::exp(kd / 3.0) * std::pow(m, kd / 2.0));
}

void check_gt_args(double epsilon, double m, int k) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (k < 2) throw std::invalid_argument("independence order must be at least 2");
    if (!(m >= 8.0 * k)) throw std::invalid_argument("memory budget must satisfy M >= 8k");
}

}  // namespace

double pc_theoretical_stderr(double m) {
    if (!(m >= 1.0)) throw std::invalid_argument("memory budget must be at least 1");
    return 0.78 / std::sqrt(m);
}

double ll_theoretical_stderr(double m) {
    if (!(m >= 1.0)) throw std::invalid_argument("memory budget must be at least 1");
    return 1.3 / std::sqrt(m);
}

double gc_delta(double epsilon, double m, int k) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw std::invalid_argument("epsilon must be in (0, 1/2)");
    }
    if (k < 2) throw std::invalid_argument("independence order must be at least 2");
    if (!(m >= 2.0 * k)) throw std::invalid_argument("memory budget must satisfy M >= 2k");
    const double kd = static_cast<double>(k);
    const double base = 4.0 * kd / (std::exp(2.0 / 3.0) * epsilon * epsilon * m);
    return std::clamp(std::pow(base, kd / 2.0), 0.0, 1.0);
}

int gc_min_bits(double f0, double epsilon, double m) {
    if (!(f0 > 0.0 && epsilon > 0.0 && m > 0.0)) {
        throw std::invalid_argument("arguments must be positive");
    }
    return static_cast<int>(std::ceil(1.0 + std::log2(f0 / (epsilon * m))));
}

double gt_delta(double epsilon, double m, int k, double alpha) {
    check_gt_args(epsilon, m, k);
    if (!(alpha >= 4.0 * k / m && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in [4k/M, 1)");
    }
    return gt_prefactor(m, k) * gt_bracket(epsilon, k, alpha);
}

double gt_delta_opt(double epsilon, double m, int k) {
    check_gt_args(epsilon, m, k);
    double lo = 4.0 * k / m;
    double hi = 1.0 - 1e-12;
    // Golden-section on the unimodal bracket term.
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = gt_bracket(epsilon, k, x1);
    double f2 = gt_bracket(epsilon, k, x2);
    while (hi - lo > 1e-6 * std::max(1e-9, lo)) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = gt_bracket(epsilon, k, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = gt_bracket(epsilon, k, x2);
        }
        if (hi - lo < 1e-15) break;
    }
    return gt_prefactor(m, k) * std::min(f1, f2);
}

double gc_epsilon_for_delta(double delta, double m, int k) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    if (k < 2) throw std::invalid_argument("independence order must be at least 2");
    if (!(m >= 2.0 * k)) throw std::invalid_argument("memory budget must satisfy M >= 2k");
    const double kd = static_cast<double>(k);
    return std::sqrt(4.0 * kd / (std::exp(2.0 / 3.0) * m * std::pow(delta, 2.0 / kd)));
}

double gt_epsilon_for_delta(double delta, double m, int k) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    check_gt_args(1.0, m, k);
    double lo = 1e-9;
    double hi = 1e6;
    if (gt_delta_opt(hi, m, k) > delta) return hi;  // bound unreachable
    // The optimized bound decreases in epsilon; bisect.
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (gt_delta_opt(mid, m, k) > delta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

std::vector<BoundCurvePoint> bound_curves(std::span<const double> budgets,
                                          std::span<const int> ks, double delta) {
    std::vector<BoundCurvePoint> points;
    for (int k : ks) {
        for (double m : budgets) {
            if (m >= 2.0 * k) {
                points.push_back({"gc", k, m, gc_epsilon_for_delta(delta, m, k)});
            }
        }
        for (double m : budgets) {
            if (m >= 8.0 * k) {
                points.push_back({"gt", k, m, gt_epsilon_for_delta(delta, m, k)});
            }
        }
    }
    return points;
}

void write_bound_curves(std::ostream& out, std::span<const BoundCurvePoint> points) {
    out << "technique\tk\tM\tepsilon_at_delta_0.05\n";
    for (const auto& p : points) {
        out << p.technique << '\t' << p.k << '\t' << p.m << '\t' << p.epsilon << '\n';
    }
}

}  // namespace viewsize::bounds
