#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace viewsize::bounds {

// Theoretical relative standard errors under fully independent hashing.
double pc_theoretical_stderr(double m);  // 0.78 / sqrt(M)
double ll_theoretical_stderr(double m);  // 1.3 / sqrt(M)

// Generalized Counting failure probability at relative precision epsilon:
// (4k / (e^(2/3) epsilon^2 M))^(k/2), clamped to [0, 1] for reporting.
// Requires 0 < epsilon < 1/2 and M >= 2k >= 4.
double gc_delta(double epsilon, double m, int k);

// Smallest hash width supporting a view of f0 tuples: ceil(1 + log2(f0 / (epsilon M))).
int gc_min_bits(double f0, double epsilon, double m);

// Gibbons-Tirthapura failure probability at a given alpha:
//   k^(k/2) / (e^(k/3) M^(k/2)) *
//   (alpha^(k/2) / (1-alpha)^k + 4^(k/2) / (alpha^(k/2) epsilon^k (2^(k/2)-1))).
// Requires M >= 8k and 4k/M <= alpha < 1.
double gt_delta(double epsilon, double m, int k, double alpha);

// Minimum of gt_delta over the admissible alpha range (golden-section search,
// relative tolerance 1e-6).
double gt_delta_opt(double epsilon, double m, int k);

// Inversions: the epsilon at which the bound equals `delta`.
double gc_epsilon_for_delta(double delta, double m, int k);
double gt_epsilon_for_delta(double delta, double m, int k);

struct BoundCurvePoint {
    std::string technique;  // "gc" or "gt"
    int k = 0;
    double m = 0.0;
    double epsilon = 0.0;
};

// Error-vs-memory curves at reliability 1 - delta (default 19 times out of
// 20) for each k; points violating a bound's M constraint are skipped.
std::vector<BoundCurvePoint> bound_curves(std::span<const double> budgets,
                                          std::span<const int> ks, double delta = 0.05);

// Tab-separated table: technique, k, M, epsilon_at_delta.
void write_bound_curves(std::ostream& out, std::span<const BoundCurvePoint> points);

}  // namespace viewsize::bounds
