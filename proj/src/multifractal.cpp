#include "viewsize/multifractal.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace viewsize {

namespace {

constexpr int kDepthCap = 64;

int ceil_log2(std::uint64_t v) {
    if (v <= 1) return 0;
    return std::bit_width(v - 1);
}

}  // namespace

void SampleSummary::validate() const {
    if (sample_size == 0) throw std::invalid_argument("sample summary: empty sample");
    if (distinct == 0 || distinct > sample_size) {
        throw std::invalid_argument("sample summary: distinct count out of range");
    }
    if (max_multiplicity == 0 || max_multiplicity > sample_size) {
        throw std::invalid_argument("sample summary: max multiplicity out of range");
    }
    if (total_rows < sample_size) {
        throw std::invalid_argument("sample summary: total rows below sample size");
    }
}

double expected_distinct(int k, double p, double n) {
    if (k < 1) throw std::invalid_argument("cascade depth must be at least 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("cascade bias must be in (0, 1)");
    if (n < 0.0) throw std::invalid_argument("draw count must be nonnegative");
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    double log_binom = 0.0;  // ln C(k, a), updated multiplicatively
    double sum = 0.0;
    for (int a = 0; a <= k; ++a) {
        if (a > 0) {
            log_binom += std::log(static_cast<double>(k - a + 1)) -
                         std::log(static_cast<double>(a));
        }
        // Leaf probability for the C(k,a) leaves with `a` low-bias turns.
        const double log_leaf = static_cast<double>(k - a) * log_p +
                                static_cast<double>(a) * log_q;
        const double leaf = std::exp(log_leaf);
        // 1 - (1 - leaf)^n, kept accurate for both tiny and near-one leaves.
        const double occupied = -std::expm1(n * std::log1p(-leaf));
        sum += std::exp(log_binom) * occupied;
    }
    return sum;
}

SampleSummary summarize_sample(RowStream& sample, const ViewQuery& query,
                               std::uint64_t total_rows) {
    std::unordered_map<std::string, std::uint64_t> histogram;
    std::string key;
    std::uint64_t rows = 0;
    while (const Row* row = sample.next()) {
        encode_projection_into(*row, query, key);
        ++histogram[key];
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("cannot summarize an empty sample");
    std::uint64_t max_mult = 0;
    for (const auto& [tuple, count] : histogram) max_mult = std::max(max_mult, count);
    SampleSummary summary;
    summary.distinct = histogram.size();
    summary.sample_size = rows;
    summary.total_rows = std::max(total_rows, rows);
    summary.max_multiplicity = max_mult;
    return summary;
}

MultifractalModel fit_multifractal(const SampleSummary& summary) {
    summary.validate();
    const double f0 = static_cast<double>(summary.distinct);
    const double m_max = static_cast<double>(summary.max_multiplicity);
    const double sample_size = static_cast<double>(summary.sample_size);
    const double total = static_cast<double>(summary.total_rows);

    MultifractalModel model;
    if (summary.distinct == 1) {
        // Single-tuple view; the cascade degenerates, the answer is direct.
        model.depth = 1;
        model.bias = 0.5;
        return model;
    }

    int k = std::max(ceil_log2(summary.distinct), 1);
    double fitted = 0.0;
    for (;; ++k) {
        const double p = std::pow(m_max / sample_size, 1.0 / k);
        fitted = expected_distinct(k, p, sample_size);
        if (fitted >= f0 || k >= kDepthCap) break;
    }
    model.depth = k;
    // Samples with almost no duplication cannot reach F0 at any depth; the
    // ceiling fit is still the model's best extrapolation, so keep it.
    model.capped = fitted < f0;
    model.bias = std::pow(m_max / total, 1.0 / k);
    return model;
}

Estimate multifractal_estimate(const SampleSummary& summary) {
    summary.validate();
    if (summary.distinct == 1) return {1.0, false};
    const MultifractalModel model = fit_multifractal(summary);
    const double value = expected_distinct(model.depth, model.bias,
                                           static_cast<double>(summary.total_rows));
    return {value, false};
}

}  // namespace viewsize
