#pragma once

#include <cstdint>

#include "viewsize/ingest.hpp"
#include "viewsize/sketches.hpp"

namespace viewsize {

// Exact summary of a sample's projected tuples.
struct SampleSummary {
    std::uint64_t distinct = 0;         // F0 of the sample
    std::uint64_t sample_size = 0;      // N'
    std::uint64_t total_rows = 0;       // N of the full table
    std::uint64_t max_multiplicity = 0; // occurrences of the most frequent tuple

    void validate() const;
};

// Depth-k binary multiplicative cascade with bias p. `bias` is refit against
// the full table size before extrapolation, i.e. p = (m_max / N)^(1/k).
// `capped` marks fits that stopped at the depth ceiling without reaching the
// sample's distinct count (degenerate samples with next to no duplication).
struct MultifractalModel {
    int depth = 1;      // k
    double bias = 0.5;  // p
    bool capped = false;
};

// Expected number of occupied leaves after n draws from a depth-k cascade:
//   sum_{a=0}^{k} C(k,a) * (1 - (1 - p^(k-a) (1-p)^a)^n),
// evaluated in log space so the inner power survives n ~ 10^6 and beyond.
double expected_distinct(int k, double p, double n);

// Exact group-by over the sample; memory proportional to the sample's
// distinct count. Throws on an empty sample.
SampleSummary summarize_sample(RowStream& sample, const ViewQuery& query,
                               std::uint64_t total_rows);

MultifractalModel fit_multifractal(const SampleSummary& summary);

Estimate multifractal_estimate(const SampleSummary& summary);

}  // namespace viewsize
