#include <cmath>
#include <vector>

#include "doctest.h"
#include "viewsize/bounds.hpp"
#include "viewsize/common.hpp"
#include "viewsize/exact_oracle.hpp"
#include "viewsize/sketches.hpp"

using namespace viewsize;

namespace {

double rse(const std::vector<double>& estimates, double truth) {
    double sum_sq = 0.0;
    for (double e : estimates) sum_sq += (e - truth) * (e - truth);
    return std::sqrt(sum_sq / estimates.size()) / truth;
}

}  // namespace

// Feeding raw uniform words stands in for hashed distinct tuples; the sketch
// cannot tell the difference and it keeps these Monte-Carlo loops cheap.
TEST_CASE("pc standard error tracks 0.78/sqrt(M) within a factor 1.5") {
    const std::uint64_t m = 256;
    const int distinct = 25600;  // F0/M = 100
    std::vector<double> estimates;
    for (int seed = 0; seed < 20; ++seed) {
        BitMatrixSketch s(m, 64);
        Rng rng(9000 + seed);
        for (int i = 0; i < distinct; ++i) s.update(rng.next_u64());
        estimates.push_back(s.estimate().value);
    }
    const double measured = rse(estimates, distinct);
    const double predicted = bounds::pc_theoretical_stderr(static_cast<double>(m));
    CHECK(measured > predicted / 1.5);
    CHECK(measured < predicted * 1.5);

    // Mean lands close to the truth as well.
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= estimates.size();
    CHECK(std::abs(mean - distinct) < 3.0 * predicted * distinct);
}

TEST_CASE("ll standard error tracks 1.3/sqrt(M) within a factor 1.5") {
    const std::uint64_t m = 256;
    const int distinct = 25600;
    std::vector<double> estimates;
    for (int seed = 0; seed < 20; ++seed) {
        BucketMaxSketch s(m, 64);
        Rng rng(7000 + seed);
        for (int i = 0; i < distinct; ++i) s.update(rng.next_u64());
        estimates.push_back(s.loglog_estimate().value);
    }
    const double measured = rse(estimates, distinct);
    const double predicted = bounds::ll_theoretical_stderr(static_cast<double>(m));
    CHECK(measured > predicted / 1.5);
    CHECK(measured < predicted * 1.5);
}

TEST_CASE("adaptive counting is near exact on small views") {
    // F0 well below M: the linear-counting branch is active and tight.
    const std::uint64_t m = 2048;
    const int distinct = 500;
    for (int seed = 0; seed < 5; ++seed) {
        BucketMaxSketch s(m, 64);
        Rng rng(100 + seed);
        for (int i = 0; i < distinct; ++i) s.update(rng.next_u64());
        const double value = s.adaptive_estimate().value;
        CHECK(std::abs(value - distinct) / distinct < 0.10);
    }
}

TEST_CASE("gt and gc agree with the oracle whenever their exactness holds") {
    Rng instance_rng(40404);
    for (int trial = 0; trial < 25; ++trial) {
        const std::uint64_t m = 64;
        const std::uint64_t f0 = 1 + instance_rng.next_below(m);
        const int copies = 1 + static_cast<int>(instance_rng.next_below(4));
        std::vector<Row> rows;
        for (std::uint64_t key = 0; key < f0; ++key) {
            for (int c = 0; c < copies; ++c) rows.push_back({std::to_string(key)});
        }
        // Deterministic shuffle.
        for (std::size_t i = rows.size(); i > 1; --i) {
            std::swap(rows[i - 1], rows[instance_rng.next_below(i)]);
        }
        ViewQuery q{{0}};
        MemoryRowStream oracle_stream{rows};
        const std::uint64_t exact = exact_view_size(oracle_stream, q).distinct;
        REQUIRE(exact == f0);

        MemoryRowStream gt_stream{rows};
        const Estimate gt = estimate_view_size(gt_stream, q, Technique::kGt, m, 64, trial);
        CHECK(gt.exact);
        CHECK(gt.value == static_cast<double>(exact));

        MemoryRowStream gc_stream{rows};
        const Estimate gc = estimate_view_size(gc_stream, q, Technique::kGc, m, 64, trial);
        CHECK(gc.exact);
        CHECK(gc.value == static_cast<double>(exact));
    }
}
