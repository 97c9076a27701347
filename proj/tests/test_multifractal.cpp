#include <cmath>

#include "doctest.h"
#include "viewsize/common.hpp"
#include "viewsize/multifractal.hpp"

using namespace viewsize;

namespace {

// Straight-line transcription of the occupancy sum with direct pow calls;
// only valid where nothing underflows (small k and n).
double naive_expected_distinct(int k, double p, double n) {
    double sum = 0.0;
    for (int a = 0; a <= k; ++a) {
        double binom = 1.0;
        for (int i = 0; i < a; ++i) binom = binom * (k - i) / (i + 1);
        const double leaf = std::pow(p, k - a) * std::pow(1.0 - p, a);
        sum += binom * (1.0 - std::pow(1.0 - leaf, n));
    }
    return sum;
}

}  // namespace

TEST_CASE("summarize_sample computes F0, N' and the max multiplicity") {
    std::vector<Row> rows{{"a"}, {"a"}, {"b"}};
    MemoryRowStream stream{rows};
    const SampleSummary s = summarize_sample(stream, ViewQuery{{0}}, 100);
    CHECK(s.distinct == 2);
    CHECK(s.sample_size == 3);
    CHECK(s.max_multiplicity == 2);
    CHECK(s.total_rows == 100);
}

TEST_CASE("summarize_sample on an all-identical sample") {
    std::vector<Row> rows(50, Row{"only"});
    MemoryRowStream stream{rows};
    const SampleSummary s = summarize_sample(stream, ViewQuery{{0}}, 50);
    CHECK(s.distinct == 1);
    CHECK(s.max_multiplicity == 50);
}

TEST_CASE("summarize_sample rejects an empty sample") {
    MemoryRowStream stream{{}};
    CHECK_THROWS_AS(summarize_sample(stream, ViewQuery{{0}}, 10), std::invalid_argument);
}

TEST_CASE("uniform sample multiplicities track N'/F0") {
    // 40 keys, 25 copies each; the histogram's max should hover near 25.
    std::vector<Row> rows;
    for (int c = 0; c < 25; ++c) {
        for (int key = 0; key < 40; ++key) rows.push_back({std::to_string(key)});
    }
    MemoryRowStream stream{rows};
    const SampleSummary s = summarize_sample(stream, ViewQuery{{0}}, rows.size());
    CHECK(s.distinct == 40);
    CHECK(s.max_multiplicity == 25);
}

TEST_CASE("expected_distinct hand examples") {
    // k=1, p=0.5, n=1: (1-0.5) + (1-0.5) = 1.
    CHECK(expected_distinct(1, 0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    // Both leaves occupied in the n -> infinity limit.
    CHECK(expected_distinct(1, 0.5, 1e9) == doctest::Approx(2.0).epsilon(1e-9));
    // No draws, no occupied leaves.
    CHECK(expected_distinct(3, 0.3, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("expected_distinct stays within [0, 2^k]") {
    for (int k : {1, 4, 10, 30, 64}) {
        for (double p : {0.01, 0.4, 0.99}) {
            for (double n : {1.0, 1e3, 1e9}) {
                const double v = expected_distinct(k, p, n);
                CHECK(v >= 0.0);
                CHECK(v <= std::ldexp(1.0, k) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("expected_distinct is monotone nondecreasing in n") {
    for (double p : {0.2, 0.5, 0.8}) {
        double prev = 0.0;
        for (double n : {0.0, 1.0, 5.0, 50.0, 500.0, 5e4, 5e6}) {
            const double v = expected_distinct(12, p, n);
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("log-space evaluation agrees with the naive sum to 10 digits") {
    for (int k : {1, 2, 5, 10}) {
        for (double p : {0.1, 0.37, 0.5, 0.9}) {
            for (double n : {1.0, 7.0, 40.0, 100.0}) {
                const double stable = expected_distinct(k, p, n);
                const double naive = naive_expected_distinct(k, p, n);
                CHECK(stable == doctest::Approx(naive).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("expected_distinct validates its arguments") {
    CHECK_THROWS_AS(expected_distinct(0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(expected_distinct(2, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(expected_distinct(2, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(expected_distinct(2, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("fit reaches the sample distinct count on natural exits") {
    // Strong duplication: the loop stops once the model covers F0_sample.
    SampleSummary s;
    s.distinct = 250;
    s.sample_size = 12500;
    s.total_rows = 250000;
    s.max_multiplicity = 71;
    const MultifractalModel m = fit_multifractal(s);
    CHECK_FALSE(m.capped);
    const double p_sample = std::pow(
        static_cast<double>(s.max_multiplicity) / static_cast<double>(s.sample_size),
        1.0 / m.depth);
    CHECK(expected_distinct(m.depth, p_sample, static_cast<double>(s.sample_size)) >=
          static_cast<double>(s.distinct));
    // The returned bias is refit against the full table size.
    CHECK(m.bias == doctest::Approx(std::pow(
                        static_cast<double>(s.max_multiplicity) /
                            static_cast<double>(s.total_rows),
                        1.0 / m.depth)));
}

TEST_CASE("degenerate all-distinct sample: capped fit reproduces F0_sample") {
    for (std::uint64_t n : {50ULL, 200ULL, 1000ULL}) {
        SampleSummary s{n, n, n, 1};
        const MultifractalModel m = fit_multifractal(s);
        CHECK(m.capped);
        CHECK(m.depth == 64);
        const double est = multifractal_estimate(s).value;
        CHECK(est >= static_cast<double>(n) - 1.0);
        CHECK(est <= static_cast<double>(n));
    }
}

TEST_CASE("single-tuple view estimates one") {
    SampleSummary s{1, 50, 5000, 50};
    CHECK(multifractal_estimate(s).value == doctest::Approx(1.0));
}

TEST_CASE("heavy-multiplicity uniform views estimate within a few percent") {
    // Keys repeat ~1000 times, so the sample max multiplicity is a stable
    // statistic; accuracy is best when F0 sits near a power of two.
    SyntheticSpec spec;
    spec.distinct_target = 250;
    spec.rows = 250000;
    spec.seed = 3;
    FactTable table = FactTable::from_synthetic(spec);
    double sum_sq = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        auto sample = bernoulli_sample(open_stream(table), 0.05, 500 + s);
        SampleSummary summary = summarize_sample(*sample, ViewQuery{{0}}, 0);
        summary.total_rows = sample->seen();
        const double est = multifractal_estimate(summary).value;
        sum_sq += std::pow((est - 250.0) / 250.0, 2);
    }
    CHECK(std::sqrt(sum_sq / seeds) < 0.10);
}

TEST_CASE("skewed data gives a finite estimate with no accuracy promise") {
    SyntheticSpec spec;
    spec.distribution = Distribution::kZipf;
    spec.zipf_exponent = 1.2;
    spec.distinct_target = 20000;
    spec.rows = 200000;
    spec.seed = 4;
    FactTable table = FactTable::from_synthetic(spec);
    auto sample = bernoulli_sample(open_stream(table), 0.02, 9);
    SampleSummary summary = summarize_sample(*sample, ViewQuery{{0}}, 0);
    summary.total_rows = sample->seen();
    const double est = multifractal_estimate(summary).value;
    CHECK(est > 0.0);
    CHECK(std::isfinite(est));
}

TEST_CASE("sample summary validation") {
    SampleSummary empty{0, 0, 0, 0};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    SampleSummary bad_distinct{10, 5, 100, 2};
    CHECK_THROWS_AS(bad_distinct.validate(), std::invalid_argument);
    SampleSummary bad_total{5, 10, 5, 2};
    CHECK_THROWS_AS(bad_total.validate(), std::invalid_argument);
    SampleSummary ok{5, 10, 100, 3};
    CHECK_NOTHROW(ok.validate());
}
