#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "viewsize/hashing.hpp"
#include "viewsize/ingest.hpp"

namespace viewsize {

struct Estimate {
    double value = 0.0;
    bool exact = false;  // the sketch certifies the value is the true count
};

enum class Technique { kPc, kLl, kAc, kGc, kGt };

const char* technique_name(Technique t);
Technique technique_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Probabilistic Counting: M x L bit matrix. An update hashes to row
// alpha = y mod M and sets the bit at the first-one position of y / M.
// Estimate: (M / 0.77351) * 2^(A/M) with A the summed first-zero positions.
// ---------------------------------------------------------------------------
class BitMatrixSketch {
public:
    static constexpr double kPhi = 0.77351;

    BitMatrixSketch(std::uint64_t m, int bits);

    void update(std::uint64_t y);
    Estimate estimate() const;

    std::uint64_t memory_budget() const { return m_; }
    int bits() const { return bits_; }
    std::uint64_t bit_count() const { return m_ * static_cast<std::uint64_t>(bits_); }

    // Row as an L-bit word (bit i = column i).
    std::uint64_t row_bits(std::uint64_t alpha) const;
    int first_zero_column(std::uint64_t alpha) const;

    bool operator==(const BitMatrixSketch& other) const = default;

private:
    friend BitMatrixSketch merge(const BitMatrixSketch&, const BitMatrixSketch&);
    friend void write_sketch(const BitMatrixSketch&, std::ostream&, std::uint64_t);
    friend BitMatrixSketch read_bit_matrix_sketch(std::istream&, std::uint64_t*);

    std::uint64_t m_ = 0;  // rows, power of two
    int bits_ = 0;         // L
    int index_bits_ = 0;   // log2(M)
    std::vector<std::uint64_t> words_;  // packed M*L bits
};

// ---------------------------------------------------------------------------
// LogLog / Adaptive Counting: M buckets keeping the maximum first-one
// position (1-based) of the hash bits past the bucket index.
// ---------------------------------------------------------------------------
class BucketMaxSketch {
public:
    BucketMaxSketch(std::uint64_t m, int bits);

    void update(std::uint64_t y);

    // alpha_M * M * 2^(mean counter), alpha_M = 0.39701 - (2*pi^2 + ln^2 2)/(48M).
    Estimate loglog_estimate() const;

    // Linear counting -M*ln(beta/M) while at least 5.1% of the buckets are
    // still empty, LogLog otherwise.
    Estimate adaptive_estimate() const;

    std::uint64_t memory_budget() const { return m_; }
    int bits() const { return bits_; }
    std::uint64_t empty_buckets() const;  // beta
    std::uint8_t counter(std::uint64_t j) const { return counters_[j]; }

    static double alpha_m(double m);

    bool operator==(const BucketMaxSketch& other) const = default;

private:
    friend BucketMaxSketch merge(const BucketMaxSketch&, const BucketMaxSketch&);
    friend void write_sketch(const BucketMaxSketch&, std::ostream&, std::uint64_t);
    friend BucketMaxSketch read_bucket_max_sketch(std::istream&, std::uint64_t*);

    std::uint64_t m_ = 0;
    int bits_ = 0;
    int index_bits_ = 0;
    std::vector<std::uint8_t> counters_;
};

// ---------------------------------------------------------------------------
// Generalized Counting (KMV): keeps the M smallest hash values together with
// their tuples, ordered by (hash, tuple key) so ties are deterministic and
// the final state does not depend on arrival order. While nothing has ever
// been discarded the stored tuples are the complete distinct set and the
// count is exact; afterwards the estimate is 2^L * M / max(stored hash).
// ---------------------------------------------------------------------------
class KmvSketch {
public:
    using Entry = std::pair<std::uint64_t, std::string>;

    KmvSketch(std::uint64_t m, int bits);

    // `key_fn` materializes the canonical tuple key; it is only invoked when
    // the tuple actually has to be compared or stored.
    template <typename KeyFn>
    void update(std::uint64_t y, KeyFn&& key_fn) {
        if (store_.size() < m_) {
            store_.emplace(y, key_fn());
            return;
        }
        const Entry& max_entry = *store_.rbegin();
        if (y > max_entry.first) {
            discarded_ = true;  // a tuple outside the stored set exists
            return;
        }
        Entry candidate(y, key_fn());
        if (!(candidate < max_entry)) {
            if (store_.find(candidate) == store_.end()) discarded_ = true;
            return;
        }
        auto [it, inserted] = store_.insert(std::move(candidate));
        (void)it;
        if (inserted && store_.size() > m_) {
            store_.erase(std::prev(store_.end()));
            discarded_ = true;
        }
    }

    void update_encoded(std::uint64_t y, const std::string& key);

    Estimate estimate() const;

    std::uint64_t memory_budget() const { return m_; }
    int bits() const { return bits_; }
    std::size_t size() const { return store_.size(); }
    bool saw_discard() const { return discarded_; }
    const std::set<Entry>& store() const { return store_; }

    bool operator==(const KmvSketch& other) const = default;

private:
    friend KmvSketch merge(const KmvSketch&, const KmvSketch&);
    friend void write_sketch(const KmvSketch&, std::ostream&, std::uint64_t);
    friend KmvSketch read_kmv_sketch(std::istream&, std::uint64_t*);

    std::uint64_t m_ = 0;
    int bits_ = 0;
    std::set<Entry> store_;
    bool discarded_ = false;
};

// ---------------------------------------------------------------------------
// Gibbons-Tirthapura: samples tuples whose hash has at least t trailing zero
// bits (level j = first-one position, 0-based). When the buffer exceeds M
// the level threshold t rises and lower levels are pruned. Estimate:
// 2^t * stored count, exact while t == 0.
// ---------------------------------------------------------------------------
class LevelSamplingSketch {
public:
    LevelSamplingSketch(std::uint64_t m, int bits);

    template <typename KeyFn>
    void update(std::uint64_t y, KeyFn&& key_fn) {
        const int j = first_one_bit_position(y, bits_);
        if (j < level_) return;
        store_[key_fn()] = j;
        while (store_.size() > m_) {
            ++level_;
            prune_below(level_);
        }
    }

    void update_encoded(std::uint64_t y, const std::string& key);

    Estimate estimate() const;

    std::uint64_t memory_budget() const { return m_; }
    int bits() const { return bits_; }
    int level() const { return level_; }
    std::size_t size() const { return store_.size(); }
    const std::unordered_map<std::string, int>& store() const { return store_; }

    bool operator==(const LevelSamplingSketch& other) const;

private:
    friend LevelSamplingSketch merge(const LevelSamplingSketch&, const LevelSamplingSketch&);
    friend void write_sketch(const LevelSamplingSketch&, std::ostream&, std::uint64_t);
    friend LevelSamplingSketch read_level_sampling_sketch(std::istream&, std::uint64_t*);

    void prune_below(int level);

    std::uint64_t m_ = 0;
    int bits_ = 0;
    int level_ = 0;  // t
    std::unordered_map<std::string, int> store_;
};

// Merged state equals the state of a single pass over the concatenation of
// both inputs' streams. Inputs must share M, L and the hashing tables.
BitMatrixSketch merge(const BitMatrixSketch& a, const BitMatrixSketch& b);
BucketMaxSketch merge(const BucketMaxSketch& a, const BucketMaxSketch& b);
KmvSketch merge(const KmvSketch& a, const KmvSketch& b);
LevelSamplingSketch merge(const LevelSamplingSketch& a, const LevelSamplingSketch& b);

// Versioned little-endian sketch state serialization. `seed_label` records
// the hashing seed the sketch was built with; load rejects other versions.
void write_sketch(const BitMatrixSketch&, std::ostream&, std::uint64_t seed_label = 0);
void write_sketch(const BucketMaxSketch&, std::ostream&, std::uint64_t seed_label = 0);
void write_sketch(const KmvSketch&, std::ostream&, std::uint64_t seed_label = 0);
void write_sketch(const LevelSamplingSketch&, std::ostream&, std::uint64_t seed_label = 0);

BitMatrixSketch read_bit_matrix_sketch(std::istream&, std::uint64_t* seed_label = nullptr);
BucketMaxSketch read_bucket_max_sketch(std::istream&, std::uint64_t* seed_label = nullptr);
KmvSketch read_kmv_sketch(std::istream&, std::uint64_t* seed_label = nullptr);
LevelSamplingSketch read_level_sampling_sketch(std::istream&, std::uint64_t* seed_label = nullptr);

struct PhaseTimes {
    double load_ms = 0.0;
    double hash_ms = 0.0;
    double count_ms = 0.0;
};

// One streaming pass: project, hash, update, estimate.
Estimate estimate_view_size(RowStream& stream, const ViewQuery& query, Technique technique,
                            std::uint64_t memory_budget, int bits, std::uint64_t seed,
                            PhaseTimes* times = nullptr);

}  // namespace viewsize
