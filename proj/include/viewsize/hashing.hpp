#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "viewsize/common.hpp"
#include "viewsize/ingest.hpp"

namespace viewsize {

// 0-based position of the least-significant set bit within the low `width`
// bits of `word`; returns `width` when those bits are all zero.
int first_one_bit_position(std::uint64_t word, int width);

// Per-dimension look-up table from attribute value to a random L-bit word.
// Words are drawn uniformly from [0, 2^L) on first sight of a value and
// never change afterwards. Small non-negative integer values (canonical
// decimal, no leading zeros) are kept in a dense array; everything else goes
// through a hash map. Both paths share one PRNG so the assignment depends
// only on first-sight order.
class DimensionHashTable {
public:
    DimensionHashTable(std::uint32_t dim_index, int bits, std::uint64_t seed);

    std::uint64_t hash_value(std::string_view value);

    std::size_t size() const { return size_; }
    std::uint32_t dim_index() const { return dim_index_; }
    int bits() const { return bits_; }

    // Visits every (value, word) pair; order unspecified. Used by persistence.
    void visit(const std::function<void(std::string_view, std::uint64_t)>& fn) const;

    // Pre-assigns a word (persistence load). Throws if the value already has
    // a different word.
    void assign(std::string_view value, std::uint64_t word);

private:
    static constexpr std::uint64_t kDenseLimit = 1ULL << 23;

    std::uint64_t draw_word();
    static bool dense_index(std::string_view value, std::uint64_t& index);

    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };

    std::uint32_t dim_index_;
    int bits_;
    std::uint64_t mask_;
    Rng rng_;
    std::vector<std::uint64_t> dense_;
    std::vector<bool> dense_set_;
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> map_;
    std::size_t size_ = 0;
};

// Owns one DimensionHashTable per fact-table dimension, created lazily.
// Tables are shared by every view that touches the same dimension, and each
// table gets its own sub-seed derived from the master seed.
class DimensionHashTablePool {
public:
    DimensionHashTablePool(int bits, std::uint64_t master_seed);

    DimensionHashTable& table_for(std::uint32_t dim_index);
    int bits() const { return bits_; }
    std::uint64_t master_seed() const { return master_seed_; }

    void visit_tables(const std::function<void(const DimensionHashTable&)>& fn) const;

private:
    int bits_;
    std::uint64_t master_seed_;
    std::map<std::uint32_t, std::unique_ptr<DimensionHashTable>> tables_;
};

// Hashes projected tuples to L-bit words by XOR-ing the per-dimension words:
// T_1(x_1) ^ T_2(x_2) ^ ... ^ T_d(x_d).
class TupleHasher {
public:
    TupleHasher(DimensionHashTablePool& pool, const ViewQuery& query);

    // Projects `row` onto the query dimensions and hashes the result.
    std::uint64_t hash_row(const Row& row);

    // Hashes an already-projected tuple (arity must match the query).
    std::uint64_t hash_tuple(const Row& projected);

    int bits() const { return bits_; }

private:
    std::vector<DimensionHashTable*> tables_;
    std::vector<std::size_t> dims_;
    int bits_;
};

// Binary persistence of the pool's tables: little-endian, length-prefixed
// (dim index, value, word) records, so repeated runs can reuse hashes.
void save_hash_tables(const DimensionHashTablePool& pool, const std::string& path);
void load_hash_tables(DimensionHashTablePool& pool, const std::string& path);

}  // namespace viewsize
