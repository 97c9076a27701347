#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>

#include "viewsize/ingest.hpp"

namespace viewsize {

// Brute-force ground truth for a view.
struct ExactResult {
    std::uint64_t distinct = 0;  // F0
    std::uint64_t rows = 0;      // rows consumed
    bool has_histogram = false;
    std::unordered_map<std::string, std::uint64_t> histogram;  // tuple key -> count
};

// Exact distinct count (and optionally the full histogram) of the projected
// stream. The view must fit in memory; exhaustion surfaces as a clean error.
ExactResult exact_view_size(RowStream& stream, const ViewQuery& query,
                            bool keep_histogram = false);

// Text-file cache of exact counts keyed by (dataset id, query), so repeated
// multi-seed sweeps compute each brute-force count once.
class OracleCache {
public:
    OracleCache() = default;
    explicit OracleCache(std::string path);  // loads the file if it exists

    std::optional<std::uint64_t> lookup(const std::string& dataset_id,
                                        const ViewQuery& query) const;
    void store(const std::string& dataset_id, const ViewQuery& query, std::uint64_t f0);

    // Cached value if present, otherwise one brute-force pass over the table.
    std::uint64_t get_or_compute(const FactTable& table, const ViewQuery& query);

    std::size_t size() const { return entries_.size(); }

private:
    static std::string key_of(const std::string& dataset_id, const ViewQuery& query);
    void persist() const;

    std::string path_;  // empty = in-memory only
    std::map<std::string, std::uint64_t> entries_;
};

}  // namespace viewsize
