#include "viewsize/exact_oracle.hpp"

#include <fstream>
#include <new>
#include <stdexcept>
#include <unordered_set>

namespace viewsize {

ExactResult exact_view_size(RowStream& stream, const ViewQuery& query, bool keep_histogram) {
    ExactResult result;
    result.has_histogram = keep_histogram;
    std::string key;
    try {
        if (keep_histogram) {
            while (const Row* row = stream.next()) {
                encode_projection_into(*row, query, key);
                ++result.histogram[key];
                ++result.rows;
            }
            result.distinct = result.histogram.size();
        } else {
            std::unordered_set<std::string> seen;
            while (const Row* row = stream.next()) {
                encode_projection_into(*row, query, key);
                seen.insert(key);
                ++result.rows;
            }
            result.distinct = seen.size();
        }
    } catch (const std::bad_alloc&) {
        throw std::runtime_error("exact view size: view does not fit in memory");
    }
    return result;
}

OracleCache::OracleCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // first use, nothing cached yet
    std::string key;
    std::uint64_t f0;
    while (in >> key >> f0) entries_[key] = f0;
}

std::string OracleCache::key_of(const std::string& dataset_id, const ViewQuery& query) {
    // Whitespace would break the two-token file format.
    std::string key = dataset_id + "|dims=" + query.label();
    for (char& c : key) {
        if (c == ' ' || c == '\t' || c == '\n') c = '_';
    }
    return key;
}

std::optional<std::uint64_t> OracleCache::lookup(const std::string& dataset_id,
                                                 const ViewQuery& query) const {
    auto it = entries_.find(key_of(dataset_id, query));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void OracleCache::store(const std::string& dataset_id, const ViewQuery& query,
                        std::uint64_t f0) {
    entries_[key_of(dataset_id, query)] = f0;
    persist();
}

std::uint64_t OracleCache::get_or_compute(const FactTable& table, const ViewQuery& query) {
    if (auto cached = lookup(table.id(), query)) return *cached;
    auto stream = open_stream(table);
    query.validate(stream->arity());
    const ExactResult result = exact_view_size(*stream, query);
    store(table.id(), query, result.distinct);
    return result.distinct;
}

void OracleCache::persist() const {
    if (path_.empty()) return;
    std::ofstream out(path_);
    if (!out) throw std::runtime_error("cannot write oracle cache: " + path_);
    for (const auto& [key, f0] : entries_) out << key << ' ' << f0 << '\n';
}

}  // namespace viewsize
