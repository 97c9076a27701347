#include "viewsize/hashing.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace viewsize {

namespace {

constexpr char kTableMagic[4] = {'V', 'S', 'H', 'T'};
constexpr std::uint32_t kTableVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated hash table file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("truncated hash table file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

int first_one_bit_position(std::uint64_t word, int width) {
    const std::uint64_t mask = width >= 64 ? ~0ULL : ((1ULL << width) - 1);
    const std::uint64_t bits = word & mask;
    if (bits == 0) return width;
    return std::countr_zero(bits);
}

DimensionHashTable::DimensionHashTable(std::uint32_t dim_index, int bits, std::uint64_t seed)
    : dim_index_(dim_index), bits_(bits),
      mask_(bits >= 64 ? ~0ULL : ((1ULL << bits) - 1)), rng_(seed) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
}

std::uint64_t DimensionHashTable::draw_word() { return rng_.next_u64() & mask_; }

bool DimensionHashTable::dense_index(std::string_view value, std::uint64_t& index) {
    if (value.empty() || value.size() > 7) return false;
    if (value.size() > 1 && value.front() == '0') return false;  // "07" != "7"
    std::uint64_t v = 0;
    for (char c : value) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (v >= kDenseLimit) return false;
    index = v;
    return true;
}

std::uint64_t DimensionHashTable::hash_value(std::string_view value) {
    std::uint64_t idx;
    if (dense_index(value, idx)) {
        if (idx >= dense_.size()) {
            std::size_t grown = std::max<std::size_t>(idx + 1, dense_.size() * 2);
            grown = std::min<std::size_t>(grown, kDenseLimit);
            dense_.resize(grown, 0);
            dense_set_.resize(grown, false);
        }
        if (!dense_set_[idx]) {
            dense_[idx] = draw_word();
            dense_set_[idx] = true;
            ++size_;
        }
        return dense_[idx];
    }
    auto it = map_.find(value);
    if (it != map_.end()) return it->second;
    const std::uint64_t word = draw_word();
    map_.emplace(std::string(value), word);
    ++size_;
    return word;
}

void DimensionHashTable::visit(
    const std::function<void(std::string_view, std::uint64_t)>& fn) const {
    for (std::size_t i = 0; i < dense_.size(); ++i) {
        if (dense_set_[i]) fn(std::to_string(i), dense_[i]);
    }
    for (const auto& [value, word] : map_) fn(value, word);
}

void DimensionHashTable::assign(std::string_view value, std::uint64_t word) {
    std::uint64_t idx;
    if (dense_index(value, idx)) {
        if (idx >= dense_.size()) {
            dense_.resize(idx + 1, 0);
            dense_set_.resize(idx + 1, false);
        }
        if (dense_set_[idx] && dense_[idx] != word) {
            throw std::runtime_error("conflicting word for value " + std::string(value));
        }
        if (!dense_set_[idx]) ++size_;
        dense_[idx] = word;
        dense_set_[idx] = true;
        return;
    }
    auto it = map_.find(value);
    if (it != map_.end()) {
        if (it->second != word) {
            throw std::runtime_error("conflicting word for value " + std::string(value));
        }
        return;
    }
    map_.emplace(std::string(value), word);
    ++size_;
}

DimensionHashTablePool::DimensionHashTablePool(int bits, std::uint64_t master_seed)
    : bits_(bits), master_seed_(master_seed) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
}

DimensionHashTable& DimensionHashTablePool::table_for(std::uint32_t dim_index) {
    auto it = tables_.find(dim_index);
    if (it == tables_.end()) {
        auto table = std::make_unique<DimensionHashTable>(
            dim_index, bits_, derive_seed(master_seed_, dim_index + 1));
        it = tables_.emplace(dim_index, std::move(table)).first;
    }
    return *it->second;
}

void DimensionHashTablePool::visit_tables(
    const std::function<void(const DimensionHashTable&)>& fn) const {
    for (const auto& [idx, table] : tables_) fn(*table);
}

TupleHasher::TupleHasher(DimensionHashTablePool& pool, const ViewQuery& query)
    : dims_(query.dims), bits_(pool.bits()) {
    if (dims_.empty()) throw std::invalid_argument("view query needs at least one dimension");
    tables_.reserve(dims_.size());
    for (std::size_t d : dims_) {
        tables_.push_back(&pool.table_for(static_cast<std::uint32_t>(d)));
    }
}

std::uint64_t TupleHasher::hash_row(const Row& row) {
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const std::size_t d = dims_[i];
        if (d >= row.size()) {
            throw std::out_of_range("row arity " + std::to_string(row.size()) +
                                    " below dimension index " + std::to_string(d));
        }
        h ^= tables_[i]->hash_value(row[d]);
    }
    return h;
}

std::uint64_t TupleHasher::hash_tuple(const Row& projected) {
    if (projected.size() != dims_.size()) {
        throw std::invalid_argument("tuple arity " + std::to_string(projected.size()) +
                                    " does not match query arity " +
                                    std::to_string(dims_.size()));
    }
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        h ^= tables_[i]->hash_value(projected[i]);
    }
    return h;
}

void save_hash_tables(const DimensionHashTablePool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open hash table file: " + path);
    out.write(kTableMagic, 4);
    put_u32(out, kTableVersion);
    put_u32(out, static_cast<std::uint32_t>(pool.bits()));
    pool.visit_tables([&](const DimensionHashTable& table) {
        table.visit([&](std::string_view value, std::uint64_t word) {
            put_u32(out, table.dim_index());
            put_u32(out, static_cast<std::uint32_t>(value.size()));
            out.write(value.data(), static_cast<std::streamsize>(value.size()));
            put_u64(out, word);
        });
    });
    if (!out) throw std::runtime_error("write failed: " + path);
}

void load_hash_tables(DimensionHashTablePool& pool, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open hash table file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != std::string_view(kTableMagic, 4)) {
        throw std::runtime_error("not a hash table file: " + path);
    }
    if (get_u32(in) != kTableVersion) throw std::runtime_error("unsupported hash table version");
    if (get_u32(in) != static_cast<std::uint32_t>(pool.bits())) {
        throw std::runtime_error("hash table bit width mismatch");
    }
    while (true) {
        in.peek();
        if (in.eof()) break;
        const std::uint32_t dim = get_u32(in);
        const std::uint32_t len = get_u32(in);
        std::string value(len, '\0');
        in.read(value.data(), len);
        if (!in) throw std::runtime_error("truncated hash table file");
        const std::uint64_t word = get_u64(in);
        pool.table_for(dim).assign(value, word);
    }
}

}  // namespace viewsize
