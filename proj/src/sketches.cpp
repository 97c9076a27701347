#include "viewsize/sketches.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace viewsize {

namespace {

constexpr char kSketchMagic[4] = {'V', 'S', 'K', 'S'};
constexpr std::uint32_t kSketchVersion = 1;

enum class SketchKind : std::uint8_t { kBitMatrix = 1, kBucketMax = 2, kKmv = 3, kLevel = 4 };

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

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

std::uint8_t get_u8(std::istream& in) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated sketch");
    return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated sketch");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("truncated sketch");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const std::uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("truncated sketch");
    return s;
}

void write_header(std::ostream& out, SketchKind kind, std::uint64_t m, int bits,
                  std::uint64_t seed_label) {
    out.write(kSketchMagic, 4);
    put_u32(out, kSketchVersion);
    put_u8(out, static_cast<std::uint8_t>(kind));
    put_u64(out, m);
    put_u32(out, static_cast<std::uint32_t>(bits));
    put_u64(out, seed_label);
}

struct SketchHeader {
    SketchKind kind;
    std::uint64_t m;
    int bits;
    std::uint64_t seed_label;
};

SketchHeader read_header(std::istream& in, SketchKind expected) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != std::string_view(kSketchMagic, 4)) {
        throw std::runtime_error("not a sketch stream");
    }
    if (get_u32(in) != kSketchVersion) throw std::runtime_error("unsupported sketch version");
    SketchHeader h;
    h.kind = static_cast<SketchKind>(get_u8(in));
    if (h.kind != expected) throw std::runtime_error("sketch kind mismatch");
    h.m = get_u64(in);
    h.bits = static_cast<int>(get_u32(in));
    h.seed_label = get_u64(in);
    return h;
}

void check_mergeable(std::uint64_t ma, int ba, std::uint64_t mb, int bb) {
    if (ma != mb || ba != bb) {
        throw std::invalid_argument("cannot merge sketches with different parameters");
    }
}

bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

const char* technique_name(Technique t) {
    switch (t) {
        case Technique::kPc: return "pc";
        case Technique::kLl: return "ll";
        case Technique::kAc: return "ac";
        case Technique::kGc: return "gc";
        case Technique::kGt: return "gt";
    }
    return "?";
}

Technique technique_from_name(const std::string& name) {
    if (name == "pc") return Technique::kPc;
    if (name == "ll") return Technique::kLl;
    if (name == "ac") return Technique::kAc;
    if (name == "gc") return Technique::kGc;
    if (name == "gt") return Technique::kGt;
    throw std::invalid_argument("unknown technique: " + name);
}

// --------------------------------------------------------------------------
// BitMatrixSketch
// --------------------------------------------------------------------------

BitMatrixSketch::BitMatrixSketch(std::uint64_t m, int bits) : m_(m), bits_(bits) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
    if (!is_power_of_two(m) || m < 2) {
        throw std::invalid_argument("memory budget must be a power of two >= 2");
    }
    index_bits_ = std::countr_zero(m);
    if (index_bits_ >= bits) throw std::invalid_argument("memory budget too large for hash width");
    words_.assign((m_ * static_cast<std::uint64_t>(bits_) + 63) / 64, 0);
}

void BitMatrixSketch::update(std::uint64_t y) {
    const std::uint64_t alpha = y & (m_ - 1);
    const int column = first_one_bit_position(y >> index_bits_, bits_ - index_bits_);
    const std::uint64_t bit = alpha * static_cast<std::uint64_t>(bits_) +
                              static_cast<std::uint64_t>(column);
    words_[bit >> 6] |= 1ULL << (bit & 63);
}

std::uint64_t BitMatrixSketch::row_bits(std::uint64_t alpha) const {
    const std::uint64_t start = alpha * static_cast<std::uint64_t>(bits_);
    // Rows are L in {32, 64} bits wide, so they never straddle a word.
    const std::uint64_t word = words_[start >> 6] >> (start & 63);
    return bits_ >= 64 ? word : word & ((1ULL << bits_) - 1);
}

int BitMatrixSketch::first_zero_column(std::uint64_t alpha) const {
    const std::uint64_t mask = bits_ >= 64 ? ~0ULL : ((1ULL << bits_) - 1);
    const std::uint64_t zeros = ~row_bits(alpha) & mask;
    if (zeros == 0) return bits_;
    return std::countr_zero(zeros);
}

Estimate BitMatrixSketch::estimate() const {
    std::uint64_t a = 0;
    for (std::uint64_t alpha = 0; alpha < m_; ++alpha) {
        a += static_cast<std::uint64_t>(first_zero_column(alpha));
    }
    const double value = static_cast<double>(m_) / kPhi *
                         std::exp2(static_cast<double>(a) / static_cast<double>(m_));
    return {value, false};
}

BitMatrixSketch merge(const BitMatrixSketch& a, const BitMatrixSketch& b) {
    check_mergeable(a.m_, a.bits_, b.m_, b.bits_);
    BitMatrixSketch out = a;
    for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] |= b.words_[i];
    return out;
}

// --------------------------------------------------------------------------
// BucketMaxSketch
// --------------------------------------------------------------------------

BucketMaxSketch::BucketMaxSketch(std::uint64_t m, int bits) : m_(m), bits_(bits) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
    if (!is_power_of_two(m) || m < 2) {
        throw std::invalid_argument("memory budget must be a power of two >= 2");
    }
    index_bits_ = std::countr_zero(m);
    if (index_bits_ >= bits) throw std::invalid_argument("memory budget too large for hash width");
    counters_.assign(m_, 0);
}

void BucketMaxSketch::update(std::uint64_t y) {
    const std::uint64_t j = y & (m_ - 1);
    // 1-based first-one position of the remaining L-k bits; L-k+1 when zero.
    const int z = first_one_bit_position(y >> index_bits_, bits_ - index_bits_) + 1;
    if (z > counters_[j]) counters_[j] = static_cast<std::uint8_t>(z);
}

double BucketMaxSketch::alpha_m(double m) {
    const double pi = std::numbers::pi;
    const double ln2 = std::numbers::ln2;
    return 0.39701 - (2.0 * pi * pi + ln2 * ln2) / (48.0 * m);
}

Estimate BucketMaxSketch::loglog_estimate() const {
    std::uint64_t sum = 0;
    for (std::uint8_t c : counters_) sum += c;
    const double m = static_cast<double>(m_);
    const double value = alpha_m(m) * m * std::exp2(static_cast<double>(sum) / m);
    return {value, false};
}

std::uint64_t BucketMaxSketch::empty_buckets() const {
    std::uint64_t beta = 0;
    for (std::uint8_t c : counters_) beta += (c == 0);
    return beta;
}

Estimate BucketMaxSketch::adaptive_estimate() const {
    const std::uint64_t beta = empty_buckets();
    const double m = static_cast<double>(m_);
    // Linear counting while at least 5.1% of the buckets are unused; the
    // beta = 0 guard falls through to LogLog.
    if (beta > 0 && static_cast<double>(beta) / m >= 0.051) {
        return {-m * std::log(static_cast<double>(beta) / m), false};
    }
    return loglog_estimate();
}

BucketMaxSketch merge(const BucketMaxSketch& a, const BucketMaxSketch& b) {
    check_mergeable(a.m_, a.bits_, b.m_, b.bits_);
    BucketMaxSketch out = a;
    for (std::size_t i = 0; i < out.counters_.size(); ++i) {
        out.counters_[i] = std::max(out.counters_[i], b.counters_[i]);
    }
    return out;
}

// --------------------------------------------------------------------------
// KmvSketch
// --------------------------------------------------------------------------

KmvSketch::KmvSketch(std::uint64_t m, int bits) : m_(m), bits_(bits) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
    if (m == 0) throw std::invalid_argument("memory budget must be positive");
}

void KmvSketch::update_encoded(std::uint64_t y, const std::string& key) {
    update(y, [&]() { return key; });
}

Estimate KmvSketch::estimate() const {
    if (!discarded_) {
        // Nothing was ever dropped, so the store is the complete distinct set.
        return {static_cast<double>(store_.size()), true};
    }
    const std::uint64_t max_hash = std::max<std::uint64_t>(store_.rbegin()->first, 1);
    const double value = std::ldexp(static_cast<double>(store_.size()), bits_) /
                         static_cast<double>(max_hash);
    return {value, false};
}

KmvSketch merge(const KmvSketch& a, const KmvSketch& b) {
    check_mergeable(a.m_, a.bits_, b.m_, b.bits_);
    KmvSketch out = a;
    out.discarded_ = a.discarded_ || b.discarded_;
    for (const auto& entry : b.store_) out.store_.insert(entry);
    while (out.store_.size() > out.m_) {
        out.store_.erase(std::prev(out.store_.end()));
        out.discarded_ = true;
    }
    return out;
}

// --------------------------------------------------------------------------
// LevelSamplingSketch
// --------------------------------------------------------------------------

LevelSamplingSketch::LevelSamplingSketch(std::uint64_t m, int bits) : m_(m), bits_(bits) {
    if (bits != 32 && bits != 64) throw std::invalid_argument("hash width must be 32 or 64");
    if (m == 0) throw std::invalid_argument("memory budget must be positive");
}

void LevelSamplingSketch::update_encoded(std::uint64_t y, const std::string& key) {
    update(y, [&]() { return key; });
}

void LevelSamplingSketch::prune_below(int level) {
    for (auto it = store_.begin(); it != store_.end();) {
        if (it->second < level) {
            it = store_.erase(it);
        } else {
            ++it;
        }
    }
}

Estimate LevelSamplingSketch::estimate() const {
    const double value = std::ldexp(static_cast<double>(store_.size()), level_);
    return {value, level_ == 0};
}

bool LevelSamplingSketch::operator==(const LevelSamplingSketch& other) const {
    return m_ == other.m_ && bits_ == other.bits_ && level_ == other.level_ &&
           store_ == other.store_;
}

LevelSamplingSketch merge(const LevelSamplingSketch& a, const LevelSamplingSketch& b) {
    check_mergeable(a.m_, a.bits_, b.m_, b.bits_);
    LevelSamplingSketch out(a.m_, a.bits_);
    out.level_ = std::max(a.level_, b.level_);
    for (const auto& [key, level] : a.store_) {
        if (level >= out.level_) out.store_.emplace(key, level);
    }
    for (const auto& [key, level] : b.store_) {
        if (level >= out.level_) out.store_.emplace(key, level);
    }
    while (out.store_.size() > out.m_) {
        ++out.level_;
        out.prune_below(out.level_);
    }
    return out;
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

void write_sketch(const BitMatrixSketch& s, std::ostream& out, std::uint64_t seed_label) {
    write_header(out, SketchKind::kBitMatrix, s.m_, s.bits_, seed_label);
    put_u64(out, s.words_.size());
    for (std::uint64_t w : s.words_) put_u64(out, w);
}

BitMatrixSketch read_bit_matrix_sketch(std::istream& in, std::uint64_t* seed_label) {
    const SketchHeader h = read_header(in, SketchKind::kBitMatrix);
    if (seed_label) *seed_label = h.seed_label;
    BitMatrixSketch s(h.m, h.bits);
    const std::uint64_t n = get_u64(in);
    if (n != s.words_.size()) throw std::runtime_error("sketch state size mismatch");
    for (std::uint64_t i = 0; i < n; ++i) s.words_[i] = get_u64(in);
    return s;
}

void write_sketch(const BucketMaxSketch& s, std::ostream& out, std::uint64_t seed_label) {
    write_header(out, SketchKind::kBucketMax, s.m_, s.bits_, seed_label);
    put_u64(out, s.counters_.size());
    for (std::uint8_t c : s.counters_) put_u8(out, c);
}

BucketMaxSketch read_bucket_max_sketch(std::istream& in, std::uint64_t* seed_label) {
    const SketchHeader h = read_header(in, SketchKind::kBucketMax);
    if (seed_label) *seed_label = h.seed_label;
    BucketMaxSketch s(h.m, h.bits);
    const std::uint64_t n = get_u64(in);
    if (n != s.counters_.size()) throw std::runtime_error("sketch state size mismatch");
    for (std::uint64_t i = 0; i < n; ++i) s.counters_[i] = get_u8(in);
    return s;
}

void write_sketch(const KmvSketch& s, std::ostream& out, std::uint64_t seed_label) {
    write_header(out, SketchKind::kKmv, s.m_, s.bits_, seed_label);
    put_u8(out, s.discarded_ ? 1 : 0);
    put_u64(out, s.store_.size());
    for (const auto& [hash, key] : s.store_) {
        put_u64(out, hash);
        put_string(out, key);
    }
}

KmvSketch read_kmv_sketch(std::istream& in, std::uint64_t* seed_label) {
    const SketchHeader h = read_header(in, SketchKind::kKmv);
    if (seed_label) *seed_label = h.seed_label;
    KmvSketch s(h.m, h.bits);
    s.discarded_ = get_u8(in) != 0;
    const std::uint64_t n = get_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t hash = get_u64(in);
        s.store_.emplace(hash, get_string(in));
    }
    return s;
}

void write_sketch(const LevelSamplingSketch& s, std::ostream& out, std::uint64_t seed_label) {
    write_header(out, SketchKind::kLevel, s.m_, s.bits_, seed_label);
    put_u32(out, static_cast<std::uint32_t>(s.level_));
    put_u64(out, s.store_.size());
    for (const auto& [key, level] : s.store_) {
        put_string(out, key);
        put_u32(out, static_cast<std::uint32_t>(level));
    }
}

LevelSamplingSketch read_level_sampling_sketch(std::istream& in, std::uint64_t* seed_label) {
    const SketchHeader h = read_header(in, SketchKind::kLevel);
    if (seed_label) *seed_label = h.seed_label;
    LevelSamplingSketch s(h.m, h.bits);
    s.level_ = static_cast<int>(get_u32(in));
    const std::uint64_t n = get_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string key = get_string(in);
        s.store_.emplace(std::move(key), static_cast<int>(get_u32(in)));
    }
    return s;
}

// --------------------------------------------------------------------------
// Streaming driver
// --------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

template <typename UpdateFn>
void drive(RowStream& stream, TupleHasher& hasher, PhaseTimes* times, UpdateFn&& update) {
    if (times == nullptr) {
        while (const Row* row = stream.next()) {
            update(*row, hasher.hash_row(*row));
        }
        return;
    }
    while (true) {
        const auto t0 = Clock::now();
        const Row* row = stream.next();
        const auto t1 = Clock::now();
        times->load_ms += ms_between(t0, t1);
        if (!row) break;
        const std::uint64_t y = hasher.hash_row(*row);
        const auto t2 = Clock::now();
        times->hash_ms += ms_between(t1, t2);
        update(*row, y);
        times->count_ms += ms_between(t2, Clock::now());
    }
}

}  // namespace

Estimate estimate_view_size(RowStream& stream, const ViewQuery& query, Technique technique,
                            std::uint64_t memory_budget, int bits, std::uint64_t seed,
                            PhaseTimes* times) {
    query.validate(stream.arity());
    DimensionHashTablePool pool(bits, seed);
    TupleHasher hasher(pool, query);
    std::string key_buffer;
    auto key_fn = [&](const Row& row) {
        encode_projection_into(row, query, key_buffer);
        return key_buffer;
    };

    switch (technique) {
        case Technique::kPc: {
            BitMatrixSketch sketch(memory_budget, bits);
            drive(stream, hasher, times, [&](const Row&, std::uint64_t y) { sketch.update(y); });
            const auto t0 = Clock::now();
            Estimate e = sketch.estimate();
            if (times) times->count_ms += ms_between(t0, Clock::now());
            return e;
        }
        case Technique::kLl:
        case Technique::kAc: {
            BucketMaxSketch sketch(memory_budget, bits);
            drive(stream, hasher, times, [&](const Row&, std::uint64_t y) { sketch.update(y); });
            const auto t0 = Clock::now();
            Estimate e = technique == Technique::kLl ? sketch.loglog_estimate()
                                                     : sketch.adaptive_estimate();
            if (times) times->count_ms += ms_between(t0, Clock::now());
            return e;
        }
        case Technique::kGc: {
            KmvSketch sketch(memory_budget, bits);
            drive(stream, hasher, times, [&](const Row& row, std::uint64_t y) {
                sketch.update(y, [&]() { return key_fn(row); });
            });
            return sketch.estimate();
        }
        case Technique::kGt: {
            LevelSamplingSketch sketch(memory_budget, bits);
            drive(stream, hasher, times, [&](const Row& row, std::uint64_t y) {
                sketch.update(y, [&]() { return key_fn(row); });
            });
            return sketch.estimate();
        }
    }
    throw std::invalid_argument("unknown technique");
}

}  // namespace viewsize
