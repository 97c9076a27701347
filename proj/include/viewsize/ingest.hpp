#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "viewsize/common.hpp"

namespace viewsize {

// Ordered subset of dimension indices of a group-by query.
struct ViewQuery {
    std::vector<std::size_t> dims;

    // Throws std::invalid_argument if empty, repeated, or out of range.
    void validate(std::size_t arity) const;
    std::string label() const;  // "0,2,5"
    static ViewQuery parse(const std::string& csv_dims);
};

enum class Distribution { kUniform, kZipf };

// Generator description for a synthetic desk-scale fact table.
struct SyntheticSpec {
    Distribution distribution = Distribution::kUniform;
    double zipf_exponent = 1.0;       // s > 0, zipf only
    std::uint64_t distinct_target = 0;  // intended distinct tuple count
    std::uint64_t rows = 0;
    std::uint32_t arity = 1;
    std::uint64_t seed = 0;

    void validate() const;
    std::string label() const;
    // Accepts the CLI form, e.g. "uniform:f0=1000,n=10000,d=2,seed=1"
    // or "zipf:s=1.2,f0=100000,n=1000000,d=1,seed=7".
    static SyntheticSpec parse(const std::string& text);
};

// A fact table is either a delimited text file or a synthetic generator.
struct FactTable {
    std::string path;                       // file source when non-empty
    char delimiter = ',';
    bool has_header = false;
    bool strict = false;                    // bad rows abort instead of skip
    std::optional<SyntheticSpec> synthetic; // generator source when set
    std::vector<std::string> dimension_names;
    std::uint64_t declared_rows = 0;        // N when known up front, else 0

    std::string id() const;

    static FactTable from_file(std::string path, char delimiter = ',',
                               bool has_header = false, bool strict = false);
    static FactTable from_synthetic(const SyntheticSpec& spec);
};

// Single-pass row source. next() returns nullptr once exhausted; the
// returned pointer stays valid until the following next() call.
class RowStream {
public:
    virtual ~RowStream() = default;
    virtual const Row* next() = 0;
    virtual std::size_t arity() const = 0;
    // Rows dropped because of a field-count mismatch (file sources only).
    virtual std::uint64_t skipped_rows() const { return 0; }
};

// In-memory stream, mainly for tests and small pipelines.
class MemoryRowStream : public RowStream {
public:
    explicit MemoryRowStream(std::vector<Row> rows);
    const Row* next() override;
    std::size_t arity() const override { return arity_; }

private:
    std::vector<Row> rows_;
    std::size_t pos_ = 0;
    std::size_t arity_ = 0;
};

std::unique_ptr<RowStream> open_stream(const FactTable& table);

// Sub-tuple of `row` in query order.
Row project(const Row& row, const ViewQuery& query);

// Canonical key for a projected tuple: length-prefixed field concatenation,
// so ("a","b,c") and ("a,b","c") encode differently.
std::string encode_projection(const Row& row, const ViewQuery& query);
void encode_projection_into(const Row& row, const ViewQuery& query, std::string& out);

// Keeps each row independently with probability `ratio`; deterministic for a
// given seed. kept() is the realized sample size N'; seen() the total row
// count N of the underlying stream (complete once the stream is exhausted).
class BernoulliSampleStream : public RowStream {
public:
    BernoulliSampleStream(std::unique_ptr<RowStream> inner, double ratio, std::uint64_t seed);
    const Row* next() override;
    std::size_t arity() const override { return inner_->arity(); }
    std::uint64_t skipped_rows() const override { return inner_->skipped_rows(); }
    std::uint64_t kept() const { return kept_; }
    std::uint64_t seen() const { return seen_; }

private:
    std::unique_ptr<RowStream> inner_;
    Rng rng_;
    double ratio_;
    std::uint64_t kept_ = 0;
    std::uint64_t seen_ = 0;
};

std::unique_ptr<BernoulliSampleStream> bernoulli_sample(std::unique_ptr<RowStream> stream,
                                                        double ratio, std::uint64_t seed);

// Wraps the spec as a streamable table (validates it first).
FactTable generate_synthetic(const SyntheticSpec& spec);

// Materializes a synthetic table as a delimited file with a header line.
void write_table_csv(const FactTable& table, const std::string& out_path);

}  // namespace viewsize
