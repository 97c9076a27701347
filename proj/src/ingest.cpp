#include "viewsize/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace viewsize {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            fields.emplace_back(line, start);
            break;
        }
        fields.emplace_back(line, start, pos - start);
        start = pos + 1;
    }
    return fields;
}

// Smallest c with c^arity >= distinct, so tuples can be spelled as base-c digits.
std::uint64_t digit_radix(std::uint64_t distinct, std::uint32_t arity) {
    if (arity == 1) return std::max<std::uint64_t>(distinct, 1);
    auto covers = [&](std::uint64_t base) {
        if (base == 0) return distinct <= 1;
        std::uint64_t total = 1;
        for (std::uint32_t i = 0; i < arity; ++i) {
            if (total >= distinct) return true;
            if (total > distinct / base) return true;  // total * base > distinct
            total *= base;
        }
        return total >= distinct;
    };
    std::uint64_t c = static_cast<std::uint64_t>(
        std::floor(std::pow(static_cast<double>(distinct), 1.0 / arity)));
    c = c > 1 ? c - 1 : 1;
    while (!covers(c)) ++c;
    return c;
}

void key_to_row(std::uint64_t key, std::uint64_t radix, std::uint32_t arity, Row& out) {
    out.resize(arity);
    for (std::uint32_t d = 0; d < arity; ++d) {
        out[d] = std::to_string(key % radix);
        key /= radix;
    }
}

class CsvRowStream : public RowStream {
public:
    CsvRowStream(const FactTable& table)
        : path_(table.path), delimiter_(table.delimiter), strict_(table.strict),
          in_(table.path) {
        if (!in_) throw std::runtime_error("cannot open file: " + table.path);
        if (table.has_header) {
            std::string header;
            if (std::getline(in_, header)) {
                ++line_number_;
                names_ = split_fields(header, delimiter_);
                arity_ = names_.size();
            }
        }
        // Without a header the arity comes from the first data row.
        if (arity_ == 0) {
            if (fetch_line()) {
                pending_ = split_fields(line_, delimiter_);
                arity_ = pending_->size();
            }
        }
    }

    const Row* next() override {
        if (pending_) {
            row_ = std::move(*pending_);
            pending_.reset();
            return &row_;
        }
        while (fetch_line()) {
            Row fields = split_fields(line_, delimiter_);
            if (fields.size() != arity_) {
                if (strict_) {
                    throw std::runtime_error(path_ + ":" + std::to_string(line_number_) +
                                             ": expected " + std::to_string(arity_) +
                                             " fields, got " + std::to_string(fields.size()));
                }
                ++skipped_;
                continue;
            }
            row_ = std::move(fields);
            return &row_;
        }
        return nullptr;
    }

    std::size_t arity() const override { return arity_; }
    std::uint64_t skipped_rows() const override { return skipped_; }

private:
    bool fetch_line() {
        while (std::getline(in_, line_)) {
            ++line_number_;
            if (!line_.empty() && line_.back() == '\r') line_.pop_back();
            if (line_.empty()) continue;
            return true;
        }
        return false;
    }

    std::string path_;
    char delimiter_;
    bool strict_;
    std::ifstream in_;
    std::string line_;
    std::uint64_t line_number_ = 0;
    std::uint64_t skipped_ = 0;
    std::size_t arity_ = 0;
    std::vector<std::string> names_;
    std::optional<Row> pending_;
    Row row_;
};

class UniformRowStream : public RowStream {
public:
    explicit UniformRowStream(const SyntheticSpec& spec)
        : spec_(spec), radix_(digit_radix(spec.distinct_target, spec.arity)) {}

    const Row* next() override {
        if (emitted_ >= spec_.rows) return nullptr;
        // Round-robin over the key space: every key appears, so the distinct
        // tuple count is exactly the target.
        key_to_row(emitted_ % spec_.distinct_target, radix_, spec_.arity, row_);
        ++emitted_;
        return &row_;
    }

    std::size_t arity() const override { return spec_.arity; }

private:
    SyntheticSpec spec_;
    std::uint64_t radix_;
    std::uint64_t emitted_ = 0;
    Row row_;
};

class ZipfRowStream : public RowStream {
public:
    explicit ZipfRowStream(const SyntheticSpec& spec)
        : spec_(spec), radix_(digit_radix(spec.distinct_target, spec.arity)),
          rng_(spec.seed) {
        cumulative_.reserve(spec.distinct_target);
        double total = 0.0;
        for (std::uint64_t rank = 1; rank <= spec.distinct_target; ++rank) {
            total += std::pow(static_cast<double>(rank), -spec.zipf_exponent);
            cumulative_.push_back(total);
        }
        for (double& c : cumulative_) c /= total;
    }

    const Row* next() override {
        if (emitted_ >= spec_.rows) return nullptr;
        const double u = rng_.next_unit();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::uint64_t key = static_cast<std::uint64_t>(it - cumulative_.begin());
        if (key >= spec_.distinct_target) key = spec_.distinct_target - 1;
        key_to_row(key, radix_, spec_.arity, row_);
        ++emitted_;
        return &row_;
    }

    std::size_t arity() const override { return spec_.arity; }

private:
    SyntheticSpec spec_;
    std::uint64_t radix_;
    Rng rng_;
    std::vector<double> cumulative_;
    std::uint64_t emitted_ = 0;
    Row row_;
};

}  // namespace

void ViewQuery::validate(std::size_t arity) const {
    if (dims.empty()) throw std::invalid_argument("view query needs at least one dimension");
    std::set<std::size_t> seen;
    for (std::size_t d : dims) {
        if (d >= arity) {
            throw std::invalid_argument("dimension index " + std::to_string(d) +
                                        " out of range for arity " + std::to_string(arity));
        }
        if (!seen.insert(d).second) {
            throw std::invalid_argument("dimension index " + std::to_string(d) + " repeated");
        }
    }
}

std::string ViewQuery::label() const {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(dims[i]);
    }
    return out;
}

ViewQuery ViewQuery::parse(const std::string& csv_dims) {
    ViewQuery q;
    std::stringstream ss(csv_dims);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        q.dims.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    if (q.dims.empty()) throw std::invalid_argument("empty dimension list: " + csv_dims);
    return q;
}

void SyntheticSpec::validate() const {
    if (rows == 0) throw std::invalid_argument("synthetic spec: rows must be positive");
    if (distinct_target == 0) throw std::invalid_argument("synthetic spec: distinct target must be positive");
    if (distinct_target > rows) {
        throw std::invalid_argument("synthetic spec: distinct target exceeds row count");
    }
    if (arity == 0) throw std::invalid_argument("synthetic spec: arity must be positive");
    if (distribution == Distribution::kZipf && !(zipf_exponent > 0.0)) {
        throw std::invalid_argument("synthetic spec: zipf exponent must be positive");
    }
}

std::string SyntheticSpec::label() const {
    std::ostringstream out;
    if (distribution == Distribution::kUniform) {
        out << "uniform:";
    } else {
        out << "zipf:s=" << zipf_exponent << ",";
    }
    out << "f0=" << distinct_target << ",n=" << rows << ",d=" << arity << ",seed=" << seed;
    return out.str();
}

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
    SyntheticSpec spec;
    std::size_t colon = text.find(':');
    std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
    if (kind == "uniform") {
        spec.distribution = Distribution::kUniform;
    } else if (kind == "zipf") {
        spec.distribution = Distribution::kZipf;
    } else {
        throw std::invalid_argument("unknown synthetic distribution: " + kind);
    }
    if (colon == std::string::npos) throw std::invalid_argument("synthetic spec needs parameters");
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad synthetic field: " + item);
        std::string key = item.substr(0, eq);
        std::string value = item.substr(eq + 1);
        if (key == "f0") spec.distinct_target = std::stoull(value);
        else if (key == "n") spec.rows = std::stoull(value);
        else if (key == "d") spec.arity = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "seed") spec.seed = std::stoull(value);
        else if (key == "s") spec.zipf_exponent = std::stod(value);
        else throw std::invalid_argument("unknown synthetic field: " + key);
    }
    spec.validate();
    return spec;
}

std::string FactTable::id() const {
    if (synthetic) return synthetic->label();
    return path;
}

FactTable FactTable::from_file(std::string path, char delimiter, bool has_header, bool strict) {
    FactTable t;
    t.path = std::move(path);
    t.delimiter = delimiter;
    t.has_header = has_header;
    t.strict = strict;
    return t;
}

FactTable FactTable::from_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    FactTable t;
    t.synthetic = spec;
    t.declared_rows = spec.rows;
    t.dimension_names.reserve(spec.arity);
    for (std::uint32_t d = 0; d < spec.arity; ++d) {
        t.dimension_names.push_back("d" + std::to_string(d));
    }
    return t;
}

MemoryRowStream::MemoryRowStream(std::vector<Row> rows) : rows_(std::move(rows)) {
    if (!rows_.empty()) arity_ = rows_.front().size();
}

const Row* MemoryRowStream::next() {
    if (pos_ >= rows_.size()) return nullptr;
    return &rows_[pos_++];
}

std::unique_ptr<RowStream> open_stream(const FactTable& table) {
    if (table.synthetic) {
        table.synthetic->validate();
        if (table.synthetic->distribution == Distribution::kUniform) {
            return std::make_unique<UniformRowStream>(*table.synthetic);
        }
        return std::make_unique<ZipfRowStream>(*table.synthetic);
    }
    return std::make_unique<CsvRowStream>(table);
}

Row project(const Row& row, const ViewQuery& query) {
    Row out;
    out.reserve(query.dims.size());
    for (std::size_t d : query.dims) {
        if (d >= row.size()) {
            throw std::out_of_range("projection index " + std::to_string(d) +
                                    " out of range for row of " + std::to_string(row.size()));
        }
        out.push_back(row[d]);
    }
    return out;
}

void encode_projection_into(const Row& row, const ViewQuery& query, std::string& out) {
    out.clear();
    for (std::size_t d : query.dims) {
        if (d >= row.size()) {
            throw std::out_of_range("projection index " + std::to_string(d) +
                                    " out of range for row of " + std::to_string(row.size()));
        }
        const std::string& field = row[d];
        out += std::to_string(field.size());
        out += ':';
        out += field;
    }
}

std::string encode_projection(const Row& row, const ViewQuery& query) {
    std::string out;
    encode_projection_into(row, query, out);
    return out;
}

BernoulliSampleStream::BernoulliSampleStream(std::unique_ptr<RowStream> inner, double ratio,
                                             std::uint64_t seed)
    : inner_(std::move(inner)), rng_(seed), ratio_(ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("sampling ratio must be in (0, 1)");
    }
}

const Row* BernoulliSampleStream::next() {
    while (const Row* row = inner_->next()) {
        ++seen_;
        if (rng_.next_unit() < ratio_) {
            ++kept_;
            return row;
        }
    }
    return nullptr;
}

std::unique_ptr<BernoulliSampleStream> bernoulli_sample(std::unique_ptr<RowStream> stream,
                                                        double ratio, std::uint64_t seed) {
    return std::make_unique<BernoulliSampleStream>(std::move(stream), ratio, seed);
}

FactTable generate_synthetic(const SyntheticSpec& spec) {
    return FactTable::from_synthetic(spec);
}

void write_table_csv(const FactTable& table, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    auto stream = open_stream(table);
    if (!table.dimension_names.empty()) {
        for (std::size_t i = 0; i < table.dimension_names.size(); ++i) {
            if (i) out << table.delimiter;
            out << table.dimension_names[i];
        }
        out << '\n';
    }
    while (const Row* row = stream->next()) {
        for (std::size_t i = 0; i < row->size(); ++i) {
            if (i) out << table.delimiter;
            out << (*row)[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + out_path);
}

}  // namespace viewsize
