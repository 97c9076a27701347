#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viewsize/exact_oracle.hpp"
#include "viewsize/ingest.hpp"
#include "viewsize/sketches.hpp"

namespace viewsize {

enum class Method { kPc, kLl, kAc, kGc, kGt, kMultifractal, kExact };

const char* method_name(Method m);
Method method_from_name(const std::string& name);
bool method_is_sketch(Method m);

// One estimation outcome of the test protocol.
struct RunRecord {
    std::string dataset;
    std::string dims;        // "0,2"
    std::string technique;   // method_name
    std::uint64_t memory = 0;     // M; 0 for multifractal/exact
    int bits = 0;                 // L; 0 for multifractal/exact
    std::uint64_t seed = 0;
    double sample_ratio = 0.0;    // p; 0 for sketches/exact
    double estimate = 0.0;
    double exact_f0 = 0.0;
    std::optional<double> rel_error;  // |estimate - F0| / F0, absent when F0 = 0
    double load_ms = 0.0;
    double hash_ms = 0.0;
    double count_ms = 0.0;
    std::string status = "ok";  // "ok" or an error tag
};

// Error statistics of one (query, technique, M or ratio) group.
struct ErrorSummary {
    std::string dims;
    std::string technique;
    std::uint64_t memory = 0;
    double sample_ratio = 0.0;
    std::size_t n_runs = 0;
    double standard_error = 0.0;  // sqrt(E((X - c)^2)) / c
    double min_error = 0.0;
    double max_error = 0.0;
};

struct SweepConfig {
    FactTable table;
    std::vector<ViewQuery> queries;
    std::vector<Method> methods;
    std::vector<std::uint64_t> budgets = {16, 64, 256, 2048};
    int bits = 64;
    int seed_count = 20;
    std::uint64_t master_seed = 1;
    std::vector<double> sample_ratios = {0.001, 0.003, 0.005, 0.007};
    std::string out_dir;            // empty = no files written
    std::string oracle_cache_path;  // empty = in-memory cache
};

struct SweepResult {
    std::vector<RunRecord> records;
    bool any_error = false;
};

// sqrt(mean((X_i - c)^2)) / c; absent when c = 0.
std::optional<double> standard_error(std::span<const double> estimates, double exact);

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, int count);

// The test protocol: every query x technique x budget (or sampling ratio)
// x seed combination, one streaming pass each. Failed runs are recorded with
// an error status and do not abort the sweep. When out_dir is set, appends
// to <out_dir>/runs.tsv and rewrites the plot tables.
SweepResult run_protocol(const SweepConfig& config);

std::vector<ErrorSummary> summarize_errors(std::span<const RunRecord> records);

// Append-only results log; parseable back into RunRecords.
void append_run_log(const std::string& path, std::span<const RunRecord> records);
std::vector<RunRecord> read_run_log(const std::string& path);

// Plot-ready tables per technique: error vs exact view size, and error /
// time vs memory budget for each query.
void emit_plot_tables(std::span<const RunRecord> records, const std::string& out_dir);

}  // namespace viewsize
