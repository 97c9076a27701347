#include "viewsize/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "viewsize/multifractal.hpp"

namespace viewsize {

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kLogHeader =
    "#viewsize_runlog_v1\tdataset\tdims\ttechnique\tmemory\tbits\tseed\tsample_ratio\t"
    "estimate\texact_f0\trel_error\tload_ms\thash_ms\tcount_ms\tstatus";

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Technique method_technique(Method m) {
    switch (m) {
        case Method::kPc: return Technique::kPc;
        case Method::kLl: return Technique::kLl;
        case Method::kAc: return Technique::kAc;
        case Method::kGc: return Technique::kGc;
        case Method::kGt: return Technique::kGt;
        default: throw std::invalid_argument("method is not a sketch technique");
    }
}

RunRecord base_record(const SweepConfig& config, const ViewQuery& query, Method method) {
    RunRecord rec;
    rec.dataset = config.table.id();
    rec.dims = query.label();
    rec.technique = method_name(method);
    return rec;
}

void finish_record(RunRecord& rec, double estimate, double exact_f0) {
    rec.estimate = estimate;
    rec.exact_f0 = exact_f0;
    if (exact_f0 > 0.0) rec.rel_error = std::abs(estimate - exact_f0) / exact_f0;
}

// One multifractal run: a Bernoulli sample pass that also counts N.
RunRecord run_multifractal(const SweepConfig& config, const ViewQuery& query,
                           double ratio, std::uint64_t seed, double exact_f0) {
    RunRecord rec = base_record(config, query, Method::kMultifractal);
    rec.sample_ratio = ratio;
    rec.seed = seed;
    const auto t0 = Clock::now();
    auto sample = bernoulli_sample(open_stream(config.table), ratio, seed);
    query.validate(sample->arity());
    const auto t1 = Clock::now();
    SampleSummary summary = summarize_sample(*sample, query, 0);
    summary.total_rows = std::max(sample->seen(), summary.sample_size);
    const auto t2 = Clock::now();
    const Estimate estimate = multifractal_estimate(summary);
    const auto t3 = Clock::now();
    rec.load_ms = ms_between(t0, t1) + ms_between(t1, t2);  // streaming + grouping
    rec.count_ms = ms_between(t2, t3);
    finish_record(rec, estimate.value, exact_f0);
    return rec;
}

RunRecord run_exact(const SweepConfig& config, const ViewQuery& query, double exact_f0) {
    RunRecord rec = base_record(config, query, Method::kExact);
    const auto t0 = Clock::now();
    auto stream = open_stream(config.table);
    query.validate(stream->arity());
    const ExactResult result = exact_view_size(*stream, query);
    rec.load_ms = ms_between(t0, Clock::now());
    finish_record(rec, static_cast<double>(result.distinct), exact_f0);
    return rec;
}

RunRecord run_sketch(const SweepConfig& config, const ViewQuery& query, Method method,
                     std::uint64_t budget, std::uint64_t seed, double exact_f0) {
    RunRecord rec = base_record(config, query, method);
    rec.memory = budget;
    rec.bits = config.bits;
    rec.seed = seed;
    PhaseTimes times;
    auto stream = open_stream(config.table);
    const Estimate estimate = estimate_view_size(*stream, query, method_technique(method),
                                                 budget, config.bits, seed, &times);
    rec.load_ms = times.load_ms;
    rec.hash_ms = times.hash_ms;
    rec.count_ms = times.count_ms;
    finish_record(rec, estimate.value, exact_f0);
    return rec;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    return out;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::kPc: return "pc";
        case Method::kLl: return "ll";
        case Method::kAc: return "ac";
        case Method::kGc: return "gc";
        case Method::kGt: return "gt";
        case Method::kMultifractal: return "mf";
        case Method::kExact: return "exact";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "pc") return Method::kPc;
    if (name == "ll") return Method::kLl;
    if (name == "ac") return Method::kAc;
    if (name == "gc") return Method::kGc;
    if (name == "gt") return Method::kGt;
    if (name == "mf") return Method::kMultifractal;
    if (name == "exact") return Method::kExact;
    throw std::invalid_argument("unknown technique: " + name);
}

bool method_is_sketch(Method m) {
    return m == Method::kPc || m == Method::kLl || m == Method::kAc || m == Method::kGc ||
           m == Method::kGt;
}

std::optional<double> standard_error(std::span<const double> estimates, double exact) {
    if (estimates.empty()) throw std::invalid_argument("no estimates");
    if (!(exact > 0.0)) return std::nullopt;
    double sum_sq = 0.0;
    for (double x : estimates) {
        const double d = x - exact;
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / static_cast<double>(estimates.size())) / exact;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, int count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(count));
    std::uint64_t state = master;
    for (int i = 0; i < count; ++i) seeds.push_back(splitmix64(state));
    return seeds;
}

SweepResult run_protocol(const SweepConfig& config) {
    SweepResult result;
    if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);
    if (!config.oracle_cache_path.empty()) {
        const auto parent = std::filesystem::path(config.oracle_cache_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    OracleCache cache(config.oracle_cache_path);
    const std::vector<std::uint64_t> seeds = derive_seeds(config.master_seed, config.seed_count);

    for (const ViewQuery& query : config.queries) {
        double exact_f0 = 0.0;
        std::string oracle_failure;
        try {
            exact_f0 = static_cast<double>(cache.get_or_compute(config.table, query));
        } catch (const std::exception& e) {
            oracle_failure = e.what();
        }
        for (Method method : config.methods) {
            auto run_one = [&](const std::function<RunRecord()>& fn, RunRecord fallback) {
                if (!oracle_failure.empty()) {
                    fallback.status = "error: " + oracle_failure;
                    result.records.push_back(std::move(fallback));
                    result.any_error = true;
                    return;
                }
                try {
                    result.records.push_back(fn());
                } catch (const std::exception& e) {
                    fallback.status = std::string("error: ") + e.what();
                    result.records.push_back(std::move(fallback));
                    result.any_error = true;
                }
            };
            if (method == Method::kExact) {
                run_one([&] { return run_exact(config, query, exact_f0); },
                        base_record(config, query, method));
            } else if (method == Method::kMultifractal) {
                for (double ratio : config.sample_ratios) {
                    for (std::uint64_t seed : seeds) {
                        RunRecord fallback = base_record(config, query, method);
                        fallback.sample_ratio = ratio;
                        fallback.seed = seed;
                        run_one([&] { return run_multifractal(config, query, ratio, seed,
                                                              exact_f0); },
                                std::move(fallback));
                    }
                }
            } else {
                for (std::uint64_t budget : config.budgets) {
                    for (std::uint64_t seed : seeds) {
                        RunRecord fallback = base_record(config, query, method);
                        fallback.memory = budget;
                        fallback.bits = config.bits;
                        fallback.seed = seed;
                        run_one([&] { return run_sketch(config, query, method, budget, seed,
                                                        exact_f0); },
                                std::move(fallback));
                    }
                }
            }
        }
    }

    if (!config.out_dir.empty()) {
        append_run_log(config.out_dir + "/runs.tsv", result.records);
        emit_plot_tables(result.records, config.out_dir);
    }
    return result;
}

std::vector<ErrorSummary> summarize_errors(std::span<const RunRecord> records) {
    struct Group {
        std::vector<double> errors;
    };
    std::map<std::tuple<std::string, std::string, std::uint64_t, double>, Group> groups;
    for (const RunRecord& rec : records) {
        if (rec.status != "ok" || !rec.rel_error) continue;
        groups[{rec.dims, rec.technique, rec.memory, rec.sample_ratio}].errors.push_back(
            *rec.rel_error);
    }
    std::vector<ErrorSummary> summaries;
    for (const auto& [key, group] : groups) {
        ErrorSummary s;
        s.dims = std::get<0>(key);
        s.technique = std::get<1>(key);
        s.memory = std::get<2>(key);
        s.sample_ratio = std::get<3>(key);
        s.n_runs = group.errors.size();
        double sum_sq = 0.0;
        s.min_error = group.errors.front();
        s.max_error = group.errors.front();
        for (double e : group.errors) {
            sum_sq += e * e;
            s.min_error = std::min(s.min_error, e);
            s.max_error = std::max(s.max_error, e);
        }
        s.standard_error = std::sqrt(sum_sq / static_cast<double>(group.errors.size()));
        summaries.push_back(std::move(s));
    }
    return summaries;
}

void append_run_log(const std::string& path, std::span<const RunRecord> records) {
    const bool fresh = !std::filesystem::exists(path) ||
                       std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open run log: " + path);
    if (fresh) out << kLogHeader << '\n';
    for (const RunRecord& rec : records) {
        out << rec.dataset << '\t' << rec.dims << '\t' << rec.technique << '\t' << rec.memory
            << '\t' << rec.bits << '\t' << rec.seed << '\t' << format_double(rec.sample_ratio)
            << '\t' << format_double(rec.estimate) << '\t' << format_double(rec.exact_f0)
            << '\t' << (rec.rel_error ? format_double(*rec.rel_error) : std::string("-"))
            << '\t' << format_double(rec.load_ms) << '\t' << format_double(rec.hash_ms)
            << '\t' << format_double(rec.count_ms) << '\t' << rec.status << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<RunRecord> read_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run log: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kLogHeader) {
        throw std::runtime_error("unrecognized run log header: " + path);
    }
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find('\t', start);
            if (pos == std::string::npos) {
                fields.emplace_back(line, start);
                break;
            }
            fields.emplace_back(line, start, pos - start);
            start = pos + 1;
        }
        if (fields.size() != 14) throw std::runtime_error("malformed run log line");
        RunRecord rec;
        rec.dataset = fields[0];
        rec.dims = fields[1];
        rec.technique = fields[2];
        rec.memory = std::stoull(fields[3]);
        rec.bits = std::stoi(fields[4]);
        rec.seed = std::stoull(fields[5]);
        rec.sample_ratio = std::stod(fields[6]);
        rec.estimate = std::stod(fields[7]);
        rec.exact_f0 = std::stod(fields[8]);
        if (fields[9] != "-") rec.rel_error = std::stod(fields[9]);
        rec.load_ms = std::stod(fields[10]);
        rec.hash_ms = std::stod(fields[11]);
        rec.count_ms = std::stod(fields[12]);
        rec.status = fields[13];
        records.push_back(std::move(rec));
    }
    return records;
}

void emit_plot_tables(std::span<const RunRecord> records, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::vector<ErrorSummary> summaries = summarize_errors(records);

    // Mean total time per (dims, technique, memory, ratio) group.
    std::map<std::tuple<std::string, std::string, std::uint64_t, double>,
             std::pair<double, std::size_t>> time_groups;
    std::map<std::pair<std::string, std::string>, double> exact_by_dims;  // (dims, tech unused)
    for (const RunRecord& rec : records) {
        if (rec.status != "ok") continue;
        auto& acc = time_groups[{rec.dims, rec.technique, rec.memory, rec.sample_ratio}];
        acc.first += rec.load_ms + rec.hash_ms + rec.count_ms;
        acc.second += 1;
        exact_by_dims[{rec.dims, rec.technique}] = rec.exact_f0;
    }

    std::set<std::string> techniques;
    std::set<std::string> dims_seen;
    for (const ErrorSummary& s : summaries) {
        techniques.insert(s.technique);
        dims_seen.insert(s.dims);
    }

    for (const std::string& tech : techniques) {
        {
            std::ofstream out(out_dir + "/error_vs_size_" + tech + ".tsv");
            out << "exact_f0\tmemory\tsample_ratio\tstandard_error\n";
            for (const ErrorSummary& s : summaries) {
                if (s.technique != tech) continue;
                const double f0 = exact_by_dims[{s.dims, s.technique}];
                out << format_double(f0) << '\t' << s.memory << '\t'
                    << format_double(s.sample_ratio) << '\t'
                    << format_double(s.standard_error) << '\n';
            }
        }
        for (const std::string& dims : dims_seen) {
            const std::string tag = tech + "_q" + sanitize(dims);
            std::ofstream err_out(out_dir + "/error_vs_memory_" + tag + ".tsv");
            err_out << "memory\tsample_ratio\tstandard_error\n";
            std::ofstream time_out(out_dir + "/time_vs_memory_" + tag + ".tsv");
            time_out << "memory\tsample_ratio\tseconds\n";
            for (const ErrorSummary& s : summaries) {
                if (s.technique != tech || s.dims != dims) continue;
                err_out << s.memory << '\t' << format_double(s.sample_ratio) << '\t'
                        << format_double(s.standard_error) << '\n';
                const auto& acc = time_groups[{s.dims, s.technique, s.memory, s.sample_ratio}];
                const double mean_ms =
                    acc.second == 0 ? 0.0 : acc.first / static_cast<double>(acc.second);
                time_out << s.memory << '\t' << format_double(s.sample_ratio) << '\t'
                         << format_double(mean_ms / 1000.0) << '\n';
            }
        }
    }
}

}  // namespace viewsize
