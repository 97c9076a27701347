// Command-line driver: one-shot estimates, full protocol sweeps, bound-curve
// tables, and synthetic data generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "viewsize/bounds.hpp"
#include "viewsize/exact_oracle.hpp"
#include "viewsize/harness.hpp"
#include "viewsize/ingest.hpp"
#include "viewsize/multifractal.hpp"
#include "viewsize/sketches.hpp"

namespace {

using namespace viewsize;

struct DataOptions {
    std::string data_path;
    std::string synthetic_spec;
    std::string delimiter = ",";
    bool has_header = false;
    bool strict = false;
};

void add_data_options(CLI::App* cmd, DataOptions& opts) {
    auto* data = cmd->add_option("--data", opts.data_path, "Delimited fact table file");
    auto* synth = cmd->add_option("--synthetic", opts.synthetic_spec,
                                  "Synthetic table spec, e.g. uniform:f0=1000,n=10000,d=2,seed=1 "
                                  "or zipf:s=1.2,f0=...,n=...,d=...,seed=...");
    data->excludes(synth);
    synth->excludes(data);
    cmd->add_option("--delimiter", opts.delimiter, "Field delimiter (default ',')")
        ->check(CLI::Validator(
            [](std::string& v) {
                return v.size() == 1 ? std::string() : std::string("must be one character");
            },
            "CHAR"));
    cmd->add_flag("--header", opts.has_header, "First line of --data is a header");
    cmd->add_flag("--strict", opts.strict, "Abort on malformed rows instead of skipping");
}

FactTable make_table(const DataOptions& opts) {
    if (!opts.synthetic_spec.empty()) {
        return FactTable::from_synthetic(SyntheticSpec::parse(opts.synthetic_spec));
    }
    if (opts.data_path.empty()) {
        throw CLI::ValidationError("either --data or --synthetic is required");
    }
    return FactTable::from_file(opts.data_path, opts.delimiter[0], opts.has_header,
                                opts.strict);
}

std::vector<ViewQuery> parse_queries(const std::vector<std::string>& dims_args) {
    std::vector<ViewQuery> queries;
    for (const std::string& dims : dims_args) queries.push_back(ViewQuery::parse(dims));
    return queries;
}

int run_estimate(const DataOptions& data_opts, const std::string& dims,
                 const std::string& technique, std::uint64_t memory, int bits,
                 std::uint64_t seed, double sample_ratio, bool with_exact,
                 const std::string& hash_save, const std::string& hash_load) {
    const FactTable table = make_table(data_opts);
    const ViewQuery query = ViewQuery::parse(dims);
    const Method method = method_from_name(technique);

    double value = 0.0;
    bool exact_flag = false;
    if (method == Method::kExact) {
        auto stream = open_stream(table);
        query.validate(stream->arity());
        value = static_cast<double>(exact_view_size(*stream, query).distinct);
        exact_flag = true;
    } else if (method == Method::kMultifractal) {
        auto sample = bernoulli_sample(open_stream(table), sample_ratio, seed);
        query.validate(sample->arity());
        SampleSummary summary = summarize_sample(*sample, query, 0);
        summary.total_rows = std::max(sample->seen(), summary.sample_size);
        value = multifractal_estimate(summary).value;
    } else {
        auto stream = open_stream(table);
        query.validate(stream->arity());
        DimensionHashTablePool pool(bits, seed);
        if (!hash_load.empty()) load_hash_tables(pool, hash_load);
        TupleHasher hasher(pool, query);
        const Technique tech = technique_from_name(technique);
        // Inline drive so the pool stays available for --save-hashes.
        std::string key_buffer;
        Estimate e;
        if (tech == Technique::kPc) {
            BitMatrixSketch sketch(memory, bits);
            while (const Row* row = stream->next()) sketch.update(hasher.hash_row(*row));
            e = sketch.estimate();
        } else if (tech == Technique::kLl || tech == Technique::kAc) {
            BucketMaxSketch sketch(memory, bits);
            while (const Row* row = stream->next()) sketch.update(hasher.hash_row(*row));
            e = tech == Technique::kLl ? sketch.loglog_estimate() : sketch.adaptive_estimate();
        } else if (tech == Technique::kGc) {
            KmvSketch sketch(memory, bits);
            while (const Row* row = stream->next()) {
                const std::uint64_t y = hasher.hash_row(*row);
                sketch.update(y, [&]() {
                    encode_projection_into(*row, query, key_buffer);
                    return key_buffer;
                });
            }
            e = sketch.estimate();
        } else {
            LevelSamplingSketch sketch(memory, bits);
            while (const Row* row = stream->next()) {
                const std::uint64_t y = hasher.hash_row(*row);
                sketch.update(y, [&]() {
                    encode_projection_into(*row, query, key_buffer);
                    return key_buffer;
                });
            }
            e = sketch.estimate();
        }
        if (!hash_save.empty()) save_hash_tables(pool, hash_save);
        value = e.value;
        exact_flag = e.exact;
    }

    std::printf("dataset\t%s\n", table.id().c_str());
    std::printf("dims\t%s\n", query.label().c_str());
    std::printf("technique\t%s\n", technique.c_str());
    std::printf("estimate\t%.6f\n", value);
    std::printf("certified_exact\t%s\n", exact_flag ? "yes" : "no");
    if (with_exact && method != Method::kExact) {
        auto stream = open_stream(table);
        const double truth = static_cast<double>(exact_view_size(*stream, query).distinct);
        std::printf("exact_f0\t%.0f\n", truth);
        if (truth > 0.0) {
            std::printf("rel_error\t%.6f\n", std::abs(value - truth) / truth);
        }
    }
    return 0;
}

int run_sweep(SweepConfig config) {
    const SweepResult result = run_protocol(config);
    std::size_t failed = 0;
    for (const RunRecord& rec : result.records) failed += rec.status != "ok";
    std::printf("runs\t%zu\nfailed\t%zu\n", result.records.size(), failed);
    for (const ErrorSummary& s : summarize_errors(result.records)) {
        std::printf("summary\tdims=%s\ttech=%s\tM=%llu\tratio=%g\truns=%zu\tstderr=%.6f\n",
                    s.dims.c_str(), s.technique.c_str(),
                    static_cast<unsigned long long>(s.memory), s.sample_ratio, s.n_runs,
                    s.standard_error);
    }
    if (!config.out_dir.empty()) {
        std::printf("log\t%s/runs.tsv\n", config.out_dir.c_str());
    }
    return result.any_error ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-by view-size estimation toolkit"};
    app.require_subcommand(1);

    // ---- estimate ----
    auto* estimate = app.add_subcommand("estimate", "One-shot view-size estimate");
    DataOptions est_data;
    add_data_options(estimate, est_data);
    std::string est_dims;
    std::string est_technique = "gt";
    std::uint64_t est_memory = 1024;
    int est_bits = 64;
    std::uint64_t est_seed = 1;
    double est_ratio = 0.005;
    bool est_exact = false;
    std::string hash_save, hash_load;
    estimate->add_option("--dims", est_dims, "Dimensions of the group-by, e.g. 0,2")
        ->required();
    estimate->add_option("--technique", est_technique,
                         "pc|ll|ac|gc|gt|mf|exact (default gt)");
    estimate->add_option("--memory", est_memory, "Memory budget M (default 1024)");
    estimate->add_option("--bits", est_bits, "Hash width L: 32 or 64")
        ->check(CLI::IsMember({32, 64}));
    estimate->add_option("--master-seed", est_seed, "Seed for hashing/sampling");
    estimate->add_option("--sample-ratio", est_ratio, "Sampling ratio for mf");
    estimate->add_flag("--exact", est_exact, "Also compute the exact count");
    estimate->add_option("--save-hashes", hash_save, "Persist dimension hash tables");
    estimate->add_option("--load-hashes", hash_load, "Preload dimension hash tables");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Run the full test protocol");
    DataOptions sweep_data;
    add_data_options(sweep, sweep_data);
    std::vector<std::string> sweep_dims;
    std::vector<std::string> sweep_techniques;
    std::vector<std::uint64_t> sweep_memory;
    std::vector<double> sweep_ratios;
    int sweep_bits = 64;
    int sweep_seeds = 20;
    std::uint64_t sweep_master = 1;
    std::string sweep_out;
    sweep->add_option("--dims", sweep_dims, "Group-by dimensions (repeatable)")
        ->required()
        ->take_all();
    sweep->add_option("--technique", sweep_techniques,
                      "pc|ll|ac|gc|gt|mf|exact (repeatable; default: all sketches + mf)")
        ->take_all();
    sweep->add_option("--memory", sweep_memory, "Memory budgets (repeatable)")->take_all();
    sweep->add_option("--sample-ratio", sweep_ratios, "Sampling ratios for mf (repeatable)")
        ->take_all();
    sweep->add_option("--bits", sweep_bits, "Hash width L: 32 or 64")
        ->check(CLI::IsMember({32, 64}));
    sweep->add_option("--seeds", sweep_seeds, "Number of random seeds (default 20)");
    sweep->add_option("--master-seed", sweep_master, "Master seed for the seed list");
    sweep->add_option("--out", sweep_out, "Output directory for logs and plot tables");

    // ---- bounds ----
    auto* bounds_cmd = app.add_subcommand("bounds", "Emit theoretical accuracy curves");
    std::vector<double> bound_memory;
    std::vector<int> bound_ks{2, 4, 8};
    double bound_delta = 0.05;
    std::string bounds_out;
    bounds_cmd->add_option("--memory", bound_memory, "Memory grid (repeatable)")->take_all();
    bounds_cmd->add_option("--k", bound_ks, "Independence orders (repeatable)")->take_all();
    bounds_cmd->add_option("--delta", bound_delta, "Failure probability (default 0.05)");
    bounds_cmd->add_option("--out", bounds_out, "Output directory (default stdout)");

    // ---- generate ----
    auto* generate = app.add_subcommand("generate", "Materialize a synthetic fact table");
    std::string gen_spec;
    std::string gen_out;
    generate->add_option("--synthetic", gen_spec, "Synthetic table spec")->required();
    generate->add_option("--out", gen_out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) {
            return run_estimate(est_data, est_dims, est_technique, est_memory, est_bits,
                                est_seed, est_ratio, est_exact, hash_save, hash_load);
        }
        if (sweep->parsed()) {
            SweepConfig config;
            config.table = make_table(sweep_data);
            config.queries = parse_queries(sweep_dims);
            if (sweep_techniques.empty()) {
                config.methods = {Method::kPc, Method::kLl, Method::kAc, Method::kGc,
                                  Method::kGt, Method::kMultifractal};
            } else {
                for (const std::string& name : sweep_techniques) {
                    config.methods.push_back(method_from_name(name));
                }
            }
            if (!sweep_memory.empty()) config.budgets = sweep_memory;
            if (!sweep_ratios.empty()) config.sample_ratios = sweep_ratios;
            config.bits = sweep_bits;
            config.seed_count = sweep_seeds;
            config.master_seed = sweep_master;
            config.out_dir = sweep_out;
            if (!sweep_out.empty()) config.oracle_cache_path = sweep_out + "/oracle_cache.txt";
            return run_sweep(std::move(config));
        }
        if (bounds_cmd->parsed()) {
            if (bound_memory.empty()) {
                for (int e = 4; e <= 20; ++e) bound_memory.push_back(std::ldexp(1.0, e));
            }
            const auto points = bounds::bound_curves(bound_memory, bound_ks, bound_delta);
            if (bounds_out.empty()) {
                bounds::write_bound_curves(std::cout, points);
            } else {
                std::filesystem::create_directories(bounds_out);
                std::ofstream out(bounds_out + "/bound_curves.tsv");
                bounds::write_bound_curves(out, points);
                std::printf("wrote\t%s/bound_curves.tsv\n", bounds_out.c_str());
            }
            return 0;
        }
        if (generate->parsed()) {
            const FactTable table = FactTable::from_synthetic(SyntheticSpec::parse(gen_spec));
            write_table_csv(table, gen_out);
            std::printf("wrote\t%s\n", gen_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
