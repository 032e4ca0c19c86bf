#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fcvi/bench.hpp"
#include "fcvi/engine.hpp"
#include "fcvi/storage.hpp"
#include "fcvi/verify.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void log_config(const std::string& subcommand, const json& resolved) {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = resolved;
    std::cerr << j.dump() << "\n";
}

struct GenArgs {
    std::size_t n = 1000, d = 32, m = 4, clusters = 8, queries = 100;
    double selectivity = 0.05;
    double noise_scale = 1.0, spectrum_decay = 1.0;
    std::uint64_t seed = 42;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    log_config("gen", {{"n", a.n},
                       {"d", a.d},
                       {"m", a.m},
                       {"clusters", a.clusters},
                       {"selectivity", a.selectivity},
                       {"queries", a.queries},
                       {"seed", a.seed},
                       {"out", a.out}});
    fcvi::bench::WorkloadSpec spec;
    spec.n = a.n;
    spec.d = a.d;
    spec.m = a.m;
    spec.clusters = a.clusters;
    spec.selectivity = a.selectivity;
    spec.query_count = a.queries;
    spec.seed = a.seed;
    spec.noise_scale = a.noise_scale;
    spec.spectrum_decay = a.spectrum_decay;
    auto wl = fcvi::bench::gen_synthetic(spec);
    fcvi::storage::save_dataset(wl.records, a.out + ".fcvi");
    fcvi::storage::save_attributes_csv(wl.records, a.out + ".attrs.csv");
    fcvi::storage::save_queries_jsonl(wl.queries, a.out + ".queries.jsonl");
    ordered_json summary;
    summary["dataset"] = a.out + ".fcvi";
    summary["attributes"] = a.out + ".attrs.csv";
    summary["queries"] = a.out + ".queries.jsonl";
    summary["n"] = wl.records.size();
    summary["d"] = wl.records.dim();
    summary["m"] = wl.records.filter_dim();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

struct BuildArgs {
    std::string data, out, variant = "partition", backend = "hnsw";
    double alpha = 1.0;
    std::size_t clusters_k = 0;
    std::string w_file, centers_file;
    std::uint64_t seed = 0;
    std::size_t hnsw_m = 16, hnsw_efc = 200;
};

int cmd_build(const BuildArgs& a) {
    log_config("build", {{"data", a.data},
                         {"variant", a.variant},
                         {"alpha", a.alpha},
                         {"backend", a.backend},
                         {"out", a.out},
                         {"clusters_k", a.clusters_k},
                         {"w_file", a.w_file},
                         {"centers_file", a.centers_file},
                         {"seed", a.seed},
                         {"hnsw_m", a.hnsw_m},
                         {"hnsw_efc", a.hnsw_efc}});
    fcvi::BuildOptions opts;
    opts.variant = fcvi::variant_from_name(a.variant);
    opts.alpha = a.alpha;
    opts.seed = a.seed;
    opts.clusters_k = a.clusters_k;
    opts.backend = fcvi::backend_from_name(a.backend);
    opts.hnsw.M = a.hnsw_m;
    opts.hnsw.ef_construction = a.hnsw_efc;
    if (opts.variant == fcvi::TransformVariant::cluster && a.clusters_k == 0 &&
        a.centers_file.empty())
        throw fcvi::UsageError("--variant cluster requires --clusters-k (or --centers-file)");
    if (!a.w_file.empty()) opts.projection = fcvi::storage::load_projection_matrix(a.w_file);
    if (!a.centers_file.empty())
        opts.centers = fcvi::storage::load_cluster_centers(a.centers_file);

    auto store = fcvi::storage::load_dataset(a.data);
    auto index = fcvi::FcviIndex::build(std::move(store), opts);
    fcvi::storage::save_index(index, a.out);
    ordered_json summary;
    summary["index"] = a.out;
    summary["records"] = index.store().size();
    summary["backend_size"] = index.size();
    summary["transformed_dim"] = index.config().transformed_dim();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

struct ImportArgs {
    std::string vectors, attrs, schema, out;
    bool bvecs = false;
};

int cmd_import(const ImportArgs& a) {
    log_config("import", {{"vectors", a.vectors},
                          {"attrs", a.attrs},
                          {"schema", a.schema},
                          {"bvecs", a.bvecs},
                          {"out", a.out}});
    std::ifstream sf(a.schema);
    if (!sf) throw fcvi::IoError("cannot open file: " + a.schema);
    std::ostringstream ss;
    ss << sf.rdbuf();
    auto schema = fcvi::FilterSchema::from_json_string(ss.str());

    fcvi::RecordStore store;
    store.schema = schema;
    store.vectors = a.bvecs ? fcvi::storage::load_bvecs(a.vectors)
                            : fcvi::storage::load_fvecs(a.vectors);
    auto rows = fcvi::storage::load_attributes_csv(a.attrs, schema);
    if (rows.size() != store.vectors.rows)
        throw fcvi::IoError("row-count mismatch: " + std::to_string(store.vectors.rows) +
                            " vectors vs " + std::to_string(rows.size()) + " attribute rows");
    store.filters = fcvi::storage::encode_attribute_rows(schema, rows);
    fcvi::storage::save_dataset(store, a.out);
    ordered_json summary;
    summary["dataset"] = a.out;
    summary["n"] = store.size();
    summary["d"] = store.dim();
    summary["m"] = store.filter_dim();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

struct QueryArgs {
    std::string index, vector_file, filter;
    std::size_t k = 10, probes = 1, ef_search = 64;
    double lambda = 0.5, c = 4.0;
};

int cmd_query(const QueryArgs& a) {
    log_config("query", {{"index", a.index},
                         {"vector_file", a.vector_file},
                         {"filter", a.filter},
                         {"k", a.k},
                         {"lambda", a.lambda},
                         {"c", a.c},
                         {"probes", a.probes},
                         {"ef_search", a.ef_search}});
    auto index = fcvi::storage::load_index(a.index);
    auto qf = fcvi::parse_filter_expr(a.filter, index.store().schema);
    auto queries = fcvi::storage::load_fvecs(a.vector_file);

    fcvi::SearchParams params;
    params.k = a.k;
    params.lambda = a.lambda;
    params.c = a.c;
    params.probes = a.probes;
    params.ef_search = a.ef_search;

    for (std::size_t i = 0; i < queries.rows; ++i) {
        auto result = index.query(queries.row(i), qf, params);
        if (result.probes_trimmed)
            std::cerr << "warning: probe expansion trimmed to cap for query " << i << "\n";
        for (const auto& hit : result.hits) {
            ordered_json line;
            line["id"] = hit.id;
            line["vector_sim"] = hit.vector_sim;
            line["filter_sim"] = hit.filter_sim;
            line["score"] = hit.score;
            std::cout << line.dump() << "\n";
        }
    }
    return kExitOk;
}

struct BenchArgs {
    std::string data, queries, methods, scenario = "none", report;
    std::size_t k = 10, probes = 1, ef_search = 64, oversample = 10;
    double lambda = 0.5, c = 4.0, alpha = 1.0;
    std::string variant = "partition";
    std::size_t clusters_k = 0;
    std::size_t hnsw_m = 16, hnsw_efc = 200;
    std::uint64_t seed = 1;
    // generator flags (scenario mode)
    std::size_t n = 20000, d = 32, m = 4, clusters = 8, query_count = 100;
    double selectivity = 0.05;
    double noise_scale = 1.0, spectrum_decay = 1.0;
    std::uint64_t gen_seed = 42;
};

fcvi::bench::BenchParams bench_params(const BenchArgs& a) {
    fcvi::bench::BenchParams p;
    p.search.k = a.k;
    p.search.lambda = a.lambda;
    p.search.c = a.c;
    p.search.probes = a.probes;
    p.search.ef_search = a.ef_search;
    p.variant = fcvi::variant_from_name(a.variant);
    p.alpha = a.alpha;
    p.clusters_k = a.clusters_k;
    p.oversample = a.oversample;
    p.hnsw.M = a.hnsw_m;
    p.hnsw.ef_construction = a.hnsw_efc;
    p.seed = a.seed;
    return p;
}

void write_report(const std::string& path, const std::string& csv, const std::string& json_text) {
    if (path.empty()) {
        std::cout << csv;
        return;
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw fcvi::IoError("cannot open file for writing: " + path);
    bool as_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    f << (as_json ? json_text : csv);
    if (!f) throw fcvi::IoError("write failed: " + path);
}

int cmd_bench(const BenchArgs& a) {
    log_config("bench", {{"data", a.data},
                         {"queries", a.queries},
                         {"methods", a.methods},
                         {"scenario", a.scenario},
                         {"report", a.report},
                         {"k", a.k},
                         {"lambda", a.lambda},
                         {"c", a.c},
                         {"alpha", a.alpha},
                         {"variant", a.variant},
                         {"probes", a.probes},
                         {"ef_search", a.ef_search},
                         {"oversample", a.oversample},
                         {"seed", a.seed}});
    auto methods = fcvi::bench::methods_from_csv(a.methods);
    auto params = bench_params(a);
    auto scenario = fcvi::bench::scenario_from_name(a.scenario);

    if (scenario == fcvi::bench::ShiftScenario::none) {
        if (a.data.empty()) throw fcvi::UsageError("--data is required when --scenario is none");
        auto records = fcvi::storage::load_dataset(a.data);
        std::string qpath = a.queries;
        if (qpath.empty()) {
            qpath = a.data;
            auto pos = qpath.rfind(".fcvi");
            if (pos != std::string::npos) qpath = qpath.substr(0, pos);
            qpath += ".queries.jsonl";
        }
        auto queries = fcvi::storage::load_queries_jsonl(qpath);
        auto report = fcvi::bench::run_benchmark(records, queries, methods, params);
        write_report(a.report, report.to_csv(), report.to_json_string());
    } else {
        if (!a.data.empty())
            throw fcvi::UsageError("shift scenarios generate their own data; drop --data");
        fcvi::bench::WorkloadSpec spec;
        spec.n = a.n;
        spec.d = a.d;
        spec.m = a.m;
        spec.clusters = a.clusters;
        spec.selectivity = a.selectivity;
        spec.query_count = a.query_count;
        spec.seed = a.gen_seed;
        spec.noise_scale = a.noise_scale;
        spec.spectrum_decay = a.spectrum_decay;
        spec.shift = scenario;
        auto report = fcvi::bench::run_shift_scenario(spec, methods, params);
        write_report(a.report, report.to_csv(), report.to_json_string());
    }
    return kExitOk;
}

struct VerifyArgs {
    std::uint64_t seed = 7;
    std::size_t trials = 10000;
};

int cmd_verify(const VerifyArgs& a) {
    log_config("verify", {{"seed", a.seed}, {"trials", a.trials}});
    auto results = fcvi::verify::run_all(a.seed, a.trials);
    bool all_passed = true;
    for (const auto& r : results) {
        if (r.passed) {
            std::cout << "PASS " << r.name << " (trials=" << r.trials << ")\n";
        } else {
            std::cout << "FAIL " << r.name << " (trials=" << r.trials << "): " << r.detail << "\n";
            all_passed = false;
        }
    }
    return all_passed ? kExitOk : kExitCheckFailed;
}

int cmd_info(const std::string& path) {
    log_config("info", {{"path", path}});
    auto info = fcvi::storage::inspect_container(path);
    ordered_json j;
    j["has_index"] = info.has_index;
    j["records"] = info.n;
    j["d"] = info.d;
    j["m"] = info.m;
    j["padded_dim"] = info.padded_dim;
    j["variant"] = info.variant;
    j["alpha"] = info.alpha;
    j["backend"] = info.backend;
    j["has_graph"] = info.has_graph;
    j["has_centers"] = info.has_centers;
    j["has_projection"] = info.has_projection;
    j["rng_seed"] = info.rng_seed;
    std::cout << j.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Filter-centric vector indexing: transform, index, query, benchmark"};
    app.require_subcommand(1);
    app.set_config("--config");

    GenArgs gen;
    auto* cgen = app.add_subcommand("gen", "Generate a synthetic dataset + query stream");
    cgen->add_option("--n", gen.n, "record count");
    cgen->add_option("--d", gen.d, "vector dimension");
    cgen->add_option("--m", gen.m, "filter dimension");
    cgen->add_option("--clusters", gen.clusters, "mixture components");
    cgen->add_option("--selectivity", gen.selectivity, "target predicate selectivity");
    cgen->add_option("--queries", gen.queries, "query count");
    cgen->add_option("--noise-scale", gen.noise_scale, "component noise scale");
    cgen->add_option("--spectrum-decay", gen.spectrum_decay, "per-dim noise decay in (0,1]");
    cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--out", gen.out, "output path prefix")->required();

    BuildArgs build;
    auto* cbuild = app.add_subcommand("build", "Build an index over a dataset container");
    cbuild->add_option("--data", build.data, "dataset container")->required();
    cbuild->add_option("--variant", build.variant, "partition|cluster|embedding");
    cbuild->add_option("--alpha", build.alpha, "filter influence scale (>= 1)");
    cbuild->add_option("--backend", build.backend, "bf|hnsw");
    cbuild->add_option("--out", build.out, "output index container")->required();
    cbuild->add_option("--clusters-k", build.clusters_k, "cluster variant: k-means size");
    cbuild->add_option("--w-file", build.w_file, "container holding a projection matrix");
    cbuild->add_option("--centers-file", build.centers_file, "container holding cluster centers");
    cbuild->add_option("--seed", build.seed, "rng seed");
    cbuild->add_option("--hnsw-m", build.hnsw_m, "HNSW M");
    cbuild->add_option("--hnsw-efc", build.hnsw_efc, "HNSW ef_construction");

    ImportArgs imp;
    auto* cimport = app.add_subcommand("import", "Build a dataset container from fvecs/bvecs + CSV");
    cimport->add_option("--vectors", imp.vectors, "fvecs (or bvecs) vector file")->required();
    cimport->add_option("--attrs", imp.attrs, "attribute CSV with a header row")->required();
    cimport->add_option("--schema", imp.schema, "filter schema JSON file")->required();
    cimport->add_flag("--bvecs", imp.bvecs, "vector file is bvecs");
    cimport->add_option("--out", imp.out, "output dataset container")->required();

    QueryArgs query;
    auto* cquery = app.add_subcommand("query", "Query an index; hits as JSON lines");
    cquery->add_option("--index", query.index, "index container")->required();
    cquery->add_option("--vector-file", query.vector_file, "query vectors (fvecs)")->required();
    cquery->add_option("--filter", query.filter, "filter expression, e.g. 'price:50..100,cat=b'")
        ->required();
    cquery->add_option("--k", query.k, "result count");
    cquery->add_option("--lambda", query.lambda, "vector/filter balance");
    cquery->add_option("--c", query.c, "retrieval size constant");
    cquery->add_option("--probes", query.probes, "probes per range predicate");
    cquery->add_option("--ef-search", query.ef_search, "HNSW search beam");

    BenchArgs bench;
    auto* cbench = app.add_subcommand("bench", "Benchmark methods; CSV/JSON report");
    cbench->add_option("--data", bench.data, "dataset container (scenario none)");
    cbench->add_option("--queries", bench.queries, "query stream (JSON lines)");
    cbench->add_option("--methods", bench.methods,
                       "comma list: fcvi-bf,fcvi-hnsw,prefilter,postfilter-bf,postfilter-hnsw")
        ->required();
    cbench->add_option("--scenario", bench.scenario, "none|filter_shift|vector_shift|query_shift");
    cbench->add_option("--report", bench.report, "report path (.csv or .json)");
    cbench->add_option("--k", bench.k, "result count");
    cbench->add_option("--lambda", bench.lambda, "vector/filter balance");
    cbench->add_option("--c", bench.c, "retrieval size constant");
    cbench->add_option("--alpha", bench.alpha, "transform alpha");
    cbench->add_option("--variant", bench.variant, "transform variant");
    cbench->add_option("--clusters-k", bench.clusters_k, "cluster variant k");
    cbench->add_option("--probes", bench.probes, "probes per range predicate");
    cbench->add_option("--ef-search", bench.ef_search, "HNSW search beam");
    cbench->add_option("--oversample", bench.oversample, "postfilter oversample factor");
    cbench->add_option("--hnsw-m", bench.hnsw_m, "HNSW M");
    cbench->add_option("--hnsw-efc", bench.hnsw_efc, "HNSW ef_construction");
    cbench->add_option("--seed", bench.seed, "index/build seed");
    cbench->add_option("--n", bench.n, "scenario: record count");
    cbench->add_option("--d", bench.d, "scenario: vector dimension");
    cbench->add_option("--m", bench.m, "scenario: filter dimension");
    cbench->add_option("--clusters", bench.clusters, "scenario: mixture components");
    cbench->add_option("--selectivity", bench.selectivity, "scenario: base selectivity");
    cbench->add_option("--query-count", bench.query_count, "scenario: query count");
    cbench->add_option("--gen-seed", bench.gen_seed, "scenario: generator seed");
    cbench->add_option("--noise-scale", bench.noise_scale, "scenario: component noise scale");
    cbench->add_option("--spectrum-decay", bench.spectrum_decay,
                       "scenario: per-dim noise decay in (0,1]");

    VerifyArgs verify;
    auto* cverify = app.add_subcommand("verify", "Run the transformation property suites");
    cverify->add_option("--seed", verify.seed, "rng seed");
    cverify->add_option("--trials", verify.trials, "randomized trials per suite");

    std::string info_path;
    auto* cinfo = app.add_subcommand("info", "Describe a container file");
    cinfo->add_option("path", info_path, "container path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cgen->parsed()) return cmd_gen(gen);
        if (cimport->parsed()) return cmd_import(imp);
        if (cbuild->parsed()) return cmd_build(build);
        if (cquery->parsed()) return cmd_query(query);
        if (cbench->parsed()) return cmd_bench(bench);
        if (cverify->parsed()) return cmd_verify(verify);
        if (cinfo->parsed()) return cmd_info(info_path);
    } catch (const fcvi::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fcvi::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}
