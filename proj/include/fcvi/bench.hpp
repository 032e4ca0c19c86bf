#pragma once

#include "fcvi/engine.hpp"

namespace fcvi::bench {

enum class ShiftScenario { none, filter_shift, vector_shift, query_shift };

const char* scenario_name(ShiftScenario s);
ShiftScenario scenario_from_name(const std::string& name);

/// Parameters of one synthetic workload: a seeded Gaussian mixture with filter
/// attributes correlated to component identity plus a uniform selectivity dial.
struct WorkloadSpec {
    std::size_t n = 10000;
    std::size_t d = 32;
    std::size_t m = 4;
    std::size_t clusters = 8;
    double selectivity = 0.05;  // fraction of records a query predicate matches
    std::size_t query_count = 100;
    std::uint64_t seed = 42;
    ShiftScenario shift = ShiftScenario::none;
    // Within-component noise scale per dimension j is noise_scale * decay^j.
    // The defaults give an identity component covariance; decay < 1 models the
    // decaying spectra of real embedding data (low intrinsic dimension).
    double noise_scale = 1.0;
    double spectrum_decay = 1.0;

    void validate() const;
};

struct BenchQuery {
    std::vector<float> vector;
    QueryFilter filter;
};

struct SyntheticWorkload {
    RecordStore records;
    std::vector<BenchQuery> queries;
};

/// Deterministic synthetic generator. Attribute layout: slot 0 "sel" is uniform
/// [0,1] (predicate windows over it are built from sorted values, so match
/// counts hit the target selectivity by construction); middle attributes are
/// component-correlated Gaussians; the last attribute "xq" (when m >= 2) is the
/// quantized component level, giving exact predicates a meaningful bucket.
SyntheticWorkload gen_synthetic(const WorkloadSpec& spec);

/// Number of records matching all predicates (crisp semantics).
std::size_t count_matches(const RecordStore& records, const QueryFilter& qf);

/// Ground truth: scores every record with the combined score against a single
/// normalized filter query vector and returns the true top-k (ties ascending).
std::vector<std::uint32_t> exhaustive_oracle(const NormalizedStore& data,
                                             std::span<const double> q_norm,
                                             std::span<const double> f_q, double lambda,
                                             std::size_t k);

/// Ground truth for a structured query: same probe preparation and nearest-probe
/// scoring rule as the engine, evaluated by full scan.
std::vector<std::uint32_t> oracle_for_query(const NormalizedStore& data, std::span<const float> q,
                                            const QueryFilter& qf, const SearchParams& params);

/// |result ∩ oracle| / |oracle|.
double recall_at_k(std::span<const std::uint32_t> result_ids,
                   std::span<const std::uint32_t> oracle_ids);

enum class Method { fcvi_bf, fcvi_hnsw, prefilter, postfilter_bf, postfilter_hnsw };

Method method_from_name(const std::string& name);
const char* method_name(Method m);
std::vector<Method> methods_from_csv(const std::string& csv);

struct BenchParams {
    SearchParams search;
    TransformVariant variant = TransformVariant::partition;
    double alpha = 1.0;
    std::size_t clusters_k = 0;  // cluster variant only
    std::size_t oversample = 10;
    HnswParams hnsw;
    std::uint64_t seed = 1;
};

struct MethodRow {
    std::string method;   // fcvi | prefilter | postfilter
    std::string backend;  // bf | hnsw | exact
    double recall_at_k = 0.0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double qps = 0.0;
    double build_s = 0.0;
    std::size_t index_bytes = 0;
};

struct BenchReport {
    std::vector<MethodRow> rows;
    std::size_t n = 0;
    std::size_t query_count = 0;
    std::size_t k = 0;
    double lambda = 0.0;
    double alpha = 0.0;
    std::string environment;

    std::string to_csv() const;
    std::string to_json_string(int indent = 2) const;
};

/// Builds every requested method over the records, warms up with 10 queries,
/// then measures the identical query stream per method (single-threaded,
/// monotonic clock). Recall is against oracle_for_query.
BenchReport run_benchmark(const RecordStore& records, const std::vector<BenchQuery>& queries,
                          const std::vector<Method>& methods, const BenchParams& params);

struct ShiftRow {
    std::string method;
    std::string backend;
    double latency_increase_pct = 0.0;
    double recall_before = 0.0;
    double recall_after = 0.0;
    double recall_degradation_pts = 0.0;  // (before - after) * 100
};

struct ShiftReport {
    ShiftScenario scenario = ShiftScenario::none;
    BenchReport before;
    BenchReport after;
    std::vector<ShiftRow> deltas;

    std::string to_csv() const;
    std::string to_json_string(int indent = 2) const;
};

/// Builds indexes on the pre-shift distribution, measures, applies the shift
/// WITHOUT rebuilding (filter_shift: predicates become more selective;
/// vector_shift: a new unseen component of n/5 records is inserted incrementally
/// and queries target it; query_shift: single-predicate queries become
/// multi-predicate range queries), then re-measures.
ShiftReport run_shift_scenario(const WorkloadSpec& spec, const std::vector<Method>& methods,
                               const BenchParams& params);

}  // namespace fcvi::bench
