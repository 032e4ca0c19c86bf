#include "fcvi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <json.hpp>

namespace fcvi::bench {

using nlohmann::json;
using steady_clock = std::chrono::steady_clock;

const char* scenario_name(ShiftScenario s) {
    switch (s) {
        case ShiftScenario::none: return "none";
        case ShiftScenario::filter_shift: return "filter_shift";
        case ShiftScenario::vector_shift: return "vector_shift";
        case ShiftScenario::query_shift: return "query_shift";
    }
    return "?";
}

ShiftScenario scenario_from_name(const std::string& name) {
    if (name == "none") return ShiftScenario::none;
    if (name == "filter_shift") return ShiftScenario::filter_shift;
    if (name == "vector_shift") return ShiftScenario::vector_shift;
    if (name == "query_shift") return ShiftScenario::query_shift;
    throw std::invalid_argument("unknown shift scenario: " + name);
}

void WorkloadSpec::validate() const {
    if (n < 1 || d < 1 || m < 1 || clusters < 1 || query_count < 1)
        throw std::invalid_argument("workload counts must be >= 1");
    if (selectivity <= 0.0 || selectivity > 1.0)
        throw std::invalid_argument("selectivity must be in (0, 1]");
    if (selectivity * double(n) < 1.0)
        throw std::invalid_argument("infeasible selectivity: finer than 1/n");
    if (clusters > n) throw std::invalid_argument("more clusters than records");
    if (noise_scale <= 0.0 || spectrum_decay <= 0.0 || spectrum_decay > 1.0)
        throw std::invalid_argument("noise_scale must be > 0 and spectrum_decay in (0, 1]");
}

namespace {

constexpr std::uint64_t kQuerySeedSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kShiftSeedSalt = 0xc2b2ae3d27d4eb4full;

// Deterministic synthetic workload builder. Keeps the mixture parameters and
// per-cluster sorted selectivity values around so query windows can be placed
// with exact match counts.
class Generator {
public:
    explicit Generator(const WorkloadSpec& spec) : spec_(spec) {
        spec_.validate();
        noise_.resize(spec_.d);
        for (std::size_t j = 0; j < spec_.d; ++j)
            noise_[j] = spec_.noise_scale * std::pow(spec_.spectrum_decay, double(j));
        Rng rng(spec_.seed);
        build_schema();
        draw_mixture(rng);
        generate_records(rng);
        index_sel_values();
    }

    const RecordStore& records() const { return records_; }

    /// Hybrid queries: quantized-component exact predicate plus ranges around
    /// the component's filter profile (m >= 2) plus a selectivity window over
    /// "sel" with an exact match count. Constraining every attribute keeps the
    /// probe vector coherent with the target records' filters.
    std::vector<BenchQuery> base_queries(double selectivity, Rng& rng) const {
        std::vector<BenchQuery> out;
        out.reserve(spec_.query_count);
        for (std::size_t qi = 0; qi < spec_.query_count; ++qi) {
            std::size_t cq = std::size_t(rng.index(spec_.clusters));
            BenchQuery q;
            q.vector = draw_vector(cq, rng);
            bool scoped = spec_.m >= 2 && selectivity <= 0.8 / double(spec_.clusters);
            if (scoped) {
                q.filter.predicates.push_back(ExactPredicate{"xq", double(cq)});
                q.filter.predicates.push_back(sel_window(sel_by_cluster_[cq], selectivity, rng));
                for (std::size_t j = 0; j < x_attr_count(); ++j) {
                    double center = fcenters_.at(cq, j);
                    q.filter.predicates.push_back(RangePredicate{"x" + std::to_string(j + 1),
                                                                 center - 1.0, center + 1.0});
                }
            } else {
                q.filter.predicates.push_back(sel_window(sel_global_, selectivity, rng));
            }
            out.push_back(std::move(q));
        }
        return out;
    }

    /// Single exact predicate per query (query_shift "before" style).
    std::vector<BenchQuery> exact_queries(Rng& rng) const {
        if (spec_.m < 2)
            throw std::invalid_argument("query_shift requires m >= 2 (quantized attribute)");
        std::vector<BenchQuery> out;
        out.reserve(spec_.query_count);
        for (std::size_t qi = 0; qi < spec_.query_count; ++qi) {
            std::size_t cq = std::size_t(rng.index(spec_.clusters));
            BenchQuery q;
            q.vector = draw_vector(cq, rng);
            q.filter.predicates.push_back(ExactPredicate{"xq", double(cq)});
            out.push_back(std::move(q));
        }
        return out;
    }

    /// Two range predicates per query (query_shift "after" style).
    std::vector<BenchQuery> multi_range_queries(Rng& rng) const {
        std::vector<BenchQuery> out;
        out.reserve(spec_.query_count);
        for (std::size_t qi = 0; qi < spec_.query_count; ++qi) {
            std::size_t cq = std::size_t(rng.index(spec_.clusters));
            BenchQuery q;
            q.vector = draw_vector(cq, rng);
            q.filter.predicates.push_back(sel_window(sel_global_, spec_.selectivity, rng));
            if (spec_.m >= 3) {
                double center = fcenters_.at(cq, 0);
                q.filter.predicates.push_back(RangePredicate{"x1", center - 0.75, center + 0.75});
            } else if (spec_.m == 2) {
                q.filter.predicates.push_back(
                    RangePredicate{"xq", double(cq) - 0.5, double(cq) + 0.5});
            }
            out.push_back(std::move(q));
        }
        return out;
    }

    /// Records of an unseen mixture component (vector_shift). Its quantized
    /// level is `clusters`, a value absent from the build-time data.
    struct NewComponent {
        FloatMatrix vectors;
        FloatMatrix filters;
        std::vector<BenchQuery> queries;
    };

    NewComponent new_component(std::size_t count, Rng& rng) const {
        std::vector<double> mean(spec_.d), fcenter(x_attr_count());
        for (auto& x : mean) x = rng.gaussian() * 2.0 + 6.0;
        for (auto& x : fcenter) x = rng.gaussian() * 2.0 + 6.0;

        NewComponent nc;
        nc.vectors = FloatMatrix(count, spec_.d);
        nc.filters = FloatMatrix(count, spec_.m);
        for (std::size_t i = 0; i < count; ++i) {
            auto v = nc.vectors.row(i);
            for (std::size_t j = 0; j < spec_.d; ++j)
                v[j] = float(mean[j] + noise_[j] * rng.gaussian());
            auto f = nc.filters.row(i);
            f[0] = float(rng.uniform01());
            for (std::size_t j = 0; j < x_attr_count(); ++j)
                f[1 + j] = float(fcenter[j] + 0.25 * rng.gaussian());
            if (spec_.m >= 2) f[spec_.m - 1] = float(spec_.clusters);
        }
        nc.queries.reserve(spec_.query_count);
        for (std::size_t qi = 0; qi < spec_.query_count; ++qi) {
            BenchQuery q;
            q.vector.resize(spec_.d);
            for (std::size_t j = 0; j < spec_.d; ++j)
                q.vector[j] = float(mean[j] + noise_[j] * rng.gaussian());
            if (spec_.m >= 2) {
                q.filter.predicates.push_back(ExactPredicate{"xq", double(spec_.clusters)});
                for (std::size_t j = 0; j < x_attr_count(); ++j)
                    q.filter.predicates.push_back(RangePredicate{"x" + std::to_string(j + 1),
                                                                 fcenter[j] - 1.0, fcenter[j] + 1.0});
            } else {
                q.filter.predicates.push_back(RangePredicate{"sel", 0.0, 1.0});
            }
            nc.queries.push_back(std::move(q));
        }
        return nc;
    }

private:
    std::size_t x_attr_count() const { return spec_.m >= 3 ? spec_.m - 2 : 0; }

    void build_schema() {
        FilterSchema schema;
        schema.attributes.push_back(AttributeSpec{"sel", AttrKind::numeric, {}, 0.0, 1.0});
        for (std::size_t j = 0; j < x_attr_count(); ++j)
            schema.attributes.push_back(
                AttributeSpec{"x" + std::to_string(j + 1), AttrKind::numeric, {}, -10.0, 10.0});
        if (spec_.m >= 2)
            schema.attributes.push_back(
                AttributeSpec{"xq", AttrKind::numeric, {}, 0.0, double(spec_.clusters)});
        records_.schema = std::move(schema);
    }

    void draw_mixture(Rng& rng) {
        means_ = Matrix(spec_.clusters, spec_.d);
        for (auto& x : means_.data) x = rng.gaussian() * 2.0;
        fcenters_ = Matrix(spec_.clusters, std::max<std::size_t>(x_attr_count(), 1));
        for (auto& x : fcenters_.data) x = rng.gaussian() * 2.0;
    }

    void generate_records(Rng& rng) {
        records_.vectors = FloatMatrix(spec_.n, spec_.d);
        records_.filters = FloatMatrix(spec_.n, spec_.m);
        assign_.resize(spec_.n);
        for (std::size_t i = 0; i < spec_.n; ++i) {
            std::size_t c = std::size_t(rng.index(spec_.clusters));
            assign_[i] = c;
            auto v = records_.vectors.row(i);
            for (std::size_t j = 0; j < spec_.d; ++j)
                v[j] = float(means_.at(c, j) + noise_[j] * rng.gaussian());
            auto f = records_.filters.row(i);
            f[0] = float(rng.uniform01());
            for (std::size_t j = 0; j < x_attr_count(); ++j)
                f[1 + j] = float(fcenters_.at(c, j) + 0.25 * rng.gaussian());
            if (spec_.m >= 2) f[spec_.m - 1] = float(c);
        }
    }

    void index_sel_values() {
        sel_by_cluster_.assign(spec_.clusters, {});
        sel_global_.reserve(spec_.n);
        for (std::size_t i = 0; i < spec_.n; ++i) {
            float sel = records_.filters.at(i, 0);
            sel_by_cluster_[assign_[i]].push_back(sel);
            sel_global_.push_back(sel);
        }
        for (auto& v : sel_by_cluster_) std::sort(v.begin(), v.end());
        std::sort(sel_global_.begin(), sel_global_.end());
    }

    std::vector<float> draw_vector(std::size_t cluster, Rng& rng) const {
        std::vector<float> v(spec_.d);
        for (std::size_t j = 0; j < spec_.d; ++j)
            v[j] = float(means_.at(cluster, j) + noise_[j] * rng.gaussian());
        return v;
    }

    /// Window over sorted values covering round(selectivity * n) of them.
    RangePredicate sel_window(const std::vector<float>& sorted, double selectivity,
                              Rng& rng) const {
        auto target = std::size_t(std::llround(selectivity * double(spec_.n)));
        target = std::max<std::size_t>(target, 1);
        target = std::min(target, sorted.size());
        std::size_t start = std::size_t(rng.index(sorted.size() - target + 1));
        return RangePredicate{"sel", double(sorted[start]), double(sorted[start + target - 1])};
    }

    WorkloadSpec spec_;
    std::vector<double> noise_;
    RecordStore records_;
    Matrix means_;
    Matrix fcenters_;
    std::vector<std::size_t> assign_;
    std::vector<std::vector<float>> sel_by_cluster_;
    std::vector<float> sel_global_;
};

}  // namespace

SyntheticWorkload gen_synthetic(const WorkloadSpec& spec) {
    Generator gen(spec);
    Rng q_rng(spec.seed ^ kQuerySeedSalt);
    SyntheticWorkload wl;
    wl.records = gen.records();
    wl.queries = gen.base_queries(spec.selectivity, q_rng);
    return wl;
}

std::size_t count_matches(const RecordStore& records, const QueryFilter& qf) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (qf.matches(records.schema, records.filters.row(i))) ++count;
    return count;
}

namespace {

std::vector<std::uint32_t> top_k_by_score(const NormalizedStore& data,
                                          std::span<const double> q_norm,
                                          const std::vector<std::vector<double>>& probes,
                                          double lambda, std::size_t k) {
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto id = std::uint32_t(i);
        double vs = similarity(data.norm_vectors.row(i), q_norm);
        auto rec_f = data.norm_filters.row(i);
        std::size_t best = 0;
        double best_d = l2_sq(rec_f, std::span<const double>(probes[0]));
        for (std::size_t p = 1; p < probes.size(); ++p) {
            double d = l2_sq(rec_f, std::span<const double>(probes[p]));
            if (d < best_d) {
                best_d = d;
                best = p;
            }
        }
        double fs = similarity(rec_f, std::span<const double>(probes[best]));
        scored.emplace_back(combined_score(lambda, vs, fs), id);
    }
    std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(take), scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    std::vector<std::uint32_t> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(scored[i].second);
    return ids;
}

}  // namespace

std::vector<std::uint32_t> exhaustive_oracle(const NormalizedStore& data,
                                             std::span<const double> q_norm,
                                             std::span<const double> f_q, double lambda,
                                             std::size_t k) {
    std::vector<std::vector<double>> probes{std::vector<double>(f_q.begin(), f_q.end())};
    return top_k_by_score(data, q_norm, probes, lambda, k);
}

std::vector<std::uint32_t> oracle_for_query(const NormalizedStore& data, std::span<const float> q,
                                            const QueryFilter& qf, const SearchParams& params) {
    auto q_norm = normalize_vector(data.stats, q);
    auto probes = data.normalized_probes(qf, params.probes);
    return top_k_by_score(data, q_norm, probes, params.lambda, params.k);
}

double recall_at_k(std::span<const std::uint32_t> result_ids,
                   std::span<const std::uint32_t> oracle_ids) {
    if (oracle_ids.empty()) throw std::invalid_argument("oracle id set is empty");
    std::vector<std::uint32_t> oracle_sorted(oracle_ids.begin(), oracle_ids.end());
    std::sort(oracle_sorted.begin(), oracle_sorted.end());
    std::size_t hit = 0;
    for (std::uint32_t id : result_ids)
        if (std::binary_search(oracle_sorted.begin(), oracle_sorted.end(), id)) ++hit;
    return double(hit) / double(oracle_ids.size());
}

Method method_from_name(const std::string& name) {
    if (name == "fcvi-bf") return Method::fcvi_bf;
    if (name == "fcvi-hnsw") return Method::fcvi_hnsw;
    if (name == "prefilter") return Method::prefilter;
    if (name == "postfilter-bf") return Method::postfilter_bf;
    if (name == "postfilter-hnsw") return Method::postfilter_hnsw;
    throw std::invalid_argument("unknown method: " + name);
}

const char* method_name(Method m) {
    switch (m) {
        case Method::fcvi_bf: return "fcvi-bf";
        case Method::fcvi_hnsw: return "fcvi-hnsw";
        case Method::prefilter: return "prefilter";
        case Method::postfilter_bf: return "postfilter-bf";
        case Method::postfilter_hnsw: return "postfilter-hnsw";
    }
    return "?";
}

std::vector<Method> methods_from_csv(const std::string& csv) {
    std::vector<Method> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(method_from_name(tok));
    if (out.empty()) throw std::invalid_argument("no methods given");
    return out;
}

namespace {

struct MethodColumns {
    const char* method;
    const char* backend;
};

MethodColumns columns_for(Method m) {
    switch (m) {
        case Method::fcvi_bf: return {"fcvi", "bf"};
        case Method::fcvi_hnsw: return {"fcvi", "hnsw"};
        case Method::prefilter: return {"prefilter", "exact"};
        case Method::postfilter_bf: return {"postfilter", "bf"};
        case Method::postfilter_hnsw: return {"postfilter", "hnsw"};
    }
    return {"?", "?"};
}

struct Instance {
    Method method;
    std::optional<FcviIndex> fcvi;
    std::optional<BaselineIndex> baseline;
    double build_s = 0.0;

    QueryResult run(const BenchQuery& q, const BenchParams& p) const {
        switch (method) {
            case Method::fcvi_bf:
            case Method::fcvi_hnsw:
                return fcvi->query(q.vector, q.filter, p.search);
            case Method::prefilter:
                return prefilter_search(*baseline, q.vector, q.filter, p.search);
            case Method::postfilter_bf:
            case Method::postfilter_hnsw:
                return postfilter_search(*baseline, q.vector, q.filter, p.search, p.oversample);
        }
        throw std::logic_error("unreachable");
    }

    std::size_t index_bytes() const {
        if (fcvi) return fcvi->backend().memory_bytes();
        if (method == Method::prefilter)
            return baseline->data().store.vectors.data.size() * sizeof(float);
        return baseline->backend().memory_bytes();
    }

    void insert(std::span<const float> v, std::span<const float> f) {
        if (fcvi)
            fcvi->insert(v, f);
        else
            baseline->insert(v, f);
    }
};

Instance build_instance(Method method, const RecordStore& records, const BenchParams& p) {
    Instance inst;
    inst.method = method;
    auto t0 = steady_clock::now();
    switch (method) {
        case Method::fcvi_bf:
        case Method::fcvi_hnsw: {
            BuildOptions opts;
            opts.variant = p.variant;
            opts.alpha = p.alpha;
            opts.seed = p.seed;
            opts.clusters_k = p.clusters_k;
            opts.backend =
                method == Method::fcvi_bf ? BackendChoice::brute_force : BackendChoice::hnsw;
            opts.hnsw = p.hnsw;
            inst.fcvi = FcviIndex::build(records, opts);
            break;
        }
        case Method::prefilter:
            inst.baseline =
                BaselineIndex::build(records, BackendChoice::brute_force, p.hnsw, p.seed);
            break;
        case Method::postfilter_bf:
            inst.baseline =
                BaselineIndex::build(records, BackendChoice::brute_force, p.hnsw, p.seed);
            break;
        case Method::postfilter_hnsw:
            inst.baseline = BaselineIndex::build(records, BackendChoice::hnsw, p.hnsw, p.seed);
            break;
    }
    inst.build_s = std::chrono::duration<double>(steady_clock::now() - t0).count();
    return inst;
}

BenchReport measure(std::vector<Instance>& instances, const NormalizedStore& oracle_data,
                    const std::vector<BenchQuery>& queries, const BenchParams& params) {
    BenchReport report;
    report.n = oracle_data.size();
    report.query_count = queries.size();
    report.k = params.search.k;
    report.lambda = params.search.lambda;
    report.alpha = params.alpha;
    report.environment = std::string("single-threaded, gcc ") + __VERSION__;

    std::vector<std::vector<std::uint32_t>> truth;
    truth.reserve(queries.size());
    for (const auto& q : queries)
        truth.push_back(oracle_for_query(oracle_data, q.vector, q.filter, params.search));

    for (auto& inst : instances) {
        std::size_t warm = std::min<std::size_t>(10, queries.size());
        for (std::size_t i = 0; i < warm; ++i) (void)inst.run(queries[i], params);

        std::vector<double> latencies_ms;
        latencies_ms.reserve(queries.size());
        double recall_sum = 0.0;
        auto loop_start = steady_clock::now();
        for (std::size_t i = 0; i < queries.size(); ++i) {
            auto t0 = steady_clock::now();
            QueryResult r = inst.run(queries[i], params);
            auto t1 = steady_clock::now();
            latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            std::vector<std::uint32_t> ids;
            ids.reserve(r.hits.size());
            for (const auto& h : r.hits) ids.push_back(h.id);
            recall_sum += recall_at_k(ids, truth[i]);
        }
        double wall_s = std::chrono::duration<double>(steady_clock::now() - loop_start).count();

        std::vector<double> sorted = latencies_ms;
        std::sort(sorted.begin(), sorted.end());
        double mean = 0.0;
        for (double x : latencies_ms) mean += x;
        mean /= double(latencies_ms.size());
        double median = sorted[sorted.size() / 2];
        std::size_t p95_idx = std::min(sorted.size() - 1, std::size_t(std::ceil(0.95 * double(sorted.size()))) - 1);
        double p95 = sorted[p95_idx];

        MethodRow row;
        auto cols = columns_for(inst.method);
        row.method = cols.method;
        row.backend = cols.backend;
        row.recall_at_k = recall_sum / double(queries.size());
        row.mean_ms = mean;
        row.median_ms = median;
        row.p95_ms = p95;
        row.qps = double(queries.size()) / wall_s;
        row.build_s = inst.build_s;
        row.index_bytes = inst.index_bytes();
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace

BenchReport run_benchmark(const RecordStore& records, const std::vector<BenchQuery>& queries,
                          const std::vector<Method>& methods, const BenchParams& params) {
    if (methods.empty()) throw std::invalid_argument("no methods given");
    if (queries.empty()) throw std::invalid_argument("no queries given");
    std::vector<Instance> instances;
    instances.reserve(methods.size());
    for (Method m : methods) instances.push_back(build_instance(m, records, params));
    NormalizedStore oracle_data = NormalizedStore::fit(records);
    return measure(instances, oracle_data, queries, params);
}

std::string BenchReport::to_csv() const {
    std::ostringstream os;
    os << "method,backend,recall_at_k,mean_ms,median_ms,p95_ms,qps,build_s,index_bytes\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.4f,%.4f,%.4f,%.2f,%.3f,%zu\n",
                      r.method.c_str(), r.backend.c_str(), r.recall_at_k, r.mean_ms, r.median_ms,
                      r.p95_ms, r.qps, r.build_s, r.index_bytes);
        os << buf;
    }
    return os.str();
}

namespace {

json row_to_json(const MethodRow& r) {
    json j;
    j["method"] = r.method;
    j["backend"] = r.backend;
    j["recall_at_k"] = r.recall_at_k;
    j["mean_ms"] = r.mean_ms;
    j["median_ms"] = r.median_ms;
    j["p95_ms"] = r.p95_ms;
    j["qps"] = r.qps;
    j["build_s"] = r.build_s;
    j["index_bytes"] = r.index_bytes;
    return j;
}

json report_to_json(const BenchReport& rep) {
    json j;
    j["n"] = rep.n;
    j["query_count"] = rep.query_count;
    j["k"] = rep.k;
    j["lambda"] = rep.lambda;
    j["alpha"] = rep.alpha;
    j["environment"] = rep.environment;
    json rows = json::array();
    for (const auto& r : rep.rows) rows.push_back(row_to_json(r));
    j["rows"] = rows;
    return j;
}

}  // namespace

std::string BenchReport::to_json_string(int indent) const {
    return report_to_json(*this).dump(indent);
}

ShiftReport run_shift_scenario(const WorkloadSpec& spec, const std::vector<Method>& methods,
                               const BenchParams& params) {
    spec.validate();
    if (spec.shift == ShiftScenario::none)
        throw std::invalid_argument("shift scenario must not be 'none'");
    if (methods.empty()) throw std::invalid_argument("no methods given");

    Generator gen(spec);
    Rng q_rng(spec.seed ^ kQuerySeedSalt);
    Rng shift_rng(spec.seed ^ kShiftSeedSalt);

    std::vector<BenchQuery> before_queries;
    if (spec.shift == ShiftScenario::query_shift)
        before_queries = gen.exact_queries(q_rng);
    else
        before_queries = gen.base_queries(spec.selectivity, q_rng);

    std::vector<Instance> instances;
    instances.reserve(methods.size());
    for (Method m : methods) instances.push_back(build_instance(m, gen.records(), params));
    NormalizedStore oracle_data = NormalizedStore::fit(gen.records());

    ShiftReport report;
    report.scenario = spec.shift;
    report.before = measure(instances, oracle_data, before_queries, params);

    std::vector<BenchQuery> after_queries;
    switch (spec.shift) {
        case ShiftScenario::filter_shift: {
            // selectivity low -> high: the matched fraction grows 5x
            double after_sel = std::min(spec.selectivity * 5.0, 0.79 / double(spec.clusters));
            if (after_sel <= spec.selectivity)
                throw std::invalid_argument(
                    "filter_shift needs headroom: lower the base selectivity");
            after_queries = gen.base_queries(after_sel, shift_rng);
            break;
        }
        case ShiftScenario::query_shift:
            after_queries = gen.multi_range_queries(shift_rng);
            break;
        case ShiftScenario::vector_shift: {
            auto nc = gen.new_component(spec.n / 5, shift_rng);
            for (std::size_t i = 0; i < nc.vectors.rows; ++i) {
                for (auto& inst : instances) inst.insert(nc.vectors.row(i), nc.filters.row(i));
                oracle_data.append(nc.vectors.row(i), nc.filters.row(i));
            }
            after_queries = std::move(nc.queries);
            break;
        }
        case ShiftScenario::none: break;
    }

    report.after = measure(instances, oracle_data, after_queries, params);

    for (std::size_t i = 0; i < report.before.rows.size(); ++i) {
        const auto& b = report.before.rows[i];
        const auto& a = report.after.rows[i];
        ShiftRow d;
        d.method = b.method;
        d.backend = b.backend;
        d.latency_increase_pct = (a.mean_ms - b.mean_ms) / b.mean_ms * 100.0;
        d.recall_before = b.recall_at_k;
        d.recall_after = a.recall_at_k;
        d.recall_degradation_pts = (b.recall_at_k - a.recall_at_k) * 100.0;
        report.deltas.push_back(std::move(d));
    }
    return report;
}

std::string ShiftReport::to_csv() const {
    std::ostringstream os;
    os << "method,backend,lat_increase_pct,recall_before,recall_after,recall_degradation_pts\n";
    char buf[256];
    for (const auto& d : deltas) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.2f,%.6f,%.6f,%.4f\n", d.method.c_str(),
                      d.backend.c_str(), d.latency_increase_pct, d.recall_before, d.recall_after,
                      d.recall_degradation_pts);
        os << buf;
    }
    return os.str();
}

std::string ShiftReport::to_json_string(int indent) const {
    json j;
    j["scenario"] = scenario_name(scenario);
    j["before"] = report_to_json(before);
    j["after"] = report_to_json(after);
    json deltas_json = json::array();
    for (const auto& d : deltas) {
        json e;
        e["method"] = d.method;
        e["backend"] = d.backend;
        e["lat_increase_pct"] = d.latency_increase_pct;
        e["recall_before"] = d.recall_before;
        e["recall_after"] = d.recall_after;
        e["recall_degradation_pts"] = d.recall_degradation_pts;
        deltas_json.push_back(e);
    }
    j["deltas"] = deltas_json;
    return j.dump(indent);
}

}  // namespace fcvi::bench
