#include "fcvi/engine.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <set>

#include "fcvi/brute_force.hpp"

namespace fcvi {

void RecordStore::validate() const {
    schema.validate();
    if (vectors.rows == 0) throw std::invalid_argument("empty dataset");
    if (filters.rows != vectors.rows)
        throw std::invalid_argument("vector/filter row count mismatch");
    if (filters.cols != schema.encoded_dim())
        throw std::invalid_argument("filter width does not match schema");
}

NormalizedStore NormalizedStore::fit(RecordStore s, double epsilon) {
    s.validate();
    NormalizedStore out;
    out.stats = fit_normalizer(s.vectors, s.filters, epsilon);
    out.store = std::move(s);
    out.norm_vectors = Matrix(out.store.size(), out.store.dim());
    out.norm_filters = Matrix(out.store.size(), out.store.filter_dim());
    for (std::size_t i = 0; i < out.store.size(); ++i) {
        auto v = normalize_vector(out.stats, out.store.vectors.row(i));
        auto f = normalize_filter(out.stats, out.store.filters.row(i));
        std::copy(v.begin(), v.end(), out.norm_vectors.row(i).begin());
        std::copy(f.begin(), f.end(), out.norm_filters.row(i).begin());
    }
    return out;
}

NormalizedStore NormalizedStore::with_stats(RecordStore s, NormStats stats) {
    s.validate();
    NormalizedStore out;
    out.stats = std::move(stats);
    out.store = std::move(s);
    out.norm_vectors = Matrix(out.store.size(), out.store.dim());
    out.norm_filters = Matrix(out.store.size(), out.store.filter_dim());
    for (std::size_t i = 0; i < out.store.size(); ++i) {
        auto v = normalize_vector(out.stats, out.store.vectors.row(i));
        auto f = normalize_filter(out.stats, out.store.filters.row(i));
        std::copy(v.begin(), v.end(), out.norm_vectors.row(i).begin());
        std::copy(f.begin(), f.end(), out.norm_filters.row(i).begin());
    }
    return out;
}

void NormalizedStore::append(std::span<const float> v, std::span<const float> f) {
    store.vectors.append_row(v);
    store.filters.append_row(f);
    auto nv = normalize_vector(stats, v);
    auto nf = normalize_filter(stats, f);
    norm_vectors.append_row(std::span<const double>(nv));
    norm_filters.append_row(std::span<const double>(nf));
}

std::vector<std::vector<double>> NormalizedStore::normalized_probes(const QueryFilter& qf,
                                                                    std::size_t probes,
                                                                    bool* trimmed) const {
    ProbeExpansion exp = encode_query_filter(store.schema, qf, probes);
    if (trimmed) *trimmed = exp.trimmed;
    std::vector<std::vector<double>> out;
    std::set<std::vector<double>> seen;
    for (const auto& probe : exp.probes) {
        auto z = normalize_filter(stats, std::span<const double>(probe.values));
        for (std::size_t j = 0; j < z.size(); ++j)
            if (!probe.constrained[j]) z[j] = 0.0;
        if (seen.insert(z).second) out.push_back(std::move(z));
    }
    return out;
}

void SearchParams::validate() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (lambda == 0.0)
        throw std::invalid_argument(
            "lambda=0 requests filter-only scoring; use prefilter search instead");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must be in [0, 1]");
    if (c <= 0.0) throw std::invalid_argument("c must be > 0");
    if (probes < 1) throw std::invalid_argument("probes must be >= 1");
}

std::size_t compute_k_prime(std::size_t k, double lambda, double alpha, double c, std::size_t n) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (lambda == 0.0)
        throw std::invalid_argument(
            "lambda=0 requests filter-only scoring; use prefilter search instead");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must be in (0, 1]");
    if (alpha < 1.0) throw std::invalid_argument("alpha must be >= 1");
    if (c <= 0.0) throw std::invalid_argument("c must be > 0");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    double raw = c * (double(k) / lambda) / (alpha * alpha);
    auto k_prime = std::size_t(std::ceil(raw - 1e-9));
    k_prime = std::max(k_prime, k);
    k_prime = std::min(k_prime, n);
    return k_prime;
}

double similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("similarity: dimension mismatch");
    return 1.0 / (1.0 + l2(a, b));
}

namespace {

void sort_hits(std::vector<ScoredHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

}  // namespace

FcviIndex FcviIndex::build(RecordStore store, const BuildOptions& opts) {
    FcviIndex idx;
    idx.data_ = NormalizedStore::fit(std::move(store));

    std::optional<Matrix> centers = opts.centers;
    if (opts.variant == TransformVariant::cluster && !centers) {
        if (opts.clusters_k == 0)
            throw std::invalid_argument("cluster variant requires a cluster count");
        centers = fit_filter_clusters(idx.data_.norm_filters, opts.clusters_k, opts.seed);
    }
    idx.config_ = make_transform_config(opts.variant, opts.alpha, idx.data_.store.dim(),
                                        idx.data_.store.filter_dim(), opts.seed,
                                        std::move(centers), opts.projection);
    idx.backend_choice_ = opts.backend;
    idx.hnsw_params_ = opts.hnsw;

    std::size_t n = idx.data_.size();
    idx.transformed_ = FloatMatrix(n, idx.config_.transformed_dim());
    for (std::size_t i = 0; i < n; ++i) {
        auto t = psi_apply(idx.config_, idx.data_.norm_vectors.row(i), idx.data_.norm_filters.row(i));
        auto dst = idx.transformed_.row(i);
        for (std::size_t j = 0; j < t.size(); ++j) dst[j] = float(t[j]);
    }

    idx.backend_ = make_backend(opts.backend, idx.config_.transformed_dim(), opts.hnsw, opts.seed);
    idx.backend_->build(idx.transformed_);
    idx.deleted_.assign(n, false);
    return idx;
}

FcviIndex FcviIndex::assemble(NormalizedStore data, TransformConfig config,
                              BackendChoice backend_choice, HnswParams hnsw_params,
                              FloatMatrix transformed, std::unique_ptr<IndexBackend> backend) {
    config.validate();
    FcviIndex idx;
    idx.data_ = std::move(data);
    idx.config_ = std::move(config);
    idx.backend_choice_ = backend_choice;
    idx.hnsw_params_ = hnsw_params;
    idx.transformed_ = std::move(transformed);
    if (backend) {
        idx.backend_ = std::move(backend);
    } else {
        idx.backend_ =
            make_backend(backend_choice, idx.config_.transformed_dim(), hnsw_params, idx.config_.rng_seed);
        idx.backend_->build(idx.transformed_);
    }
    idx.deleted_.assign(idx.data_.size(), false);
    if (backend_choice == BackendChoice::hnsw) {
        auto* graph = dynamic_cast<const HnswIndex*>(idx.backend_.get());
        if (graph)
            for (std::size_t i = 0; i < idx.data_.size(); ++i)
                idx.deleted_[i] = graph->is_deleted(std::uint32_t(i));
    }
    return idx;
}

std::vector<double> FcviIndex::transform_offset(std::span<const double> f_norm) const {
    std::string key(reinterpret_cast<const char*>(f_norm.data()), f_norm.size() * sizeof(double));
    {
        std::shared_lock lock(cache_->mutex);
        auto it = cache_->map.find(key);
        if (it != cache_->map.end()) return it->second;
    }
    auto offset = psi_offset(config_, f_norm);
    {
        std::unique_lock lock(cache_->mutex);
        if (cache_->map.size() < 4096) cache_->map.emplace(std::move(key), offset);
    }
    return offset;
}

std::size_t FcviIndex::offset_cache_size() const {
    std::shared_lock lock(cache_->mutex);
    return cache_->map.size();
}

std::vector<float> FcviIndex::transform_query(std::span<const double> q_norm,
                                              std::span<const double> f_norm) const {
    auto offset = transform_offset(f_norm);
    std::vector<double> base;
    if (config_.variant == TransformVariant::embedding) {
        base.assign(q_norm.begin(), q_norm.end());
    } else {
        base = zero_pad(q_norm, config_.padded_dim);
    }
    std::vector<float> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = float(base[i] + offset[i]);
    return out;
}

QueryResult FcviIndex::query(std::span<const float> q, const QueryFilter& qf,
                             const SearchParams& params) const {
    params.validate();
    if (q.size() != data_.store.dim()) throw std::invalid_argument("query dimension mismatch");
    QueryResult result;
    if (backend_->size() == 0) return result;
    qf.validate(data_.store.schema);

    bool trimmed = false;
    auto probes = data_.normalized_probes(qf, params.probes, &trimmed);
    result.probes_trimmed = trimmed;
    result.probe_count = probes.size();

    auto q_norm = normalize_vector(data_.stats, q);
    std::size_t k_prime =
        compute_k_prime(params.k, params.lambda, config_.alpha, params.c, backend_->size());
    result.k_prime = k_prime;

    std::set<std::uint32_t> candidates;
    for (const auto& probe : probes) {
        auto q_t = transform_query(q_norm, probe);
        std::size_t effort = std::max(params.ef_search, k_prime);
        for (const auto& hit : backend_->search(q_t, k_prime, effort)) candidates.insert(hit.id);
    }

    result.hits.reserve(candidates.size());
    for (std::uint32_t id : candidates) {
        double vs = similarity(data_.norm_vectors.row(id), std::span<const double>(q_norm));
        // filter similarity against the probe nearest to the record's filter
        auto rec_f = data_.norm_filters.row(id);
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
        result.hits.push_back({id, vs, fs, combined_score(params.lambda, vs, fs)});
    }
    sort_hits(result.hits);
    if (result.hits.size() > params.k) result.hits.resize(params.k);
    return result;
}

std::uint32_t FcviIndex::insert(std::span<const float> v, std::span<const float> f_encoded) {
    if (v.size() != data_.store.dim()) throw std::invalid_argument("insert: vector dimension mismatch");
    if (f_encoded.size() != data_.store.filter_dim())
        throw std::invalid_argument("insert: filter dimension mismatch");
    auto id = std::uint32_t(data_.size());
    data_.append(v, f_encoded);
    auto t = psi_apply(config_, data_.norm_vectors.row(id), data_.norm_filters.row(id));
    std::vector<float> t32(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) t32[j] = float(t[j]);
    transformed_.append_row(std::span<const float>(t32));
    backend_->insert(id, t32);
    deleted_.push_back(false);
    return id;
}

std::uint32_t FcviIndex::insert(std::span<const float> v, const RawAttributes& raw) {
    auto encoded = encode_filter_values(data_.store.schema, raw);
    std::vector<float> f32(encoded.size());
    for (std::size_t j = 0; j < encoded.size(); ++j) f32[j] = float(encoded[j]);
    return insert(v, f32);
}

void FcviIndex::mark_deleted(std::uint32_t id) {
    if (id >= deleted_.size() || deleted_[id])
        throw std::invalid_argument("unknown id: " + std::to_string(id));
    backend_->mark_deleted(id);
    deleted_[id] = true;
}

QueryResult multi_probe_query(const FcviIndex& index, std::span<const float> q,
                              const QueryFilter& qf, const SearchParams& params) {
    if (!qf.has_expanding_predicate(params.probes))
        throw std::invalid_argument("multi_probe_query requires an expanding predicate");
    return index.query(q, qf, params);
}

BaselineIndex BaselineIndex::build(RecordStore store, BackendChoice backend, HnswParams hnsw,
                                   std::uint64_t seed) {
    BaselineIndex base;
    base.data_ = NormalizedStore::fit(std::move(store));
    base.backend_choice_ = backend;
    base.hnsw_params_ = hnsw;
    base.backend_ = make_backend(backend, base.data_.store.dim(), hnsw, seed);
    base.backend_->build(narrow(base.data_.norm_vectors));
    return base;
}

std::uint32_t BaselineIndex::insert(std::span<const float> v, std::span<const float> f_encoded) {
    auto id = std::uint32_t(data_.size());
    data_.append(v, f_encoded);
    auto nv = data_.norm_vectors.row(id);
    std::vector<float> nv32(nv.size());
    for (std::size_t j = 0; j < nv.size(); ++j) nv32[j] = float(nv[j]);
    backend_->insert(id, nv32);
    return id;
}

namespace {

ScoredHit rescore(const NormalizedStore& data, std::uint32_t id, std::span<const double> q_norm,
                  std::span<const double> f_q, double lambda) {
    double vs = similarity(data.norm_vectors.row(id), q_norm);
    double fs = similarity(data.norm_filters.row(id), f_q);
    return {id, vs, fs, combined_score(lambda, vs, fs)};
}

}  // namespace

QueryResult prefilter_search(const BaselineIndex& base, std::span<const float> q,
                             const QueryFilter& qf, const SearchParams& params) {
    params.validate();
    const auto& data = base.data_;
    if (q.size() != data.store.dim()) throw std::invalid_argument("query dimension mismatch");
    qf.validate(data.store.schema);

    auto q_norm = normalize_vector(data.stats, q);
    auto f_q = data.normalized_probes(qf, 1).front();

    // crisp selection, then exact k-NN inside the subset
    std::vector<std::pair<double, std::uint32_t>> subset;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!qf.matches(data.store.schema, data.store.filters.row(i))) continue;
        subset.emplace_back(l2_sq(data.norm_vectors.row(std::uint32_t(i)), std::span<const double>(q_norm)),
                            std::uint32_t(i));
    }
    std::size_t take = std::min(params.k, subset.size());
    std::partial_sort(subset.begin(), subset.begin() + std::ptrdiff_t(take), subset.end());
    subset.resize(take);

    QueryResult result;
    result.probe_count = 1;
    for (auto& [d2, id] : subset)
        result.hits.push_back(rescore(data, id, q_norm, f_q, params.lambda));
    sort_hits(result.hits);
    return result;
}

QueryResult postfilter_search(const BaselineIndex& base, std::span<const float> q,
                              const QueryFilter& qf, const SearchParams& params,
                              std::size_t oversample) {
    params.validate();
    if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
    const auto& data = base.data_;
    if (q.size() != data.store.dim()) throw std::invalid_argument("query dimension mismatch");
    qf.validate(data.store.schema);

    auto q_norm = normalize_vector(data.stats, q);
    auto f_q = data.normalized_probes(qf, 1).front();
    std::vector<float> q32(q_norm.size());
    for (std::size_t j = 0; j < q_norm.size(); ++j) q32[j] = float(q_norm[j]);

    std::size_t fetch = oversample * params.k;
    auto hits = base.backend_->search(q32, fetch, std::max(params.ef_search, fetch));

    QueryResult result;
    result.probe_count = 1;
    for (const auto& hit : hits) {
        if (!qf.matches(data.store.schema, data.store.filters.row(hit.id))) continue;
        result.hits.push_back(rescore(data, hit.id, q_norm, f_q, params.lambda));
        if (result.hits.size() == params.k) break;
    }
    sort_hits(result.hits);
    return result;
}

}  // namespace fcvi
