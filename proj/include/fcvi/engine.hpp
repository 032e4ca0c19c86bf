#pragma once

#include <memory>
#include <shared_mutex>
#include <unordered_map>

#include "fcvi/hnsw.hpp"
#include "fcvi/index_backend.hpp"
#include "fcvi/normalize.hpp"
#include "fcvi/schema.hpp"
#include "fcvi/transform.hpp"

namespace fcvi {

/// Original vectors and encoded (pre-normalization) filter vectors for one
/// dataset, with the schema that produced the filter layout.
struct RecordStore {
    FilterSchema schema;
    FloatMatrix vectors;  // n x d
    FloatMatrix filters;  // n x m, numeric slots raw, categorical blocks one-hot

    std::size_t size() const { return vectors.rows; }
    std::size_t dim() const { return vectors.cols; }
    std::size_t filter_dim() const { return filters.cols; }

    void validate() const;
};

/// A record store plus its normalization statistics and z-scored views — the
/// space in which transformation, retrieval and scoring all happen.
struct NormalizedStore {
    RecordStore store;
    NormStats stats;
    Matrix norm_vectors;  // n x d
    Matrix norm_filters;  // n x m

    static NormalizedStore fit(RecordStore s, double epsilon = 1e-9);
    static NormalizedStore with_stats(RecordStore s, NormStats stats);

    std::size_t size() const { return store.size(); }

    void append(std::span<const float> v, std::span<const float> f);

    /// Probe filter vectors for a query, normalized, with the slots of
    /// unconstrained attributes zeroed (the per-dimension mean: no preference).
    /// Deduplicated, order preserved.
    std::vector<std::vector<double>> normalized_probes(const QueryFilter& qf, std::size_t probes,
                                                       bool* trimmed = nullptr) const;
};

struct SearchParams {
    std::size_t k = 10;
    double lambda = 0.5;     // balance between vector and filter similarity
    double c = 4.0;          // retrieval-size constant for k'
    std::size_t probes = 1;  // representatives per range predicate
    std::size_t ef_search = 64;

    void validate() const;
};

struct ScoredHit {
    std::uint32_t id = 0;
    double vector_sim = 0.0;
    double filter_sim = 0.0;
    double score = 0.0;  // lambda * vector_sim + (1 - lambda) * filter_sim
};

struct QueryResult {
    std::vector<ScoredHit> hits;
    std::size_t probe_count = 0;
    std::size_t k_prime = 0;
    bool probes_trimmed = false;
};

/// Retrieval size k' = clamp(ceil(c * (k/lambda) * (1/alpha^2)), k, n).
std::size_t compute_k_prime(std::size_t k, double lambda, double alpha, double c, std::size_t n);

/// Bounded similarity 1 / (1 + Euclidean distance); 1 iff a == b.
double similarity(std::span<const double> a, std::span<const double> b);

inline double combined_score(double lambda, double vector_sim, double filter_sim) {
    return lambda * vector_sim + (1.0 - lambda) * filter_sim;
}

struct BuildOptions {
    TransformVariant variant = TransformVariant::partition;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    std::size_t clusters_k = 0;        // cluster variant: k-means size over normalized filters
    std::optional<Matrix> centers;     // cluster variant: pre-fit centers override clusters_k
    std::optional<Matrix> projection;  // embedding variant; generated when absent
    BackendChoice backend = BackendChoice::brute_force;
    HnswParams hnsw;
};

/// The queryable artifact: transformed vectors behind an ANN backend, plus the
/// normalized originals used for re-scoring.
class FcviIndex {
public:
    static FcviIndex build(RecordStore store, const BuildOptions& opts);

    /// Reassembles an index from persisted parts; backend may be null, in which
    /// case it is rebuilt from the transformed vectors with the stored seed.
    static FcviIndex assemble(NormalizedStore data, TransformConfig config,
                              BackendChoice backend_choice, HnswParams hnsw_params,
                              FloatMatrix transformed, std::unique_ptr<IndexBackend> backend);

    /// Multi-probe transform-retrieve-rescore per the online pipeline. Exact
    /// predicates give one probe; expanding predicates give several.
    QueryResult query(std::span<const float> q, const QueryFilter& qf,
                      const SearchParams& params) const;

    /// Appends one record, transforming with the build-time statistics.
    /// Returns the new id.
    std::uint32_t insert(std::span<const float> v, std::span<const float> f_encoded);
    std::uint32_t insert(std::span<const float> v, const RawAttributes& raw);
    void mark_deleted(std::uint32_t id);
    bool is_deleted(std::uint32_t id) const { return deleted_[id]; }

    const NormalizedStore& data() const { return data_; }
    const RecordStore& store() const { return data_.store; }
    const NormStats& stats() const { return data_.stats; }
    const TransformConfig& config() const { return config_; }
    const FloatMatrix& transformed() const { return transformed_; }
    const IndexBackend& backend() const { return *backend_; }
    IndexBackend& backend() { return *backend_; }
    BackendChoice backend_choice() const { return backend_choice_; }
    const HnswParams& hnsw_params() const { return hnsw_params_; }
    std::size_t size() const { return backend_->size(); }

    /// Transform offset for a normalized filter vector, memoized.
    std::vector<double> transform_offset(std::span<const double> f_norm) const;
    std::size_t offset_cache_size() const;

    /// psi applied to a normalized query vector for one probe.
    std::vector<float> transform_query(std::span<const double> q_norm,
                                       std::span<const double> f_norm) const;

private:
    FcviIndex() = default;

    struct OffsetCache {
        mutable std::shared_mutex mutex;
        std::unordered_map<std::string, std::vector<double>> map;
    };

    NormalizedStore data_;
    TransformConfig config_;
    BackendChoice backend_choice_ = BackendChoice::brute_force;
    HnswParams hnsw_params_;
    std::unique_ptr<IndexBackend> backend_;
    FloatMatrix transformed_;
    std::vector<bool> deleted_;
    std::unique_ptr<OffsetCache> cache_ = std::make_unique<OffsetCache>();
};

/// Context shared by the pre-/post-filtering baselines: an index over the
/// normalized raw vectors (no transformation) plus the normalized originals,
/// so all methods score in the same space.
class BaselineIndex {
public:
    static BaselineIndex build(RecordStore store, BackendChoice backend, HnswParams hnsw,
                               std::uint64_t seed);

    std::uint32_t insert(std::span<const float> v, std::span<const float> f_encoded);

    const NormalizedStore& data() const { return data_; }
    BackendChoice backend_choice() const { return backend_choice_; }
    const IndexBackend& backend() const { return *backend_; }

    friend QueryResult prefilter_search(const BaselineIndex& base, std::span<const float> q,
                                        const QueryFilter& qf, const SearchParams& params);
    friend QueryResult postfilter_search(const BaselineIndex& base, std::span<const float> q,
                                         const QueryFilter& qf, const SearchParams& params,
                                         std::size_t oversample);

private:
    BaselineIndex() = default;

    NormalizedStore data_;
    BackendChoice backend_choice_ = BackendChoice::brute_force;
    HnswParams hnsw_params_;
    std::unique_ptr<IndexBackend> backend_;
};

/// query() restricted to filters with at least one expanding predicate (range
/// with probes > 1, or a multi-valued one-of).
QueryResult multi_probe_query(const FcviIndex& index, std::span<const float> q,
                              const QueryFilter& qf, const SearchParams& params);

/// Crisp predicate selection first (numeric ranges inclusive), then exact k-NN
/// by normalized vector distance within the subset; hits carry combined scores
/// for comparability.
QueryResult prefilter_search(const BaselineIndex& base, std::span<const float> q,
                             const QueryFilter& qf, const SearchParams& params);

/// Vector search first (oversample * k candidates), crisp predicate filtering
/// after; may return fewer than k hits.
QueryResult postfilter_search(const BaselineIndex& base, std::span<const float> q,
                              const QueryFilter& qf, const SearchParams& params,
                              std::size_t oversample);

}  // namespace fcvi
