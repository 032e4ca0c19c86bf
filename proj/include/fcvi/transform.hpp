#pragma once

#include <optional>

#include "fcvi/core.hpp"
#include "fcvi/schema.hpp"

namespace fcvi {

enum class TransformVariant { partition, cluster, embedding };

const char* variant_name(TransformVariant v);
TransformVariant variant_from_name(const std::string& name);

/// Everything that determines the filter-to-vector transformation: the variant,
/// the filter-influence scale alpha (>= 1), dimensions, and the variant's data
/// (cluster centers or a projection matrix).
struct TransformConfig {
    TransformVariant variant = TransformVariant::partition;
    double alpha = 1.0;
    std::size_t original_dim = 0;  // d
    std::size_t filter_dim = 0;    // m
    std::size_t padded_dim = 0;    // d*: smallest multiple of m >= d
    std::optional<Matrix> cluster_centers;  // k x m, cluster variant
    std::optional<Matrix> projection;       // d x m, embedding variant
    std::uint64_t rng_seed = 0;

    /// Output dimension of the transformation: d for embedding, d* otherwise.
    std::size_t transformed_dim() const {
        return variant == TransformVariant::embedding ? original_dim : padded_dim;
    }

    void validate() const;

    std::string to_json_string(int indent = -1) const;
    static TransformConfig from_json_string(const std::string& text);
};

/// Smallest multiple of m that is >= d.
std::size_t padded_dim_for(std::size_t d, std::size_t m);

/// Zero-pads v to target_dim (a no-op when already that long).
std::vector<double> zero_pad(std::span<const double> v, std::size_t target_dim);

/// Fills a fresh config with derived dimensions and variant data. For the
/// embedding variant without an explicit W, generates seeded Gaussian entries
/// scaled by 1/sqrt(m).
TransformConfig make_transform_config(TransformVariant variant, double alpha, std::size_t d,
                                      std::size_t m, std::uint64_t seed,
                                      std::optional<Matrix> cluster_centers = std::nullopt,
                                      std::optional<Matrix> projection = std::nullopt);

/// Encodes raw attribute values into the m-dim filter vector: numeric attributes
/// occupy one scalar slot, categorical attributes a one-hot block, concatenated
/// in schema order.
std::vector<double> encode_filter_values(const FilterSchema& schema, const RawAttributes& raw);

/// One probe filter vector plus the slots actually constrained by the query.
struct ProbeVector {
    std::vector<double> values;        // m-dim, raw (pre-normalization) space
    std::vector<bool> constrained;     // per-slot: touched by some predicate
};

struct ProbeExpansion {
    std::vector<ProbeVector> probes;
    bool trimmed = false;  // Cartesian expansion exceeded the cap
};

/// Maximum number of probe vectors a query may expand to.
inline constexpr std::size_t kProbeCap = 32;

/// Expands query predicates into probe filter vectors. Exact predicates fill a
/// single value; a range expands to r evenly spaced representatives across
/// [lo, hi] including both endpoints (r=1 uses the center); one-of expands to
/// one probe per value. Expanding predicates combine by Cartesian product,
/// trimmed to kProbeCap by stratified even selection; duplicates are removed.
/// Slots of attributes without predicates are left 0 and reported unconstrained.
ProbeExpansion encode_query_filter(const FilterSchema& schema, const QueryFilter& qf,
                                   std::size_t probes);

/// Partition transform: v (already padded to d*) is split into d*/m segments and
/// alpha*f is subtracted from each.
std::vector<double> psi_partition(std::span<const double> v, std::span<const double> f,
                                  double alpha);

/// Cluster transform: snaps f to the nearest center (ties to the lowest index),
/// then applies the partition transform with that center.
std::vector<double> psi_cluster(std::span<const double> v, std::span<const double> f, double alpha,
                                const Matrix& centers);

/// Index of the center nearest to f; ties resolve to the lowest index.
std::size_t nearest_center(std::span<const double> f, const Matrix& centers);

/// Embedding transform: v - alpha * (W * f); no padding involved.
std::vector<double> psi_embedding(std::span<const double> v, std::span<const double> f,
                                  double alpha, const Matrix& W);

/// Applies the configured variant. v must be in normalized space and unpadded;
/// padding happens internally for partition/cluster.
std::vector<double> psi_apply(const TransformConfig& config, std::span<const double> v,
                              std::span<const double> f);

/// The additive offset psi adds to the padded/original vector for filter f,
/// i.e. psi(v,f,alpha) = expand(v) + offset(f). Tiled -alpha*f (or center) for
/// partition/cluster, -alpha*W*f for embedding.
std::vector<double> psi_offset(const TransformConfig& config, std::span<const double> f);

/// k-means with k-means++ seeding over filter rows; at most 25 Lloyd iterations
/// or until the largest centroid shift drops below 1e-4. Deterministic for a
/// fixed seed.
Matrix fit_filter_clusters(const Matrix& filters, std::size_t k, std::uint64_t seed);

/// Threshold above which groups with different filters separate completely:
/// raw alpha* = sqrt((2*D_v + D_v^2) / ((d*/m)*delta_f^2 - 2*D_v*delta_f)),
/// where D_v bounds the within-group vector diameter and delta_f the filter
/// gap. Errors when (d*/m)*delta_f <= 2*D_v. Callers clamp to >= 1.
double separation_alpha(double vector_diameter, double filter_gap, std::size_t padded_dim,
                        std::size_t filter_dim);

/// Alpha aligning the transformed geometry with the combined score:
/// max(1, sqrt((1-lambda)/lambda)) for 0 < lambda <= 1.
double optimal_alpha(double lambda);

}  // namespace fcvi
