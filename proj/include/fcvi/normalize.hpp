#pragma once

#include <utility>

#include "fcvi/core.hpp"

namespace fcvi {

/// Per-dimension z-scoring statistics for one dataset's vectors and filters.
/// Every stored std is floored at epsilon so normalization never divides by ~0.
struct NormStats {
    std::vector<double> vector_mean;
    std::vector<double> vector_std;
    std::vector<double> filter_mean;
    std::vector<double> filter_std;
    double epsilon = 1e-9;

    std::size_t vector_dim() const { return vector_mean.size(); }
    std::size_t filter_dim() const { return filter_mean.size(); }

    bool operator==(const NormStats&) const = default;
};

/// Computes per-dimension means and population stds; stds below epsilon are
/// replaced by epsilon (degenerate dimensions normalize to exactly zero).
NormStats fit_normalizer(const FloatMatrix& vectors, const FloatMatrix& filters, double epsilon = 1e-9);

std::vector<double> normalize_vector(const NormStats& stats, std::span<const float> v);
std::vector<double> normalize_filter(const NormStats& stats, std::span<const float> f);
std::vector<double> normalize_filter(const NormStats& stats, std::span<const double> f);

std::pair<std::vector<double>, std::vector<double>> apply_normalizer(const NormStats& stats,
                                                                     std::span<const float> v,
                                                                     std::span<const float> f);

/// Inverse of normalize: x * std + mean.
std::vector<double> denormalize_vector(const NormStats& stats, std::span<const double> z);

}  // namespace fcvi
