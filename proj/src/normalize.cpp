#include "fcvi/normalize.hpp"

#include <string>

namespace fcvi {

namespace {

void fit_columns(const FloatMatrix& m, const char* what, std::vector<double>& mean,
                 std::vector<double>& stdev, double epsilon) {
    std::size_t n = m.rows, d = m.cols;
    mean.assign(d, 0.0);
    stdev.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(row[j]))
                throw std::invalid_argument(std::string("non-finite ") + what + " value at row " +
                                            std::to_string(i) + " dim " + std::to_string(j));
            mean[j] += double(row[j]);
        }
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= double(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            double diff = double(row[j]) - mean[j];
            stdev[j] += diff * diff;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        double s = std::sqrt(stdev[j] / double(n));
        stdev[j] = s < epsilon ? epsilon : s;
    }
}

std::vector<double> zscore(std::span<const double> mean, std::span<const double> stdev,
                           std::span<const float> x, const char* what) {
    if (x.size() != mean.size())
        throw std::invalid_argument(std::string(what) + " dimension mismatch: got " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(mean.size()));
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (double(x[j]) - mean[j]) / stdev[j];
    return out;
}

}  // namespace

NormStats fit_normalizer(const FloatMatrix& vectors, const FloatMatrix& filters, double epsilon) {
    if (vectors.rows == 0) throw std::invalid_argument("empty dataset");
    if (filters.rows != vectors.rows)
        throw std::invalid_argument("vector/filter row count mismatch");
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    NormStats s;
    s.epsilon = epsilon;
    fit_columns(vectors, "vector", s.vector_mean, s.vector_std, epsilon);
    fit_columns(filters, "filter", s.filter_mean, s.filter_std, epsilon);
    return s;
}

std::vector<double> normalize_vector(const NormStats& stats, std::span<const float> v) {
    return zscore(stats.vector_mean, stats.vector_std, v, "vector");
}

std::vector<double> normalize_filter(const NormStats& stats, std::span<const float> f) {
    return zscore(stats.filter_mean, stats.filter_std, f, "filter");
}

std::vector<double> normalize_filter(const NormStats& stats, std::span<const double> f) {
    if (f.size() != stats.filter_mean.size())
        throw std::invalid_argument("filter dimension mismatch: got " + std::to_string(f.size()) +
                                    ", expected " + std::to_string(stats.filter_mean.size()));
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        out[j] = (f[j] - stats.filter_mean[j]) / stats.filter_std[j];
    return out;
}

std::pair<std::vector<double>, std::vector<double>> apply_normalizer(const NormStats& stats,
                                                                     std::span<const float> v,
                                                                     std::span<const float> f) {
    return {normalize_vector(stats, v), normalize_filter(stats, f)};
}

std::vector<double> denormalize_vector(const NormStats& stats, std::span<const double> z) {
    if (z.size() != stats.vector_mean.size())
        throw std::invalid_argument("vector dimension mismatch");
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        out[j] = z[j] * stats.vector_std[j] + stats.vector_mean[j];
    return out;
}

}  // namespace fcvi
