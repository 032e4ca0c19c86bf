#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcvi {

// Thrown for malformed user input (bad flags, invalid parameter ranges).
// The CLI maps it to exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for file/stream problems, including container corruption.
// The CLI maps it to exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Row-major dense matrix over a flat buffer.
template <typename T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}
    Mat(std::size_t r, std::size_t c, std::vector<T> d) : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != rows * cols) throw std::invalid_argument("Mat: buffer size mismatch");
    }

    std::span<const T> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    std::span<T> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    T& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool empty() const { return rows == 0; }

    void append_row(std::span<const T> r) {
        if (r.size() != cols) throw std::invalid_argument("Mat: appended row has wrong width");
        data.insert(data.end(), r.begin(), r.end());
        ++rows;
    }

    bool operator==(const Mat&) const = default;
};

using FloatMatrix = Mat<float>;
using Matrix = Mat<double>;

inline Matrix widen(const FloatMatrix& m) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<double>(m.data[i]);
    return out;
}

inline FloatMatrix narrow(const Matrix& m) {
    FloatMatrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<float>(m.data[i]);
    return out;
}

// Squared Euclidean distance, float storage with double accumulation.
inline double l2_sq(std::span<const float> a, std::span<const float> b) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        double d0 = double(a[i]) - double(b[i]);
        double d1 = double(a[i + 1]) - double(b[i + 1]);
        double d2 = double(a[i + 2]) - double(b[i + 2]);
        double d3 = double(a[i + 3]) - double(b[i + 3]);
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    for (; i < n; ++i) {
        double d = double(a[i]) - double(b[i]);
        acc0 += d * d;
    }
    return acc0 + acc1 + acc2 + acc3;
}

inline double l2_sq(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double l2(std::span<const double> a, std::span<const double> b) { return std::sqrt(l2_sq(a, b)); }
inline double l2(std::span<const float> a, std::span<const float> b) { return std::sqrt(l2_sq(a, b)); }

inline double norm_sq(std::span<const double> a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return acc;
}

/// Seeded RNG with hand-rolled draws so streams stay pinned across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return gen_() % n; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        double v = uniform01();
        double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * M_PI * v);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * v);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(std::span<const float> v) {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace fcvi
