#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pidlr {

using Vec = std::vector<float>;

// Dense row-major float matrix. Storage is float32; reductions accumulate in
// double.
struct Mat {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<float> a;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0f) {}

    float* row(size_t r) { return a.data() + r * cols; }
    const float* row(size_t r) const { return a.data() + r * cols; }
    float& at(size_t r, size_t c) { return a[r * cols + c]; }
    float at(size_t r, size_t c) const { return a[r * cols + c]; }
    size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0f); }

    friend bool operator==(const Mat&, const Mat&) = default;
};

inline double dot(std::span<const float> x, std::span<const float> y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += static_cast<double>(x[i]) * y[i];
    return s;
}

inline double norm(std::span<const float> x) { return std::sqrt(dot(x, x)); }

// y = M x
inline void matvec(const Mat& m, std::span<const float> x, std::span<float> y) {
    assert(x.size() == m.cols && y.size() == m.rows);
    for (size_t r = 0; r < m.rows; ++r) y[r] = static_cast<float>(dot({m.row(r), m.cols}, x));
}

// y += M^T x
inline void matvec_t_add(const Mat& m, std::span<const float> x, std::span<float> y) {
    assert(x.size() == m.rows && y.size() == m.cols);
    for (size_t r = 0; r < m.rows; ++r) {
        const float* row = m.row(r);
        float xr = x[r];
        for (size_t c = 0; c < m.cols; ++c) y[c] += xr * row[c];
    }
}

// M += x y^T  (outer product accumulation)
inline void outer_add(Mat& m, std::span<const float> x, std::span<const float> y) {
    assert(x.size() == m.rows && y.size() == m.cols);
    for (size_t r = 0; r < m.rows; ++r) {
        float* row = m.row(r);
        float xr = x[r];
        for (size_t c = 0; c < m.cols; ++c) row[c] += xr * y[c];
    }
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
    assert(x.size() == y.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(const Mat& m) {
    for (float v : m.a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace pidlr
