#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sfd/errors.hpp"

namespace sfd {

using Vec = std::vector<double>;

// Dense row-major matrix, 64-bit throughout.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }

    Vec row_vec(std::size_t i) const { return Vec(row(i), row(i) + cols); }

    bool operator==(const Matrix& o) const = default;
};

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Matrix& m) {
    for (double x : m.data)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double squared_distance(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

inline double euclidean_distance(const double* a, const double* b, std::size_t d) {
    return std::sqrt(squared_distance(a, b, d));
}

}  // namespace sfd
