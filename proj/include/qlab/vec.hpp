#pragma once

#include <array>
#include <cmath>

namespace qlab {

// Position or momentum in configuration space. Unused components (dim = 1) stay zero.
using Vec = std::array<double, 2>;

// Row-major 2x2 matrix, used for Jacobians of characteristic maps.
using Mat = std::array<double, 4>;

inline Vec operator+(Vec a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(Vec a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }
inline Vec operator*(const Vec& a, double s) { return {s * a[0], s * a[1]}; }
inline Vec& operator+=(Vec& a, const Vec& b) {
    a[0] += b[0];
    a[1] += b[1];
    return a;
}

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Mat identity_mat() { return {1.0, 0.0, 0.0, 1.0}; }
inline Mat operator+(const Mat& a, const Mat& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Mat operator*(double s, const Mat& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
inline Mat matmul(const Mat& a, const Mat& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
inline Vec matvec(const Mat& a, const Vec& v) { return {a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]}; }

// Determinant of the leading dim x dim block.
inline double det(const Mat& a, int dim) { return dim == 1 ? a[0] : a[0] * a[3] - a[1] * a[2]; }

inline bool finite(const Vec& a) { return std::isfinite(a[0]) && std::isfinite(a[1]); }

}  // namespace qlab
