#pragma once

#include <array>
#include <cmath>

#include "dynframe/common.hpp"

namespace dynframe {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major: m[r][c]

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n <= 0.0) throw NumericError("normalized: zero vector");
    return (1.0 / n) * a;
}

inline Vec3 matvec(const Mat3& m, const Vec3& v) {
    return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

inline Mat3 matmul3(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            r[i][j] = s;
        }
    return r;
}

inline Mat3 transposed(const Mat3& m) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = m[j][i];
    return r;
}

inline double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 inverse3(const Mat3& m) {
    double d = det3(m);
    if (std::abs(d) < 1e-300) throw NumericError("inverse3: singular matrix");
    double id = 1.0 / d;
    Mat3 r{};
    r[0][0] = id * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    r[0][1] = id * (m[0][2] * m[2][1] - m[0][1] * m[2][2]);
    r[0][2] = id * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
    r[1][0] = id * (m[1][2] * m[2][0] - m[1][0] * m[2][2]);
    r[1][1] = id * (m[0][0] * m[2][2] - m[0][2] * m[2][0]);
    r[1][2] = id * (m[0][2] * m[1][0] - m[0][0] * m[1][2]);
    r[2][0] = id * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    r[2][1] = id * (m[0][1] * m[2][0] - m[0][0] * m[2][1]);
    r[2][2] = id * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
    return r;
}

// three-way lexicographic comparison, -1 / 0 / +1
inline int lex_compare(const Vec3& a, const Vec3& b) {
    for (int k = 0; k < 3; ++k) {
        if (a[k] < b[k]) return -1;
        if (a[k] > b[k]) return 1;
    }
    return 0;
}

}  // namespace dynframe
