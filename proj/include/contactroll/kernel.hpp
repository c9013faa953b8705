#ifndef CONTACTROLL_KERNEL_HPP
#define CONTACTROLL_KERNEL_HPP

// Complexified Euclidean 3-space arithmetic: bilinear (non-conjugating) inner
// product, cross product, the hat isomorphism onto antisymmetric matrices,
// small dense 3x3 algebra, and rotation construction from frame pairs.
//
// Everything is templated on the scalar type so the same formulas run on
// plain complex numbers and on truncated Taylor jets.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace contactroll {

using cplx = std::complex<double>;

// Thrown when a geometric construction degenerates (singular frame,
// isotropic normal, lost regularity, ...). The message names the quantity.
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& what) : std::runtime_error(what) {}
};

// --- scalar helpers ------------------------------------------------------

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const cplx& z) { return std::abs(z); }

// Square root with the branch chosen to be the closer one to `hint`.
// Grid sweeps thread the previous value through as the hint so that
// branch cuts never introduce sign flips mid-grid.
inline cplx sqrt_matched(const cplx& z, const cplx& hint) {
    cplx s = std::sqrt(z);
    if (std::abs(s - hint) > std::abs(s + hint)) s = -s;
    return s;
}

// --- 3-vectors ------------------------------------------------------------

template <class T>
struct Vec3 {
    T x{}, y{}, z{};

    Vec3() = default;
    Vec3(T a, T b, T c) : x(std::move(a)), y(std::move(b)), z(std::move(c)) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

using Cx3 = Vec3<cplx>;

template <class T, class S>
inline Vec3<T> operator*(const Vec3<T>& v, const S& s) { return {v.x * s, v.y * s, v.z * s}; }
template <class T, class S>
inline Vec3<T> operator*(const S& s, const Vec3<T>& v) { return {v.x * s, v.y * s, v.z * s}; }
template <class T, class S>
inline Vec3<T> operator/(const Vec3<T>& v, const S& s) { return {v.x / s, v.y / s, v.z / s}; }

// Bilinear pairing a^T b — never conjugated, so isotropic vectors
// (dot(a,a) == 0 with a != 0) are representable values, not errors.
template <class T>
inline T dot(const Vec3<T>& a, const Vec3<T>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
inline Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
inline double max_abs(const Vec3<T>& v) {
    return std::max({magnitude(v.x), magnitude(v.y), magnitude(v.z)});
}

// --- 3x3 matrices ---------------------------------------------------------

template <class T>
struct Mat3 {
    // row-major: m[3*r + c]
    std::array<T, 9> m{};

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity() {
        Mat3 r;
        r.m[0] = T(1); r.m[4] = T(1); r.m[8] = T(1);
        return r;
    }
    static Mat3 from_columns(const Vec3<T>& c0, const Vec3<T>& c1, const Vec3<T>& c2) {
        Mat3 r;
        r.m = {c0.x, c1.x, c2.x,
               c0.y, c1.y, c2.y,
               c0.z, c1.z, c2.z};
        return r;
    }

    T& operator()(int r, int c) { return m[3 * r + c]; }
    const T& operator()(int r, int c) const { return m[3 * r + c]; }

    Vec3<T> col(int c) const { return {m[c], m[3 + c], m[6 + c]}; }
    Vec3<T> row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator-() const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = -m[i];
        return r;
    }
};

using Mat3c = Mat3<cplx>;

template <class T>
inline Mat3<T> operator*(const Mat3<T>& a, const Mat3<T>& b) {
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    return r;
}

template <class T>
inline Vec3<T> operator*(const Mat3<T>& a, const Vec3<T>& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

template <class T, class S>
inline Mat3<T> operator*(const Mat3<T>& a, const S& s) {
    Mat3<T> r;
    for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] * s;
    return r;
}

template <class T>
inline Mat3<T> transpose(const Mat3<T>& a) {
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

template <class T>
inline T det(const Mat3<T>& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
         - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
         + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

template <class T>
inline double max_abs(const Mat3<T>& a) {
    double s = 0;
    for (int i = 0; i < 9; ++i) s = std::max(s, magnitude(a.m[i]));
    return s;
}

// Adjugate-based inverse with a scale-aware singularity guard:
// |det| below 1e-13 x (max entry magnitude)^3 counts as singular.
template <class T>
inline Mat3<T> inverse(const Mat3<T>& a) {
    const T d = det(a);
    const double scale = max_abs(a);
    if (magnitude(d) < 1e-13 * scale * scale * scale)
        throw degeneracy_error("singular 3x3 matrix");
    Mat3<T> adj;
    adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
    adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
    adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
    adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    Mat3<T> r;
    for (int i = 0; i < 9; ++i) r.m[i] = adj.m[i] / d;
    return r;
}

// --- hat isomorphism onto antisymmetric matrices ---------------------------

// hat(x) is the unique antisymmetric matrix with hat(x)*y == cross(x, y).
template <class T>
inline Mat3<T> hat(const Vec3<T>& v) {
    Mat3<T> r;
    r(0, 1) = -v.z; r(0, 2) = v.y;
    r(1, 0) = v.z;  r(1, 2) = -v.x;
    r(2, 0) = -v.y; r(2, 1) = v.x;
    return r;
}

// Inverse of hat; rejects matrices that are not antisymmetric to within
// `tol` relative to the matrix scale.
template <class T>
inline Vec3<T> unhat(const Mat3<T>& a, double tol = 1e-8) {
    const double scale = 1.0 + max_abs(a);
    const double dev = std::max({magnitude(a(0, 0)), magnitude(a(1, 1)), magnitude(a(2, 2)),
                                 magnitude(a(0, 1) + a(1, 0)), magnitude(a(0, 2) + a(2, 0)),
                                 magnitude(a(1, 2) + a(2, 1))});
    if (dev > tol * scale) throw degeneracy_error("not in o3");
    return {a(2, 1), a(0, 2), a(1, 0)};
}

// Antisymmetric part projection, for use where the input is antisymmetric
// only up to roundoff and the caller wants the nearest clean representative.
template <class T>
inline Vec3<T> unhat_nearest(const Mat3<T>& a) {
    const T half(0.5);
    return {(a(2, 1) - a(1, 2)) * half, (a(0, 2) - a(2, 0)) * half, (a(1, 0) - a(0, 1)) * half};
}

// --- rotation from corresponding frames -------------------------------------

// The linear map sending frame F0 = (f0a, f0b, f0c) to F1 columnwise:
// R = [F1] [F0]^{-1}. Throws on a degenerate source frame.
template <class T>
inline Mat3<T> rotation_from_frames(const Vec3<T>& f0a, const Vec3<T>& f0b, const Vec3<T>& f0c,
                                    const Vec3<T>& f1a, const Vec3<T>& f1b, const Vec3<T>& f1c) {
    const Mat3<T> F0 = Mat3<T>::from_columns(f0a, f0b, f0c);
    const Mat3<T> F1 = Mat3<T>::from_columns(f1a, f1b, f1c);
    const T d = det(F0);
    const double scale = max_abs(F0);
    if (magnitude(d) < 1e-13 * scale * scale * scale)
        throw degeneracy_error("degenerate frame");
    return F1 * inverse(F0);
}

}  // namespace contactroll

#endif  // CONTACTROLL_KERNEL_HPP
