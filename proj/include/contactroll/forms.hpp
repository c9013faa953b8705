#ifndef CONTACTROLL_FORMS_HPP
#define CONTACTROLL_FORMS_HPP

// Pointwise exterior calculus over the parameter space (u,v) or (u,v,w),
// with scalar-jet or vector-jet coefficients.
//
// Conventions, fixed once for the whole library:
//   * direction t=0,1,2 means du,dv,dw; a 1-form stores one coefficient per
//     direction, a 2-form one per ordered pair (du^dv, du^dw, dv^dw);
//   * (a ^ b)_{st}   = a_s b_t - a_t b_s            (pairing applied),
//   * (a x^ b)_{st}  = a_s x b_t - a_t x b_s, which is symmetric in (a,b)
//     and satisfies (w x^ w)_{st} = 2 w_s x w_t;
//   * d f = sum_t (d f / d t) dt over the form directions only, so a 2-space
//     form drags no dw term even when the jets carry a w variable.

#include <array>

#include "contactroll/jets.hpp"
#include "contactroll/kernel.hpp"

namespace contactroll {

// ordered pairs: index 0 -> (0,1), 1 -> (0,2), 2 -> (1,2)
constexpr int kPairFirst[3] = {0, 0, 1};
constexpr int kPairSecond[3] = {1, 2, 2};

template <class C>
struct Form1 {
    int ndirs = 2;             // 2 for (u,v), 3 for (u,v,w)
    std::array<C, 3> c{};      // coefficient of du, dv, dw

    Form1() = default;
    explicit Form1(int dirs) : ndirs(dirs) {}

    Form1 operator+(const Form1& o) const {
        Form1 r(check(o));
        for (int t = 0; t < ndirs; ++t) r.c[t] = c[t] + o.c[t];
        return r;
    }
    Form1 operator-(const Form1& o) const {
        Form1 r(check(o));
        for (int t = 0; t < ndirs; ++t) r.c[t] = c[t] - o.c[t];
        return r;
    }
    Form1 operator-() const {
        Form1 r(ndirs);
        for (int t = 0; t < ndirs; ++t) r.c[t] = -c[t];
        return r;
    }
    template <class S>
    Form1 scaled(const S& s) const {
        Form1 r(ndirs);
        for (int t = 0; t < ndirs; ++t) r.c[t] = c[t] * s;
        return r;
    }

    int check(const Form1& o) const {
        if (ndirs != o.ndirs) throw jet_error("1-form parameter-space mismatch");
        return ndirs;
    }
};

template <class C>
struct Form2 {
    int ndirs = 2;
    std::array<C, 3> c{};      // coefficient of du^dv, du^dw, dv^dw

    Form2() = default;
    explicit Form2(int dirs) : ndirs(dirs) {}

    int npairs() const { return ndirs == 2 ? 1 : 3; }

    Form2 operator+(const Form2& o) const {
        Form2 r(check(o));
        for (int p = 0; p < npairs(); ++p) r.c[p] = c[p] + o.c[p];
        return r;
    }
    Form2 operator-(const Form2& o) const {
        Form2 r(check(o));
        for (int p = 0; p < npairs(); ++p) r.c[p] = c[p] - o.c[p];
        return r;
    }
    template <class S>
    Form2 scaled(const S& s) const {
        Form2 r(ndirs);
        for (int p = 0; p < npairs(); ++p) r.c[p] = c[p] * s;
        return r;
    }

    int check(const Form2& o) const {
        if (ndirs != o.ndirs) throw jet_error("2-form parameter-space mismatch");
        return ndirs;
    }
};

using Form1J = Form1<Jet>;    // scalar-valued
using Form1V = Form1<Vec3J>;  // vector-valued
using Form2J = Form2<Jet>;
using Form2V = Form2<Vec3J>;

// --- wedges -----------------------------------------------------------------

// generic wedge with an arbitrary bilinear pairing on the coefficients
template <class A, class B, class P>
auto wedge_with(const Form1<A>& a, const Form1<B>& b, P pair)
    -> Form2<decltype(pair(a.c[0], b.c[0]))> {
    if (a.ndirs != b.ndirs) throw jet_error("wedge: parameter-space mismatch");
    Form2<decltype(pair(a.c[0], b.c[0]))> r(a.ndirs);
    for (int p = 0; p < r.npairs(); ++p) {
        const int s = kPairFirst[p], t = kPairSecond[p];
        r.c[p] = pair(a.c[s], b.c[t]) - pair(a.c[t], b.c[s]);
    }
    return r;
}

inline Form2J wedge(const Form1J& a, const Form1J& b) {
    return wedge_with(a, b, [](const Jet& x, const Jet& y) { return x * y; });
}
inline Form2J wedge_dot(const Form1V& a, const Form1V& b) {
    return wedge_with(a, b, [](const Vec3J& x, const Vec3J& y) { return dot(x, y); });
}
// the x^ product; symmetric in its arguments
inline Form2V wedge_cross(const Form1V& a, const Form1V& b) {
    return wedge_with(a, b, [](const Vec3J& x, const Vec3J& y) { return cross(x, y); });
}

// --- exterior derivative ------------------------------------------------------

template <class C>
Form1<C> ext_d(const C& field, int ndirs) {
    Form1<C> r(ndirs);
    for (int t = 0; t < ndirs; ++t) r.c[t] = derive(field, t);
    return r;
}

template <class C>
Form2<C> ext_d(const Form1<C>& w) {
    Form2<C> r(w.ndirs);
    for (int p = 0; p < r.npairs(); ++p) {
        const int s = kPairFirst[p], t = kPairSecond[p];
        r.c[p] = derive(w.c[t], s) - derive(w.c[s], t);
    }
    return r;
}

// --- pointwise pairings with a fixed vector -----------------------------------

inline Form1J dot(const Vec3J& a, const Form1V& w) {
    Form1J r(w.ndirs);
    for (int t = 0; t < w.ndirs; ++t) r.c[t] = dot(a, w.c[t]);
    return r;
}
inline Form1V cross(const Vec3J& a, const Form1V& w) {
    Form1V r(w.ndirs);
    for (int t = 0; t < w.ndirs; ++t) r.c[t] = cross(a, w.c[t]);
    return r;
}
inline Form1V cross(const Form1V& w, const Vec3J& a) {
    Form1V r(w.ndirs);
    for (int t = 0; t < w.ndirs; ++t) r.c[t] = cross(w.c[t], a);
    return r;
}
inline Form1V operator*(const Vec3J& a, const Form1J& w) {
    Form1V r(w.ndirs);
    for (int t = 0; t < w.ndirs; ++t) r.c[t] = a * w.c[t];
    return r;
}
inline Form2J dot(const Vec3J& a, const Form2V& w) {
    Form2J r(w.ndirs);
    for (int p = 0; p < w.npairs(); ++p) r.c[p] = dot(a, w.c[p]);
    return r;
}

// symmetric product of two uv 1-forms contracting the vector index:
// components (uu, uv, vv) of a_j^T b_k + a_k^T b_j over j,k in {u,v}
inline std::array<Jet, 3> sym_dot(const Form1V& a, const Form1V& b) {
    if (a.ndirs != 2 || b.ndirs != 2) throw jet_error("sym_dot wants uv-space forms");
    std::array<Jet, 3> r;
    r[0] = dot(a.c[0], b.c[0]) * cplx(2);
    r[1] = dot(a.c[0], b.c[1]) + dot(a.c[1], b.c[0]);
    r[2] = dot(a.c[1], b.c[1]) * cplx(2);
    return r;
}

// --- the fundamental product identity ------------------------------------------
//
// a^T w1 ^ b^T w2 == ((a x b) x w1 + (b^T w1) a)^T ^ w2
//                 == (a x b)^T (w1 x^ w2) + b^T w1 ^ a^T w2
// for any fixed vectors a,b and vector-valued 1-forms w1,w2. Returns the two
// residual 2-forms (left minus each right-hand side).
inline std::array<Form2J, 2> fund_identity_residual(const Vec3J& a, const Vec3J& b,
                                                    const Form1V& w1, const Form1V& w2) {
    const Form2J lhs = wedge(dot(a, w1), dot(b, w2));
    const Form1V mid = cross(cross(a, b), w1) + a * dot(b, w1);
    const Form2J rhs1 = wedge_dot(mid, w2);
    const Form2J rhs2 = dot(cross(a, b), wedge_cross(w1, w2)) + wedge(dot(b, w1), dot(a, w2));
    return {lhs - rhs1, lhs - rhs2};
}

// --- residual scaling helpers ---------------------------------------------------

inline double value_max_abs(const Form1J& w) {
    double m = 0;
    for (int t = 0; t < w.ndirs; ++t) m = std::max(m, std::abs(w.c[t].value()));
    return m;
}
inline double value_max_abs(const Form2J& w) {
    double m = 0;
    for (int p = 0; p < w.npairs(); ++p) m = std::max(m, std::abs(w.c[p].value()));
    return m;
}
inline double value_max_abs(const Form1V& w) {
    double m = 0;
    for (int t = 0; t < w.ndirs; ++t) m = std::max(m, max_abs(value(w.c[t])));
    return m;
}
inline double value_max_abs(const Form2V& w) {
    double m = 0;
    for (int p = 0; p < w.npairs(); ++p) m = std::max(m, max_abs(value(w.c[p])));
    return m;
}

}  // namespace contactroll

#endif  // CONTACTROLL_FORMS_HPP
