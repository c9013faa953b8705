#pragma once
// Rolling-frame analysis of a contact-element distribution.
//
// Given a seed surface x0(u,v) and a tangential field V(u,v,w) with normal
// offset mm (see contact.hpp), the rolling of the second surface over the
// first induces a connection: three rotation vectors om_u, om_v, om_w, affine
// in three undetermined per-point constants (c1, c2, c4).  This header builds
// that frame, evaluates the structure identities it satisfies for every
// choice of constants, forms the curvature obstructions left over when the
// constants are allowed to vary, and runs the elimination cascade that
// reduces the first-order compatibility system for (c1, c2, c4) to scalar
// obstructions: first a rational constraint fixing c4, then second-order
// solvability of the remaining transport equations, and finally the scalar
// residuals (r5 / its quartic numerator, and the cross-derivative
// obstructions G1, G2) whose vanishing characterizes distributions that roll
// isometrically regardless of the seed's shape.
//
// Everything is evaluated pointwise on truncated jets; no symbolic algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "contactroll/contact.hpp"
#include "contactroll/forms.hpp"
#include "contactroll/report.hpp"

namespace contactroll {

// Constant-monomial slots of the curvature families: coefficients of
// {1, c1, c2, c4, c1^2 + c2*c4} respectively.
constexpr int kSlot0 = 0;
constexpr int kSlot1 = 1;
constexpr int kSlot2 = 2;
constexpr int kSlot4 = 3;
constexpr int kSlot124 = 4;

// Parameter-plane pairs the three curvature families live on:
// level 0 -> (u,v), level 1 -> (u,w), level 2 -> (w,v).
constexpr int kLevelUV = 0;
constexpr int kLevelUW = 1;
constexpr int kLevelWV = 2;

// A scalar residual value together with the additive magnitude of the terms
// that produced it (for relative-error reporting).
struct ScaledValue {
    cplx value{0.0, 0.0};
    double scale = 0.0;
};

// ---------------------------------------------------------------------------
// The frame
// ---------------------------------------------------------------------------

struct CorrFrame {
    ContactJet cj;

    Jet N;          // N0^T(Uu x Vv): oriented area of the shifted tangents
    Jet invN;
    Jet invmm;
    Jet Ut, Vt;     // transversal shape ratios N0^T(Vw x Uu)/N, N0^T(Vw x Vv)/N
    Jet Mcal;       // scalar mean factor of the homogeneous rotation parts
    Vec3J Z;        // auxiliary vector feeding the normal components

    Vec3J pU, pV;   // tangential projections of Uu, Vv
    Vec3J A, B;     // rotation vectors attached to the constants c1, c2
    Vec3J P;        // Vt*A + Ut*B: the constant-c1 slope of om_w
    Vec3J wu1, wv1, ww1;  // inhomogeneous rotation vectors

    // relative disagreement between the two independent constructions of ww1
    double ww1_cross_rel = 0.0;

    Vec3J Uhat, Vhat;     // (Uu x N0)/N and (Vv x N0)/N

    // Curvature vectors C[level][slot] of the three two-plane families and
    // their contractions with m, Uhat, Vhat.
    std::array<std::array<Vec3J, 5>, 3> C;
    std::array<std::array<Jet, 5>, 3> sm, sU, sV;
};

inline CorrFrame frame_build(const ContactJet& cj) {
    CorrFrame fb;
    fb.cj = cj;
    const Vec3J& N0 = fb.cj.sj.N0;
    const Vec3J& V = fb.cj.V;
    const Vec3J& Uu = fb.cj.Uu;
    const Vec3J& Vv = fb.cj.Vv;
    const Vec3J& Vw = fb.cj.Vw;
    const Jet& mm = fb.cj.mm;

    const double vscale = 1.0 + max_abs(value(V));
    if (std::abs(mm.value()) < 1e-12 * vscale)
        throw degeneracy_error("normal displacement component vanishes at this contact element");
    fb.N = dot(N0, cross(Uu, Vv));
    const double uvscale = (1.0 + max_abs(value(Uu))) * (1.0 + max_abs(value(Vv)));
    if (std::abs(fb.N.value()) < 1e-12 * uvscale)
        throw degeneracy_error("shifted tangent directions are linearly dependent");
    fb.invmm = reciprocal(mm);
    fb.invN = reciprocal(fb.N);

    const Vec3J N0u = derive(N0, 0), N0v = derive(N0, 1);
    const Vec3J Vu = derive(V, 0), Vvr = derive(V, 1);  // raw field derivatives

    fb.pU = cross(cross(N0, Uu), N0);
    fb.pV = cross(cross(N0, Vv), N0);
    const Jet vU = dot(N0, cross(V, Uu));
    const Jet vV = dot(N0, cross(V, Vv));
    fb.A = fb.pU + N0 * (vU * fb.invmm);
    fb.B = fb.pV + N0 * (vV * fb.invmm);
    fb.Ut = dot(N0, cross(Vw, Uu)) * fb.invN;
    fb.Vt = dot(N0, cross(Vw, Vv)) * fb.invN;
    fb.P = fb.A * fb.Vt + fb.B * fb.Ut;

    const Jet nn = dot(N0, cross(N0u, N0v));
    fb.Mcal = fb.invmm * cplx(-0.5) +
              (dot(N0u, Vvr) - dot(N0v, Vu) - mm * nn) * fb.invN * cplx(0.5);
    fb.Z = cross(N0, V) * (-nn) + N0u * (vV * fb.invmm) - N0v * (vU * fb.invmm);

    fb.wu1 = (fb.pU - N0 * (vU * fb.invmm)) * fb.Mcal + N0 * (dot(Uu, fb.Z) * fb.invN);
    fb.wv1 = (fb.pV - N0 * (vV * fb.invmm)) * fb.Mcal + N0 * (dot(Vv, fb.Z) * fb.invN);

    const Jet au = dot(N0u, Vw) * fb.invN;
    const Jet av = dot(N0v, Vw) * fb.invN;
    const Jet wxv = dot(N0, cross(Vw, V));
    const Jet coefU = -(fb.Mcal * fb.Vt + av + fb.Vt * fb.invmm);
    const Jet coefV = fb.Mcal * fb.Ut + au + fb.Ut * fb.invmm;
    fb.ww1 = fb.pU * coefU + fb.pV * coefV +
             N0 * (fb.Mcal * wxv * fb.invmm + au * vV * fb.invmm - av * vU * fb.invmm);
    // Independent construction through A, B and a pure normal part; the two
    // must agree identically.
    const Vec3J ww1_alt =
        fb.A * coefU + fb.B * coefV - N0 * (wxv * fb.invmm * fb.invmm);
    {
        const Vec3J d = fb.ww1 - ww1_alt;
        const double m1 = max_abs(value(fb.ww1)), m2 = max_abs(value(ww1_alt));
        fb.ww1_cross_rel = max_abs(value(d)) / (1.0 + std::max(m1, m2));
    }

    const Vec3J duA = derive(fb.A, 0), dvA = derive(fb.A, 1), dwA = derive(fb.A, 2);
    const Vec3J duB = derive(fb.B, 0), dvB = derive(fb.B, 1), dwB = derive(fb.B, 2);
    const Vec3J VtB = fb.B * fb.Vt;
    const Vec3J UtA = fb.A * fb.Ut;

    fb.C[kLevelUV][kSlot0] = derive(fb.wv1, 0) - derive(fb.wu1, 1) + cross(fb.wu1, fb.wv1);
    fb.C[kLevelUV][kSlot1] = -duB - dvA + cross(fb.A, fb.wv1) - cross(fb.wu1, fb.B);
    fb.C[kLevelUV][kSlot2] = -dvB + cross(fb.B, fb.wv1);
    fb.C[kLevelUV][kSlot4] = duA + cross(fb.wu1, fb.A);
    fb.C[kLevelUV][kSlot124] = -cross(fb.A, fb.B);

    fb.C[kLevelUW][kSlot0] = derive(fb.ww1, 0) - derive(fb.wu1, 2) + cross(fb.wu1, fb.ww1);
    fb.C[kLevelUW][kSlot1] = derive(fb.P, 0) - dwA + cross(fb.A, fb.ww1) + cross(fb.wu1, fb.P);
    fb.C[kLevelUW][kSlot2] =
        derive(VtB, 0) - dwB + cross(fb.B, fb.ww1) + cross(fb.wu1, fb.B) * fb.Vt;
    fb.C[kLevelUW][kSlot4] = -(derive(UtA, 0) + cross(fb.wu1, fb.A) * fb.Ut);
    fb.C[kLevelUW][kSlot124] = cross(fb.A, fb.B) * fb.Ut;

    fb.C[kLevelWV][kSlot0] = derive(fb.wv1, 2) - derive(fb.ww1, 1) + cross(fb.ww1, fb.wv1);
    fb.C[kLevelWV][kSlot1] =
        -dwB - derive(fb.P, 1) + cross(fb.P, fb.wv1) - cross(fb.ww1, fb.B);
    fb.C[kLevelWV][kSlot2] = -derive(VtB, 1) + cross(fb.B, fb.wv1) * fb.Vt;
    fb.C[kLevelWV][kSlot4] =
        dwA + derive(UtA, 1) - cross(fb.A, fb.wv1) * fb.Ut + cross(fb.ww1, fb.A);
    fb.C[kLevelWV][kSlot124] = -(cross(fb.A, fb.B) * fb.Vt);

    fb.Uhat = cross(Uu, N0) * fb.invN;
    fb.Vhat = cross(Vv, N0) * fb.invN;
    for (int lev = 0; lev < 3; ++lev) {
        for (int s = 0; s < 5; ++s) {
            fb.sm[lev][s] = dot(fb.cj.m, fb.C[lev][s]);
            fb.sU[lev][s] = dot(fb.Uhat, fb.C[lev][s]);
            fb.sV[lev][s] = dot(fb.Vhat, fb.C[lev][s]);
        }
    }
    return fb;
}

inline CorrFrame frame_build(const ContactField& f, double u, double v, double w,
                             std::array<int, 3> caps = {3, 3, 2}) {
    auto spec = make_jet_spec({caps[0], caps[1], caps[2]});
    return frame_build(contact_jet(f, spec, u, v, w));
}

// ---------------------------------------------------------------------------
// Structure identities of the frame (hold for every choice of constants)
// ---------------------------------------------------------------------------

namespace detail {

inline Form2V wedge_sv(const Form1J& a, const Form1V& b) {
    return wedge_with(a, b, [](const Jet& s, const Vec3J& v) { return v * s; });
}
inline Form2V wedge_vs(const Form1V& a, const Form1J& b) {
    return wedge_with(a, b, [](const Vec3J& v, const Jet& s) { return v * s; });
}
inline Form2V times_vec(const Form2J& a, const Vec3J& v) {
    Form2V r(a.ndirs);
    for (int p = 0; p < r.npairs(); ++p) r.c[p] = v * a.c[p];
    return r;
}

}  // namespace detail

// The three rotation vectors for a given choice of constants.  w_defect adds
// a multiple of A to om_w: a deliberate defect for negative controls.
struct Connection3 {
    Vec3J om_u, om_v, om_w;
};

inline Connection3 connection(const CorrFrame& fb, cplx c1, cplx c2, cplx c4,
                              cplx w_defect = cplx(0)) {
    Connection3 r;
    r.om_u = fb.A * c1 + fb.B * c2 + fb.wu1;
    r.om_v = fb.B * (-c1) + fb.A * c4 + fb.wv1;
    r.om_w = fb.P * c1 + fb.B * (fb.Vt * c2) - fb.A * (fb.Ut * c4) + fb.ww1;
    if (w_defect != cplx(0)) r.om_w = r.om_w + fb.A * w_defect;
    return r;
}

// The four pointwise identities the rolling connection satisfies for every
// choice of constants: two 2-form identities over (u,v) and two 1-form
// identities mixing the transversal direction.  Appends records tiom.1..4.
inline void tiom_residuals(ResidualReport& rep, const CorrFrame& fb, cplx c1, cplx c2,
                           cplx c4, double tol, cplx w_defect = cplx(0)) {
    const auto& cj = fb.cj;
    const Vec3J& N0 = cj.sj.N0;
    const Connection3 cn = connection(fb, c1, c2, c4, w_defect);

    Form1V om(2);
    om.c[0] = cn.om_u;
    om.c[1] = cn.om_v;
    Form1V dY(2);
    dY.c[0] = cj.Uu;
    dY.c[1] = cj.Vv;
    Form1V dN0(2);
    dN0.c[0] = derive(N0, 0);
    dN0.c[1] = derive(N0, 1);
    Form1V dV(2);
    dV.c[0] = derive(cj.V, 0);
    dV.c[1] = derive(cj.V, 1);

    // 1: scalar 2-form
    const Form2J t11 = dot(N0, wedge_cross(om, dY));
    const Form2J t12 = wedge_dot(dN0, dV);
    const Form2J t13 = dot(N0, wedge_cross(dY, dY)).scaled(fb.invmm * cplx(0.5));
    const Form2J t14 = dot(N0, wedge_cross(dN0, dN0)).scaled(cj.mm * cplx(0.5));
    const Form2J r1 = t11 - t12 + t13 + t14;
    rep.add("tiom.1", cj.u, cj.v, cj.w, value_max_abs(r1),
            value_max_abs(t11) + value_max_abs(t12) + value_max_abs(t13) +
                value_max_abs(t14),
            tol);

    // 2: vector 2-form
    const Form1J omN0 = dot(N0, om);
    const Form1V dYxN0 = cross(dY, N0);
    const Form1J vdY = dot(N0, cross(cj.V, dY));
    const Form1J vdY_m = vdY.scaled(fb.invmm);
    const Form2V t21 = detail::wedge_sv(omN0, dYxN0);
    const Form2V t22 = detail::wedge_vs(cross(om, N0), vdY_m);
    const Form2V t23 =
        detail::times_vec(dot(N0, wedge_cross(dN0, dN0)), cross(N0, cj.V))
            .scaled(cplx(0.5));
    const Form2V t24 = detail::wedge_vs(dN0, vdY_m);
    const Form2V r2 = t22 + t24 - t21 - t23;
    rep.add("tiom.2", cj.u, cj.v, cj.w, value_max_abs(r2),
            value_max_abs(t21) + value_max_abs(t22) + value_max_abs(t23) +
                value_max_abs(t24),
            tol);

    // 3: scalar 1-form
    const Form1J t31 = dot(N0, cross(cn.om_w, dY));
    const Form1J t32 = dot(N0, cross(om, cj.Vw));
    const Form1J t33 = dot(cj.Vw, dN0);
    const Form1J t34 = dot(N0, cross(cj.Vw, dY)).scaled(fb.invmm);
    const Form1J r3 = t31 - t32 + t33 + t34;
    rep.add("tiom.3", cj.u, cj.v, cj.w, value_max_abs(r3),
            value_max_abs(t31) + value_max_abs(t32) + value_max_abs(t33) +
                value_max_abs(t34),
            tol);

    // 4: vector 1-form
    const Jet wwN0 = dot(cn.om_w, N0);
    const Jet wxv = dot(N0, cross(cj.Vw, cj.V));
    const Form1V t41 = dYxN0.scaled(wwN0);
    const Form1V t42 = cross(cn.om_w, N0) * vdY_m;
    const Form1V t43 = cross(N0, cj.Vw) * omN0;
    const Form1V t44 = (cross(om, N0) + dN0).scaled(fb.invmm * wxv);
    const Form1V r4 = t42 + t44 - t41 - t43;
    rep.add("tiom.4", cj.u, cj.v, cj.w, value_max_abs(r4),
            value_max_abs(t41) + value_max_abs(t42) + value_max_abs(t43) +
                value_max_abs(t44),
            tol);
}

// ---------------------------------------------------------------------------
// Contractions of the curvature families
// ---------------------------------------------------------------------------

namespace detail {

// value of slot-combination s0 + c1 s1 + c2 s2 + c4 s4 + (c1^2+c2 c4) s124
inline cplx slot_combo(const std::array<Jet, 5>& s, cplx c1, cplx c2, cplx c4) {
    return s[kSlot0].value() + c1 * s[kSlot1].value() + c2 * s[kSlot2].value() +
           c4 * s[kSlot4].value() + (c1 * c1 + c2 * c4) * s[kSlot124].value();
}
inline double slot_combo_scale(const std::array<Jet, 5>& s, cplx c1, cplx c2, cplx c4) {
    return std::abs(s[kSlot0].value()) + std::abs(c1 * s[kSlot1].value()) +
           std::abs(c2 * s[kSlot2].value()) + std::abs(c4 * s[kSlot4].value()) +
           std::abs((c1 * c1 + c2 * c4) * s[kSlot124].value());
}

}  // namespace detail

// Slot-wise contraction identities of the three curvature families: the
// m-contractions of the transversal families are -Ut (resp. +Vt) times the
// (u,v) one, and the tangential combination of all three vanishes.  Appends
// mtcj.row2.j*, mtcj.row3.j*, mtcj.tan.j* (including the quadratic slot,
// which cancels by plain algebra).
inline void mtcj_checks(ResidualReport& rep, const CorrFrame& fb, double tol) {
    static constexpr int slots4[4] = {kSlot0, kSlot1, kSlot2, kSlot4};
    static constexpr const char* tag4[4] = {"j0", "j1", "j2", "j4"};
    const auto& cj = fb.cj;
    const cplx Ut = fb.Ut.value(), Vt = fb.Vt.value();
    for (int k = 0; k < 4; ++k) {
        const int j = slots4[k];
        const cplx a2 = fb.sm[kLevelUW][j].value();
        const cplx b2 = Ut * fb.sm[kLevelUV][j].value();
        rep.add(std::string("mtcj.row2.") + tag4[k], cj.u, cj.v, cj.w, std::abs(a2 + b2),
                std::abs(a2) + std::abs(b2), tol);
        const cplx a3 = fb.sm[kLevelWV][j].value();
        const cplx b3 = Vt * fb.sm[kLevelUV][j].value();
        rep.add(std::string("mtcj.row3.") + tag4[k], cj.u, cj.v, cj.w, std::abs(a3 - b3),
                std::abs(a3) + std::abs(b3), tol);
    }
    static constexpr int slots5[5] = {kSlot0, kSlot1, kSlot2, kSlot4, kSlot124};
    static constexpr const char* tag5[5] = {"j0", "j1", "j2", "j4", "j124"};
    const Vec3J WxN0 = cross(cj.Vw, cj.sj.N0);
    for (int k = 0; k < 5; ++k) {
        const int j = slots5[k];
        const cplx t1 = -dot(WxN0, fb.C[kLevelUV][j]).value();
        const cplx t2 = fb.N.value() * fb.sU[kLevelWV][j].value();
        const cplx t3 = fb.N.value() * fb.sV[kLevelUW][j].value();
        rep.add(std::string("mtcj.tan.") + tag5[k], cj.u, cj.v, cj.w,
                std::abs(t1 + t2 + t3), std::abs(t1) + std::abs(t2) + std::abs(t3), tol);
    }
}

// Scalar row-combinations of the nine contracted transport equations: the
// m-contraction of each level (combo1..3, polynomials in the constants) and
// the tangential cross-combination combo4 (identically zero).  Also checks
// the quadratic-slot coefficients against their closed forms.  Appends
// L3.prop2, L3.prop3, L3.combo4, L3.quad1..3.
inline void l3_checks(ResidualReport& rep, const CorrFrame& fb, cplx c1, cplx c2, cplx c4,
                      double tol_prop, double tol_quad, double tol_combo4) {
    const auto& cj = fb.cj;
    const cplx invmm = fb.invmm.value();
    const cplx Ut = fb.Ut.value(), Vt = fb.Vt.value(), N = fb.N.value();
    const cplx combo1 = detail::slot_combo(fb.sm[kLevelUV], c1, c2, c4) * invmm;
    const cplx combo2 = detail::slot_combo(fb.sm[kLevelUW], c1, c2, c4) * invmm;
    const cplx combo3 = detail::slot_combo(fb.sm[kLevelWV], c1, c2, c4) * invmm;
    rep.add("L3.prop2", cj.u, cj.v, cj.w, std::abs(combo2 + Ut * combo1),
            std::abs(combo2) + std::abs(Ut * combo1), tol_prop);
    rep.add("L3.prop3", cj.u, cj.v, cj.w, std::abs(combo3 - Vt * combo1),
            std::abs(combo3) + std::abs(Vt * combo1), tol_prop);

    // quadratic-slot coefficients against the closed form |m|^2 N / mm^2
    const cplx m2full = dot(cj.m, cj.m).value();  // bilinear square of m
    const cplx refq = m2full * N * invmm * invmm;
    const cplx q1 = fb.sm[kLevelUV][kSlot124].value() * invmm;
    const cplx q2 = fb.sm[kLevelUW][kSlot124].value() * invmm;
    const cplx q3 = fb.sm[kLevelWV][kSlot124].value() * invmm;
    rep.add("L3.quad1", cj.u, cj.v, cj.w, std::abs(q1 + refq),
            std::abs(q1) + std::abs(refq), tol_quad);
    rep.add("L3.quad2", cj.u, cj.v, cj.w, std::abs(q2 - Ut * refq),
            std::abs(q2) + std::abs(Ut * refq), tol_quad);
    rep.add("L3.quad3", cj.u, cj.v, cj.w, std::abs(q3 + Vt * refq),
            std::abs(q3) + std::abs(Vt * refq), tol_quad);

    // tangential cross-combination: identically zero for any field
    const cplx sU1 = detail::slot_combo(fb.sU[kLevelUV], c1, c2, c4);
    const cplx sV1 = detail::slot_combo(fb.sV[kLevelUV], c1, c2, c4);
    const cplx sU3 = detail::slot_combo(fb.sU[kLevelWV], c1, c2, c4);
    const cplx sV2 = detail::slot_combo(fb.sV[kLevelUW], c1, c2, c4);
    const cplx combo4 = sU3 + sV2 - Vt * sU1 + Ut * sV1;
    rep.add("L3.combo4", cj.u, cj.v, cj.w, std::abs(combo4),
            std::abs(sU3) + std::abs(sV2) + std::abs(Vt * sU1) + std::abs(Ut * sV1),
            tol_combo4);
}

// ---------------------------------------------------------------------------
// The ten first-order relations
// ---------------------------------------------------------------------------

// Values (with term-magnitude scales) of the ten scalar relations the
// distribution must satisfy pointwise; indices 0..9 follow the canonical
// order (see README's R1.* vocabulary).
inline std::array<ScaledValue, 10> r1_residuals(const CorrFrame& fb) {
    std::array<ScaledValue, 10> out;
    const Cx3 m = value(fb.cj.m);
    const Cx3 A = value(fb.A), B = value(fb.B), P = value(fb.P);
    const Cx3 wu1 = value(fb.wu1), wv1 = value(fb.wv1), ww1 = value(fb.ww1);
    const cplx Ut = fb.Ut.value(), Vt = fb.Vt.value();
    const Cx3 dUA = value(derive(fb.A, 0)), dVA = value(derive(fb.A, 1)),
              dWA = value(derive(fb.A, 2));
    const Cx3 dUB = value(derive(fb.B, 0)), dVB = value(derive(fb.B, 1)),
              dWB = value(derive(fb.B, 2));
    const Cx3 dUwv1 = value(derive(fb.wv1, 0)), dVwu1 = value(derive(fb.wu1, 1));
    const Cx3 dUww1 = value(derive(fb.ww1, 0)), dWwu1 = value(derive(fb.wu1, 2));
    const Cx3 dWwv1 = value(derive(fb.wv1, 2)), dVww1 = value(derive(fb.ww1, 1));
    const Cx3 dU_VtA = value(derive(fb.A * fb.Vt, 0));
    const Cx3 dV_UtB = value(derive(fb.B * fb.Ut, 1));
    const Cx3 dV_VtB = value(derive(fb.B * fb.Vt, 1));
    const Cx3 dU_UtA = value(derive(fb.A * fb.Ut, 0));
    const Cx3 WxN0 = value(cross(fb.cj.Vw, fb.cj.sj.N0));
    const Cx3 UxN0 = value(cross(fb.cj.Uu, fb.cj.sj.N0));
    const Cx3 VxN0 = value(cross(fb.cj.Vv, fb.cj.sj.N0));

    auto acc = [](ScaledValue& sv, const cplx& t) {
        sv.value += t;
        sv.scale += std::abs(t);
    };
    auto accd = [&](ScaledValue& sv, const Cx3& left, const Cx3& term) {
        acc(sv, dot(left, term));
    };

    // 1
    accd(out[0], m, dUA * Vt);
    accd(out[0], m, dVA * (-Ut));
    accd(out[0], m, -dWA);
    accd(out[0], m, cross(A, ww1));
    accd(out[0], m, cross(wu1, P));
    accd(out[0], m, cross(A, wv1) * Ut);
    accd(out[0], m, cross(wu1, B) * (-Ut));
    // 2
    accd(out[1], m, dUB * Vt);
    accd(out[1], m, dVB * (-Ut));
    accd(out[1], m, -dWB);
    accd(out[1], m, cross(B, ww1));
    accd(out[1], m, cross(wu1, B) * Vt);
    accd(out[1], m, cross(B, wv1) * Ut);
    // 3
    accd(out[2], m, dUww1 - dWwu1);
    accd(out[2], m, cross(wu1, ww1));
    accd(out[2], m, (dUwv1 - dVwu1) * Ut);
    accd(out[2], m, cross(wu1, wv1) * Ut);
    // 4 (the rotation vector attached to c1 in om_v is -B)
    accd(out[3], m, dUB * Vt);
    accd(out[3], m, dVB * (-Ut));
    accd(out[3], m, -dWB);
    accd(out[3], m, cross(P, wv1));
    accd(out[3], m, cross(ww1, -B));
    accd(out[3], m, cross(A, wv1) * (-Vt));
    accd(out[3], m, cross(wu1, B) * Vt);
    // 5
    accd(out[4], m, dUA * Vt);
    accd(out[4], m, dVA * (-Ut));
    accd(out[4], m, -dWA);
    accd(out[4], m, cross(wv1, A) * (-Ut));
    accd(out[4], m, cross(A, ww1));
    accd(out[4], m, cross(wu1, A) * Vt);
    // 6
    accd(out[5], m, dWwv1 - dVww1);
    accd(out[5], m, cross(ww1, wv1));
    accd(out[5], m, (dUwv1 - dVwu1) * (-Vt));
    accd(out[5], m, cross(wu1, wv1) * (-Vt));
    // 7
    accd(out[6], WxN0, dUB + dVA);
    accd(out[6], WxN0, -cross(A, wv1));
    accd(out[6], WxN0, cross(wu1, B));
    accd(out[6], VxN0, dU_VtA + dUB * Ut - dWA);
    accd(out[6], VxN0, cross(A, ww1));
    accd(out[6], VxN0, cross(wu1, P));
    accd(out[6], UxN0, -dWB - dVA * Vt - dV_UtB);
    accd(out[6], UxN0, cross(P, wv1));
    accd(out[6], UxN0, -cross(ww1, B));
    // 8
    accd(out[7], WxN0, dVB);
    accd(out[7], WxN0, -cross(B, wv1));
    accd(out[7], VxN0, dUB * Vt - dWB);
    accd(out[7], VxN0, cross(B, ww1));
    accd(out[7], VxN0, cross(wu1, B) * Vt);
    accd(out[7], UxN0, -dV_VtB);
    accd(out[7], UxN0, cross(B, wv1) * Vt);
    // 9
    accd(out[8], WxN0, -(dUA + cross(wu1, A)));
    accd(out[8], VxN0, -dU_UtA);
    accd(out[8], VxN0, cross(wu1, A) * (-Ut));
    accd(out[8], UxN0, dWA + dVA * Ut);
    accd(out[8], UxN0, cross(A, wv1) * (-Ut));
    accd(out[8], UxN0, cross(ww1, A));
    // 10
    accd(out[9], WxN0, -(dUwv1 - dVwu1 + cross(wu1, wv1)));
    accd(out[9], VxN0, dUww1 - dWwu1 + cross(wu1, ww1));
    accd(out[9], UxN0, dWwv1 - dVww1 + cross(ww1, wv1));
    return out;
}

// Least-squares single-factor fit a ~ factor * b over paired samples.
struct ProportionalityFit {
    cplx factor{0.0, 0.0};
    double rel = 0.0;  // worst |a - factor b| / (1 + max|a|)
};

inline ProportionalityFit fit_proportionality(const std::vector<cplx>& a,
                                              const std::vector<cplx>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("proportionality fit needs equal nonempty samples");
    cplx num(0.0, 0.0);
    double den = 0.0, amax = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += std::conj(b[i]) * a[i];
        den += std::norm(b[i]);
        amax = std::max(amax, std::abs(a[i]));
    }
    ProportionalityFit f;
    if (den == 0.0) throw std::invalid_argument("proportionality fit against zero samples");
    f.factor = num / den;
    for (size_t i = 0; i < a.size(); ++i)
        f.rel = std::max(f.rel, std::abs(a[i] - f.factor * b[i]) / (1.0 + amax));
    return f;
}

// ---------------------------------------------------------------------------
// The first-order transport system for the constants
// ---------------------------------------------------------------------------

struct ConstantRates {
    cplx c1u{}, c1v{}, c1w{};
    cplx c2u{}, c2v{}, c2w{};
    cplx c4u{}, c4v{}, c4w{};
};

// Residuals of the five independent transport equations for given constant
// values and candidate first derivatives.
inline std::array<ScaledValue, 5> pauc1_system(const CorrFrame& fb, cplx c1, cplx c2,
                                               cplx c4, const ConstantRates& r) {
    const cplx tU1 = detail::slot_combo(fb.sU[kLevelUV], c1, c2, c4);
    const cplx tV1 = detail::slot_combo(fb.sV[kLevelUV], c1, c2, c4);
    const cplx tU2 = detail::slot_combo(fb.sU[kLevelUW], c1, c2, c4);
    const cplx tV2 = detail::slot_combo(fb.sV[kLevelUW], c1, c2, c4);
    const cplx tV3 = detail::slot_combo(fb.sV[kLevelWV], c1, c2, c4);
    const cplx Ut = fb.Ut.value(), Vt = fb.Vt.value();
    std::array<ScaledValue, 5> out;
    auto put = [](ScaledValue& s, cplx lhs, cplx rhs) {
        s.value = lhs - rhs;
        s.scale = std::abs(lhs) + std::abs(rhs);
    };
    put(out[0], r.c1u, -r.c2v - tU1);
    put(out[1], r.c1v, r.c4u + tV1);
    put(out[2], r.c2w, (-r.c2v - tU1) * Ut + r.c2u * Vt - tU2);
    put(out[3], r.c1w, -(r.c2v + tU1) * Vt - r.c4u * Ut + tV2);
    put(out[4], r.c4w, (r.c4u + tV1) * Vt - r.c4v * Ut - tV3);
    return out;
}

// ---------------------------------------------------------------------------
// Elimination of c4 and the rational transport chain (point values)
// ---------------------------------------------------------------------------

// Point values of everything the elimination chain needs: the m-contractions
// of the (u,v) family (s), their parameter derivatives (su, sv, sw), and the
// tangential contractions of all three families per slot.
struct ChainValues {
    std::array<cplx, 5> s{}, su{}, sv{}, sw{};
    std::array<cplx, 5> tU1{}, tV1{}, tU2{}, tV2{}, tU3{}, tV3{};
    cplx Ut{}, Vt{}, N{};
};

inline ChainValues chain_values(const CorrFrame& fb) {
    for (int v = 0; v < 3; ++v) {
        if (fb.sm[kLevelUV][0].valid_cap(v) < 1)
            throw jet_error(
                "chain extraction needs first derivatives of the contraction "
                "scalars; build the frame with caps {4,4,2} or higher");
    }
    ChainValues ch;
    for (int j = 0; j < 5; ++j) {
        ch.s[j] = fb.sm[kLevelUV][j].value();
        ch.su[j] = derive(fb.sm[kLevelUV][j], 0).value();
        ch.sv[j] = derive(fb.sm[kLevelUV][j], 1).value();
        ch.sw[j] = derive(fb.sm[kLevelUV][j], 2).value();
        ch.tU1[j] = fb.sU[kLevelUV][j].value();
        ch.tV1[j] = fb.sV[kLevelUV][j].value();
        ch.tU2[j] = fb.sU[kLevelUW][j].value();
        ch.tV2[j] = fb.sV[kLevelUW][j].value();
        ch.tU3[j] = fb.sU[kLevelWV][j].value();
        ch.tV3[j] = fb.sV[kLevelWV][j].value();
    }
    ch.Ut = fb.Ut.value();
    ch.Vt = fb.Vt.value();
    ch.N = fb.N.value();
    return ch;
}

namespace detail {

inline void check_psi(const cplx& Psi, double scale) {
    if (std::abs(Psi) < 1e-10 * (1.0 + scale))
        throw degeneracy_error("elimination pole: the constant-slope denominator vanishes");
}

}  // namespace detail

// c4 as forced by the first scalar row-combination.
inline cplx c4_solve(const CorrFrame& fb, cplx c1, cplx c2) {
    const cplx s0 = fb.sm[kLevelUV][kSlot0].value();
    const cplx s1 = fb.sm[kLevelUV][kSlot1].value();
    const cplx s2 = fb.sm[kLevelUV][kSlot2].value();
    const cplx s4 = fb.sm[kLevelUV][kSlot4].value();
    const cplx s124 = fb.sm[kLevelUV][kSlot124].value();
    const cplx Phi = s0 + c1 * s1 + c2 * s2 + c1 * c1 * s124;
    const cplx Psi = s4 + c2 * s124;
    detail::check_psi(Psi, std::abs(s4) + std::abs(c2 * s124));
    return -Phi / Psi;
}

// The rational coefficients of the reduced transport system (c4 eliminated).
struct DVals {
    cplx Phi{}, Psi{}, c4{};
    cplx eu{}, ev{}, ew{};
    cplx D1{}, Xv{}, D2{}, D3{}, D4{}, D5{}, D6{}, D7{}, D8{};
    cplx tU2c{}, tV2c{}, tV3c{};  // eliminated-value contractions of the higher families
};

inline DVals d_eval(const ChainValues& ch, cplx c1, cplx c2) {
    DVals d;
    d.Phi = ch.s[0] + c1 * ch.s[1] + c2 * ch.s[2] + c1 * c1 * ch.s[4];
    d.Psi = ch.s[3] + c2 * ch.s[4];
    detail::check_psi(d.Psi, std::abs(ch.s[3]) + std::abs(c2 * ch.s[4]));
    d.c4 = -d.Phi / d.Psi;
    auto e_of = [&](const std::array<cplx, 5>& sx) {
        const cplx Ex = sx[0] + c1 * sx[1] + c2 * sx[2] + c1 * c1 * sx[4];
        const cplx Fx = sx[3] + c2 * sx[4];
        return -Ex / d.Psi + Fx * d.Phi / (d.Psi * d.Psi);
    };
    d.eu = e_of(ch.su);
    d.ev = e_of(ch.sv);
    d.ew = e_of(ch.sw);
    auto contr = [&](const std::array<cplx, 5>& t) {
        return t[0] + c1 * t[1] + c2 * t[2] + c1 * c1 * t[4] -
               (t[3] + c2 * t[4]) * d.Phi / d.Psi;
    };
    d.D1 = -contr(ch.tU1);
    d.Xv = contr(ch.tV1);
    d.tU2c = contr(ch.tU2);
    d.tV2c = contr(ch.tV2);
    d.tV3c = contr(ch.tV3);
    d.D3 = -ch.s[2] / d.Psi + ch.s[4] * d.Phi / (d.Psi * d.Psi);
    d.D4 = (ch.s[1] + cplx(2) * c1 * ch.s[4]) / d.Psi;
    d.D2 = d.eu - d.D1 * d.D4 + d.Xv;
    d.D5 = (ch.Vt + ch.Ut * d.D4) * d.D1 - ch.Ut * d.eu + d.tV2c;
    d.D6 = -ch.Ut * d.D3;
    d.D7 = -ch.Vt - ch.Ut * d.D4;
    d.D8 = ch.Ut * d.D1 - d.tU2c;
    return d;
}

// First derivatives of all three constants as dictated by the reduced system
// for free slopes p = du c2, q = dv c2.
inline ConstantRates consistent_rates(const ChainValues& ch, cplx c1, cplx c2, cplx p,
                                      cplx q) {
    const DVals d = d_eval(ch, c1, c2);
    ConstantRates r;
    r.c2u = p;
    r.c2v = q;
    r.c1u = -q + d.D1;
    r.c1v = d.D2 + p * d.D3 + q * d.D4;
    r.c1w = d.D5 + p * d.D6 + q * d.D7;
    r.c2w = d.D8 + p * ch.Vt - q * ch.Ut;
    r.c4u = d.eu + (q - d.D1) * d.D4 + p * d.D3;
    r.c4v = d.ev - d.D4 * r.c1v + d.D3 * q;
    r.c4w = d.ew - d.D4 * r.c1w + d.D3 * r.c2w;
    return r;
}

// The scalar obstruction left in the fifth transport equation once all
// derivatives are substituted from the reduced system.  Its value should not
// depend on p, q; that claim is itself checked by the tests.
inline cplx r5_value(const ChainValues& ch, cplx c1, cplx c2, cplx p, cplx q,
                     double* scale = nullptr) {
    const DVals d = d_eval(ch, c1, c2);
    const cplx dwc1 = d.D5 + p * d.D6 + q * d.D7;
    const cplx dwc2 = d.D8 + p * ch.Vt - q * ch.Ut;
    const cplx duc4 = d.eu + (q - d.D1) * d.D4 + p * d.D3;
    const cplx dvc1 = d.D2 + p * d.D3 + q * d.D4;
    const cplx dvc4 = d.ev - d.D4 * dvc1 + d.D3 * q;
    const cplx lhs = d.ew - d.D4 * dwc1 + d.D3 * dwc2;
    const cplx rhs = (duc4 + d.Xv) * ch.Vt - dvc4 * ch.Ut - d.tV3c;
    if (scale)
        *scale = std::abs(d.ew) + std::abs(d.D4 * dwc1) + std::abs(d.D3 * dwc2) +
                 std::abs((duc4 + d.Xv) * ch.Vt) + std::abs(dvc4 * ch.Ut) +
                 std::abs(d.tV3c);
    return lhs - rhs;
}

// Mirror chain: c2 eliminated instead of c4; free slopes p = du c4, q = dv c4.
// The obstruction comes from the transversal transport of c2.
inline cplx r5_mirror_value(const ChainValues& ch, cplx c1, cplx c4, cplx p, cplx q,
                            double* scale = nullptr) {
    const cplx Phi = ch.s[0] + c1 * ch.s[1] + c4 * ch.s[3] + c1 * c1 * ch.s[4];
    const cplx Psi = ch.s[2] + c4 * ch.s[4];
    detail::check_psi(Psi, std::abs(ch.s[2]) + std::abs(c4 * ch.s[4]));
    auto e_of = [&](const std::array<cplx, 5>& sx) {
        const cplx Ex = sx[0] + c1 * sx[1] + c4 * sx[3] + c1 * c1 * sx[4];
        const cplx Fx = sx[2] + c4 * sx[4];
        return -Ex / Psi + Fx * Phi / (Psi * Psi);
    };
    auto contr = [&](const std::array<cplx, 5>& t) {
        return t[0] + c1 * t[1] + c4 * t[3] + c1 * c1 * t[4] -
               (t[2] + c4 * t[4]) * Phi / Psi;
    };
    const cplx eu = e_of(ch.su), ev = e_of(ch.sv), ew = e_of(ch.sw);
    const cplx D1m = -contr(ch.tU1);
    const cplx Xvm = contr(ch.tV1);
    const cplx tU2c = contr(ch.tU2), tV2c = contr(ch.tV2), tV3c = contr(ch.tV3);
    const cplx D4m = (ch.s[1] + cplx(2) * c1 * ch.s[4]) / Psi;
    const cplx D3m = -ch.s[3] / Psi + ch.s[4] * Phi / (Psi * Psi);
    const cplx x2 = p + Xvm;                      // dv c1
    const cplx dvc2 = ev - D4m * x2 + D3m * q;
    const cplx x1 = -dvc2 + D1m;                  // du c1
    const cplx duc2 = eu - D4m * x1 + D3m * p;
    const cplx x3 = -(dvc2 - D1m) * ch.Vt - p * ch.Ut + tV2c;  // dw c1
    const cplx x4 = (p + Xvm) * ch.Vt - q * ch.Ut - tV3c;      // dw c4
    const cplx lhs = ew - D4m * x3 + D3m * x4;                 // dw c2, eliminated route
    const cplx rhs = x1 * ch.Ut + duc2 * ch.Vt - tU2c;         // dw c2, transport route
    if (scale)
        *scale = std::abs(ew) + std::abs(D4m * x3) + std::abs(D3m * x4) +
                 std::abs(x1 * ch.Ut) + std::abs(duc2 * ch.Vt) + std::abs(tU2c);
    return lhs - rhs;
}

// ---------------------------------------------------------------------------
// Quartic numerators of the scalar obstruction
// ---------------------------------------------------------------------------

// Coefficients of a bivariate quartic in the monomial order
// (0,0),(1,0),(0,1),(2,0),(1,1),(0,2),(3,0),(2,1),(1,2),(0,3),
// (4,0),(3,1),(2,2),(1,3),(0,4) with exponents (i,j) of (a,b).
struct PolyCoeffs {
    std::array<cplx, 15> c{};
    double fit_rel = 0.0;  // off-grid interpolation self-check
    double scale = 0.0;    // max sampled magnitude

    static constexpr std::array<std::array<int, 2>, 15> kMono = {
        {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3},
         {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4}}};

    static int idx(int i, int j) {
        for (int k = 0; k < 15; ++k)
            if (kMono[k][0] == i && kMono[k][1] == j) return k;
        throw std::invalid_argument("monomial outside the quartic basis");
    }

    cplx eval(cplx a, cplx b) const {
        cplx r(0.0, 0.0);
        for (int k = 0; k < 15; ++k) {
            cplx t = c[k];
            for (int e = 0; e < kMono[k][0]; ++e) t *= a;
            for (int e = 0; e < kMono[k][1]; ++e) t *= b;
            r += t;
        }
        return r;
    }
};

namespace detail {

template <class F>
PolyCoeffs fit_quartic(F&& f) {
    Eigen::MatrixXcd M(25, 15);
    Eigen::VectorXcd rhs(25);
    int row = 0;
    double scale = 0.0;
    for (int ia = -2; ia <= 2; ++ia) {
        for (int ib = -2; ib <= 2; ++ib) {
            const cplx a(static_cast<double>(ia), 0.0), b(static_cast<double>(ib), 0.0);
            const cplx va = f(a, b);
            rhs(row) = va;
            scale = std::max(scale, std::abs(va));
            for (int k = 0; k < 15; ++k) {
                cplx t(1.0, 0.0);
                for (int e = 0; e < PolyCoeffs::kMono[k][0]; ++e) t *= a;
                for (int e = 0; e < PolyCoeffs::kMono[k][1]; ++e) t *= b;
                M(row, k) = t;
            }
            ++row;
        }
    }
    const Eigen::VectorXcd x = M.colPivHouseholderQr().solve(rhs);
    PolyCoeffs pc;
    for (int k = 0; k < 15; ++k) pc.c[k] = x(k);
    pc.scale = scale;
    const cplx pa(0.3, 0.0), pb(-0.7, 0.0);
    pc.fit_rel = std::abs(f(pa, pb) - pc.eval(pa, pb)) / (1.0 + scale);
    return pc;
}

}  // namespace detail

// Quartic numerator of the scalar obstruction in (c1, c2): r5 times
// Psi^3 N, sampled on the integer grid {-2..2}^2 and interpolated.
inline PolyCoeffs p1_coefficients(const ChainValues& ch) {
    return detail::fit_quartic([&](cplx a, cplx b) {
        const cplx Psi = ch.s[3] + b * ch.s[4];
        detail::check_psi(Psi, std::abs(ch.s[3]) + std::abs(b * ch.s[4]));
        const cplx r5 = r5_value(ch, a, b, cplx(0), cplx(0));
        return r5 * Psi * Psi * Psi * ch.N;
    });
}

inline PolyCoeffs p1_coefficients(const CorrFrame& fb) {
    return p1_coefficients(chain_values(fb));
}

// Mirror quartic numerator in (c1, c4): r5_mirror times Psi^3 N.
inline PolyCoeffs p2_coefficients(const ChainValues& ch) {
    return detail::fit_quartic([&](cplx a, cplx b) {
        const cplx Psi = ch.s[2] + b * ch.s[4];
        detail::check_psi(Psi, std::abs(ch.s[2]) + std::abs(b * ch.s[4]));
        const cplx r5 = r5_mirror_value(ch, a, b, cplx(0), cplx(0));
        return r5 * Psi * Psi * Psi * ch.N;
    });
}

// ---------------------------------------------------------------------------
// Per-coefficient identities of the quartic numerator
// ---------------------------------------------------------------------------

namespace detail {

// commutator-style bracket s124 * dx(s_j) - dx(s124) * s_j
inline cplx wrons(const ChainValues& ch, const std::array<cplx, 5>& dx, int j) {
    return ch.s[kSlot124] * dx[j] - dx[kSlot124] * ch.s[j];
}

}  // namespace detail

// When true, the extra term of the c1*c2^2 relation sits inside the main
// bracket (sharing its 1/(2 s124 s4) prefactor); the numeric probe in the
// test suite pins this down.
inline constexpr bool kRelC1C2SqExtraInside = true;

// Residual of the published c1*c2^2 coefficient relation, cleared of
// denominators.  Retained for reference only: numerically this expression
// does NOT vanish where every neighbouring coefficient relation does (the
// source formula appears to carry a transcription error), so it is kept out
// of the standard claim report and exercised as a negative control in the
// unit tests.  Neither placement of the trailing term rescues it.
inline ScaledValue p1_rel_c1c2sq(const ChainValues& ch, bool extra_inside) {
    const cplx N = ch.N, Ut = ch.Ut, Vt = ch.Vt;
    const cplx s1 = ch.s[kSlot1], s2 = ch.s[kSlot2], s4 = ch.s[kSlot4],
               s124 = ch.s[kSlot124];
    ScaledValue sv;
    auto acc = [&](const cplx& t) {
        sv.value += t;
        sv.scale += std::abs(t);
    };
    // bracket terms
    acc(-cplx(2) * s124 * s124 * N * (Ut * ch.tV1[kSlot0] + ch.tV2[kSlot0]));
    acc(cplx(2) * Ut * s124 * s4 * N * ch.tV1[kSlot2]);
    acc(s1 * s124 * N * (Ut * ch.tV1[kSlot1] + ch.tV2[kSlot1]));
    acc(Vt * N * detail::wrons(ch, ch.su, kSlot1));
    acc(-Ut * N * detail::wrons(ch, ch.sv, kSlot1));
    acc(-N * detail::wrons(ch, ch.sw, kSlot1));
    const cplx extra = s124 * s2 * N * ch.tU2[kSlot1];
    if (extra_inside) {
        acc(extra);
        acc(cplx(2) * s124 * s4 * N * ch.tV2[kSlot2]);  // LHS brought across
    } else {
        acc(cplx(2) * s124 * s4 * (N * ch.tV2[kSlot2] - extra));
    }
    return sv;
}

// All per-coefficient checks of the quartic numerator: interpolation
// self-check, vanishing coefficients, the two recurrences, the directly
// computed coefficient relations, and the master second-coefficient relation.
//
// The checks fall into two tiers.  The identity tier holds on any admissible
// contact field and is always recorded: the interpolation self-check, the
// whole top-degree coefficient layer, the cube coefficient, and the exact
// equivalence between the c1^2*c2 coefficient and its displayed relation.
// The remaining claims hold only where the transversal distributions close
// for every choice of constants (they are consequences of full integrability,
// not pointwise identities); they are recorded when include_conditional is
// set, which is the right mode for the integrable reference scenarios.
inline void p1_claims(ResidualReport& rep, const CorrFrame& fb, double tol,
                      double tol_interp, bool include_conditional = true) {
    const auto& cj = fb.cj;
    const ChainValues ch = chain_values(fb);
    const PolyCoeffs pc = p1_coefficients(ch);
    const cplx N = ch.N, Ut = ch.Ut, Vt = ch.Vt;
    const cplx s0 = ch.s[kSlot0], s1 = ch.s[kSlot1], s2 = ch.s[kSlot2],
               s4 = ch.s[kSlot4], s124 = ch.s[kSlot124];

    rep.add("P1.interp", cj.u, cj.v, cj.w, pc.fit_rel * (1.0 + pc.scale), pc.scale,
            tol_interp);

    auto zero_coeff = [&](const char* id, int i, int j) {
        rep.add(id, cj.u, cj.v, cj.w, std::abs(pc.c[PolyCoeffs::idx(i, j)]), pc.scale,
                tol);
    };
    zero_coeff("P1.c1^3", 3, 0);
    if (include_conditional) {
        zero_coeff("P1.c1^2", 2, 0);
        zero_coeff("P1.c1c2", 1, 1);
        zero_coeff("P1.c1", 1, 0);

        const cplx a = cplx(2) * s4 * pc.c[PolyCoeffs::idx(0, 3)];
        const cplx b = s124 * pc.c[PolyCoeffs::idx(0, 2)];
        rep.add("P1.rec1", cj.u, cj.v, cj.w, std::abs(a - b),
                std::abs(a) + std::abs(b), tol);
        const cplx a2 = cplx(2) * s124 * pc.c[PolyCoeffs::idx(0, 1)];
        const cplx b2 = s4 * pc.c[PolyCoeffs::idx(0, 2)];
        rep.add("P1.rec2", cj.u, cj.v, cj.w, std::abs(a2 - b2),
                std::abs(a2) + std::abs(b2), tol);
    }

    auto add_sv = [&](const char* id, const ScaledValue& sv) {
        rep.add(id, cj.u, cj.v, cj.w, std::abs(sv.value), sv.scale, tol);
    };

    {  // c1^4
        ScaledValue sv;
        sv.value = N * (ch.tU2[kSlot4] + Ut * ch.tU1[kSlot4]);
        sv.scale = std::abs(N * ch.tU2[kSlot4]) + std::abs(N * Ut * ch.tU1[kSlot4]);
        add_sv("P1.rel.c1^4", sv);
    }
    {  // c2^4
        ScaledValue sv;
        sv.value = N * (ch.tV3[kSlot2] - Vt * ch.tV1[kSlot2]);
        sv.scale = std::abs(N * ch.tV3[kSlot2]) + std::abs(N * Vt * ch.tV1[kSlot2]);
        add_sv("P1.rel.c2^4", sv);
    }
    {  // c1^3 c2
        const cplx t1 = N * ch.tV2[kSlot4];
        const cplx t2 = N * Ut * ch.tV1[kSlot4];
        const cplx t3 = -cplx(0.5) * N * (ch.tU2[kSlot1] + Ut * ch.tU1[kSlot1]);
        ScaledValue sv;
        sv.value = t1 + t2 + t3;
        sv.scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
        add_sv("P1.rel.c1^3c2", sv);
    }
    {  // c1 c2^3
        const cplx t1 = N * ch.tV3[kSlot1];
        const cplx t2 = -N * (Vt * ch.tV1[kSlot1] + cplx(2) * Ut * ch.tV1[kSlot2] +
                              cplx(2) * ch.tV2[kSlot2]);
        ScaledValue sv;
        sv.value = t1 + t2;
        sv.scale = std::abs(t1) + std::abs(t2);
        add_sv("P1.rel.c1c2^3", sv);
    }
    {  // c1^2 c2^2
        const cplx t1 = N * ch.tV3[kSlot4];
        const cplx t2 = -N * (Vt * ch.tV1[kSlot4] - cplx(2) * Ut * ch.tV1[kSlot1] -
                              cplx(2) * ch.tV2[kSlot1]);
        const cplx t3 = N * (Ut * ch.tU1[kSlot2] + ch.tU2[kSlot2]);
        ScaledValue sv;
        sv.value = t1 + t2 + t3;
        sv.scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
        add_sv("P1.rel.c1^2c2^2", sv);
    }
    {   // c1^2 c2: the fitted coefficient equals exactly one half of s124
        // times the cleared displayed relation -- an identity on any
        // admissible field, pinned numerically to machine precision.
        cplx rel = cplx(2) * s124 * s4 * N * ch.tU2[kSlot2]
                 - cplx(2) * s124 * s124 * N * (Ut * ch.tU1[kSlot0] + ch.tU2[kSlot0])
                 + cplx(2) * Ut * s124 * s4 * N * ch.tU1[kSlot2]
                 + s1 * s124 * N * (Ut * ch.tU1[kSlot1] + ch.tU2[kSlot1])
                 - cplx(2) * Vt * N * detail::wrons(ch, ch.su, kSlot4)
                 + cplx(2) * Ut * N * detail::wrons(ch, ch.sv, kSlot4)
                 + cplx(2) * N * detail::wrons(ch, ch.sw, kSlot4);
        const cplx lhs = pc.c[PolyCoeffs::idx(2, 1)];
        const cplx rhs = cplx(0.5) * s124 * rel;
        rep.add("P1.rel.c1^2c2", cj.u, cj.v, cj.w, std::abs(lhs - rhs),
                std::abs(lhs) + std::abs(rhs) + pc.scale, tol);
    }
    if (include_conditional) {  // constant coefficient (cleared denominator)
        ScaledValue sv;
        auto acc = [&](const cplx& t) {
            sv.value += t;
            sv.scale += std::abs(t);
        };
        acc(s124 * s4 * N * ch.tV3[kSlot0]);
        acc(cplx(2) * s124 * s0 * N * (Ut * ch.tV1[kSlot1] + ch.tV2[kSlot1]));
        acc(s124 * N * (s2 * ch.tU2[kSlot0] - s1 * ch.tV2[kSlot0]));
        acc(Ut * s124 * N * (s2 * ch.tU1[kSlot0] - s1 * ch.tV1[kSlot0]));
        acc(-Vt * s124 * s4 * N * ch.tV1[kSlot0]);
        acc(Vt * N * detail::wrons(ch, ch.su, kSlot0));
        acc(-Ut * N * detail::wrons(ch, ch.sv, kSlot0));
        acc(-N * detail::wrons(ch, ch.sw, kSlot0));
        add_sv("P1.rel.const", sv);
    }
    if (include_conditional) {  // master relation for the c2^2 coefficient
        ScaledValue sv;
        auto acc = [&](const cplx& t) {
            sv.value += t;
            sv.scale += std::abs(t);
        };
        acc(s124 * N * (ch.tV2[kSlot1] + Ut * ch.tV1[kSlot1]) *
            (s1 * s1 - cplx(4) * s0 * s124 + cplx(4) * s2 * s4));
        acc(cplx(2) * Ut * N * s124 * detail::wrons(ch, ch.sv, kSlot0));
        acc(-cplx(2) * N * s4 * detail::wrons(ch, ch.sw, kSlot2));
        acc(-cplx(2) * N * s2 * detail::wrons(ch, ch.sw, kSlot4));
        acc(cplx(2) * N * s124 * detail::wrons(ch, ch.sw, kSlot0));
        acc(cplx(2) * Vt * N * s4 * detail::wrons(ch, ch.su, kSlot2));
        acc(cplx(2) * Vt * N * s2 * detail::wrons(ch, ch.su, kSlot4));
        acc(-cplx(2) * Vt * N * s124 * detail::wrons(ch, ch.su, kSlot0));
        acc(-cplx(2) * Ut * N * s4 * detail::wrons(ch, ch.sv, kSlot2));
        acc(-cplx(2) * Ut * N * s2 * detail::wrons(ch, ch.sv, kSlot4));
        acc(-Ut * N * s1 * detail::wrons(ch, ch.sv, kSlot1));
        acc(-N * s1 * detail::wrons(ch, ch.sw, kSlot1));
        acc(Vt * N * s1 * detail::wrons(ch, ch.su, kSlot1));
        add_sv("P1.master.c2^2", sv);
    }
}

// ---------------------------------------------------------------------------
// Mirror quartic versus the original
// ---------------------------------------------------------------------------

struct MirrorComparison {
    PolyCoeffs p1, p2;
    cplx calibration{1.0, 0.0};  // snapped global factor (+1 or -1)
    double calibration_raw_dev = 0.0;
};

// Verifies the fifteen coefficient mappings between the two quartic
// numerators.  A global orientation sign of the mirror chain is snapped to
// +-1 from the largest mapped pair before comparing; everything else is
// rigid.  When both quartics degenerate to zero (as they do on the fully
// integrable reference scenarios) the sign defaults to +1 and every mapping
// reduces to an exact zero-against-zero record.
//
// Like the per-coefficient claims, the mappings split into two tiers: eight
// of them, plus the vanishing of the mirror cube coefficient, hold on any
// admissible field and are always recorded; the remaining five mappings and
// the second vanishing claim encode recurrence content that requires full
// integrability and are recorded when include_conditional is set.
inline MirrorComparison p2_vs_p1(ResidualReport& rep, const CorrFrame& fb, double tol,
                                 bool include_conditional = true) {
    const auto& cj = fb.cj;
    const ChainValues ch = chain_values(fb);
    MirrorComparison mc;
    mc.p1 = p1_coefficients(ch);
    mc.p2 = p2_coefficients(ch);
    const cplx s0 = ch.s[kSlot0], s1 = ch.s[kSlot1], s2 = ch.s[kSlot2],
               s4 = ch.s[kSlot4], s124 = ch.s[kSlot124];
    auto P1 = [&](int i, int j) { return mc.p1.c[PolyCoeffs::idx(i, j)]; };
    auto P2 = [&](int i, int j) { return mc.p2.c[PolyCoeffs::idx(i, j)]; };

    struct MapRow {
        const char* id;
        cplx lhs, rhs;
        bool conditional;
    };
    const std::array<MapRow, 13> rows{{
        {"P2.map.c1^4", P2(4, 0), P1(0, 4), false},
        {"P2.map.c4^4", P2(0, 4), P1(4, 0), false},
        {"P2.map.c1^3c4", P2(3, 1), -P1(1, 3), false},
        {"P2.map.c1c4^3", P2(1, 3), -P1(3, 1), false},
        {"P2.map.c1^2c4^2", P2(2, 2), P1(2, 2), false},
        {"P2.map.c1c4^2", P2(1, 2), P1(1, 2), false},
        {"P2.map.c1^2c4", P2(2, 1), -P1(0, 3), false},
        {"P2.map.c1^2", P2(2, 0), -(s2 / s124) * P1(0, 3), false},
        {"P2.map.c1c4", P2(1, 1), -(s1 / s124) * P1(0, 3), true},
        {"P2.map.c4^2", P2(0, 2), -(s4 / s124) * P1(0, 3), true},
        {"P2.map.c1", P2(1, 0), -(s2 * s1 / (s124 * s124)) * P1(0, 3), true},
        {"P2.map.c4", P2(0, 1),
         -((s124 * s0 + s2 * s4) / (s124 * s124)) * P1(0, 3), true},
        {"P2.map.const", P2(0, 0), -(s2 * s0 / (s124 * s124)) * P1(0, 3), true},
    }};

    const double sc = mc.p1.scale + mc.p2.scale;
    {
        std::size_t kref = 0;
        double best = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k)
            if (std::abs(rows[k].rhs) > best) {
                best = std::abs(rows[k].rhs);
                kref = k;
            }
        if (best > 1e-12 * (1.0 + sc)) {
            const cplx ratio = rows[kref].lhs / rows[kref].rhs;
            mc.calibration = (std::abs(ratio - cplx(1)) <= std::abs(ratio + cplx(1)))
                                 ? cplx(1)
                                 : cplx(-1);
            mc.calibration_raw_dev = std::abs(ratio - mc.calibration);
        } else {
            mc.calibration = cplx(1);
            mc.calibration_raw_dev = 0.0;
        }
    }
    const cplx s = mc.calibration;
    for (const auto& r : rows) {
        if (r.conditional && !include_conditional) continue;
        rep.add(r.id, cj.u, cj.v, cj.w, std::abs(r.lhs - s * r.rhs), sc, tol);
    }
    rep.add("P2.c1^3", cj.u, cj.v, cj.w, std::abs(P2(3, 0)), sc, tol);
    if (include_conditional)
        rep.add("P2.c4^3", cj.u, cj.v, cj.w, std::abs(P2(0, 3)), sc, tol);
    return mc;
}

// ---------------------------------------------------------------------------
// Second-order solvability: the 7-variable cascade
// ---------------------------------------------------------------------------

namespace detail {

// Re-base a jet in (u,v,w) into a larger variable space whose first three
// variables are (u,v,w); the extra directions see it as a constant.
inline Jet promote3(const Jet& src, const JetSpecPtr& spec7) {
    if (src.empty()) throw jet_error("promotion of an empty jet");
    for (int v = 0; v < 3; ++v)
        if (src.valid_cap(v) < spec7->cap(v))
            throw jet_error("insufficient jet order for promotion");
    Jet out(spec7, cplx(0));
    MultiIndex mi{};
    for (int i = 0; i <= spec7->cap(0); ++i)
        for (int j = 0; j <= spec7->cap(1); ++j)
            for (int k = 0; k <= spec7->cap(2); ++k) {
                mi[0] = i;
                mi[1] = j;
                mi[2] = k;
                out.set_coeff(mi, src.coeff(mi));
            }
    return out;
}

}  // namespace detail

// The cascade state: the reduced-system coefficients and inhomogeneous parts
// as jets over (u, v, w, c1, c2, p, q) at a point, the second-order
// coefficient matrix, and (after solving) the second slopes F and the
// cross-derivative obstructions G1, G2.
struct Cascade {
    JetSpecPtr spec7;
    double u = 0, v = 0, w = 0;
    cplx c1v{}, c2v{}, pv{}, qv{};

    Jet Ut, Vt;
    std::array<Jet, 5> s, su, tU1, tV1, tU2, tV2;
    Jet c1, c2, p, q;
    Jet Phi, Psi, invPsi;
    Jet eu;
    Jet D1, Xv, D2, D3, D4, D5, D6, D7, D8;
    Jet x1, x2, x3, x4;
    Jet b1, b2, b3;
    Jet Bu, Bv;  // slope brackets of the fourth transport scalar
    std::array<std::array<Jet, 3>, 3> M;
    Jet detM;

    bool solved = false;
    std::array<Jet, 3> F;
    bool graded = false;
    Jet G1, G2;
};

inline Cascade cascade_build(const CorrFrame& fb, cplx c1v, cplx c2v, cplx pv, cplx qv) {
    Cascade cc;
    cc.spec7 = make_jet_spec({2, 2, 1, 2, 2, 1, 1});
    cc.u = fb.cj.u;
    cc.v = fb.cj.v;
    cc.w = fb.cj.w;
    cc.c1v = c1v;
    cc.c2v = c2v;
    cc.pv = pv;
    cc.qv = qv;

    for (int j = 0; j < 5; ++j) {
        cc.s[j] = detail::promote3(fb.sm[kLevelUV][j], cc.spec7);
        cc.su[j] = detail::promote3(derive(fb.sm[kLevelUV][j], 0), cc.spec7);
        cc.tU1[j] = detail::promote3(fb.sU[kLevelUV][j], cc.spec7);
        cc.tV1[j] = detail::promote3(fb.sV[kLevelUV][j], cc.spec7);
        cc.tU2[j] = detail::promote3(fb.sU[kLevelUW][j], cc.spec7);
        cc.tV2[j] = detail::promote3(fb.sV[kLevelUW][j], cc.spec7);
    }
    cc.Ut = detail::promote3(fb.Ut, cc.spec7);
    cc.Vt = detail::promote3(fb.Vt, cc.spec7);
    cc.c1 = Jet::variable(cc.spec7, 3, c1v);
    cc.c2 = Jet::variable(cc.spec7, 4, c2v);
    cc.p = Jet::variable(cc.spec7, 5, pv);
    cc.q = Jet::variable(cc.spec7, 6, qv);

    cc.Phi = cc.s[0] + cc.c1 * cc.s[1] + cc.c2 * cc.s[2] + cc.c1 * cc.c1 * cc.s[4];
    cc.Psi = cc.s[3] + cc.c2 * cc.s[4];
    try {
        cc.invPsi = reciprocal(cc.Psi);
    } catch (const jet_error&) {
        throw degeneracy_error("elimination pole: the constant-slope denominator vanishes");
    }
    const Jet PhiOverPsi = cc.Phi * cc.invPsi;
    const Jet Eu =
        cc.su[0] + cc.c1 * cc.su[1] + cc.c2 * cc.su[2] + cc.c1 * cc.c1 * cc.su[4];
    const Jet Fu = cc.su[3] + cc.c2 * cc.su[4];
    cc.eu = (-Eu + Fu * PhiOverPsi) * cc.invPsi;
    auto contr = [&](const std::array<Jet, 5>& t) {
        return t[0] + cc.c1 * t[1] + cc.c2 * t[2] + cc.c1 * cc.c1 * t[4] -
               (t[3] + cc.c2 * t[4]) * PhiOverPsi;
    };
    cc.D1 = -contr(cc.tU1);
    cc.Xv = contr(cc.tV1);
    const Jet tU2c = contr(cc.tU2);
    const Jet tV2c = contr(cc.tV2);
    cc.D3 = (-cc.s[2] + cc.s[4] * PhiOverPsi) * cc.invPsi;
    cc.D4 = (cc.s[1] + cc.c1 * cc.s[4] * cplx(2)) * cc.invPsi;
    cc.D2 = cc.eu - cc.D1 * cc.D4 + cc.Xv;
    cc.D5 = (cc.Vt + cc.Ut * cc.D4) * cc.D1 - cc.Ut * cc.eu + tV2c;
    cc.D6 = -(cc.Ut * cc.D3);
    cc.D7 = -(cc.Vt + cc.Ut * cc.D4);
    cc.D8 = cc.Ut * cc.D1 - tU2c;

    cc.x1 = cc.D1 - cc.q;
    cc.x2 = cc.D2 + cc.p * cc.D3 + cc.q * cc.D4;
    cc.x3 = cc.D5 + cc.p * cc.D6 + cc.q * cc.D7;
    cc.x4 = cc.D8 + cc.p * cc.Vt - cc.q * cc.Ut;

    constexpr int U = 0, Vd = 1, W = 2, C1 = 3, C2 = 4;
    auto d_ = [](const Jet& j, int var) { return derive(j, var); };

    cc.b1 = d_(cc.D1, C1) * cc.x2 + d_(cc.D1, C2) * cc.q + d_(cc.D1, Vd) -
            (d_(cc.D2, C1) + cc.p * d_(cc.D3, C1) + cc.q * d_(cc.D4, C1)) * cc.x1 -
            (d_(cc.D2, C2) + cc.p * d_(cc.D3, C2) + cc.q * d_(cc.D4, C2)) * cc.p -
            (d_(cc.D2, U) + cc.p * d_(cc.D3, U) + cc.q * d_(cc.D4, U));

    // Total-slope brackets of the fourth transport scalar along u and v.
    // They enter b2 and b3 with the normalization that matches the
    // coefficient matrix below; the raw rank-one combinations are recovered
    // in structure_diagnostics.
    cc.Bu = d_(cc.D8, C1) * cc.x1 + d_(cc.D8, C2) * cc.p + d_(cc.D8, U) +
            cc.p * d_(cc.Vt, U) - cc.q * d_(cc.Ut, U);
    cc.Bv = d_(cc.D8, C1) * cc.x2 + d_(cc.D8, C2) * cc.q + d_(cc.D8, Vd) +
            cc.p * d_(cc.Vt, Vd) - cc.q * d_(cc.Ut, Vd);

    cc.b2 = cc.Bv +
            d_(cc.D1, C1) * cc.x3 + d_(cc.D1, C2) * cc.x4 + d_(cc.D1, W) -
            (d_(cc.D5, C1) + cc.p * d_(cc.D6, C1) + cc.q * d_(cc.D7, C1)) * cc.x1 -
            (d_(cc.D5, C2) + cc.p * d_(cc.D6, C2) + cc.q * d_(cc.D7, C2)) * cc.p -
            (d_(cc.D5, U) + cc.p * d_(cc.D6, U) + cc.q * d_(cc.D7, U));

    cc.b3 = (d_(cc.D2, C1) + cc.p * d_(cc.D3, C1) + cc.q * d_(cc.D4, C1)) * cc.x3 +
            (d_(cc.D2, C2) + cc.p * d_(cc.D3, C2) + cc.q * d_(cc.D4, C2)) * cc.x4 +
            d_(cc.D2, W) + cc.p * d_(cc.D3, W) + cc.q * d_(cc.D4, W) +
            cc.Bu + cc.Bv -
            (d_(cc.D5, C1) + cc.p * d_(cc.D6, C1) + cc.q * d_(cc.D7, C1)) * cc.x2 -
            (d_(cc.D5, C2) + cc.p * d_(cc.D6, C2) + cc.q * d_(cc.D7, C2)) * cc.q -
            (d_(cc.D5, Vd) + cc.p * d_(cc.D6, Vd) + cc.q * d_(cc.D7, Vd));

    cc.M[0] = {-cc.D3, -cc.D4, Jet::constant(cc.spec7, cplx(-1))};
    cc.M[1] = {-cc.D6, cc.Vt - cc.D7, -cc.Ut};
    cc.M[2] = {cc.Vt, cc.Vt - cc.D6 - cc.Ut, -(cc.D7 + cc.Ut)};
    cc.detM = cc.M[0][0] * (cc.M[1][1] * cc.M[2][2] - cc.M[1][2] * cc.M[2][1]) -
              cc.M[0][1] * (cc.M[1][0] * cc.M[2][2] - cc.M[1][2] * cc.M[2][0]) +
              cc.M[0][2] * (cc.M[1][0] * cc.M[2][1] - cc.M[1][1] * cc.M[2][0]);
    return cc;
}

inline Cascade cascade_build(const ContactField& f, double u, double v, double w,
                             cplx c1, cplx c2, cplx p, cplx q,
                             std::array<int, 3> caps = {6, 6, 3}) {
    return cascade_build(frame_build(f, u, v, w, caps), c1, c2, p, q);
}

// Solves the displayed second-order system M F = -b for the three second
// slopes of c2.  Throws if the displayed matrix is singular at the point.
inline void f_solve(Cascade& cc) {
    if (cc.solved) return;
    double entry_scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) entry_scale = std::max(entry_scale, magnitude(cc.M[i][j]));
    const double det_floor = 1e-10 * std::max(1.0, entry_scale * entry_scale * entry_scale);
    if (magnitude(cc.detM) < det_floor) {
        throw degeneracy_error("F-system singular (det=" +
                               std::to_string(cc.detM.value().real()) + "+" +
                               std::to_string(cc.detM.value().imag()) + "i)");
    }
    const Jet invDet = reciprocal(cc.detM);
    const Jet nb[3] = {-cc.b1, -cc.b2, -cc.b3};
    // adjugate columns (cofactors of rows)
    for (int i = 0; i < 3; ++i) {
        const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
        // cofactor expansion keeping track of signs through cyclic index order
        Jet acc = Jet::constant(cc.spec7, cplx(0));
        for (int j = 0; j < 3; ++j) {
            const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
            // adj[i][j] = cofactor C[j][i] = det of M without row j, column i,
            // with sign (-1)^{i+j}; cyclic means rows (j1,j2), columns (i1,i2)
            const Jet cof = cc.M[j1][i1] * cc.M[j2][i2] - cc.M[j1][i2] * cc.M[j2][i1];
            acc = acc + cof * nb[j];
        }
        cc.F[i] = acc * invDet;
    }
    cc.solved = true;
}

// The two cross-derivative obstructions of the second-slope field.
inline void g_eval(Cascade& cc) {
    if (cc.graded) return;
    f_solve(cc);
    constexpr int U = 0, Vd = 1, C1 = 3, C2 = 4, Pd = 5, Qd = 6;
    const Jet& F1 = cc.F[0];
    const Jet& F2 = cc.F[1];
    const Jet& F3 = cc.F[2];
    cc.G1 = derive(F1, Pd) * F2 + derive(F1, Qd) * F3 + derive(F1, C1) * cc.x2 +
            derive(F1, C2) * cc.q + derive(F1, Vd) -
            (derive(F2, Pd) * F1 + derive(F2, Qd) * F2 + derive(F2, C1) * cc.x1 +
             derive(F2, C2) * cc.p + derive(F2, U));
    cc.G2 = derive(F3, Pd) * F1 + derive(F3, Qd) * F2 + derive(F3, C1) * cc.x1 +
            derive(F3, C2) * cc.p + derive(F3, U) -
            (derive(F2, Pd) * F2 + derive(F2, Qd) * F3 + derive(F2, C1) * cc.x2 +
             derive(F2, C2) * cc.q + derive(F2, Vd));
    cc.graded = true;
}

struct R3Result {
    cplx residual{};
    double scale = 0.0;
    cplx g1{}, g2{};
};

// The proportionality obstruction between the two cross-derivative scalars.
inline R3Result r3_residual(Cascade& cc) {
    g_eval(cc);
    R3Result r;
    r.g1 = cc.G1.value();
    r.g2 = cc.G2.value();
    const cplx ratio = cc.Vt.value() / cc.Ut.value();
    r.residual = r.g2 + ratio * r.g1;
    r.scale = std::abs(r.g2) + std::abs(ratio * r.g1);
    return r;
}

// Combinations of the inhomogeneous parts that the rank-one second-order
// structure forces to vanish when the reduced transport system is
// consistent.  The raw parts are the assembled b2, b3 with the slope
// brackets restored to the orientation the mixed-partial computation
// produces (b2 - 2*Bv and b3 - (1-D3)*Bu - (1-D4)*Bv).
inline std::pair<cplx, cplx> structure_diagnostics(const Cascade& cc) {
    const cplx b1 = cc.b1.value(), ut = cc.Ut.value(), vt = cc.Vt.value();
    const cplx bu = cc.Bu.value(), bv = cc.Bv.value();
    const cplx d3 = cc.D3.value(), d4 = cc.D4.value();
    const cplx raw2 = cc.b2.value() - cplx(2) * bv;
    const cplx raw3 = cc.b3.value() - (cplx(1) - d3) * bu - (cplx(1) - d4) * bv;
    return {raw2 + ut * b1, raw3 + vt * b1};
}

// ---------------------------------------------------------------------------
// Leading coefficient of the second-order determinant
// ---------------------------------------------------------------------------

struct DetProbe {
    std::array<cplx, 5> coeff{};  // numerator coefficients in powers of c1
    double fit_rel = 0.0;         // off-grid quartic self-check
    cplx lead_reference{};        // -2 * s124^4 * Ut^2
    double scale = 0.0;
};

// Clears the displayed determinant of its Psi^4 denominator (c1-independent
// for fixed c2), interpolates the quartic numerator in c1, and reports the
// reference value for the leading coefficient.
inline DetProbe det_leading_probe(const ChainValues& ch, cplx c2) {
    auto detval = [&](cplx c1) {
        const DVals d = d_eval(ch, c1, c2);
        const cplx m00 = -d.D3, m01 = -d.D4, m02 = cplx(-1);
        const cplx m10 = -d.D6, m11 = ch.Vt - d.D7, m12 = -ch.Ut;
        const cplx m20 = ch.Vt, m21 = ch.Vt - d.D6 - ch.Ut, m22 = -(d.D7 + ch.Ut);
        const cplx det = m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
                         m02 * (m10 * m21 - m11 * m20);
        const cplx Psi = ch.s[3] + c2 * ch.s[4];
        return det * Psi * Psi * Psi * Psi;
    };
    Eigen::MatrixXcd M(5, 5);
    Eigen::VectorXcd rhs(5);
    DetProbe pr;
    for (int k = 0; k < 5; ++k) {
        const cplx c1(static_cast<double>(k - 2), 0.0);
        const cplx f = detval(c1);
        pr.scale = std::max(pr.scale, std::abs(f));
        rhs(k) = f;
        cplx t(1.0, 0.0);
        for (int e = 0; e < 5; ++e) {
            M(k, e) = t;
            t *= c1;
        }
    }
    const Eigen::VectorXcd x = M.colPivHouseholderQr().solve(rhs);
    for (int k = 0; k < 5; ++k) pr.coeff[k] = x(k);
    {
        const cplx probe(0.37, 0.0);
        cplx pv(0.0, 0.0), t(1.0, 0.0);
        for (int e = 0; e < 5; ++e) {
            pv += pr.coeff[e] * t;
            t *= probe;
        }
        pr.fit_rel = std::abs(detval(probe) - pv) / (1.0 + pr.scale);
    }
    // Expanding the determinant by its last column and collecting the c1^4
    // part of the cleared numerator gives -2 (m^T C124)^4 Ut^2: the quartic
    // slots of the first two columns contribute with opposite orientation.
    pr.lead_reference =
        cplx(-2) * ch.s[kSlot124] * ch.s[kSlot124] * ch.s[kSlot124] * ch.s[kSlot124] *
        ch.Ut * ch.Ut;
    return pr;
}

// ---------------------------------------------------------------------------
// Tangential/normal decompositions of the shape-independent relations
// ---------------------------------------------------------------------------

inline const std::array<const char*, 8>& abc_relation_ids() {
    static const std::array<const char*, 8> ids = {
        "R1-2", "R1-5", "R1-7", "R1-8", "R1-9", "R2-1", "R2-2", "R2-3"};
    return ids;
}

// One relation written as duN0^T A + dvN0^T B + C with A, B, C free of the
// seed's second fundamental form.  a_zero / b_zero mark the member the
// decomposition declares identically zero.
struct AbcParts {
    Cx3 A{}, B{};
    cplx C{};
    bool a_zero = false, b_zero = false;
    double scaleA = 0.0, scaleB = 0.0, scaleC = 0.0;
};

inline AbcParts abc_decompose(const CorrFrame& fb, const std::string& id) {
    const auto& cj = fb.cj;
    if (!cj.sj.has_curvature)
        throw jet_error("second-order surface data required for the decomposition");

    const Cx3 N0 = value(cj.sj.N0);
    const Cx3 V = value(cj.V);
    const Cx3 W = value(cj.Vw);
    const Cx3 Uu = value(cj.Uu);
    const Cx3 Vv = value(cj.Vv);
    const Cx3 xu = value(cj.sj.xu);
    const Cx3 xv = value(cj.sj.xv);
    const Cx3 Vu = value(derive(cj.V, 0));
    const Cx3 Vvr = value(derive(cj.V, 1));
    const Cx3 PU = value(fb.pU);
    const Cx3 PV = value(fb.pV);
    const Cx3 cUN = cross(Uu, N0);
    const Cx3 cVN = cross(Vv, N0);
    const Cx3 NxV = cross(N0, V);
    const Cx3 WxN0 = cross(W, N0);

    const cplx N = fb.N.value();
    const cplx m2 = (cj.mm * cj.mm).value();
    const cplx V2 = dot(V, V);
    const cplx vU = dot(N0, cross(V, Uu));
    const cplx vV = dot(N0, cross(V, Vv));
    const cplx wU = dot(N0, cross(W, Uu));
    const cplx wV = dot(N0, cross(W, Vv));
    const cplx WtU = dot(W, Uu);
    const cplx WtV = dot(W, Vv);
    const cplx WtV_field = dot(W, V);
    const cplx UtV = dot(V, Uu);   // V^T(shifted u-tangent)
    const cplx VtV = dot(V, Vv);   // V^T(shifted v-tangent)
    const cplx cUN2 = dot(cUN, cUN);
    const cplx cVN2 = dot(cVN, cVN);
    const cplx cUNcVN = dot(cUN, cVN);
    const cplx wxv = dot(N0, cross(W, V));
    const cplx Ut = fb.Ut.value(), Vt = fb.Vt.value();
    const cplx kfac =
        (cj.sj.K * dot(cj.sj.N0, cross(cj.sj.xu, cj.sj.xv)) * fb.invN).value();

    const Cx3 duPU = value(derive(fb.pU, 0)), dvPU = value(derive(fb.pU, 1));
    const Cx3 duPV = value(derive(fb.pV, 0)), dvPV = value(derive(fb.pV, 1));
    const Cx3 dwUu = value(derive(cj.Uu, 2));
    const Cx3 dwVv = value(derive(cj.Vv, 2));
    const Cx3 dwUtan = cross(cross(N0, dwUu), N0);
    const Cx3 dwVtan = cross(cross(N0, dwVv), N0);
    const Cx3 du_VtPU = value(derive(fb.pU * fb.Vt, 0));
    const Cx3 dw_VtPU = value(derive(fb.pU * fb.Vt, 2));
    const Cx3 du_UtPU = value(derive(fb.pU * fb.Ut, 0));
    const Cx3 dv_UtPV = value(derive(fb.pV * fb.Ut, 1));
    const Cx3 dv_VtPV = value(derive(fb.pV * fb.Vt, 1));
    const Cx3 du_VtPV = value(derive(fb.pV * fb.Vt, 0));
    const cplx duUt = derive(fb.Ut, 0).value();
    const cplx dvUt = derive(fb.Ut, 1).value();
    const cplx duVt = derive(fb.Vt, 0).value();

    AbcParts r;
    auto addA = [&](const Cx3& t) {
        r.A = r.A + t;
        r.scaleA += max_abs(t);
    };
    auto addB = [&](const Cx3& t) {
        r.B = r.B + t;
        r.scaleB += max_abs(t);
    };
    auto addC = [&](const cplx& t) {
        r.C += t;
        r.scaleC += std::abs(t);
    };

    if (id == "R1-5") {
        addA(NxV * (-(wV * N * vU)));
        addA(PU * (-(wV * (N * m2 + UtV * vV))));
        addA(PV * ((V2 + m2) * wU * N + UtV * wV * vU));
        addA(W * ((m2 + V2) * N * N));
        r.b_zero = true;
        addB(NxV * (wU * vU * N));
        addB(PU * (wU * vU * VtV));
        addB(PV * (-(wU * vU * UtV)));
        const cplx den = N * wxv;
        addC(-(dot(N0, cross(W, xv)) * dot(N0, cross(W, Vu)) / den) * vU);
        addC((dot(N0, cross(W, xu)) * dot(N0, cross(W, Vvr)) / den) * vU);
        addC(-(wV / N) * dot(N0, cross(xu, Vu)));
        addC((wU / N) * dot(N0, cross(Uu, Vvr)));
        addC(-(cplx(1) / m2) * (cplx(1) + m2 * kfac) * (m2 * wU + WtV_field * vU));
        addC(-UtV * wxv * kfac);
        addC((cplx(1) / m2) * vU * WtV_field);
    } else if (id == "R1-2") {
        r.a_zero = true;
        addA(NxV * (-(vV * wV * N)));
        addA(PU * (-(vV * wV * VtV)));
        addA(PV * (vV * wV * UtV));
        addB(NxV * (vV * wU * N));
        addB(PV * ((m2 * N - VtV * vU) * wU));
        addB(PU * (-((V2 + m2) * wV * N) + VtV * wU * vV));
        addB(W * ((m2 + V2) * N * N));
        const cplx den = N * wxv;
        addC(-(dot(N0, cross(W, xv)) * dot(N0, cross(W, Vu)) / den) * vV);
        addC((dot(N0, cross(W, xu)) * dot(N0, cross(W, Vvr)) / den) * vV);
        addC(-(wV / N) * dot(N0, cross(Vv, Vu)));
        addC((wU / N) * dot(N0, cross(xv, Vvr)));
        addC(-(cplx(1) / m2) * (cplx(1) + m2 * kfac) * (m2 * wV + WtV_field * vV));
        addC(-kfac * VtV * wxv);
        addC((cplx(1) / m2) * WtV_field * vV);
    } else if (id == "R1-7") {
        // Both vector members sum to zero identically.  The scalar part as
        // itemized below does NOT vanish on consistent fields (single- and
        // double-term variants exhausted without a repair); it is retained
        // verbatim as a negative control.
        addA(WxN0 * (N * N * vV));
        addA(PU * (-((WtV * N + cUNcVN * wV + cVN2 * wU) * vV)));
        addA(W * (N * N * VtV));
        addA(cVN * ((vU * wV + vV * wU) * N));
        addA(PV * (WtV * N * vU + cUNcVN * wU * vV + cUN2 * wV * vV));
        addB(WxN0 * (N * N * vU));
        addB(W * (N * N * UtV));
        addB(cUN * (-((wV * vU + wU * vV) * N)));
        addB(PV * ((N * WtU - cUN2 * wV - cUNcVN * wU) * vU));
        addB(PU * (-(WtU * N * vV) + cVN2 * vU * wU + cUNcVN * vU * wV));
        addC(dot(WxN0, duPV + dvPU));
        addC(dot(cVN, du_VtPU + duPV * Ut - dwUtan));
        addC(-dot(cUN, dwVtan + dvPU * Vt + dv_UtPV));
        addC(-(cplx(1) / m2) * (cplx(1) + m2 * kfac) * (WtU * vV + WtV * vU));
        addC(kfac * (WtU * dot(Vv, NxV) + WtV * dot(Uu, NxV) - cUNcVN * N * wxv +
                     cVN2 * dot(Uu, NxV) * Ut - cUN2 * dot(Vv, NxV) * Vt));
        addC(-cUNcVN * wxv / m2);
        addC(-cVN2 * Ut * vU / m2);
        addC(cUN2 * Vt * vV / m2);
    } else if (id == "R1-8") {
        r.a_zero = true;
        addA(cVN * (wV * vV * N));
        addA(PU * (-(wV * vV * cVN2)));
        addA(PV * (wV * vV * cUNcVN));
        addB(WxN0 * (N * N * vV));
        addB(cUN * (-(N * wV * vV)));
        addB(PU * (-(WtV * vV * N) + cVN2 * wV * vU));
        addB(PV * ((WtV * N - cUNcVN * wV) * vU));
        addB(W * (VtV * N * N));
        addC(dot(WxN0, dvPV));
        addC(dot(cVN, duPV * Vt - dwVtan));
        addC(-dot(cUN, dv_VtPV));
        addC(-kfac * wV * VtV);
    } else if (id == "R1-9") {
        addA(WxN0 * (-(N * N * vU)));
        addA(cVN * (-(N * wU * vU)));
        addA(PV * (-(WtU * vU * N + cUN2 * wU * vV)));
        addA(PU * ((WtU * N + cUNcVN * wU) * vV));
        addA(W * (-(UtV * N * N)));
        r.b_zero = true;
        addB(cUN * (wU * vU * N));
        addB(PV * (wU * vU * cUN2));
        addB(PU * (-(wU * vU * cUNcVN)));
        addC(-dot(WxN0, duPU));
        addC(-dot(cVN, du_UtPU));
        addC(dot(cUN, dwUtan));
        addC(Ut * dot(cUN, dvPU));
        addC(kfac * wU * UtV);
    } else if (id == "R2-1") {
        addA(cUN * (cplx(0.5) * vU * wV * N));
        addA(PV * (cplx(0.5) * cUN2 * vU * wV + cplx(0.5) * wU * UtV * N));
        addA(PU * (cplx(-0.5) * cUN2 * vV * wV));
        addA(W * (cplx(0.5) * UtV * N * N));
        r.b_zero = true;
        addB(cUN * (cplx(-0.5) * vU * wU * N));
        addB(PU * (cplx(0.5) * vU * wU * cUNcVN));
        addB(PV * (cplx(-0.5) * vU * wU * cUN2));
        addC(cplx(0.5) * duUt * N);
        addC(cplx(0.5) * Vt * dot(cUN, duPU));
        addC(cplx(-0.5) * dot(cUN, dwUu));
        addC(cplx(-0.5) * Ut * dot(cUN, dvPU));
        addC(cplx(-0.5) * kfac * wU * UtV);
    } else if (id == "R2-2") {
        // The first member vanishes as declared, but the second member as
        // itemized below does not sum to zero (it should: the split
        // relations force it), and the scalar part does not vanish on
        // consistent fields either.  Term variants were exhausted without a
        // repair; both are retained verbatim as negative controls.
        r.a_zero = true;
        addA(cVN * (vV * wV * N));
        addA(PV * (vV * wV * cUNcVN));
        addA(PU * (-(vV * wV * cVN2)));
        addB(cVN * (-((wV * vU + cplx(2) * wU * vV) * N)));
        addB(PU * (-(vV * N * WtV) + cVN2 * wV * vU));
        addB(PV * (-(cVN2 * wU * vU)));
        addB(W * (VtV * N * N));
        addC(dot(cVN, dwVtan * (Ut - cplx(1)) + dw_VtPU - dvPU * Vt - dvPV * (cplx(2) * Ut) +
                           duPV * Vt));
        addC(-kfac * wV * VtV);
    } else if (id == "R2-3") {
        addA(cVN * (-(N * wV * vU)));
        addA(cUN * (-(N * wV * vV)));
        addA(PU * (cplx(2) * wV * vV * cUNcVN));
        addA(PV * (-(vU * N * WtV + wU * vV * cUNcVN + wV * vV * cUN2)));
        addA(W * (-(VtV * N * N)));
        addB(cUN * (wU * N * vV));
        addB(cVN * (wU * N * vU));
        addB(PU * (vV * N * WtU - wV * vU * cUNcVN - wU * vU * cVN2));
        addB(PV * (cplx(2) * wU * vU * cUNcVN));
        addB(W * (-(UtV * N * N)));
        addC(dot(cVN, dwUtan - PU * dvUt + dvPU * Ut - duPU * Vt - PU * (cplx(2) * duVt)));
        addC(dot(cUN, dvPV * Ut - du_VtPV + dwVtan));
        addC(kfac * (wxv * cUNcVN - cVN2 * Ut * vU + cUN2 * Vt * vV));
    } else {
        throw std::invalid_argument("unknown decomposition id: " + id);
    }
    return r;
}

// Value of the recombined relation duN0^T A + dvN0^T B + C.
inline cplx abc_recombination_value(const CorrFrame& fb, const AbcParts& parts) {
    const Cx3 n0u = value(derive(fb.cj.sj.N0, 0));
    const Cx3 n0v = value(derive(fb.cj.sj.N0, 1));
    return dot(n0u, parts.A) + dot(n0v, parts.B) + parts.C;
}

// Base residual each decomposition recombines to.
inline ScaledValue abc_base_residual(const CorrFrame& fb, const std::string& id) {
    if (id == "R1-2" || id == "R1-5" || id == "R1-7" || id == "R1-8" || id == "R1-9") {
        const auto r1 = r1_residuals(fb);
        if (id == "R1-2") return r1[1];
        if (id == "R1-5") return r1[4];
        if (id == "R1-7") return r1[6];
        if (id == "R1-8") return r1[7];
        return r1[8];
    }
    const ChainValues ch = chain_values(fb);
    const cplx N = ch.N, Ut = ch.Ut, Vt = ch.Vt;
    ScaledValue sv;
    auto acc = [&](const cplx& t) {
        sv.value += t;
        sv.scale += std::abs(t);
    };
    if (id == "R2-1") {
        acc(N * ch.tV2[kSlot4]);
        acc(N * Ut * ch.tV1[kSlot4]);
        acc(-cplx(0.5) * N * (ch.tU2[kSlot1] + Ut * ch.tU1[kSlot1]));
        return sv;
    }
    if (id == "R2-2") {
        acc(N * ch.tV3[kSlot1]);
        acc(-N * (Vt * ch.tV1[kSlot1] + cplx(2) * Ut * ch.tV1[kSlot2] +
                  cplx(2) * ch.tV2[kSlot2]));
        return sv;
    }
    if (id == "R2-3") {
        acc(N * ch.tV3[kSlot4]);
        acc(-N * (Vt * ch.tV1[kSlot4] - cplx(2) * Ut * ch.tV1[kSlot1] -
                  cplx(2) * ch.tV2[kSlot1]));
        acc(N * (Ut * ch.tU1[kSlot2] + ch.tU2[kSlot2]));
        return sv;
    }
    throw std::invalid_argument("unknown decomposition id: " + id);
}

// Frozen scalar relating the recombination to the base residual:
// recombination = factor * base.  Established numerically on generic data and
// fixed here; the tests re-verify it.
inline cplx abc_factor(const CorrFrame& fb, const std::string& id) {
    const cplx N = fb.N.value();
    const cplx m2 = (fb.cj.mm * fb.cj.mm).value();
    (void)m2;
    if (id == "R1-2" || id == "R1-5") return N * N;
    if (id == "R1-7" || id == "R1-8" || id == "R1-9") return N * N;
    if (id == "R2-1" || id == "R2-2" || id == "R2-3") return N;
    throw std::invalid_argument("unknown decomposition id: " + id);
}

// Full check set for one decomposition: the identically-zero member (when
// declared), the recombination against the base relation, and the four
// split relations obtained by expanding duN0, dvN0 over the seed's tangent
// basis (coefficients of the second fundamental form must vanish separately,
// as must the form-free remainder C).
inline void abc_checks(ResidualReport& rep, const CorrFrame& fb, const std::string& id,
                       double tol_zero, double tol_recomb, double tol_split) {
    const auto& cj = fb.cj;
    const AbcParts parts = abc_decompose(fb, id);
    const std::string base = "abc." + id;

    if (parts.a_zero)
        rep.add(base + ".zero", cj.u, cj.v, cj.w, max_abs(parts.A), parts.scaleA,
                tol_zero);
    if (parts.b_zero)
        rep.add(base + ".zero", cj.u, cj.v, cj.w, max_abs(parts.B), parts.scaleB,
                tol_zero);

    {
        const cplx recomb = abc_recombination_value(fb, parts);
        const ScaledValue b = abc_base_residual(fb, id);
        const cplx ref = abc_factor(fb, id) * b.value;
        rep.add(base + ".recomb", cj.u, cj.v, cj.w, std::abs(recomb - ref),
                std::abs(recomb) + std::abs(ref) + std::abs(abc_factor(fb, id)) * b.scale,
                tol_recomb);
    }

    {
        const cplx E = cj.sj.E.value(), Ff = cj.sj.F.value(), G = cj.sj.G.value();
        const Cx3 xu = value(cj.sj.xu), xv = value(cj.sj.xv);
        const cplx xuA = dot(xu, parts.A), xvA = dot(xv, parts.A);
        const cplx xuB = dot(xu, parts.B), xvB = dot(xv, parts.B);
        const double mscale = std::abs(E) + std::abs(Ff) + std::abs(G);
        const cplx rA = G * xuA - Ff * xvA;
        const cplx rB = -Ff * xuB + E * xvB;
        const cplx rM = (-Ff * xuA + E * xvA) + (G * xuB - Ff * xvB);
        rep.add(base + ".split.A", cj.u, cj.v, cj.w, std::abs(rA),
                mscale * (max_abs(parts.A) + 1e-30) + std::abs(G * xuA) + std::abs(Ff * xvA),
                tol_split);
        rep.add(base + ".split.B", cj.u, cj.v, cj.w, std::abs(rB),
                mscale * (max_abs(parts.B) + 1e-30) + std::abs(Ff * xuB) + std::abs(E * xvB),
                tol_split);
        rep.add(base + ".split.mix", cj.u, cj.v, cj.w, std::abs(rM),
                mscale * (max_abs(parts.A) + max_abs(parts.B) + 1e-30), tol_split);
        rep.add(base + ".split.C", cj.u, cj.v, cj.w, std::abs(parts.C), parts.scaleC,
                tol_split);
    }
}

}  // namespace contactroll
