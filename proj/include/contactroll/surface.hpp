#ifndef CONTACTROLL_SURFACE_HPP
#define CONTACTROLL_SURFACE_HPP

// Parametric surfaces evaluated as jets, first/second fundamental forms,
// Gaussian curvature, and the rolling of one isometric surface on another
// (rotation R, translation t, connection form w = unhat(R^{-1} dR)).
//
// Parameters (u,v) are always real; the target space is complex, so surfaces
// whose components are complex-valued functions are fine. Jets seed u and v
// as spec variables 0 and 1, which lets the same evaluation rule run inside
// a 2-, 3- or 7-variable context.

#include <array>
#include <memory>
#include <string>

#include "contactroll/forms.hpp"
#include "contactroll/jets.hpp"
#include "contactroll/kernel.hpp"
#include "contactroll/report.hpp"

namespace contactroll {

class ParametricSurface {
public:
    virtual ~ParametricSurface() = default;
    virtual std::string name() const = 0;
    // position jet with u,v seeded as spec variables 0,1
    virtual Vec3J eval(const JetSpecPtr& spec, double u, double v) const = 0;
    // validity rectangle umin, umax, vmin, vmax
    virtual std::array<double, 4> domain() const = 0;
};

using SurfacePtr = std::shared_ptr<const ParametricSurface>;

// All partials of the surface at a point plus the derived normal,
// fundamental forms and Gaussian curvature, as jets.
struct SurfaceJet {
    double u = 0, v = 0;
    Vec3J x0;
    Vec3J xu, xv;       // first partials
    Vec3J N0;           // unit normal (branch-matched sqrt of |xu x xv|^2)
    Jet norm;           // |xu x xv|
    Jet E, F, G;        // first fundamental form
    bool has_curvature = false;  // second-order data requires order-2 jets
    Jet e, f, g;        // second fundamental form
    Jet K;              // Gaussian curvature
};

// `norm_hint` selects the square-root branch for |xu x xv| (grid sweeps pass
// the previous point's value so the normal stays continuous).
inline SurfaceJet surface_jet(const ParametricSurface& s, const JetSpecPtr& spec,
                              double u, double v, cplx norm_hint = cplx(0)) {
    const auto dom = s.domain();
    if (u < dom[0] || u > dom[1] || v < dom[2] || v > dom[3])
        throw degeneracy_error("point outside surface domain");
    SurfaceJet r;
    r.u = u;
    r.v = v;
    r.x0 = s.eval(spec, u, v);
    r.xu = derive(r.x0, 0);
    r.xv = derive(r.x0, 1);
    const Vec3J cr = cross(r.xu, r.xv);
    const Jet n2 = dot(cr, cr);
    const double cr_scale = max_abs(value(cr));
    if (std::abs(n2.value()) < 1e-12 * (1.0 + cr_scale * cr_scale))
        throw degeneracy_error("degenerate metric");
    r.norm = sqrt_jet(n2, norm_hint);
    r.N0 = cr / r.norm;
    r.E = dot(r.xu, r.xu);
    r.F = dot(r.xu, r.xv);
    r.G = dot(r.xv, r.xv);
    if (r.x0.x.valid_cap(0) >= 2 && r.x0.x.valid_cap(1) >= 2) {
        r.has_curvature = true;
        r.e = dot(r.N0, derive(r.xu, 0));
        r.f = dot(r.N0, derive(r.xu, 1));
        r.g = dot(r.N0, derive(r.xv, 1));
        r.K = (r.e * r.g - r.f * r.f) / (r.E * r.G - r.F * r.F);
    }
    return r;
}

// Componentwise difference of first fundamental forms at a shared parameter
// point; all three vanish iff the surfaces are isometric there.
inline std::array<cplx, 3> isometry_residual(const ParametricSurface& x0,
                                             const ParametricSurface& x,
                                             const JetSpecPtr& spec, double u, double v) {
    const SurfaceJet a = surface_jet(x0, spec, u, v);
    const SurfaceJet b = surface_jet(x, spec, u, v);
    return {a.E.value() - b.E.value(), a.F.value() - b.F.value(), a.G.value() - b.G.value()};
}

// Rolling data of x0 on x at a point: rotation R with det +1, translation t,
// and the connection form w = unhat(R^{-1} dR) over (u,v).
struct RollingFrame {
    double u = 0, v = 0;
    Mat3<Jet> R;
    Vec3J t;
    Form1V omega{2};
    bool flipped_normal = false;  // the other face of x0 was used for det +1
};

inline RollingFrame roll(const ParametricSurface& x0s, const ParametricSurface& xs,
                         const JetSpecPtr& spec, double u, double v,
                         cplx hint0 = cplx(0), cplx hint1 = cplx(0)) {
    if (&x0s == &xs) {
        // rolling a surface on itself: R = I, t = 0, w = 0, exactly
        RollingFrame r;
        r.u = u;
        r.v = v;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.R(i, j) = Jet::constant(spec, i == j ? 1 : 0);
        r.t = vec3_const(spec, Cx3{});
        r.omega = Form1V(2);
        r.omega.c[0] = vec3_const(spec, Cx3{});
        r.omega.c[1] = vec3_const(spec, Cx3{});
        return r;
    }
    const SurfaceJet s0 = surface_jet(x0s, spec, u, v, hint0);
    const SurfaceJet s1 = surface_jet(xs, spec, u, v, hint1);

    const double mscale = 1.0 + std::max({std::abs(s0.E.value()), std::abs(s0.F.value()),
                                          std::abs(s0.G.value())});
    if (std::abs(s0.E.value() - s1.E.value()) > 1e-8 * mscale ||
        std::abs(s0.F.value() - s1.F.value()) > 1e-8 * mscale ||
        std::abs(s0.G.value() - s1.G.value()) > 1e-8 * mscale)
        throw degeneracy_error("not isometric");

    RollingFrame r;
    r.u = u;
    r.v = v;

    // R = [xu xv N] [xu0 xv0 N0]^{-1}, with the face of x0 chosen so det R = +1
    Mat3<Jet> F1 = Mat3<Jet>::from_columns(s1.xu, s1.xv, s1.N0);
    Mat3<Jet> F0 = Mat3<Jet>::from_columns(s0.xu, s0.xv, s0.N0);
    Mat3<Jet> R = F1 * inverse(F0);
    if (std::abs(det(R).value() - cplx(1)) > std::abs(det(R).value() + cplx(1))) {
        F0 = Mat3<Jet>::from_columns(s0.xu, s0.xv, -s0.N0);
        R = F1 * inverse(F0);
        r.flipped_normal = true;
    }
    r.R = R;
    r.t = s1.x0 - R * s0.x0;

    const Mat3<Jet> Rinv = inverse(R);
    r.omega = Form1V(2);
    for (int t = 0; t < 2; ++t)
        r.omega.c[t] = unhat(Rinv * derive(R, t), 1e-7);
    return r;
}

// Rotation of the rolling with the other face of x0: R' = R (I - 2 N0 N0^T).
inline Mat3<Jet> other_face_rotation(const Mat3<Jet>& R, const Vec3J& N0) {
    Mat3<Jet> refl;
    const Jet* n[3] = {&N0.x, &N0.y, &N0.z};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            refl(i, j) = (*n[i]) * (*n[j]) * cplx(-2);
            if (i == j) refl(i, j) += cplx(1);
        }
    return R * refl;
}

// The three rolling-form conditions:
//   d w + 1/2 w x^ w = 0   ("eq2.flat")
//   w x^ dx0 = 0           ("eq2.tangent")
//   N0^T w = 0             ("eq2.perp")
inline ResidualReport rolling_residuals(const RollingFrame& fr, const SurfaceJet& sj,
                                        double tol = 1e-8) {
    ResidualReport rep;

    const Form2V dw = ext_d(fr.omega);
    const Form2V www = wedge_cross(fr.omega, fr.omega);
    const Form2V flat = dw + www.scaled(cplx(0.5));
    rep.add("eq2.flat", fr.u, fr.v, 0, value_max_abs(flat),
            value_max_abs(dw) + 0.5 * value_max_abs(www), tol);

    Form1V dx0(2);
    dx0.c[0] = sj.xu;
    dx0.c[1] = sj.xv;
    const Form2V tangent = wedge_cross(fr.omega, dx0);
    rep.add("eq2.tangent", fr.u, fr.v, 0, value_max_abs(tangent),
            value_max_abs(fr.omega) * value_max_abs(dx0), tol);

    const Form1J perp = dot(sj.N0, fr.omega);
    rep.add("eq2.perp", fr.u, fr.v, 0, value_max_abs(perp), value_max_abs(fr.omega), tol);

    return rep;
}

}  // namespace contactroll

#endif  // CONTACTROLL_SURFACE_HPP
