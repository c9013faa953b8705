#ifndef CONTACTROLL_CONTACT_HPP
#define CONTACTROLL_CONTACT_HPP

// Contact-element distributions along a seed surface: the tangential field
// V(u,v,w) with scalar component mm(u,v,w), normal fields m = V x N0 + mm N0,
// the leaf 1-form dw, the integrability residual suite, the general leaf
// condition, the consistency condition, and leaf integration by RK4.
//
// All residuals are uv-space forms at a point, assembled from (u,v,w)-jets.
// Degenerate loci (developable seed, lost regularity) throw typed errors
// instead of being regularized away.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "contactroll/forms.hpp"
#include "contactroll/jets.hpp"
#include "contactroll/kernel.hpp"
#include "contactroll/report.hpp"
#include "contactroll/surface.hpp"

namespace contactroll {

class ContactField {
public:
    virtual ~ContactField() = default;
    virtual std::string name() const = 0;
    virtual const SurfacePtr& seed() const = 0;
    // V jet with u,v,w seeded as spec variables 0,1,2; must be tangential
    virtual Vec3J eval_V(const JetSpecPtr& spec, double u, double v, double w) const = 0;
    // mm jet; fields without a closed form derive it from the first
    // integrability equation (see mm_squared_from_line1)
    virtual Jet eval_mm(const JetSpecPtr& spec, double u, double v, double w) const = 0;
};

using ContactFieldPtr = std::shared_ptr<const ContactField>;

// Everything the residual formulas need at one point (u,v,w).
struct ContactJet {
    double u = 0, v = 0, w = 0;
    JetSpecPtr spec;
    SurfaceJet sj;   // seed data, constant in w
    Vec3J V;
    Jet mm;
    Vec3J m;         // V x N0 + mm N0
    Vec3J Vw;        // partial_w V
    Vec3J Uu, Vv;    // partial_u(V+x0), partial_v(V+x0)
};

inline ContactJet contact_jet(const ContactField& f, const JetSpecPtr& spec,
                              double u, double v, double w, cplx norm_hint = cplx(0)) {
    ContactJet cj;
    cj.u = u; cj.v = v; cj.w = w;
    cj.spec = spec;
    cj.sj = surface_jet(*f.seed(), spec, u, v, norm_hint);
    cj.V = f.eval_V(spec, u, v, w);
    cj.mm = f.eval_mm(spec, u, v, w);

    const double tangency = std::abs(dot(cj.sj.N0, cj.V).value());
    if (tangency > 1e-10 * (1.0 + max_abs(value(cj.V))))
        throw degeneracy_error("contact field is not tangential");

    cj.m = cross(cj.V, cj.sj.N0) + cj.sj.N0 * cj.mm;
    cj.Vw = derive(cj.V, 2);
    cj.Uu = derive(cj.V, 0) + cj.sj.xu;
    cj.Vv = derive(cj.V, 1) + cj.sj.xv;
    return cj;
}

// --- helpers shared by the residual formulas ---------------------------------

namespace detail {

inline Form1V d_uv(const Vec3J& f) { return ext_d(f, 2); }

// w-derivative of every coefficient of a uv 1-form
inline Form1J derive_w(const Form1J& w1) {
    Form1J r(2);
    r.c[0] = derive(w1.c[0], 2);
    r.c[1] = derive(w1.c[1], 2);
    return r;
}

// guard a scalar denominator away from zero
inline void check_regular(const Jet& den, const char* what) {
    if (std::abs(den.value()) < 1e-12 * (1.0 + den.max_coeff_abs()))
        throw degeneracy_error(what);
}

}  // namespace detail

// The regularity scalar N0^T(partial_w V x V); every leaf formula divides by it.
inline Jet regularity_scalar(const ContactJet& cj) {
    return dot(cj.sj.N0, cross(cj.Vw, cj.V));
}

// mm^2 solved from the first integrability equation:
//   2 [Vw x d(V+x0)]^T ^ (V x dx0) / ((Vw x V)^T (dx0 x^ dx0)) + (mm^2+|V|^2) K = 0.
// Requires a non-developable seed (K != 0).
inline Jet mm_squared_from_line1(const SurfaceJet& sj, const Vec3J& V) {
    const Vec3J Vw = derive(V, 2);
    Form1V dx0(2);
    dx0.c[0] = sj.xu;
    dx0.c[1] = sj.xv;
    const Form1V dVx0 = detail::d_uv(V) + dx0;
    const Jet num = wedge_dot(cross(Vw, dVx0), cross(V, dx0)).c[0] * cplx(2);
    const Jet den = dot(cross(Vw, V), wedge_cross(dx0, dx0).c[0]);
    detail::check_regular(den, "regularity violated");
    if (!sj.has_curvature) throw jet_error("curvature requires order-2 jets");
    if (std::abs(sj.K.value()) < 1e-8)
        throw degeneracy_error("developable seed excluded");
    return -dot(V, V) - num / (den * sj.K);
}

// The two square-root branches of mm. The caller picks one and keeps it
// continuous along grids via the hint.
inline std::pair<Jet, Jet> m_from_first_integrability(const SurfaceJet& sj, const Vec3J& V,
                                                      cplx hint = cplx(0)) {
    const Jet mm2 = mm_squared_from_line1(sj, V);
    if (std::abs(mm2.value()) < 1e-10)
        throw degeneracy_error("mm = 0 excluded");
    const Jet s = sqrt_jet(mm2, hint);
    return {s, -s};
}

// The leaf 1-form
//   dw = N0^T[V x d(V+x0)] / N0^T(Vw x V) + mm V^T(w x N0 + dN0) / N0^T(Vw x V),
// with w the rolling connection form of the seed (zero for identity rolling).
inline Form1J dw_form(const ContactJet& cj, const Form1V& omega) {
    const Jet reg = regularity_scalar(cj);
    detail::check_regular(reg, "regularity violated");
    const Jet inv_reg = reciprocal(reg);

    Form1V dVx0(2);
    dVx0.c[0] = cj.Uu;
    dVx0.c[1] = cj.Vv;
    const Form1J part1 = dot(cj.sj.N0, cross(cj.V, dVx0));

    const Form1V omN0 = cross(omega, cj.sj.N0) + ext_d(cj.sj.N0, 2);
    const Form1J part2 = dot(cj.V, omN0);

    return part1.scaled(inv_reg) + part2.scaled(cj.mm * inv_reg);
}

// General leaf condition m^T(w x V + d(V+x0) + Vw dw); identically zero
// along leaves once dw comes from dw_form and w satisfies the rolling
// conditions (the connection is tangential).
inline Form1J leaf_condition_residual(const ContactJet& cj, const Form1V& omega,
                                      const Form1J& dw) {
    Form1V dVx0(2);
    dVx0.c[0] = cj.Uu;
    dVx0.c[1] = cj.Vv;
    const Form1V inner = cross(omega, cj.V) + dVx0 + cj.Vw * dw;
    return dot(cj.m, inner);
}

// --- the integrability residual suite -----------------------------------------
//
// check ids: eq4.line1, eq4.line2, eq5, eq6.1, eq6.2

inline ResidualReport integrability_residuals(const ContactJet& cj, double tol = 1e-8) {
    ResidualReport rep;
    const double u = cj.u, v = cj.v, w = cj.w;

    Form1V dx0(2);
    dx0.c[0] = cj.sj.xu;
    dx0.c[1] = cj.sj.xv;
    Form1V dVx0(2);
    dVx0.c[0] = cj.Uu;
    dVx0.c[1] = cj.Vv;
    const Form1V dV = detail::d_uv(cj.V);

    const Jet reg = regularity_scalar(cj);
    detail::check_regular(reg, "regularity violated");
    const Jet inv_reg = reciprocal(reg);
    const Jet den2 = dot(cross(cj.Vw, cj.V), wedge_cross(dx0, dx0).c[0]);
    detail::check_regular(den2, "regularity violated");
    if (!cj.sj.has_curvature) throw jet_error("curvature requires order-2 jets");
    if (std::abs(cj.sj.K.value()) < 1e-8)
        throw degeneracy_error("developable seed excluded");

    // first line: 2 [Vw x d(V+x0)]^T ^ (V x dx0) / den2 + (mm^2+|V|^2) K = 0
    {
        const Jet t1 = wedge_dot(cross(cj.Vw, dVx0), cross(cj.V, dx0)).c[0] * cplx(2) / den2;
        const Jet t2 = (cj.mm * cj.mm + dot(cj.V, cj.V)) * cj.sj.K;
        rep.add("eq4.line1", u, v, w, std::abs((t1 + t2).value()),
                std::abs(t1.value()) + std::abs(t2.value()), tol);
    }

    // second line: d mm = -dmm_w * theta0 + mm * eta with
    //   theta0 = N0^T[V x d(V+x0)] / reg,  eta = N0^T(Vw x dV) / reg
    const Form1J theta0 = dot(cj.sj.N0, cross(cj.V, dVx0)).scaled(inv_reg);
    const Form1J eta = dot(cj.sj.N0, cross(cj.Vw, dV)).scaled(inv_reg);
    {
        const Form1J dmm = ext_d(cj.mm, 2);
        const Form1J r = dmm + theta0.scaled(derive(cj.mm, 2)) - eta.scaled(cj.mm);
        double worst = 0, worst_scale = 0;
        for (int t = 0; t < 2; ++t) {
            const double scale = std::abs(dmm.c[t].value()) +
                                 std::abs((theta0.c[t] * derive(cj.mm, 2)).value()) +
                                 std::abs((eta.c[t] * cj.mm).value());
            const double res = std::abs(r.c[t].value());
            if (res / (1.0 + scale) > worst / (1.0 + worst_scale)) {
                worst = res;
                worst_scale = scale;
            }
        }
        rep.add("eq4.line2", u, v, w, worst, worst_scale, tol);
    }

    // 2 (Vw x dV)^T ^ (Vw x dx0) / den2 + (mm dmm_w + V^T Vw) K = 0
    {
        const Jet t1 = wedge_dot(cross(cj.Vw, dV), cross(cj.Vw, dx0)).c[0] * cplx(2) / den2;
        const Jet t2 = (cj.mm * derive(cj.mm, 2) + dot(cj.V, cj.Vw)) * cj.sj.K;
        rep.add("eq5", u, v, w, std::abs((t1 + t2).value()),
                std::abs(t1.value()) + std::abs(t2.value()), tol);
    }

    // dw_w(N0^T[Vw x d(V+x0)] / reg) ^ N0^T(V x dx0)
    //   - (N0^T(Vw x dV) / reg) ^ N0^T(Vw x dx0) = 0
    {
        const Form1J theta = dot(cj.sj.N0, cross(cj.Vw, dVx0)).scaled(inv_reg);
        const Form1J nu = dot(cj.sj.N0, cross(cj.V, dx0));
        const Form1J mu = dot(cj.sj.N0, cross(cj.Vw, dx0));
        const Jet t1 = wedge(detail::derive_w(theta), nu).c[0];
        const Jet t2 = wedge(eta, mu).c[0];
        rep.add("eq6.1", u, v, w, std::abs((t1 - t2).value()),
                std::abs(t1.value()) + std::abs(t2.value()), tol);
    }

    // 1/2 d A2 = -B2 theta0 + A2 eta, where A2 and B2 are the mm-free forms of
    // the squared scalar component and its w-derivative
    {
        const Jet Kden2 = cj.sj.K * den2;
        const Jet A2 = wedge_dot(cross(cj.Vw, dVx0), cross(cj.V, dx0)).c[0] * cplx(2) / Kden2 +
                       dot(cj.V, cj.V);
        const Jet B2 = wedge_dot(cross(cj.Vw, dV), cross(cj.Vw, dx0)).c[0] * cplx(2) / Kden2 +
                       dot(cj.V, cj.Vw);
        const Form1J lhs = ext_d(A2, 2).scaled(cplx(0.5));
        const Form1J r = lhs + theta0.scaled(B2) - eta.scaled(A2);
        double worst = 0, worst_scale = 0;
        for (int t = 0; t < 2; ++t) {
            const double scale = std::abs(lhs.c[t].value()) +
                                 std::abs((theta0.c[t] * B2).value()) +
                                 std::abs((eta.c[t] * A2).value());
            const double res = std::abs(r.c[t].value());
            if (res / (1.0 + scale) > worst / (1.0 + worst_scale)) {
                worst = res;
                worst_scale = scale;
            }
        }
        rep.add("eq6.2", u, v, w, worst, worst_scale, tol);
    }

    return rep;
}

// Consistency of the linear system behind the isometric-correspondence frame:
// with P := N0 m^T / mm and the tangential projector applied to d(V+x0),
//   [d(V+x0)^T (I - m N0^T/mm)] (.) [dP Vw - dP_w d(V+x0) + 2 N0^T(Vw x d(V+x0)) W] = 0,
// where (.) is the symmetric product over (du,dv) contracting the vector index
// and W = (dP ^ d(V+x0)) / N0^T[d(V+x0) x^ d(V+x0)].
inline ResidualReport consistency_residual(const ContactJet& cj, double tol = 1e-8) {
    const Vec3J& N0 = cj.sj.N0;
    detail::check_regular(cj.mm, "mm = 0 excluded");
    const Jet inv_mm = reciprocal(cj.mm);

    Form1V dVx0(2);
    dVx0.c[0] = cj.Uu;
    dVx0.c[1] = cj.Vv;

    // P = N0 m^T / mm as a matrix jet
    Mat3<Jet> P;
    const Jet* n0c[3] = {&N0.x, &N0.y, &N0.z};
    const Jet* mc[3] = {&cj.m.x, &cj.m.y, &cj.m.z};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) P(i, j) = (*n0c[i]) * (*mc[j]) * inv_mm;

    const Mat3<Jet> Pu = derive(P, 0), Pv = derive(P, 1), Pw = derive(P, 2);

    // left factor: L_j = (I - N0 m^T/mm) d_j(V+x0) = d_j(V+x0) - N0 (m^T d_j(V+x0))/mm
    Form1V L(2);
    for (int t = 0; t < 2; ++t)
        L.c[t] = dVx0.c[t] - N0 * (dot(cj.m, dVx0.c[t]) * inv_mm);

    const Jet N = dot(N0, cross(cj.Uu, cj.Vv));  // half of N0^T[d(V+x0) x^ d(V+x0)]
    detail::check_regular(N, "degenerate tangential 2-form");
    const Vec3J W = (Pu * cj.Vv - Pv * cj.Uu) / (N * cplx(2));

    Form1V term1(2), term2(2), term3(2);
    term1.c[0] = Pu * cj.Vw;
    term1.c[1] = Pv * cj.Vw;
    term2.c[0] = -(Pw * cj.Uu);
    term2.c[1] = -(Pw * cj.Vv);
    term3.c[0] = W * (dot(N0, cross(cj.Vw, cj.Uu)) * cplx(2));
    term3.c[1] = W * (dot(N0, cross(cj.Vw, cj.Vv)) * cplx(2));

    const auto s1 = sym_dot(L, term1), s2 = sym_dot(L, term2), s3 = sym_dot(L, term3);
    ResidualReport rep;
    double worst = 0, worst_scale = 0;
    for (int k = 0; k < 3; ++k) {
        const double res = std::abs((s1[k] + s2[k] + s3[k]).value());
        const double scale =
            std::abs(s1[k].value()) + std::abs(s2[k].value()) + std::abs(s3[k].value());
        if (res / (1.0 + scale) > worst / (1.0 + worst_scale)) {
            worst = res;
            worst_scale = scale;
        }
    }
    rep.add("cons", cj.u, cj.v, cj.w, worst, worst_scale, tol);
    return rep;
}

// --- leaf integration -----------------------------------------------------------

struct LeafMesh {
    int nu = 0, nv = 0;
    double u0 = 0, v0 = 0, du = 0, dv = 0;
    std::vector<double> w;        // rows-then-columns integration, row-major [iv*nu+iu]
    std::vector<double> w_alt;    // columns-then-rows
    std::vector<Cx3> points;      // leaf points x + R V(u,v,w)
    double path_independence = 0; // max |w - w_alt|
};

// Connection form at an arbitrary point; null means identity rolling (w = 0).
using OmegaProvider = std::function<Form1V(const JetSpecPtr&, double u, double v)>;

// Integrates dw over the grid by RK4 along rows and columns from the base
// corner, both orders, and reports the largest disagreement. Leaf points use
// the rows-then-columns solution. `substeps` RK4 steps per grid cell keep the
// integrator error well under the path-independence budget.
inline LeafMesh leaf_integrate(const ContactField& field, double u0, double u1, double v0,
                               double v1, int nu, int nv, double w0,
                               const OmegaProvider& omega_at = nullptr, int substeps = 3) {
    // order 2 in (u,v): the leaf form needs the differential of the normal
    const auto spec = make_jet_spec({2, 2, 1});
    auto dw_coeffs = [&](double u, double v, double w) -> std::array<cplx, 2> {
        const ContactJet cj = contact_jet(field, spec, u, v, w);
        Form1V omega(2);
        if (omega_at) {
            omega = omega_at(spec, u, v);
        } else {
            omega.c[0] = vec3_const(spec, Cx3{});
            omega.c[1] = vec3_const(spec, Cx3{});
        }
        const Form1J dw = dw_form(cj, omega);
        return {dw.c[0].value(), dw.c[1].value()};
    };
    // w stays real on real scenarios; integrate the real part and let the
    // residual suite certify that the imaginary drift is zero
    auto rk4 = [&](double u, double v, double w, double h, int dir) {
        auto f = [&](double uu, double vv, double ww) {
            const auto c = dw_coeffs(uu, vv, ww);
            return c[dir].real();
        };
        const double k1 = f(u, v, w);
        const double du_ = dir == 0 ? h / 2 : 0, dv_ = dir == 1 ? h / 2 : 0;
        const double k2 = f(u + du_, v + dv_, w + h / 2 * k1);
        const double k3 = f(u + du_, v + dv_, w + h / 2 * k2);
        const double k4 = f(u + 2 * du_, v + 2 * dv_, w + h * k3);
        return w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    auto step = [&](double u, double v, double w, double h, int dir) {
        const double hs = h / substeps;
        for (int s = 0; s < substeps; ++s) {
            w = rk4(u, v, w, hs, dir);
            (dir == 0 ? u : v) += hs;
        }
        return w;
    };

    LeafMesh mesh;
    mesh.nu = nu;
    mesh.nv = nv;
    mesh.u0 = u0;
    mesh.v0 = v0;
    mesh.du = (u1 - u0) / (nu - 1);
    mesh.dv = (v1 - v0) / (nv - 1);
    mesh.w.assign(static_cast<size_t>(nu) * nv, 0.0);
    mesh.w_alt.assign(static_cast<size_t>(nu) * nv, 0.0);

    auto& wA = mesh.w;
    auto& wB = mesh.w_alt;
    auto at = [&](std::vector<double>& a, int iu, int iv) -> double& {
        return a[static_cast<size_t>(iv) * nu + iu];
    };

    // order A: first row in u, then each column in v
    at(wA, 0, 0) = w0;
    for (int iu = 1; iu < nu; ++iu)
        at(wA, iu, 0) = step(u0 + (iu - 1) * mesh.du, v0, at(wA, iu - 1, 0), mesh.du, 0);
    for (int iu = 0; iu < nu; ++iu)
        for (int iv = 1; iv < nv; ++iv)
            at(wA, iu, iv) =
                step(u0 + iu * mesh.du, v0 + (iv - 1) * mesh.dv, at(wA, iu, iv - 1), mesh.dv, 1);

    // order B: first column in v, then each row in u
    at(wB, 0, 0) = w0;
    for (int iv = 1; iv < nv; ++iv)
        at(wB, 0, iv) = step(u0, v0 + (iv - 1) * mesh.dv, at(wB, 0, iv - 1), mesh.dv, 1);
    for (int iv = 0; iv < nv; ++iv)
        for (int iu = 1; iu < nu; ++iu)
            at(wB, iu, iv) =
                step(u0 + (iu - 1) * mesh.du, v0 + iv * mesh.dv, at(wB, iu - 1, iv), mesh.du, 0);

    for (size_t i = 0; i < wA.size(); ++i)
        mesh.path_independence = std::max(mesh.path_independence, std::abs(wA[i] - wB[i]));

    // leaf points (identity rolling: x + R V = x0 + V)
    mesh.points.resize(wA.size());
    for (int iv = 0; iv < nv; ++iv)
        for (int iu = 0; iu < nu; ++iu) {
            const double u = u0 + iu * mesh.du, v = v0 + iv * mesh.dv;
            const ContactJet cj = contact_jet(field, spec, u, v, at(wA, iu, iv));
            mesh.points[static_cast<size_t>(iv) * nu + iu] = value(cj.V) + value(cj.sj.x0);
        }
    return mesh;
}

// Gaussian curvature of a mesh by 4th-order central differences; returns one
// estimate per interior node at least two cells from the boundary.
inline std::vector<cplx> mesh_gaussian_curvature(const LeafMesh& mesh) {
    const int nu = mesh.nu, nv = mesh.nv;
    auto pt = [&](int iu, int iv) -> const Cx3& {
        return mesh.points[static_cast<size_t>(iv) * nu + iu];
    };
    std::vector<cplx> ks;
    const double hu = mesh.du, hv = mesh.dv;
    auto d1 = [](const Cx3& m2, const Cx3& m1, const Cx3& p1, const Cx3& p2, double h) {
        return (m2 - p2 + (p1 - m1) * cplx(8.0)) / cplx(12.0 * h);
    };
    auto d2 = [](const Cx3& m2, const Cx3& m1, const Cx3& c, const Cx3& p1, const Cx3& p2,
                 double h) {
        return (-(m2 + p2) + (m1 + p1) * cplx(16.0) - c * cplx(30.0)) / cplx(12.0 * h * h);
    };
    for (int iv = 2; iv < nv - 2; ++iv)
        for (int iu = 2; iu < nu - 2; ++iu) {
            const Cx3 xu = d1(pt(iu - 2, iv), pt(iu - 1, iv), pt(iu + 1, iv), pt(iu + 2, iv), hu);
            const Cx3 xv = d1(pt(iu, iv - 2), pt(iu, iv - 1), pt(iu, iv + 1), pt(iu, iv + 2), hv);
            const Cx3 xuu = d2(pt(iu - 2, iv), pt(iu - 1, iv), pt(iu, iv), pt(iu + 1, iv),
                               pt(iu + 2, iv), hu);
            const Cx3 xvv = d2(pt(iu, iv - 2), pt(iu, iv - 1), pt(iu, iv), pt(iu, iv + 1),
                               pt(iu, iv + 2), hv);
            // mixed derivative: 4th-order u-stencil of 4th-order v-derivatives
            Cx3 xv_at[4];
            int off[4] = {-2, -1, 1, 2};
            for (int k = 0; k < 4; ++k) {
                const int i = iu + off[k];
                xv_at[k] = d1(pt(i, iv - 2), pt(i, iv - 1), pt(i, iv + 1), pt(i, iv + 2), hv);
            }
            const Cx3 xuv = (xv_at[0] - xv_at[3] + (xv_at[2] - xv_at[1]) * cplx(8.0)) / cplx(12.0 * hu);

            const Cx3 cr = cross(xu, xv);
            const cplx n2 = dot(cr, cr);
            const Cx3 N0 = cr / std::sqrt(n2);
            const cplx E = dot(xu, xu), F = dot(xu, xv), G = dot(xv, xv);
            const cplx e = dot(N0, xuu), f = dot(N0, xuv), g = dot(N0, xvv);
            ks.push_back((e * g - f * f) / (E * G - F * F));
        }
    return ks;
}

}  // namespace contactroll

#endif  // CONTACTROLL_CONTACT_HPP
