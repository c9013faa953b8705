#ifndef CONTACTROLL_SCENARIOS_HPP
#define CONTACTROLL_SCENARIOS_HPP

// Built-in analytic surfaces, isometric pairs, and contact fields: the
// classical pseudospherical angle distribution on the tractroid (and its
// complexified spherical counterpart), plus seeded random surfaces and
// tangential fields that fuel the identity-class property tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "contactroll/contact.hpp"
#include "contactroll/jets.hpp"
#include "contactroll/kernel.hpp"
#include "contactroll/surface.hpp"

namespace contactroll {

namespace detail {

// uniform in [-1,1), reproducible bit-for-bit across platforms (raw mt19937_64
// bits mapped directly, no distribution object)
class SeededUniform {
public:
    explicit SeededUniform(std::uint64_t seed) : g_(seed) {}
    double next() { return static_cast<double>(g_() >> 11) * 0x1.0p-52 - 1.0; }

private:
    std::mt19937_64 g_;
};

}  // namespace detail

// --- analytic surfaces -----------------------------------------------------------

namespace surfaces {

class Plane final : public ParametricSurface {
public:
    std::string name() const override { return "plane"; }
    std::array<double, 4> domain() const override { return {-2.0, 2.0, -2.0, 2.0}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {ju, jv, Jet::constant(spec, 0)};
    }
};

class Sphere final : public ParametricSurface {
public:
    std::string name() const override { return "sphere"; }
    std::array<double, 4> domain() const override { return {0.3, 2.8, 0.0, 6.2}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {sin_jet(ju) * cos_jet(jv), sin_jet(ju) * sin_jet(jv), cos_jet(ju)};
    }
};

// the pseudosphere of revolution; the cusp circle u=0 is excluded with a band
class Tractroid final : public ParametricSurface {
public:
    std::string name() const override { return "tractroid"; }
    std::array<double, 4> domain() const override { return {0.3, 2.5, 0.0, 6.2}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        const Jet sech = reciprocal(cosh_jet(ju));
        return {sech * cos_jet(jv), sech * sin_jet(jv), ju - sinh_jet(ju) * sech};
    }
};

class Catenoid final : public ParametricSurface {
public:
    std::string name() const override { return "catenoid"; }
    std::array<double, 4> domain() const override { return {-1.2, 1.2, 0.0, 6.2}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {cosh_jet(ju) * cos_jet(jv), cosh_jet(ju) * sin_jet(jv), ju};
    }
};

class Helicoid final : public ParametricSurface {
public:
    std::string name() const override { return "helicoid"; }
    std::array<double, 4> domain() const override { return {-1.2, 1.2, 0.0, 6.2}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {sinh_jet(ju) * cos_jet(jv), sinh_jet(ju) * sin_jet(jv), jv};
    }
};

class Cylinder final : public ParametricSurface {
public:
    std::string name() const override { return "cylinder"; }
    std::array<double, 4> domain() const override { return {-2.0, 2.0, -2.0, 2.0}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {cos_jet(ju), sin_jet(ju), jv};
    }
};

class Ellipsoid final : public ParametricSurface {
public:
    Ellipsoid(double a, double b, double c) : a_(a), b_(b), c_(c) {}
    std::string name() const override { return "ellipsoid"; }
    std::array<double, 4> domain() const override { return {0.3, 2.8, 0.0, 6.2}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        return {sin_jet(ju) * cos_jet(jv) * cplx(a_), sin_jet(ju) * sin_jet(jv) * cplx(b_),
                cos_jet(ju) * cplx(c_)};
    }

private:
    double a_, b_, c_;
};

// graph surface z = h(u,v) with h a seeded low-degree trigonometric polynomial
class RandomTrig final : public ParametricSurface {
public:
    explicit RandomTrig(std::uint64_t seed) : seed_(seed) {
        detail::SeededUniform rng(seed);
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j) {
                if (i + j == 0 || i + j > 3) continue;
                Term t;
                t.fu = i;
                t.fv = j;
                t.amp = 0.25 * rng.next() / (1.0 + i + j);
                t.phase = 3.0 * rng.next();
                terms_.push_back(t);
            }
    }
    std::string name() const override { return "random_trig"; }
    std::array<double, 4> domain() const override { return {-1.0, 1.0, -1.0, 1.0}; }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        Jet h = Jet::constant(spec, 0);
        for (const auto& t : terms_)
            h += cos_jet(ju * cplx(t.fu) + jv * cplx(t.fv) + cplx(t.phase)) * cplx(t.amp);
        return {ju, jv, h};
    }

private:
    struct Term {
        double fu = 0, fv = 0, amp = 0, phase = 0;
    };
    std::uint64_t seed_;
    std::vector<Term> terms_;
};

// x -> Q x + c of a base surface
class RigidMotion final : public ParametricSurface {
public:
    RigidMotion(SurfacePtr base, const Mat3c& Q, const Cx3& c)
        : base_(std::move(base)), Q_(Q), c_(c) {}
    std::string name() const override { return base_->name() + "_moved"; }
    std::array<double, 4> domain() const override { return base_->domain(); }
    Vec3J eval(const JetSpecPtr& spec, double u, double v) const override {
        const Vec3J x = base_->eval(spec, u, v);
        Vec3J r = vec3_const(spec, c_);
        const Jet* xc[3] = {&x.x, &x.y, &x.z};
        Jet* rc[3] = {&r.x, &r.y, &r.z};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) *rc[i] += (*xc[j]) * Q_(i, j);
        return r;
    }

private:
    SurfacePtr base_;
    Mat3c Q_;
    Cx3 c_;
};

}  // namespace surfaces

inline SurfacePtr make_surface(const std::string& name,
                               const std::map<std::string, double>& params = {}) {
    auto get = [&](const char* key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "plane") return std::make_shared<surfaces::Plane>();
    if (name == "sphere") return std::make_shared<surfaces::Sphere>();
    if (name == "tractroid") return std::make_shared<surfaces::Tractroid>();
    if (name == "catenoid") return std::make_shared<surfaces::Catenoid>();
    if (name == "helicoid") return std::make_shared<surfaces::Helicoid>();
    if (name == "cylinder") return std::make_shared<surfaces::Cylinder>();
    if (name == "ellipsoid")
        return std::make_shared<surfaces::Ellipsoid>(get("a", 1.2), get("b", 1.0), get("c", 0.8));
    if (name == "random_trig")
        return std::make_shared<surfaces::RandomTrig>(
            static_cast<std::uint64_t>(get("seed", 7.0)));
    throw std::invalid_argument("unknown surface name: " + name);
}

// --- isometric pairs --------------------------------------------------------------

struct IsometricPair {
    SurfacePtr x0;
    SurfacePtr x;
    std::array<double, 4> domain;  // common parameter rectangle
};

inline IsometricPair make_isometric_pair(const std::string& name) {
    if (name == "catenoid_helicoid") {
        auto a = make_surface("catenoid");
        auto b = make_surface("helicoid");
        return {a, b, {-1.0, 1.0, 0.3, 5.9}};
    }
    if (name == "plane_cylinder") {
        auto a = make_surface("plane");
        auto b = make_surface("cylinder");
        return {a, b, {-1.8, 1.8, -1.8, 1.8}};
    }
    if (name == "rigid_motion") {
        auto base = make_surface("tractroid");
        const Mat3c A = hat(Cx3{cplx(0.20), cplx(-0.10), cplx(0.15)});
        const Mat3c Q = (Mat3c::identity() - A) * inverse(Mat3c::identity() + A);
        const Cx3 c{cplx(0.7), cplx(-0.3), cplx(1.1)};
        auto moved = std::make_shared<surfaces::RigidMotion>(base, Q, c);
        return {base, moved, {0.4, 2.4, 0.2, 6.0}};
    }
    throw std::invalid_argument("unknown isometric pair: " + name);
}

// --- tangent frames ---------------------------------------------------------------

struct TangentFrame {
    Vec3J e1, e2;
};

// Gram-Schmidt of (x_u, x_v), principal square-root branch. On the real
// surfaces here the first fundamental form is positive, so the branch is
// continuous across any grid.
inline TangentFrame tangent_frame(const SurfaceJet& sj) {
    const Jet E = dot(sj.xu, sj.xu);
    const Vec3J e1 = sj.xu / sqrt_jet(E, cplx(1));
    const Vec3J t2 = sj.xv - e1 * dot(e1, sj.xv);
    const Jet L2 = dot(t2, t2);
    if (std::abs(L2.value()) < 1e-12) throw degeneracy_error("degenerate tangent frame");
    const Vec3J e2 = t2 / sqrt_jet(L2, cplx(1));
    return {e1, e2};
}

// --- contact fields ----------------------------------------------------------------

// The classical angle distribution V = s_mul (cos w e1 + sin w e2), mm = c_mul.
// For the tractroid (K=-1): s_mul=sin(sigma), c_mul=cos(sigma), so
// mm^2+|V|^2 = +1 = -1/K. For the sphere (K=+1) a real angle cannot satisfy
// the closing identity, so a pure-imaginary sigma=i*tau switches to the scaled
// pair s_mul=i sin(tau), c_mul=i cos(tau), giving mm^2+|V|^2 = -1 = -1/K.
class BacklundField final : public ContactField {
public:
    BacklundField(SurfacePtr seed, cplx sigma) : seed_(std::move(seed)), sigma_(sigma) {
        const bool imaginary = std::abs(sigma.real()) < 1e-14 && std::abs(sigma.imag()) > 0;
        if (imaginary) {
            const double tau = sigma.imag();
            s_mul_ = cplx(0, std::sin(tau));
            c_mul_ = cplx(0, std::cos(tau));
        } else {
            s_mul_ = std::sin(sigma);
            c_mul_ = std::cos(sigma);
        }
        if (std::abs(s_mul_) < 1e-12 || std::abs(c_mul_) < 1e-12)
            throw std::invalid_argument("sigma must have nonzero sine and cosine");
    }
    std::string name() const override { return "backlund(" + seed_->name() + ")"; }
    const SurfacePtr& seed() const override { return seed_; }
    Vec3J eval_V(const JetSpecPtr& spec, double u, double v, double w) const override {
        const SurfaceJet sj = surface_jet(*seed_, spec, u, v);
        const TangentFrame fr = tangent_frame(sj);
        const Jet jw = Jet::variable(spec, 2, w);
        return (fr.e1 * cos_jet(jw) + fr.e2 * sin_jet(jw)) * s_mul_;
    }
    Jet eval_mm(const JetSpecPtr& spec, double, double, double) const override {
        return Jet::constant(spec, c_mul_);
    }
    cplx sigma() const { return sigma_; }

private:
    SurfacePtr seed_;
    cplx sigma_;
    cplx s_mul_, c_mul_;
};

inline ContactFieldPtr backlund_field(const SurfacePtr& seed, cplx sigma) {
    return std::make_shared<BacklundField>(seed, sigma);
}

// Multiplies the tangential part of a field by 1 + eps*sin(u+2v+3w);
// negative-control fuel that keeps tangency but breaks integrability.
class PerturbedField final : public ContactField {
public:
    PerturbedField(ContactFieldPtr base, double eps) : base_(std::move(base)), eps_(eps) {}
    std::string name() const override { return base_->name() + "_perturbed"; }
    const SurfacePtr& seed() const override { return base_->seed(); }
    Vec3J eval_V(const JetSpecPtr& spec, double u, double v, double w) const override {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        const Jet jw = Jet::variable(spec, 2, w);
        const Jet bump = sin_jet(ju + jv * cplx(2) + jw * cplx(3)) * cplx(eps_) + cplx(1);
        return base_->eval_V(spec, u, v, w) * bump;
    }
    Jet eval_mm(const JetSpecPtr& spec, double u, double v, double w) const override {
        return base_->eval_mm(spec, u, v, w);
    }

private:
    ContactFieldPtr base_;
    double eps_;
};

inline ContactFieldPtr perturb_field(const ContactFieldPtr& base, double eps) {
    return std::make_shared<PerturbedField>(base, eps);
}

// Seeded random tangential field V = a(u,v,w) e1 + b(u,v,w) e2 with low-degree
// trigonometric polynomial components; mm a similar polynomial bounded away
// from zero. Generic fuel: tangential by construction, integrable only by
// accident.
class RandomTangentField final : public ContactField {
public:
    RandomTangentField(SurfacePtr surface, std::uint64_t seed)
        : seed_surface_(std::move(surface)) {
        detail::SeededUniform rng(seed);
        auto fill = [&](std::vector<Term>& ts) {
            for (int n = 0; n < 5; ++n) {
                Term t;
                t.fu = 1 + (n % 2);
                t.fv = 1 + ((n + 1) % 2);
                t.fw = 1 + (n % 3 == 0 ? 1 : 0);
                t.amp = 0.35 * rng.next();
                t.phase = 3.0 * rng.next();
                ts.push_back(t);
            }
        };
        fill(a_);
        fill(b_);
        fill(m_);
        m_offset_ = cplx(1.3 + 0.3 * rng.next(), 0.0);
    }
    std::string name() const override { return "random_tangent(" + seed_surface_->name() + ")"; }
    const SurfacePtr& seed() const override { return seed_surface_; }
    Vec3J eval_V(const JetSpecPtr& spec, double u, double v, double w) const override {
        const SurfaceJet sj = surface_jet(*seed_surface_, spec, u, v);
        const TangentFrame fr = tangent_frame(sj);
        return fr.e1 * poly(a_, cplx(0), spec, u, v, w) + fr.e2 * poly(b_, cplx(0), spec, u, v, w);
    }
    Jet eval_mm(const JetSpecPtr& spec, double u, double v, double w) const override {
        return poly(m_, m_offset_, spec, u, v, w);
    }

private:
    struct Term {
        double fu = 0, fv = 0, fw = 0, amp = 0, phase = 0;
    };
    static Jet poly(const std::vector<Term>& ts, cplx offset, const JetSpecPtr& spec, double u,
                    double v, double w) {
        const Jet ju = Jet::variable(spec, 0, u);
        const Jet jv = Jet::variable(spec, 1, v);
        const Jet jw = Jet::variable(spec, 2, w);
        Jet acc = Jet::constant(spec, offset);
        for (const auto& t : ts)
            acc += cos_jet(ju * cplx(t.fu) + jv * cplx(t.fv) + jw * cplx(t.fw) + cplx(t.phase)) *
                   cplx(t.amp);
        return acc;
    }
    SurfacePtr seed_surface_;
    std::vector<Term> a_, b_, m_;
    cplx m_offset_;
};

inline ContactFieldPtr random_tangent_field(std::uint64_t seed, const SurfacePtr& surface) {
    return std::make_shared<RandomTangentField>(surface, seed);
}

}  // namespace contactroll

#endif  // CONTACTROLL_SCENARIOS_HPP
