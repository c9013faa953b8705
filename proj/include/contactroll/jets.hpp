#ifndef CONTACTROLL_JETS_HPP
#define CONTACTROLL_JETS_HPP

// Forward-mode truncated Taylor arithmetic ("jets") over complex scalars.
//
// A Jet stores the Taylor coefficients (partials divided by factorials) of a
// scalar function over a small set of independent variables, truncated to
// per-variable degree caps. All differentiation in the library is exact jet
// arithmetic; finite differences appear only as a test oracle.
//
// Caps are anisotropic on purpose: the deep residual cascades need order ~5-6
// in the surface parameters but only order 2 in auxiliary variables, and a
// uniform total order would explode the coefficient count.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "contactroll/kernel.hpp"

namespace contactroll {

struct jet_error : std::runtime_error {
    explicit jet_error(const std::string& what) : std::runtime_error(what) {}
};

constexpr int kMaxJetVars = 8;
using MultiIndex = std::array<int, kMaxJetVars>;  // unused variables stay 0

// Dense coefficient lattice over the capped multi-indices, plus a
// precomputed multiplication pair table. One spec instance is built per
// evaluation context and shared by every jet in it.
class JetSpec {
public:
    explicit JetSpec(std::vector<int> caps) : caps_(std::move(caps)) {
        if (caps_.empty() || caps_.size() > kMaxJetVars)
            throw jet_error("jet spec needs 1..8 variables");
        size_ = 1;
        strides_.resize(caps_.size());
        for (size_t v = 0; v < caps_.size(); ++v) {
            if (caps_[v] < 0) throw jet_error("negative degree cap");
            strides_[v] = size_;
            size_ *= caps_[v] + 1;
        }
        tuples_.resize(size_);
        for (int i = 0; i < size_; ++i) {
            int rest = i;
            for (size_t v = 0; v < caps_.size(); ++v) {
                tuples_[i][v] = static_cast<int8_t>(rest % (caps_[v] + 1));
                rest /= caps_[v] + 1;
            }
        }
        build_pair_table();
    }

    int nvars() const { return static_cast<int>(caps_.size()); }
    int cap(int v) const { return caps_[v]; }
    int size() const { return size_; }
    int stride(int v) const { return strides_[v]; }
    int max_total_degree() const {
        int s = 0;
        for (int c : caps_) s += c;
        return s;
    }

    int index_of(const MultiIndex& mi) const {
        int idx = 0;
        for (int v = 0; v < nvars(); ++v) {
            if (mi[v] < 0 || mi[v] > caps_[v]) throw jet_error("multi-index outside caps");
            idx += mi[v] * strides_[v];
        }
        for (int v = nvars(); v < kMaxJetVars; ++v)
            if (mi[v] != 0) throw jet_error("multi-index outside caps");
        return idx;
    }
    const std::array<int8_t, kMaxJetVars>& tuple(int idx) const { return tuples_[idx]; }

    // flat (ia, ib, iout) triples of every in-cap product of lattice points
    const std::vector<int32_t>& mul_a() const { return mul_a_; }
    const std::vector<int32_t>& mul_b() const { return mul_b_; }
    const std::vector<int32_t>& mul_out() const { return mul_out_; }

private:
    void build_pair_table() {
        for (int ia = 0; ia < size_; ++ia) {
            const auto& ta = tuples_[ia];
            for (int ib = 0; ib < size_; ++ib) {
                const auto& tb = tuples_[ib];
                bool ok = true;
                for (int v = 0; v < nvars(); ++v)
                    if (ta[v] + tb[v] > caps_[v]) { ok = false; break; }
                if (!ok) continue;
                mul_a_.push_back(ia);
                mul_b_.push_back(ib);
                mul_out_.push_back(ia + ib);  // strides make linear indices additive in-cap
            }
        }
    }

    std::vector<int> caps_;
    std::vector<int> strides_;
    int size_ = 0;
    std::vector<std::array<int8_t, kMaxJetVars>> tuples_;
    std::vector<int32_t> mul_a_, mul_b_, mul_out_;
};

using JetSpecPtr = std::shared_ptr<const JetSpec>;

inline JetSpecPtr make_jet_spec(std::vector<int> caps) {
    return std::make_shared<JetSpec>(std::move(caps));
}

class Jet {
public:
    Jet() = default;
    Jet(JetSpecPtr spec, cplx value) : spec_(std::move(spec)), a_(spec_->size(), cplx(0)) {
        a_[0] = value;
        valid_.fill(127);
        clamp_valid_to_caps();
    }

    static Jet constant(const JetSpecPtr& spec, cplx value) { return Jet(spec, value); }

    // value `value`, first derivative 1 in variable `var`, all else 0
    static Jet variable(const JetSpecPtr& spec, int var, cplx value) {
        if (var < 0 || var >= spec->nvars()) throw jet_error("variable index out of range");
        if (spec->cap(var) < 1) throw jet_error("cannot seed a variable with cap 0");
        Jet j(spec, value);
        j.a_[spec->stride(var)] = cplx(1);
        return j;
    }

    const JetSpecPtr& spec() const { return spec_; }
    bool empty() const { return !spec_; }
    cplx value() const { return a_.empty() ? cplx(0) : a_[0]; }

    // raw Taylor coefficient (partial / factorial); guarded by validity
    cplx coeff(const MultiIndex& mi) const {
        check_valid(mi);
        return a_[spec_->index_of(mi)];
    }

    // raw Taylor coefficient write access, for assembling a jet whose
    // coefficients are computed externally (e.g. re-basing a jet into a
    // space with extra variables). Honors the caps but not the validity
    // bookkeeping: the caller asserts the written value is a true Taylor
    // coefficient.
    void set_coeff(const MultiIndex& mi, const cplx& v) {
        if (empty()) throw jet_error("set_coeff on an empty jet");
        a_[spec_->index_of(mi)] = v;
    }

    // the actual partial derivative: coefficient times the multi-factorial
    cplx partial(const MultiIndex& mi) const {
        double f = 1.0;
        for (int v = 0; v < spec_->nvars(); ++v)
            for (int k = 2; k <= mi[v]; ++k) f *= k;
        return coeff(mi) * f;
    }

    // remaining trustworthy degree in each variable (decreases under derive)
    int valid_cap(int v) const { return std::min<int>(valid_[v], spec_->cap(v)); }

    Jet operator-() const {
        Jet r(*this);
        for (auto& c : r.a_) c = -c;
        return r;
    }
    Jet operator+(const Jet& o) const {
        Jet r = binary_shell(o);
        for (int i = 0; i < spec_->size(); ++i) r.a_[i] = a_[i] + o.a_[i];
        return r;
    }
    Jet operator-(const Jet& o) const {
        Jet r = binary_shell(o);
        for (int i = 0; i < spec_->size(); ++i) r.a_[i] = a_[i] - o.a_[i];
        return r;
    }
    Jet operator*(const Jet& o) const {
        Jet r = binary_shell(o);
        const auto& ia = spec_->mul_a();
        const auto& ib = spec_->mul_b();
        const auto& io = spec_->mul_out();
        const size_t n = ia.size();
        const cplx* pa = a_.data();
        const cplx* pb = o.a_.data();
        cplx* po = r.a_.data();
        for (size_t k = 0; k < n; ++k) {
            const cplx& va = pa[ia[k]];
            if (va.real() == 0.0 && va.imag() == 0.0) continue;
            po[io[k]] += va * pb[ib[k]];
        }
        return r;
    }
    Jet operator/(const Jet& o) const { return *this * reciprocal(o); }

    Jet operator+(const cplx& s) const {
        Jet r(*this);
        r.a_[0] += s;
        return r;
    }
    Jet operator-(const cplx& s) const {
        Jet r(*this);
        r.a_[0] -= s;
        return r;
    }
    Jet operator*(const cplx& s) const {
        Jet r(*this);
        for (auto& c : r.a_) c *= s;
        return r;
    }
    Jet operator/(const cplx& s) const {
        Jet r(*this);
        for (auto& c : r.a_) c /= s;
        return r;
    }
    Jet& operator+=(const Jet& o) { return *this = *this + o; }
    Jet& operator-=(const Jet& o) { return *this = *this - o; }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator+=(const cplx& s) { return *this = *this + s; }
    Jet& operator-=(const cplx& s) { return *this = *this - s; }
    Jet& operator*=(const cplx& s) { return *this = *this * s; }

    // ∂/∂var as a new jet over the same spec. The top degree in `var`
    // becomes unknown, which the validity bookkeeping records; extracting
    // a coefficient past the valid degree throws instead of lying.
    friend Jet derive(const Jet& j, int var) {
        if (j.empty()) throw jet_error("derivative of an empty jet");
        if (j.valid_cap(var) < 1)
            throw jet_error("insufficient jet order for derivative in variable " +
                            std::to_string(var) + " (valid degree 0)");
        Jet r = j;
        const int s = j.spec_->stride(var);
        const int n = j.spec_->size();
        for (int i = 0; i < n; ++i) {
            const auto& t = j.spec_->tuple(i);
            if (t[var] < j.spec_->cap(var))
                r.a_[i] = j.a_[i + s] * cplx(t[var] + 1);
            else
                r.a_[i] = cplx(0);
        }
        r.valid_[var] = static_cast<int8_t>(j.valid_cap(var) - 1);
        return r;
    }

    friend Jet reciprocal(const Jet& j) {
        const cplx b0 = j.value();
        if (std::abs(b0) < 1e-14 * (1.0 + j.max_coeff_abs()))
            throw jet_error("jet pole");
        // Taylor coefficients of 1/x at b0: (-1)^k / b0^{k+1}
        std::vector<cplx> c(j.spec_->max_total_degree() + 1);
        cplx p = cplx(1) / b0;
        for (size_t k = 0; k < c.size(); ++k) {
            c[k] = p;
            p = -p / b0;
        }
        return j.apply_series(c);
    }

    // branch: principal, or matched against `hint` when one is supplied
    friend Jet sqrt_jet(const Jet& j, cplx hint) {
        const cplx b0 = j.value();
        if (std::abs(b0) < 1e-14 * (1.0 + j.max_coeff_abs()))
            throw jet_error("jet branch point");
        const cplx s0 = (hint == cplx(0)) ? std::sqrt(b0) : sqrt_matched(b0, hint);
        std::vector<cplx> c(j.spec_->max_total_degree() + 1);
        // c_{k+1} = c_k (1/2 - k) / ((k+1) b0), c_0 = sqrt(b0)
        c[0] = s0;
        for (size_t k = 0; k + 1 < c.size(); ++k)
            c[k + 1] = c[k] * (0.5 - static_cast<double>(k)) / (static_cast<double>(k + 1) * b0);
        return j.apply_series(c);
    }
    friend Jet sqrt_jet(const Jet& j) { return sqrt_jet(j, cplx(0)); }

    friend Jet exp_jet(const Jet& j) {
        const cplx e0 = std::exp(j.value());
        std::vector<cplx> c(j.spec_->max_total_degree() + 1);
        double fact = 1.0;
        for (size_t k = 0; k < c.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            c[k] = e0 / fact;
        }
        return j.apply_series(c);
    }

    friend Jet sin_jet(const Jet& j) { return j.trig_series(std::sin(j.value()), std::cos(j.value()), false); }
    friend Jet cos_jet(const Jet& j) { return j.trig_series(std::cos(j.value()), -std::sin(j.value()), false); }
    friend Jet sinh_jet(const Jet& j) { return j.trig_series(std::sinh(j.value()), std::cosh(j.value()), true); }
    friend Jet cosh_jet(const Jet& j) { return j.trig_series(std::cosh(j.value()), std::sinh(j.value()), true); }

    double max_coeff_abs() const {
        double m = 0;
        for (const auto& c : a_) m = std::max(m, std::abs(c));
        return m;
    }

private:
    void clamp_valid_to_caps() {
        for (int v = 0; v < spec_->nvars(); ++v)
            valid_[v] = static_cast<int8_t>(spec_->cap(v));
    }
    void check_valid(const MultiIndex& mi) const {
        for (int v = 0; v < spec_->nvars(); ++v)
            if (mi[v] > valid_cap(v))
                throw jet_error("coefficient beyond the trustworthy degree (derived too often)");
    }
    Jet binary_shell(const Jet& o) const {
        if (spec_.get() != o.spec_.get()) throw jet_error("jet spec mismatch");
        Jet r;
        r.spec_ = spec_;
        r.a_.assign(spec_->size(), cplx(0));
        for (int v = 0; v < kMaxJetVars; ++v)
            r.valid_[v] = std::min(valid_[v], o.valid_[v]);
        return r;
    }

    // f(b) = sum_k c_k (b - b0)^k; exact in the truncated algebra because
    // b - b0 is nilpotent there. c_k are f's Taylor coefficients at b0.
    Jet apply_series(const std::vector<cplx>& c) const {
        Jet h = *this;
        h.a_[0] = cplx(0);
        Jet acc(spec_, c[0]);
        acc.valid_ = valid_;
        if (h.max_coeff_abs() == 0.0) return acc;
        Jet hp = h;
        for (size_t k = 1; k < c.size(); ++k) {
            if (c[k] != cplx(0)) acc += hp * c[k];
            if (k + 1 < c.size()) {
                hp = hp * h;
                if (hp.max_coeff_abs() == 0.0) break;
            }
        }
        return acc;
    }

    Jet trig_series(cplx f0, cplx f1, bool hyperbolic) const {
        // derivative cycle: sin -> cos -> -sin -> -cos (period 4);
        // sinh -> cosh -> sinh (period 2)
        std::vector<cplx> c(spec_->max_total_degree() + 1);
        cplx d[2] = {f0, f1};
        double fact = 1.0;
        for (size_t k = 0; k < c.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            const cplx dk = d[k % 2] * ((!hyperbolic && (k % 4) >= 2) ? cplx(-1) : cplx(1));
            c[k] = dk / fact;
        }
        return apply_series(c);
    }

    JetSpecPtr spec_;
    std::vector<cplx> a_;
    std::array<int8_t, kMaxJetVars> valid_{};
};

inline double magnitude(const Jet& j) { return std::abs(j.value()); }

inline Jet operator*(const cplx& s, const Jet& j) { return j * s; }
inline Jet operator+(const cplx& s, const Jet& j) { return j + s; }
inline Jet operator-(const cplx& s, const Jet& j) { return (-j) + s; }
inline Jet operator/(const cplx& s, const Jet& j) { return reciprocal(j) * s; }

using Vec3J = Vec3<Jet>;

inline Vec3J vec3_const(const JetSpecPtr& spec, const Cx3& v) {
    return {Jet::constant(spec, v.x), Jet::constant(spec, v.y), Jet::constant(spec, v.z)};
}
inline Cx3 value(const Vec3J& v) { return {v.x.value(), v.y.value(), v.z.value()}; }
inline Vec3J derive(const Vec3J& v, int var) {
    return {derive(v.x, var), derive(v.y, var), derive(v.z, var)};
}
inline Mat3<Jet> derive(const Mat3<Jet>& m, int var) {
    Mat3<Jet> r;
    for (int i = 0; i < 9; ++i) r.m[i] = derive(m.m[i], var);
    return r;
}

// --- finite-difference oracle ------------------------------------------------
//
// Central finite differences for cross-checking jet partials in tests.
// Recursion applies one variable at a time; total order is capped at 3,
// beyond which central differences are too noisy to be an oracle.

using ScalarField = std::function<cplx(const std::vector<double>&)>;

inline cplx fd_oracle(const ScalarField& f, std::vector<double> point,
                      MultiIndex mi, double step = 1e-5) {
    int total = 0;
    for (int v = 0; v < kMaxJetVars; ++v) total += mi[v];
    if (total > 3) throw std::invalid_argument("fd_oracle supports total order <= 3");
    if (total == 0) return f(point);
    int var = 0;
    while (mi[var] == 0) ++var;
    --mi[var];
    auto shifted = [&](double delta) {
        std::vector<double> p = point;
        p[var] += delta;
        return fd_oracle(f, p, mi, step);
    };
    return (shifted(step) - shifted(-step)) / cplx(2 * step);
}

}  // namespace contactroll

#endif  // CONTACTROLL_JETS_HPP
