// Elimination chain and closed cascade: the rational transport coefficients
// against their jet counterparts, the elimination pole, the slope-independent
// scalar invariant and its mirror, the reduced linear solve, the closed form
// of the determinant's quartic coefficient, the cubic degree of the graded
// combinations, the quadratic slope structure of the final residual, its
// vanishing on consistent data, and the rank-one structure of the source
// column.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "contactroll/correspondence.hpp"
#include "contactroll/scenarios.hpp"
#include "test_util.hpp"

using namespace contactroll;

namespace {

constexpr std::array<int, 3> kChainCaps{4, 4, 2};
constexpr std::array<int, 3> kCascadeCaps{6, 6, 3};

struct Venue {
    SurfacePtr surface;
    ContactFieldPtr field;
    double u, v, w;
};

Venue keystone_venue(double u = 0.7, double v = 1.1, double w = 0.9) {
    Venue ve;
    ve.surface = make_surface("tractroid");
    ve.field = backlund_field(ve.surface, cplx(0.6));
    ve.u = u;
    ve.v = v;
    ve.w = w;
    return ve;
}

Venue sphere_venue(double u = 0.8, double v = 0.6, double w = 1.3) {
    Venue ve;
    ve.surface = make_surface("sphere");
    ve.field = backlund_field(ve.surface, cplx(0.0, 0.5));
    ve.u = u;
    ve.v = v;
    ve.w = w;
    return ve;
}

Venue random_venue(double u = 0.3, double v = -0.5, double w = 1.7,
                   double seed = 11.0, std::uint64_t field_seed = 77) {
    Venue ve;
    ve.surface = make_surface("random_trig", {{"seed", seed}});
    ve.field = random_tangent_field(field_seed, ve.surface);
    ve.u = u;
    ve.v = v;
    ve.w = w;
    return ve;
}

double rel_to(const cplx& got, const cplx& want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

// Evaluate both graded combinations at given slopes, reusing one frame.
std::pair<cplx, cplx> graded_at(const CorrFrame& fb, cplx c1, cplx c2, cplx p, cplx q) {
    Cascade cc = cascade_build(fb, c1, c2, p, q);
    f_solve(cc);
    g_eval(cc);
    return {cc.G1.value(), cc.G2.value()};
}

}  // namespace

TEST_CASE("rational transport coefficients match their jet counterparts") {
    const cplx c1(0.4, 0.2), c2(0.8, -0.1), p(0.5), q(-0.3);
    for (const Venue& ve : {keystone_venue(), random_venue()}) {
        const CorrFrame fb4 = frame_build(*ve.field, ve.u, ve.v, ve.w, kChainCaps);
        const ChainValues ch = chain_values(fb4);
        const DVals dv = d_eval(ch, c1, c2);

        const CorrFrame fb6 = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
        const Cascade cc = cascade_build(fb6, c1, c2, p, q);

        CHECK(rel_to(cc.Phi.value(), dv.Phi) < 1e-12);
        CHECK(rel_to(cc.Psi.value(), dv.Psi) < 1e-12);
        const std::array<std::pair<const Jet*, cplx>, 9> pairs{{
            {&cc.D1, dv.D1},
            {&cc.Xv, dv.Xv},
            {&cc.D2, dv.D2},
            {&cc.D3, dv.D3},
            {&cc.D4, dv.D4},
            {&cc.D5, dv.D5},
            {&cc.D6, dv.D6},
            {&cc.D7, dv.D7},
            {&cc.D8, dv.D8},
        }};
        for (const auto& [jet, want] : pairs) CHECK(rel_to(jet->value(), want) < 1e-12);

        // The u-derivative carried by the jet agrees with a central difference
        // of the point evaluation.
        const double h = 1e-5;
        auto d1_at = [&](double du) {
            const CorrFrame fs = frame_build(*ve.field, ve.u + du, ve.v, ve.w, kChainCaps);
            return d_eval(chain_values(fs), c1, c2).D1;
        };
        const cplx fd = (d1_at(h) - d1_at(-h)) / cplx(2 * h);
        CHECK(rel_to(derive(cc.D1, 0).value(), fd) < 1e-6);

        auto d8_at = [&](double dv_) {
            const CorrFrame fs = frame_build(*ve.field, ve.u, ve.v + dv_, ve.w, kChainCaps);
            return d_eval(chain_values(fs), c1, c2).D8;
        };
        const cplx fd8 = (d8_at(h) - d8_at(-h)) / cplx(2 * h);
        CHECK(rel_to(derive(cc.D8, 1).value(), fd8) < 1e-6);
    }
}

TEST_CASE("the elimination reports its pole") {
    const Venue ve = keystone_venue();
    const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kChainCaps);
    const cplx s4 = fb.sm[kLevelUV][kSlot4].value();
    const cplx s124 = fb.sm[kLevelUV][kSlot124].value();
    REQUIRE(std::abs(s124) > 1e-12);
    const cplx c2_pole = -s4 / s124;  // zero of the constant-slope denominator
    const cplx c1(0.4, 0.2);
    CHECK_THROWS_AS(c4_solve(fb, c1, c2_pole), degeneracy_error);
    CHECK_THROWS_AS(d_eval(chain_values(fb), c1, c2_pole), degeneracy_error);
    // Away from the pole both evaluate and agree.
    const cplx c2(0.8, -0.1);
    const DVals dv = d_eval(chain_values(fb), c1, c2);
    CHECK(rel_to(c4_solve(fb, c1, c2), dv.c4) < 1e-14);
}

TEST_CASE("the scalar invariant ignores the slopes and vanishes on consistent data") {
    const cplx c1(0.4, 0.2), c2(0.8, -0.1), c4(-0.6, 0.3);

    // Off-shell the invariant is an order-one scalar that does not react to
    // the slopes at all.
    {
        const Venue ve = random_venue();
        const ChainValues ch =
            chain_values(frame_build(*ve.field, ve.u, ve.v, ve.w, kChainCaps));
        double scale = 0;
        const cplx a = r5_value(ch, c1, c2, cplx(0.5), cplx(-0.3), &scale);
        const cplx b = r5_value(ch, c1, c2, cplx(-1.7), cplx(2.9), &scale);
        CHECK(std::abs(a - b) < 1e-12 * (1.0 + std::abs(a)));
        CHECK(std::abs(a) / (1.0 + scale) > 1e-3);

        double mscale = 0;
        const cplx ma = r5_mirror_value(ch, c1, c4, cplx(0.5), cplx(-0.3), &mscale);
        const cplx mb = r5_mirror_value(ch, c1, c4, cplx(-1.7), cplx(2.9), &mscale);
        CHECK(std::abs(ma - mb) < 1e-12 * (1.0 + std::abs(ma)));
        CHECK(std::abs(ma) / (1.0 + mscale) > 1e-3);
    }

    // On both integrable scenarios it vanishes.
    for (int sc = 0; sc < 2; ++sc) {
        const Venue base = sc ? sphere_venue() : keystone_venue();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 2; ++k) {
                const double u = 0.5 + i * 0.8, v = 0.4 + i * 2.2, w = 0.3 + k * 2.6;
                const ChainValues ch =
                    chain_values(frame_build(*base.field, u, v, w, kChainCaps));
                double scale = 0;
                const cplx r = r5_value(ch, c1, c2, cplx(0.5), cplx(-0.3), &scale);
                CHECK(std::abs(r) / (1.0 + scale) < 1e-10);
                double mscale = 0;
                const cplx m = r5_mirror_value(ch, c1, c4, cplx(0.5), cplx(-0.3), &mscale);
                CHECK(std::abs(m) / (1.0 + mscale) < 1e-10);
            }
    }
}

TEST_CASE("the reduced linear system solves consistently") {
    const cplx c1(0.4, 0.2), c2(0.8, -0.1), p(0.5), q(-0.3);
    for (const Venue& ve : {keystone_venue(), sphere_venue(), random_venue()}) {
        const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
        Cascade cc = cascade_build(fb, c1, c2, p, q);
        f_solve(cc);
        REQUIRE(cc.solved);
        const double bscale = 1.0 + std::abs(cc.b1.value()) + std::abs(cc.b2.value()) +
                              std::abs(cc.b3.value());
        for (int r = 0; r < 3; ++r) {
            cplx acc = r == 0 ? cc.b1.value() : (r == 1 ? cc.b2.value() : cc.b3.value());
            for (int c = 0; c < 3; ++c) acc += cc.M[r][c].value() * cc.F[c].value();
            CHECK(std::abs(acc) / bscale < 1e-10);
        }
    }
}

TEST_CASE("the determinant's quartic coefficient matches its closed form") {
    const cplx c2(0.8, -0.1);
    std::vector<Venue> venues;
    venues.push_back(keystone_venue());
    venues.push_back(keystone_venue(1.6, 3.9, 2.2));
    venues.push_back(sphere_venue());
    venues.push_back(random_venue());
    for (const Venue& ve : venues) {
        const ChainValues ch =
            chain_values(frame_build(*ve.field, ve.u, ve.v, ve.w, kChainCaps));
        const DetProbe pr = det_leading_probe(ch, c2);
        INFO("venue (" << ve.u << "," << ve.v << "," << ve.w << ")");
        CHECK(pr.fit_rel < 1e-8);
        CHECK(std::abs(pr.coeff[4] - pr.lead_reference) /
                  (1.0 + std::abs(pr.lead_reference)) <
              1e-6);
        CHECK(std::abs(pr.lead_reference) > 1e-12 * pr.scale);
    }
}

TEST_CASE("graded combinations are cubic in each slope") {
    const cplx c1(0.4, 0.2), c2(0.8, -0.1);
    const std::array<double, 4> nodes{-1.5, -0.5, 0.5, 1.5};
    for (const Venue& ve : {keystone_venue(), random_venue()}) {
        const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
        for (int inP = 0; inP < 2; ++inP) {
            const cplx other(0.7);
            std::array<std::pair<cplx, cplx>, 4> at{};
            double scale = 0;
            for (int i = 0; i < 4; ++i) {
                at[i] = inP ? graded_at(fb, c1, c2, cplx(nodes[i]), other)
                            : graded_at(fb, c1, c2, other, cplx(nodes[i]));
                scale += std::abs(at[i].first) + std::abs(at[i].second);
            }
            // A cubic is reproduced exactly by its 4-node Lagrange interpolant,
            // including far outside the node set.
            for (const double t : {2.7, -2.2}) {
                std::pair<cplx, cplx> fit{};
                for (int i = 0; i < 4; ++i) {
                    double l = 1;
                    for (int j = 0; j < 4; ++j)
                        if (j != i) l *= (t - nodes[j]) / (nodes[i] - nodes[j]);
                    fit.first += cplx(l) * at[i].first;
                    fit.second += cplx(l) * at[i].second;
                }
                const auto actual = inP ? graded_at(fb, c1, c2, cplx(t), other)
                                        : graded_at(fb, c1, c2, other, cplx(t));
                INFO((inP ? "p" : "q") << " sweep, probe " << t);
                CHECK(std::abs(fit.first - actual.first) < 1e-8 * (1.0 + scale));
                CHECK(std::abs(fit.second - actual.second) < 1e-8 * (1.0 + scale));
            }
            // ... and the cubic term is genuinely there: the third difference
            // over equispaced nodes is six times the leading coefficient.
            const cplx third1 = at[3].first - cplx(3) * at[2].first +
                                cplx(3) * at[1].first - at[0].first;
            const cplx third2 = at[3].second - cplx(3) * at[2].second +
                                cplx(3) * at[1].second - at[0].second;
            CHECK(std::abs(third1) > 1e-6 * (1.0 + scale));
            CHECK(std::abs(third2) > 1e-6 * (1.0 + scale));
        }
    }
}

TEST_CASE("the final residual is quadratic in the slopes off-shell") {
    const Venue ve = random_venue();
    const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
    const cplx c1(0.4, 0.2), c2(0.8, -0.1);

    auto r3_at = [&](double p, double q) {
        Cascade cc = cascade_build(fb, c1, c2, cplx(p), cplx(q));
        f_solve(cc);
        g_eval(cc);
        return r3_residual(cc).residual;
    };

    // Fit the six quadratic monomials on a 3x3 node grid ...
    const std::array<double, 3> nodes{-1.0, 0.0, 1.0};
    Eigen::MatrixXcd A(9, 6);
    Eigen::VectorXcd y(9);
    int row = 0;
    double scale = 0;
    for (const double p : nodes)
        for (const double q : nodes) {
            A(row, 0) = 1.0;
            A(row, 1) = p;
            A(row, 2) = q;
            A(row, 3) = p * p;
            A(row, 4) = p * q;
            A(row, 5) = q * q;
            y(row) = r3_at(p, q);
            scale += std::abs(y(row));
            ++row;
        }
    const Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(y);

    // ... and check that it extrapolates, so no cubic slope terms survive the
    // combination even off-shell.
    for (const auto& [p, q] : std::vector<std::pair<double, double>>{
             {0.37, -0.61}, {1.7, 2.3}, {-2.1, 0.9}}) {
        const cplx fit = coef(0) + coef(1) * p + coef(2) * q + coef(3) * p * p +
                         coef(4) * p * q + coef(5) * q * q;
        const cplx actual = r3_at(p, q);
        INFO("probe (" << p << "," << q << ")");
        CHECK(std::abs(fit - actual) < 1e-8 * (1.0 + scale));
    }
}

TEST_CASE("the final residual vanishes on consistent data and flags inconsistent data") {
    crtest::Rng rng(90210);
    auto draw = [&] { return cplx(rng.real(), rng.real()); };

    {
        const Venue base = keystone_venue();
        double worst = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    const double u = 0.4 + i * 1.0, v = 0.3 + j * 2.8, w = 0.2 + k * 2.8;
                    const CorrFrame fb = frame_build(*base.field, u, v, w, kCascadeCaps);
                    Cascade cc = cascade_build(fb, draw(), draw(), draw(), draw());
                    f_solve(cc);
                    g_eval(cc);
                    const R3Result r3 = r3_residual(cc);
                    worst = std::max(worst, std::abs(r3.residual) / (1.0 + r3.scale));
                }
        INFO("worst relative residual over the 3x3x3 grid: " << worst);
        CHECK(worst < 1e-5);
    }
    {
        const Venue base = sphere_venue();
        double worst = 0;
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) {
                const double u = 0.5 + i * 1.0, v = 0.4 + i * 2.2, w = 0.3 + k * 2.6;
                const CorrFrame fb = frame_build(*base.field, u, v, w, kCascadeCaps);
                Cascade cc = cascade_build(fb, draw(), draw(), draw(), draw());
                f_solve(cc);
                g_eval(cc);
                const R3Result r3 = r3_residual(cc);
                worst = std::max(worst, std::abs(r3.residual) / (1.0 + r3.scale));
            }
        INFO("worst relative residual on the complexified scenario: " << worst);
        CHECK(worst < 1e-5);
    }
    {
        const Venue ve = random_venue();
        const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
        Cascade cc = cascade_build(fb, cplx(0.4, 0.2), cplx(0.8, -0.1), cplx(0.5),
                                   cplx(-0.3));
        f_solve(cc);
        g_eval(cc);
        const R3Result r3 = r3_residual(cc);
        CHECK(std::abs(r3.residual) / (1.0 + r3.scale) > 1e-3);
    }
}

TEST_CASE("rank-one structure of the source column at consistent points") {
    const cplx c1(0.4, 0.2), c2(0.8, -0.1), p(0.5), q(-0.3);
    for (int sc = 0; sc < 2; ++sc) {
        const Venue base = sc ? sphere_venue() : keystone_venue();
        for (const auto& [u, v, w] : std::vector<std::array<double, 3>>{
                 {0.7, 1.1, 0.9}, {1.5, 3.7, 2.4}}) {
            const CorrFrame fb = frame_build(*base.field, u, v, w, kCascadeCaps);
            const Cascade cc = cascade_build(fb, c1, c2, p, q);
            const auto [q2, q3] = structure_diagnostics(cc);
            const double bscale = 1.0 + std::abs(cc.b1.value()) +
                                  std::abs(cc.b2.value()) + std::abs(cc.b3.value());
            INFO("scenario " << sc << " at (" << u << "," << v << "," << w << ")");
            CHECK(std::abs(q2) / bscale < 1e-10);
            CHECK(std::abs(q3) / bscale < 1e-10);
        }
    }
    // Off-shell the same combinations do not collapse.
    const Venue ve = random_venue();
    const CorrFrame fb = frame_build(*ve.field, ve.u, ve.v, ve.w, kCascadeCaps);
    const Cascade cc = cascade_build(fb, c1, c2, p, q);
    const auto [q2, q3] = structure_diagnostics(cc);
    const double bscale = 1.0 + std::abs(cc.b1.value()) + std::abs(cc.b2.value()) +
                          std::abs(cc.b3.value());
    CHECK(std::max(std::abs(q2), std::abs(q3)) / bscale > 1e-3);
}
