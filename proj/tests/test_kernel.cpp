// Kernel checks: bilinear pairing, cross product, the hat isomorphism and its
// algebra, and rotation construction from frames.

#include <catch2/catch_amalgamated.hpp>

#include "contactroll/kernel.hpp"
#include "test_util.hpp"

using namespace contactroll;
using crtest::Rng;
using crtest::rel_err;

namespace {
const cplx I(0, 1);
const Cx3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
}  // namespace

TEST_CASE("bilinear dot product", "[kernel]") {
    SECTION("orthogonal basis") { REQUIRE(dot(e1, e2) == cplx(0)); }
    SECTION("isotropic vector has zero square") {
        const Cx3 iso{1, I, 0};
        REQUIRE(std::abs(dot(iso, iso)) == 0.0);
    }
    SECTION("hand arithmetic") {
        REQUIRE(dot(Cx3{2, 3, 5}, Cx3{7, 11, 13}) == cplx(112));
    }
    SECTION("symmetry on random data") {
        Rng rng(11);
        for (int i = 0; i < 100; ++i) {
            const Cx3 a = rng.vec3(), b = rng.vec3();
            REQUIRE(rel_err(dot(a, b), dot(b, a)) < 1e-15);
        }
    }
}

TEST_CASE("cross product", "[kernel]") {
    SECTION("right-handed basis") { REQUIRE(rel_err(cross(e1, e2), e3) == 0.0); }
    SECTION("antisymmetry") {
        Rng rng(12);
        const Cx3 a = rng.vec3();
        REQUIRE(max_abs(cross(a, a)) == 0.0);
    }
    SECTION("hand arithmetic") {
        REQUIRE(rel_err(cross(Cx3{1, 2, 3}, Cx3{4, 5, 6}), Cx3{-3, 6, -3}) == 0.0);
    }
    SECTION("orthogonality to factors") {
        Rng rng(13);
        for (int i = 0; i < 100; ++i) {
            const Cx3 a = rng.vec3(), b = rng.vec3();
            REQUIRE(std::abs(dot(cross(a, b), a)) < 1e-15);
        }
    }
}

TEST_CASE("hat isomorphism", "[kernel]") {
    SECTION("displayed matrix for e1") {
        const Mat3c m = hat(e1);
        REQUIRE(m(0, 0) == cplx(0));
        REQUIRE(m(0, 1) == cplx(0));
        REQUIRE(m(0, 2) == cplx(0));
        REQUIRE(m(1, 2) == cplx(-1));
        REQUIRE(m(2, 1) == cplx(1));
    }
    SECTION("zero maps to zero") { REQUIRE(max_abs(hat(Cx3{0, 0, 0})) == 0.0); }
    SECTION("round trip") {
        const Cx3 v{2, -1, 4};
        REQUIRE(rel_err(unhat(hat(v)), v) == 0.0);
    }
    SECTION("rejects non-antisymmetric input") {
        Mat3c m = hat(e1);
        m(0, 0) = cplx(0.5);
        REQUIRE_THROWS_AS(unhat(m), degeneracy_error);
    }
}

TEST_CASE("hat algebra identities on random complex triples", "[kernel][property]") {
    Rng rng(101);
    double worst_action = 0, worst_comm = 0, worst_rank1 = 0, worst_trace = 0;
    for (int i = 0; i < 1000; ++i) {
        const Cx3 a = rng.vec3(), b = rng.vec3(), c = rng.vec3();

        // hat(a) c == a x c
        worst_action = std::max(worst_action, rel_err(hat(a) * c, cross(a, c)));

        // hat(a x b) == [hat a, hat b] == hat(hat(a) b)
        const Mat3c lhs = hat(cross(a, b));
        const Mat3c comm = hat(a) * hat(b) - hat(b) * hat(a);
        worst_comm = std::max(worst_comm, max_abs(lhs - comm) / (1.0 + max_abs(lhs)));

        // hat(a x b) == b a^T - a b^T
        Mat3c rank1;
        const Cx3 rows[3] = {e1, e2, e3};
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s) {
                const cplx ar = dot(a, rows[r]), br = dot(b, rows[r]);
                const cplx as = dot(a, rows[s]), bs = dot(b, rows[s]);
                rank1(r, s) = br * as - ar * bs;
            }
        worst_rank1 = std::max(worst_rank1, max_abs(lhs - rank1) / (1.0 + max_abs(lhs)));

        // dot(a,b) == 1/2 tr(hat(a)^T hat(b))
        const Mat3c tr = transpose(hat(a)) * hat(b);
        const cplx half_trace = (tr(0, 0) + tr(1, 1) + tr(2, 2)) * cplx(0.5);
        worst_trace = std::max(worst_trace, rel_err(half_trace, dot(a, b)));
    }
    REQUIRE(worst_action < 1e-12);
    REQUIRE(worst_comm < 1e-12);
    REQUIRE(worst_rank1 < 1e-12);
    REQUIRE(worst_trace < 1e-12);
}

TEST_CASE("hat conjugation under rotations", "[kernel][property]") {
    Rng rng(102);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const Mat3c R = crtest::random_rotation(rng);
        const Cx3 x = rng.vec3();
        const Mat3c lhs = hat(R * x);
        const Mat3c rhs = R * hat(x) * inverse(R);
        worst = std::max(worst, max_abs(lhs - rhs) / (1.0 + max_abs(lhs)));
    }
    REQUIRE(worst < 1e-12);
}

TEST_CASE("rotation from frames", "[kernel]") {
    SECTION("identity") {
        const Mat3c R = rotation_from_frames(e1, e2, e3, e1, e2, e3);
        REQUIRE(max_abs(R - Mat3c::identity()) < 1e-15);
    }
    SECTION("quarter turn about e3") {
        const Mat3c R = rotation_from_frames(e1, e2, e3, e2, -e1, e3);
        REQUIRE(rel_err(R * e1, e2) < 1e-15);
        REQUIRE(rel_err(R * e2, -e1) < 1e-15);
        REQUIRE(rel_err(R * e3, e3) < 1e-15);
        REQUIRE(rel_err(det(R), cplx(1)) < 1e-15);
    }
    SECTION("recovers a random complex rotation, orthogonal to 1e-12") {
        Rng rng(103);
        for (int i = 0; i < 100; ++i) {
            const Mat3c Q = crtest::random_rotation(rng);
            const Mat3c R = rotation_from_frames(e1, e2, e3, Q * e1, Q * e2, Q * e3);
            REQUIRE(max_abs(R - Q) < 1e-12);
            REQUIRE(max_abs(transpose(R) * R - Mat3c::identity()) < 1e-12);
            REQUIRE(rel_err(det(R), cplx(1)) < 1e-12);
        }
    }
    SECTION("degenerate frame is rejected") {
        REQUIRE_THROWS_AS(rotation_from_frames(e1, e1, e3, e1, e2, e3), degeneracy_error);
    }
}

TEST_CASE("matrix inverse guard", "[kernel]") {
    Mat3c singular = Mat3c::from_columns(e1, e1 * cplx(2), e1 * cplx(-3));
    REQUIRE_THROWS_AS(inverse(singular), degeneracy_error);
    Rng rng(104);
    for (int i = 0; i < 50; ++i) {
        const Mat3c R = crtest::random_rotation(rng);
        REQUIRE(max_abs(inverse(R) * R - Mat3c::identity()) < 1e-12);
    }
}

TEST_CASE("branch-matched square root", "[kernel]") {
    const cplx z(-1.0, 1e-12);
    const cplx plus = sqrt_matched(z, cplx(0, 1));
    const cplx minus = sqrt_matched(z, cplx(0, -1));
    REQUIRE(std::abs(plus - cplx(0, 1)) < 1e-6);
    REQUIRE(std::abs(minus + cplx(0, 1)) < 1e-6);
}
