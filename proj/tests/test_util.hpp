#ifndef CONTACTROLL_TEST_UTIL_HPP
#define CONTACTROLL_TEST_UTIL_HPP

// Shared helpers for the test suites: seeded deterministic randomness and
// relative-residual comparison.

#include <random>

#include "contactroll/jets.hpp"
#include "contactroll/kernel.hpp"

namespace crtest {

using contactroll::cplx;
using contactroll::Cx3;

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    // uniform in [-1, 1], deterministic across platforms (raw-bit mapping)
    double real() {
        const uint64_t bits = gen_();
        return 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
    }
    cplx complex_unit() { return {real(), real()}; }
    Cx3 vec3() { return {complex_unit(), complex_unit(), complex_unit()}; }

private:
    std::mt19937_64 gen_;
};

inline double rel_err(const cplx& got, const cplx& want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

inline double rel_err(const Cx3& got, const Cx3& want) {
    return std::max({rel_err(got.x, want.x), rel_err(got.y, want.y), rel_err(got.z, want.z)});
}

// complex orthogonal matrix (Cayley transform of an antisymmetric matrix);
// determinant +1, R^T R = I in the bilinear sense
inline contactroll::Mat3c random_rotation(Rng& rng) {
    using namespace contactroll;
    const Mat3c A = hat(rng.vec3() * cplx(0.5));
    const Mat3c I = Mat3c::identity();
    return (I - A) * inverse(I + A);
}

}  // namespace crtest

#endif
