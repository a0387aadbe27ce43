#pragma once

#include <cstdint>
#include <stdexcept>

#include "singletsim/protocol_common.hpp"
#include "singletsim/stats.hpp"

namespace singletsim {

// Monte Carlo estimate with its standard error.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Single-world one-bit protocol for the singlet correlation E = -a.b:
// Alice outputs sign(a.x0) and sends the bit sign(a.x0)sign(a.x1); Bob
// outputs -sign(b.(x0 + nA x1)).
namespace toner_bacon {

struct AliceResult {
    Sign s_a;  // her outcome
    Sign n_a;  // the one communicated bit
};

struct Transcript {
    Sign s_a;
    Sign n_a;
    Sign s_b;
    int comm_bits = 1;
};

inline AliceResult alice(const UnitVector3& a, const SharedRandomness& sr) {
    const Sign s_a = sgn(dot(a, sr.x0));
    const Sign n_a = sgn(dot(a, sr.x0)) * sgn(dot(a, sr.x1));
    return {s_a, n_a};
}

inline Sign bob(const UnitVector3& b, const SharedRandomness& sr, Sign n_a) {
    const Vec3 h = sr.x0.vec() + static_cast<double>(n_a.value()) * sr.x1.vec();
    return -sgn(b.vec().dot(h));
}

inline Transcript run(const UnitVector3& a, const UnitVector3& b, const SharedRandomness& sr) {
    const AliceResult ar = alice(a, sr);
    const Sign s_b = bob(b, sr, ar.n_a);
    return {ar.s_a, ar.n_a, s_b, 1};
}

}  // namespace toner_bacon

// (1/pi) Int d^2x (-b.x) theta(b.x) theta(a.x) over the unit sphere,
// estimated as 4x the sample mean over uniform directions (sphere measure
// 4*pi against the 1/pi normalization). Closed form: -(1 + a.b)/2.
inline McEstimate ks_halfsphere_integral_mc(const UnitVector3& a, const UnitVector3& b,
                                            std::uint64_t n, RngStream& rng) {
    if (n == 0) throw std::invalid_argument("ks_halfsphere_integral_mc: n must be positive");
    RunningStats stats;
    for (std::uint64_t i = 0; i < n; ++i) {
        const UnitVector3 x = sample_unit_vector(rng);
        const double bx = dot(b, x);
        const double ax = dot(a, x);
        stats.push(4.0 * (-bx) * theta(bx) * theta(ax));
    }
    return {stats.mean(), stats.std_error_of_mean(), n};
}

// (1/2pi) Int d^2x (-b.x) sign(a.x), estimated as 2x the sample mean over
// uniform directions. Closed form: -a.b.
inline McEstimate proof_step_integral_mc(const UnitVector3& a, const UnitVector3& b,
                                         std::uint64_t n, RngStream& rng) {
    if (n == 0) throw std::invalid_argument("proof_step_integral_mc: n must be positive");
    RunningStats stats;
    for (std::uint64_t i = 0; i < n; ++i) {
        const UnitVector3 x = sample_unit_vector(rng);
        stats.push(2.0 * (-dot(b, x)) * static_cast<double>(sgn(dot(a, x)).value()));
    }
    return {stats.mean(), stats.std_error_of_mean(), n};
}

}  // namespace singletsim
