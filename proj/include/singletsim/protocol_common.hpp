#pragma once

#include "singletsim/geometry.hpp"
#include "singletsim/rng.hpp"

namespace singletsim {

// The pair of independent uniform directions both parties receive from the
// common source before choosing their settings.
struct SharedRandomness {
    UnitVector3 x0;
    UnitVector3 x1;
};

inline SharedRandomness sample_shared_randomness(RngStream& rng) {
    UnitVector3 x0 = sample_unit_vector(rng);
    UnitVector3 x1 = sample_unit_vector(rng);
    return {x0, x1};
}

// What each run transports to the meeting point, itemized by kind. A real
// parameter counts as unbounded information; a bit counts as one bit.
struct CommLedger {
    int bits_from_alice = 0;
    int bits_from_bob = 0;
    int real_params_from_alice = 0;
    int real_params_from_bob = 0;

    bool operator==(const CommLedger&) const = default;
};

}  // namespace singletsim
