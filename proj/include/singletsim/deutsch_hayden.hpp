#pragma once

#include <algorithm>
#include <array>
#include <optional>

#include "singletsim/protocol_common.hpp"

namespace singletsim {

// Weighted-branch picture of the Deutsch-Hayden account, reduced to what the
// information ledger needs: equal-weight local branching, exact weighted
// pairing at the meeting point, and the parameter counts each party must
// transport.
namespace deutsch_hayden {

struct WeightedBranch {
    Sign outcome;
    double weight;
};

// Local measurement: two branches of weight 1/2 each. Pairing them correctly
// later requires the full Bloch vector, i.e. two real parameters.
struct LocalBranchSet {
    std::array<WeightedBranch, 2> branches;
    int carried_real_params = 2;

    double weight_of(Sign s) const { return branches[s.index()].weight; }
};

inline LocalBranchSet local_branches(const UnitVector3& /*setting*/) {
    return {{WeightedBranch{Sign::plus(), 0.5}, WeightedBranch{Sign::minus(), 0.5}}, 2};
}

namespace detail {

inline double checked_dot(const UnitVector3& a, const UnitVector3& b) {
    const double d = dot(a, b);
    if (std::abs(d) > 1.0 + UnitVector3::kNormTolerance)
        throw std::domain_error("dot product outside [-1, 1]");
    return std::clamp(d, -1.0, 1.0);
}

}  // namespace detail

// Exact singlet joint law (1 - sA sB a.b)/4 as a 2x2 weight table.
class JointWeights {
public:
    JointWeights(const UnitVector3& a, const UnitVector3& b) {
        const double ab = detail::checked_dot(a, b);
        for (Sign sa : {Sign::plus(), Sign::minus()})
            for (Sign sb : {Sign::plus(), Sign::minus()})
                w_[sa.index()][sb.index()] =
                    (1.0 - static_cast<double>((sa * sb).value()) * ab) / 4.0;
    }

    double weight(Sign sa, Sign sb) const { return w_[sa.index()][sb.index()]; }

    double alice_marginal(Sign sa) const {
        return w_[sa.index()][0] + w_[sa.index()][1];
    }

    double bob_marginal(Sign sb) const {
        return w_[0][sb.index()] + w_[1][sb.index()];
    }

private:
    std::array<std::array<double, 2>, 2> w_{};
};

// P(sB | sA, a, b) = P(sA, sB | a, b) / P(sA | a).
struct ConditionalOnAlice {
    double p_plus;
    double p_minus;

    double p(Sign sb) const { return sb == Sign::plus() ? p_plus : p_minus; }
};

inline ConditionalOnAlice conditional(Sign s_a, const UnitVector3& a, const UnitVector3& b) {
    const JointWeights jw(a, b);
    const double p_a = local_branches(a).weight_of(s_a);
    return {jw.weight(s_a, Sign::plus()) / p_a, jw.weight(s_a, Sign::minus()) / p_a};
}

// The four weighted branches that emerge at the meeting point.
inline JointWeights meeting_weights(const UnitVector3& a, const UnitVector3& b) {
    return JointWeights(a, b);
}

enum class CostVariant {
    bloch,       // operational Bloch-vector parametrization
    descriptor,  // Heisenberg-picture descriptors
};

struct CommCost {
    CommLedger ledger;
    // Descriptors of the two parties are not mutually independent; the joint
    // count is smaller than twice the per-party count.
    std::optional<int> total_independent_params;
};

inline CommCost comm_cost(CostVariant variant) {
    switch (variant) {
        case CostVariant::bloch:
            return {CommLedger{0, 0, 2, 2}, std::nullopt};
        case CostVariant::descriptor:
            return {CommLedger{0, 0, 12, 12}, 15};
    }
    throw std::invalid_argument("comm_cost: unknown variant");
}

}  // namespace deutsch_hayden

}  // namespace singletsim
