#pragma once

#include "singletsim/instances.hpp"
#include "singletsim/protocol_common.hpp"

namespace singletsim {

// Two-instance protocol: each party branches into two labeled alternatives
// holding opposite outcomes, computes everything from local data, and sends a
// single bit to the meeting point. The referee pairs the alternatives with a
// local PR-box rule: identity pairing unless both bits are -1.
namespace two_instance {

// What actually crosses to the meeting point: the two labeled outcomes and
// one message bit. No settings, no shared vectors.
struct AliceMessage {
    Sign outcome_plus;
    Sign outcome_minus;
    Sign message_bit;

    bool operator==(const AliceMessage&) const = default;
};

struct BobMessage {
    Sign outcome_plus;
    Sign outcome_minus;
    Sign message_bit;

    bool operator==(const BobMessage&) const = default;
};

// Alice's post-measurement state. The label-(+1) alternative holds
// sign(a.x0); the label-(-1) alternative holds its negation, stored
// implicitly so the antipodal invariant cannot be broken. The setting is
// retained for audit tooling only and is excluded from the message view.
class AliceRecord {
public:
    AliceRecord(Sign outcome_plus, Sign message_bit, const UnitVector3& setting)
        : outcome_plus_(outcome_plus), message_bit_(message_bit), setting_(setting) {}

    Sign outcome_plus() const { return outcome_plus_; }
    Sign outcome_minus() const { return -outcome_plus_; }
    Sign message_bit() const { return message_bit_; }
    const UnitVector3& setting_for_audit() const { return setting_; }

    AliceMessage message() const { return {outcome_plus_, -outcome_plus_, message_bit_}; }

    bool operator==(const AliceRecord&) const = default;

private:
    Sign outcome_plus_;
    Sign message_bit_;
    UnitVector3 setting_;
};

class BobRecord {
public:
    BobRecord(Sign outcome_plus, Sign message_bit, const UnitVector3& setting)
        : outcome_plus_(outcome_plus), message_bit_(message_bit), setting_(setting) {}

    Sign outcome_plus() const { return outcome_plus_; }
    Sign outcome_minus() const { return -outcome_plus_; }
    Sign message_bit() const { return message_bit_; }
    const UnitVector3& setting_for_audit() const { return setting_; }

    BobMessage message() const { return {outcome_plus_, -outcome_plus_, message_bit_}; }

    bool operator==(const BobRecord&) const = default;

private:
    Sign outcome_plus_;
    Sign message_bit_;
    UnitVector3 setting_;
};

struct LabeledPair {
    Sign alice;
    Sign bob;

    bool operator==(const LabeledPair&) const = default;
};

// The referee's result: both instance pairs, keyed by Alice's labels, plus
// the communication ledger. The two pairs are componentwise negations.
struct PairedOutcomes {
    LabeledPair pair_plus;   // Alice's label-(+1) instance and its partner
    LabeledPair pair_minus;  // Alice's label-(-1) instance and its partner
    bool swapped = false;
    CommLedger ledger;

    const LabeledPair& pair_for(Sign alice_label) const {
        return alice_label == Sign::plus() ? pair_plus : pair_minus;
    }
};

// A function of (a, sr) only: locality by construction.
inline AliceRecord alice(const UnitVector3& a, const SharedRandomness& sr) {
    const Sign outcome_plus = sgn(dot(a, sr.x0));
    const Sign message_bit = sgn(dot(a, sr.x0)) * sgn(dot(a, sr.x1));
    return {outcome_plus, message_bit, a};
}

// A function of (b, sr) only. Bob cannot know the bit Alice sent, so his
// label-(+1) alternative commits to -sign(b.(x0+x1)); the bit
// sign(b.x+)sign(b.x-) with x+- = x0 +- x1 is what lets the referee repair
// the pairing when that commitment was the wrong one.
inline BobRecord bob(const UnitVector3& b, const SharedRandomness& sr) {
    const Vec3 x_plus = sr.x0.vec() + sr.x1.vec();
    const Vec3 x_minus = sr.x0.vec() - sr.x1.vec();
    const Sign outcome_plus = -sgn(b.vec().dot(x_plus));
    const Sign message_bit = sgn(b.vec().dot(x_plus)) * sgn(b.vec().dot(x_minus));
    return {outcome_plus, message_bit, b};
}

inline bool pairing_swapped(Sign n_a, Sign n_b) {
    return n_a == Sign::minus() && n_b == Sign::minus();
}

// Identity on the labels {+1,-1} unless both message bits are -1, in which
// case the transposition (label order: index 0 <-> +1, index 1 <-> -1).
inline PairingMap pairing_rule(Sign n_a, Sign n_b) {
    return pairing_swapped(n_a, n_b) ? PairingMap::swap2() : PairingMap::identity(2);
}

// The referee step. Takes only the restricted messages; the overload on full
// records immediately drops to this view, so no referee code path can read a
// setting or the shared vectors.
inline PairedOutcomes meeting(const AliceMessage& am, const BobMessage& bm) {
    const bool swap = pairing_swapped(am.message_bit, bm.message_bit);
    PairedOutcomes out;
    out.swapped = swap;
    out.pair_plus = {am.outcome_plus, swap ? bm.outcome_minus : bm.outcome_plus};
    out.pair_minus = {am.outcome_minus, swap ? bm.outcome_plus : bm.outcome_minus};
    out.ledger = CommLedger{1, 1, 0, 0};
    return out;
}

inline PairedOutcomes meeting(const AliceRecord& ar, const BobRecord& br) {
    return meeting(ar.message(), br.message());
}

inline PairedOutcomes run(const UnitVector3& a, const UnitVector3& b, const SharedRandomness& sr) {
    return meeting(alice(a, sr), bob(b, sr));
}

// The run's outcome pairs as a labeled instance set, for the framework
// counting rule. Index 0 holds the label-(+1) pair.
inline InstanceSet<SignPair> to_instance_set(const PairedOutcomes& po) {
    return InstanceSet<SignPair>({{po.pair_plus.alice, po.pair_plus.bob},
                                  {po.pair_minus.alice, po.pair_minus.bob}});
}

}  // namespace two_instance

}  // namespace singletsim
