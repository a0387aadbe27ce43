#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "singletsim/deutsch_hayden.hpp"
#include "singletsim/rng.hpp"

using namespace singletsim;
namespace dh = singletsim::deutsch_hayden;

TEST_CASE("local branching is exactly equal-weight and carries two reals") {
    RngStream rng(4000, 0);
    for (int i = 0; i < 100; ++i) {
        const auto bs = dh::local_branches(sample_unit_vector(rng));
        REQUIRE(bs.branches[0].weight == 0.5);
        REQUIRE(bs.branches[1].weight == 0.5);
        REQUIRE(bs.branches[0].weight + bs.branches[1].weight == 1.0);
        REQUIRE(bs.carried_real_params == 2);
    }
}

TEST_CASE("conditional distribution over bob's outcome") {
    SECTION("equal settings force anticorrelation") {
        const auto c = dh::conditional(Sign::plus(), z_axis(), z_axis());
        REQUIRE(c.p(Sign::minus()) == Catch::Approx(1.0).margin(1e-15));
        REQUIRE(c.p(Sign::plus()) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("orthogonal settings are uninformative") {
        const auto c = dh::conditional(Sign::plus(), z_axis(), x_axis());
        REQUIRE(c.p(Sign::plus()) == Catch::Approx(0.5).margin(1e-15));
        REQUIRE(c.p(Sign::minus()) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("a.b = 1/2") {
        const UnitVector3 b(std::sqrt(3.0) / 2.0, 0.0, 0.5);
        const auto c = dh::conditional(Sign::plus(), z_axis(), b);
        REQUIRE(c.p(Sign::plus()) == Catch::Approx(0.25).margin(1e-12));
        REQUIRE(c.p(Sign::minus()) == Catch::Approx(0.75).margin(1e-12));
    }
}

TEST_CASE("meeting weights equal the joint law exactly") {
    SECTION("aligned settings") {
        const auto jw = dh::meeting_weights(z_axis(), z_axis());
        REQUIRE(jw.weight(Sign::plus(), Sign::plus()) == 0.0);
        REQUIRE(jw.weight(Sign::plus(), Sign::minus()) == 0.5);
        REQUIRE(jw.weight(Sign::minus(), Sign::plus()) == 0.5);
        REQUIRE(jw.weight(Sign::minus(), Sign::minus()) == 0.0);
    }
    SECTION("orthogonal settings") {
        const auto jw = dh::meeting_weights(z_axis(), x_axis());
        for (Sign sa : {Sign::plus(), Sign::minus()})
            for (Sign sb : {Sign::plus(), Sign::minus()})
                REQUIRE(jw.weight(sa, sb) == 0.25);
    }
    SECTION("random settings: exact law, normalization, no-signaling") {
        RngStream rng(4001, 0);
        for (int it = 0; it < 100; ++it) {
            const UnitVector3 a = sample_unit_vector(rng);
            const UnitVector3 b = sample_unit_vector(rng);
            const auto jw = dh::meeting_weights(a, b);
            const double ab = dot(a, b);
            double sum = 0.0;
            for (Sign sa : {Sign::plus(), Sign::minus()})
                for (Sign sb : {Sign::plus(), Sign::minus()}) {
                    const double expected =
                        (1.0 - static_cast<double>((sa * sb).value()) * ab) / 4.0;
                    REQUIRE(std::abs(jw.weight(sa, sb) - expected) < 1e-12);
                    sum += jw.weight(sa, sb);
                }
            REQUIRE(std::abs(sum - 1.0) < 1e-15);
            for (Sign s : {Sign::plus(), Sign::minus()}) {
                REQUIRE(std::abs(jw.alice_marginal(s) - 0.5) < 1e-12);
                REQUIRE(std::abs(jw.bob_marginal(s) - 0.5) < 1e-12);
            }
        }
    }
}

TEST_CASE("local weight times conditional equals the meeting weight") {
    RngStream rng(4002, 0);
    for (int it = 0; it < 100; ++it) {
        const UnitVector3 a = sample_unit_vector(rng);
        const UnitVector3 b = sample_unit_vector(rng);
        const auto jw = dh::meeting_weights(a, b);
        const auto local = dh::local_branches(a);
        for (Sign sa : {Sign::plus(), Sign::minus()}) {
            const auto cond = dh::conditional(sa, a, b);
            for (Sign sb : {Sign::plus(), Sign::minus()})
                REQUIRE(std::abs(local.weight_of(sa) * cond.p(sb) - jw.weight(sa, sb)) < 1e-12);
        }
    }
}

TEST_CASE("communication cost ledger per variant") {
    SECTION("bloch: two real parameters per party, no bits") {
        const auto cost = dh::comm_cost(dh::CostVariant::bloch);
        REQUIRE(cost.ledger == CommLedger{0, 0, 2, 2});
        REQUIRE_FALSE(cost.total_independent_params.has_value());
    }
    SECTION("descriptor: 12 per party, 15 independent in total") {
        const auto cost = dh::comm_cost(dh::CostVariant::descriptor);
        REQUIRE(cost.ledger.real_params_from_alice == 12);
        REQUIRE(cost.ledger.real_params_from_bob == 12);
        REQUIRE(cost.total_independent_params == 15);
    }
}

TEST_CASE("ledger dominance: weighted-branch pairing needs reals, the two-instance referee none") {
    const auto dh_cost = dh::comm_cost(dh::CostVariant::bloch);
    const CommLedger two_instance_ledger{1, 1, 0, 0};
    REQUIRE(dh_cost.ledger.real_params_from_alice > 0);
    REQUIRE(dh_cost.ledger.real_params_from_bob > 0);
    REQUIRE(two_instance_ledger.real_params_from_alice == 0);
    REQUIRE(two_instance_ledger.real_params_from_bob == 0);
    REQUIRE(two_instance_ledger.bits_from_alice == 1);
    REQUIRE(two_instance_ledger.bits_from_bob == 1);
}
