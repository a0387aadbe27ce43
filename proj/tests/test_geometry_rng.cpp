#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "singletsim/geometry.hpp"
#include "singletsim/rng.hpp"
#include "singletsim/stats.hpp"

using namespace singletsim;

TEST_CASE("Vec3 arithmetic and dot products") {
    const Vec3 u{1.0, 2.0, 3.0};
    const Vec3 v{-1.0, 0.5, 2.0};
    REQUIRE(u.dot(v) == Catch::Approx(6.0));
    REQUIRE((u + v).x == Catch::Approx(0.0));
    REQUIRE((u - v).z == Catch::Approx(1.0));
    REQUIRE((2.0 * u).y == Catch::Approx(4.0));
}

TEST_CASE("UnitVector3 normalizes and rejects degenerate input") {
    const UnitVector3 v(1.0, 1.0, 1.0);
    REQUIRE(v.vec().norm() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(v.x() == Catch::Approx(1.0 / std::sqrt(3.0)));

    REQUIRE_THROWS_AS(UnitVector3(0.0, 0.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(UnitVector3(1e-13, 0.0, 0.0), std::invalid_argument);

    // Finite-decimal approximations of unit vectors are accepted.
    REQUIRE_NOTHROW(UnitVector3(0.57735, 0.57735, 0.57735));
}

TEST_CASE("Sign is restricted to +1/-1 and multiplies like integers") {
    REQUIRE(Sign::plus().value() == 1);
    REQUIRE(Sign::minus().value() == -1);
    REQUIRE((Sign::plus() * Sign::minus()) == Sign::minus());
    REQUIRE((Sign::minus() * Sign::minus()) == Sign::plus());
    REQUIRE((-Sign::plus()) == Sign::minus());
    REQUIRE(Sign::from_int(-1) == Sign::minus());
    REQUIRE_THROWS_AS(Sign::from_int(0), std::invalid_argument);
    REQUIRE_THROWS_AS(Sign::from_int(2), std::invalid_argument);
    REQUIRE(Sign::plus().index() == 0);
    REQUIRE(Sign::minus().index() == 1);
}

TEST_CASE("sgn convention") {
    REQUIRE(sgn(0.3) == Sign::plus());
    REQUIRE(sgn(-0.3) == Sign::minus());
    REQUIRE(sgn(0.0) == Sign::plus());  // fixed tie-break
    REQUIRE(sgn(-0.0) == Sign::plus());
    REQUIRE_THROWS_AS(sgn(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    REQUIRE_THROWS_AS(sgn(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 test suite.
    using detail::philox4x32_10;
    {
        const auto out = philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u});
        REQUIRE(out == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                                    0x9b00dbd8u});
    }
    {
        const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
        REQUIRE(out == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                                    0x6d5451fdu});
    }
    {
        const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
        REQUIRE(out == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                                    0x24126ea1u});
    }
}

TEST_CASE("RngStream determinism and substream independence") {
    SECTION("identical parameters reproduce the sequence bit-exactly") {
        RngStream r1(7, 0), r2(7, 0);
        for (int i = 0; i < 10'000; ++i) REQUIRE(r1.next_u64() == r2.next_u64());
    }
    SECTION("different stream indices diverge") {
        RngStream r1(7, 0), r2(7, 1);
        bool differ = false;
        for (int i = 0; i < 10'000 && !differ; ++i) differ = r1.next_u64() != r2.next_u64();
        REQUIRE(differ);
    }
    SECTION("different seeds diverge") {
        RngStream r1(7, 0), r2(8, 0);
        bool differ = false;
        for (int i = 0; i < 10'000 && !differ; ++i) differ = r1.next_u64() != r2.next_u64();
        REQUIRE(differ);
    }
    SECTION("derive_substream is deterministic in its inputs") {
        RngStream a = derive_substream(42, 13);
        RngStream b = derive_substream(42, 13);
        for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("RngStream state save/restore") {
    RngStream rng(123, 5);
    for (int i = 0; i < 7; ++i) rng.next_u32();  // land mid-block
    const auto st = rng.state();
    std::vector<std::uint64_t> first;
    for (int i = 0; i < 50; ++i) first.push_back(rng.next_u64());
    rng.restore(st);
    for (int i = 0; i < 50; ++i) REQUIRE(rng.next_u64() == first[static_cast<std::size_t>(i)]);
}

TEST_CASE("uniform01 lies in (0, 1]") {
    RngStream rng(99, 0);
    for (int i = 0; i < 100'000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
    }
}

TEST_CASE("next_below is unbiased over small ranges") {
    RngStream rng(17, 0);
    std::array<std::uint64_t, 3> hits{};
    const int n = 300'000;
    for (int i = 0; i < n; ++i) ++hits[rng.next_below(3)];
    for (const auto h : hits) {
        const double p = static_cast<double>(h) / n;
        REQUIRE(std::abs(p - 1.0 / 3.0) < 5.0 * binomial_std_error(1.0 / 3.0, n));
    }
}

TEST_CASE("sample_unit_vector has unit norm and uniform-sphere moments") {
    RngStream rng(2024, 0);
    const int n = 1'000'000;
    double sx = 0.0, sy = 0.0, sz = 0.0, szz = 0.0;
    for (int i = 0; i < n; ++i) {
        const UnitVector3 v = sample_unit_vector(rng);
        if (i < 10'000)
            REQUIRE(std::abs(v.vec().dot(v.vec()) - 1.0) < 1e-9);
        sx += v.x();
        sy += v.y();
        sz += v.z();
        szz += v.z() * v.z();
    }
    // E[component] = 0, sd = 1/sqrt(3); E[z^2] = 1/3, sd = sqrt(4/45).
    const double se_mean = (1.0 / std::sqrt(3.0)) / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(sx / n) < 5.0 * se_mean);
    REQUIRE(std::abs(sy / n) < 5.0 * se_mean);
    REQUIRE(std::abs(sz / n) < 5.0 * se_mean);
    const double se_zz = std::sqrt(4.0 / 45.0) / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(szz / n - 1.0 / 3.0) < 5.0 * se_zz);
}

TEST_CASE("sign of u.x is a fair coin for any fixed direction") {
    RngStream rng(31, 0);
    const UnitVector3 u(0.3, -0.5, 0.81);
    const int n = 1'000'000;
    int plus = 0;
    for (int i = 0; i < n; ++i)
        if (sgn(dot(u, sample_unit_vector(rng))) == Sign::plus()) ++plus;
    const double p = static_cast<double>(plus) / n;
    REQUIRE(std::abs(p - 0.5) < 5.0 * binomial_std_error(0.5, n));
}

TEST_CASE("projection u.x is uniform on [-1, 1] (Kolmogorov-Smirnov)") {
    RngStream rng(77, 0);
    const UnitVector3 u(0.0, 0.6, 0.8);
    const std::size_t n = 1'000'000;
    std::vector<double> sample;
    sample.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sample.push_back(dot(u, sample_unit_vector(rng)));
    const double d = ks_statistic(std::move(sample), [](double t) { return (t + 1.0) / 2.0; });
    REQUIRE(d < ks_critical(n, 1e-3));
}

TEST_CASE("splitmix64 seed derivation separates salts") {
    REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
    REQUIRE(derive_seed(1, 0) != derive_seed(2, 0));
    REQUIRE(derive_seed(5, 9) == derive_seed(5, 9));
}
