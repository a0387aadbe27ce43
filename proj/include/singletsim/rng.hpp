#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "singletsim/geometry.hpp"

namespace singletsim {

namespace detail {

// Philox4x32-10 block cipher (Salmon et al., SC'11). Counter-based: the
// output block is a pure function of (counter, key), so any block can be
// generated in any order on any platform with identical bits.
inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::array<std::uint32_t, 4> philox4x32_round(std::array<std::uint32_t, 4> ctr,
                                                        std::array<std::uint32_t, 2> key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

constexpr std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                     std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        ctr = philox4x32_round(ctr, key);
    }
    return ctr;
}

}  // namespace detail

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive auxiliary
// master seeds, e.g. one per CHSH correlation.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt) {
    return splitmix64(master_seed ^ splitmix64(salt));
}

// Deterministic random stream.
//
// Layout: key = master seed, counter = (block index, stream index), both
// 64-bit. Distinct stream indices select disjoint counter subspaces of the
// same keyed permutation, so substreams are statistically independent and
// reproducible bit-for-bit from (seed, stream index) alone.
class RngStream {
public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_index = 0)
        : seed_(master_seed), stream_(stream_index) {}

    static constexpr std::string_view algorithm() { return "philox4x32-10"; }
    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_; }

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = detail::philox4x32_10(
                {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform double in (0, 1], 53-bit resolution. Never returns 0, so
    // log(uniform01()) is always finite.
    double uniform01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Explicit generator state: how many blocks were produced and how much of
    // the last block is consumed. Together with (seed, stream index) this
    // pins the stream position exactly.
    struct State {
        std::uint64_t blocks_generated = 0;
        std::uint32_t buffer_consumed = 4;
    };

    State state() const { return {block_, pos_}; }

    void restore(const State& s) {
        block_ = s.blocks_generated;
        pos_ = s.buffer_consumed;
        if (pos_ < 4) {
            const std::uint64_t b = block_ - 1;
            buf_ = detail::philox4x32_10(
                {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    std::uint32_t pos_ = 4;
};

// One independent stream per run index; the partitioning contract every
// parallel estimator relies on.
inline RngStream derive_substream(std::uint64_t master_seed, std::uint64_t run_index) {
    return RngStream(master_seed, run_index);
}

namespace detail {

// Box-Muller pair of standard normals. uniform01 is in (0,1], so the log is finite.
inline std::pair<double, double> normal_pair(RngStream& rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace detail

// Uniform direction on the unit sphere: normalize a triple of independent
// standard normals. Consumes four uniforms per call; the zero-vector
// rejection branch has probability ~0.
inline UnitVector3 sample_unit_vector(RngStream& rng) {
    for (;;) {
        const auto [n0, n1] = detail::normal_pair(rng);
        const auto [n2, n3] = detail::normal_pair(rng);
        (void)n3;
        const Vec3 v{n0, n1, n2};
        if (v.norm() >= UnitVector3::kDegenerateNorm) return UnitVector3(v);
    }
}

}  // namespace singletsim
