#pragma once

#include <array>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "singletsim/deutsch_hayden.hpp"
#include "singletsim/stats.hpp"
#include "singletsim/toner_bacon.hpp"
#include "singletsim/two_instance.hpp"

namespace singletsim {

enum class Protocol {
    toner_bacon,
    two_instance_sampled,
    two_instance_counted,
    dh_exact,
};

inline std::optional<Protocol> parse_protocol(std::string_view name) {
    if (name == "toner-bacon") return Protocol::toner_bacon;
    if (name == "two-instance-sampled") return Protocol::two_instance_sampled;
    if (name == "two-instance-counted") return Protocol::two_instance_counted;
    if (name == "dh-exact") return Protocol::dh_exact;
    return std::nullopt;
}

inline std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::toner_bacon: return "toner-bacon";
        case Protocol::two_instance_sampled: return "two-instance-sampled";
        case Protocol::two_instance_counted: return "two-instance-counted";
        case Protocol::dh_exact: return "dh-exact";
    }
    return "?";
}

inline CommLedger protocol_ledger(Protocol p) {
    switch (p) {
        case Protocol::toner_bacon: return {1, 0, 0, 0};
        case Protocol::two_instance_sampled:
        case Protocol::two_instance_counted: return {1, 1, 0, 0};
        case Protocol::dh_exact:
            return deutsch_hayden::comm_cost(deutsch_hayden::CostVariant::bloch).ledger;
    }
    return {};
}

// Joint outcome tally over (sA, sB). entries_per_run distinguishes the
// one-sample-per-run readout (1) from counting both instances (2); merging
// mixed conventions is an error. Counts are exact integers so merged results
// are independent of partitioning.
struct JointCounts {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};  // [sA.index()][sB.index()]
    std::uint64_t total_runs = 0;
    int entries_per_run = 1;

    std::uint64_t& at(Sign sa, Sign sb) { return counts[sa.index()][sb.index()]; }
    std::uint64_t at(Sign sa, Sign sb) const { return counts[sa.index()][sb.index()]; }

    std::uint64_t total_entries() const {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }

    double frequency(Sign sa, Sign sb) const {
        return static_cast<double>(at(sa, sb)) /
               (static_cast<double>(total_runs) * static_cast<double>(entries_per_run));
    }

    double alice_marginal(Sign sa) const {
        return (static_cast<double>(at(sa, Sign::plus())) +
                static_cast<double>(at(sa, Sign::minus()))) /
               (static_cast<double>(total_runs) * static_cast<double>(entries_per_run));
    }

    double bob_marginal(Sign sb) const {
        return (static_cast<double>(at(Sign::plus(), sb)) +
                static_cast<double>(at(Sign::minus(), sb))) /
               (static_cast<double>(total_runs) * static_cast<double>(entries_per_run));
    }

    bool operator==(const JointCounts&) const = default;
};

inline JointCounts merge_stats(const JointCounts& a, const JointCounts& b) {
    if (a.entries_per_run != b.entries_per_run)
        throw std::invalid_argument("merge_stats: indexing conventions differ");
    JointCounts out = a;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) out.counts[i][j] += b.counts[i][j];
    out.total_runs += b.total_runs;
    return out;
}

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_runs = 0;
    std::uint64_t seed = 0;
};

// Exact singlet joint law (1 - sA sB a.b)/4.
inline double analytic_joint(const UnitVector3& a, const UnitVector3& b, Sign sa, Sign sb) {
    return deutsch_hayden::JointWeights(a, b).weight(sa, sb);
}

inline double analytic_corr(const UnitVector3& a, const UnitVector3& b) {
    return -deutsch_hayden::detail::checked_dot(a, b);
}

// Per-cell frequency estimates plus the correlation derived from the same
// run set. For dh-exact the frequencies are the analytic weights and the
// counts are their largest-remainder apportionment over n_runs.
struct JointEstimate {
    Protocol protocol{};
    JointCounts counts;
    std::array<std::array<double, 2>, 2> freq{};
    std::uint64_t n_runs = 0;
    std::uint64_t seed = 0;

    double frequency(Sign sa, Sign sb) const { return freq[sa.index()][sb.index()]; }

    EstimateReport cell(Sign sa, Sign sb) const {
        const double p = frequency(sa, sb);
        return {p, binomial_std_error(p, n_runs), n_runs, seed};
    }

    EstimateReport correlation() const {
        const double e = frequency(Sign::plus(), Sign::plus()) +
                         frequency(Sign::minus(), Sign::minus()) -
                         frequency(Sign::plus(), Sign::minus()) -
                         frequency(Sign::minus(), Sign::plus());
        double se = 0.0;
        if (protocol != Protocol::dh_exact)
            se = std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n_runs));
        return {e, se, n_runs, seed};
    }
};

namespace detail {

// Integer apportionment of exact weights: floor, then distribute the
// remainder by largest fractional part. Keeps the cell sum equal to total.
inline std::array<std::uint64_t, 4> apportion(const std::array<double, 4>& weights,
                                              std::uint64_t total) {
    std::array<std::uint64_t, 4> out{};
    std::array<double, 4> frac{};
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double exact = weights[i] * static_cast<double>(total);
        out[i] = static_cast<std::uint64_t>(exact);
        frac[i] = exact - static_cast<double>(out[i]);
        assigned += out[i];
    }
    while (assigned < total) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (frac[i] > frac[best]) best = i;
        ++out[best];
        frac[best] = -1.0;
        ++assigned;
    }
    return out;
}

template <typename PerRun>
JointCounts tally_runs(std::uint64_t n_runs, std::uint64_t seed, int entries_per_run,
                       unsigned partitions, PerRun&& per_run) {
    if (partitions == 0) partitions = 1;
    auto chunk = [&](std::uint64_t begin, std::uint64_t end) {
        JointCounts local;
        local.entries_per_run = entries_per_run;
        for (std::uint64_t i = begin; i < end; ++i) {
            RngStream rng = derive_substream(seed, i);
            per_run(rng, local);
            ++local.total_runs;
        }
        return local;
    };
    if (partitions == 1) return chunk(0, n_runs);

    std::vector<std::future<JointCounts>> futures;
    const std::uint64_t step = (n_runs + partitions - 1) / partitions;
    for (unsigned p = 0; p < partitions; ++p) {
        const std::uint64_t begin = std::min<std::uint64_t>(n_runs, p * step);
        const std::uint64_t end = std::min<std::uint64_t>(n_runs, begin + step);
        futures.push_back(std::async(std::launch::async, chunk, begin, end));
    }
    JointCounts merged;
    merged.entries_per_run = entries_per_run;
    for (auto& f : futures) merged = merge_stats(merged, f.get());
    return merged;
}

}  // namespace detail

// Run a protocol estimator. Each run index gets its own substream, so the
// result is bit-identical for any partition count.
inline JointEstimate estimate_joint(Protocol protocol, const UnitVector3& a, const UnitVector3& b,
                                    std::uint64_t n_runs, std::uint64_t seed,
                                    unsigned partitions = 1) {
    if (n_runs == 0) throw std::invalid_argument("estimate_joint: n_runs must be positive");

    JointEstimate est;
    est.protocol = protocol;
    est.n_runs = n_runs;
    est.seed = seed;

    switch (protocol) {
        case Protocol::toner_bacon:
            est.counts = detail::tally_runs(
                n_runs, seed, 1, partitions, [&](RngStream& rng, JointCounts& jc) {
                    const SharedRandomness sr = sample_shared_randomness(rng);
                    const toner_bacon::Transcript t = toner_bacon::run(a, b, sr);
                    ++jc.at(t.s_a, t.s_b);
                });
            break;
        case Protocol::two_instance_sampled:
            est.counts = detail::tally_runs(
                n_runs, seed, 1, partitions, [&](RngStream& rng, JointCounts& jc) {
                    const SharedRandomness sr = sample_shared_randomness(rng);
                    const two_instance::PairedOutcomes po = two_instance::run(a, b, sr);
                    const auto sample =
                        select_instance_uniform(two_instance::to_instance_set(po), rng);
                    ++jc.at(sample.value.first, sample.value.second);
                });
            break;
        case Protocol::two_instance_counted:
            est.counts = detail::tally_runs(
                n_runs, seed, 2, partitions, [&](RngStream& rng, JointCounts& jc) {
                    const SharedRandomness sr = sample_shared_randomness(rng);
                    const two_instance::PairedOutcomes po = two_instance::run(a, b, sr);
                    ++jc.at(po.pair_plus.alice, po.pair_plus.bob);
                    ++jc.at(po.pair_minus.alice, po.pair_minus.bob);
                });
            break;
        case Protocol::dh_exact: {
            const deutsch_hayden::JointWeights jw = deutsch_hayden::meeting_weights(a, b);
            const std::array<double, 4> w = {
                jw.weight(Sign::plus(), Sign::plus()), jw.weight(Sign::plus(), Sign::minus()),
                jw.weight(Sign::minus(), Sign::plus()), jw.weight(Sign::minus(), Sign::minus())};
            const auto cells = detail::apportion(w, n_runs);
            est.counts.entries_per_run = 1;
            est.counts.total_runs = n_runs;
            est.counts.at(Sign::plus(), Sign::plus()) = cells[0];
            est.counts.at(Sign::plus(), Sign::minus()) = cells[1];
            est.counts.at(Sign::minus(), Sign::plus()) = cells[2];
            est.counts.at(Sign::minus(), Sign::minus()) = cells[3];
            est.freq[0][0] = w[0];
            est.freq[0][1] = w[1];
            est.freq[1][0] = w[2];
            est.freq[1][1] = w[3];
            return est;
        }
    }

    for (Sign sa : {Sign::plus(), Sign::minus()})
        for (Sign sb : {Sign::plus(), Sign::minus()})
            est.freq[sa.index()][sb.index()] = est.counts.frequency(sa, sb);
    return est;
}

struct ChshSettings {
    UnitVector3 a;
    UnitVector3 a_prime;
    UnitVector3 b;
    UnitVector3 b_prime;
};

// Settings maximizing S for E = -a.b: S = 2*sqrt(2).
inline ChshSettings chsh_optimal_settings() {
    const double r = 1.0 / std::sqrt(2.0);
    return {z_axis(), x_axis(), UnitVector3(-r, 0.0, -r), UnitVector3(r, 0.0, -r)};
}

struct ChshReport {
    double s_value = 0.0;
    double s_std_error = 0.0;
    // Order: E(a,b), E(a,b'), E(a',b), E(a',b').
    std::array<EstimateReport, 4> correlations{};
};

// S = E(a,b) + E(a,b') + E(a',b) - E(a',b'). Source nullopt means the
// analytic law E = -a.b; otherwise each correlation is estimated from
// n_runs protocol runs under its own derived seed.
inline ChshReport chsh(std::optional<Protocol> source, const ChshSettings& s,
                       std::uint64_t n_runs, std::uint64_t seed, unsigned partitions = 1) {
    const std::array<std::pair<const UnitVector3*, const UnitVector3*>, 4> pairs = {
        std::pair{&s.a, &s.b}, std::pair{&s.a, &s.b_prime}, std::pair{&s.a_prime, &s.b},
        std::pair{&s.a_prime, &s.b_prime}};

    ChshReport report;
    double var = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        if (!source) {
            report.correlations[k] = {analytic_corr(*pairs[k].first, *pairs[k].second), 0.0, 0,
                                      seed};
        } else {
            const std::uint64_t sk = derive_seed(seed, k);
            report.correlations[k] =
                estimate_joint(*source, *pairs[k].first, *pairs[k].second, n_runs, sk, partitions)
                    .correlation();
        }
        const double sgn_k = (k == 3) ? -1.0 : 1.0;
        report.s_value += sgn_k * report.correlations[k].value;
        var += report.correlations[k].std_error * report.correlations[k].std_error;
    }
    report.s_std_error = std::sqrt(var);
    return report;
}

struct NoSignalingReport {
    double alice_marginal_plus = 0.0;
    double bob_marginal_plus = 0.0;
    double alice_sigma_deviation = 0.0;  // |p - 1/2| in units of binomial sigma
    double bob_sigma_deviation = 0.0;
    bool pass = false;
};

// Both marginals must sit within 5 sigma of 1/2.
inline NoSignalingReport no_signaling_check(const JointCounts& jc) {
    if (jc.total_runs < 10'000)
        throw std::invalid_argument("no_signaling_check: needs at least 10^4 runs");
    NoSignalingReport r;
    r.alice_marginal_plus = jc.alice_marginal(Sign::plus());
    r.bob_marginal_plus = jc.bob_marginal(Sign::plus());
    const double sigma = binomial_std_error(0.5, jc.total_runs);
    r.alice_sigma_deviation = std::abs(r.alice_marginal_plus - 0.5) / sigma;
    r.bob_sigma_deviation = std::abs(r.bob_marginal_plus - 0.5) / sigma;
    r.pass = r.alice_sigma_deviation <= 5.0 && r.bob_sigma_deviation <= 5.0;
    return r;
}

// z statistic for Alice's marginal across two Bob settings; should be small
// under no-signaling.
inline double marginal_shift_z(const JointCounts& under_b1, const JointCounts& under_b2) {
    return two_proportion_z(under_b1.alice_marginal(Sign::plus()), under_b1.total_runs,
                            under_b2.alice_marginal(Sign::plus()), under_b2.total_runs);
}

// Per-run check that the two-instance label-(+1) pair reproduces the
// single-world transcript exactly, over random (a, b, x0, x1). The pairing
// rule is injectable so a broken rule is observable under test.
template <typename PairingFn = PairingMap (*)(Sign, Sign)>
std::uint64_t equivalence_audit(std::uint64_t n_configs, std::uint64_t seed,
                                PairingFn&& pairing = &two_instance::pairing_rule) {
    std::uint64_t mismatches = 0;
    for (std::uint64_t i = 0; i < n_configs; ++i) {
        RngStream rng = derive_substream(seed, i);
        const UnitVector3 a = sample_unit_vector(rng);
        const UnitVector3 b = sample_unit_vector(rng);
        const SharedRandomness sr = sample_shared_randomness(rng);

        const toner_bacon::Transcript t = toner_bacon::run(a, b, sr);

        const two_instance::AliceRecord ar = two_instance::alice(a, sr);
        const two_instance::BobRecord br = two_instance::bob(b, sr);
        const PairingMap pm = pairing(ar.message_bit(), br.message_bit());
        // Label order: index 0 <-> +1. Alice's +1 instance pairs with Bob's
        // instance at pm(0).
        const Sign bob_outcome = pm(0) == 0 ? br.outcome_plus() : br.outcome_minus();
        if (ar.outcome_plus() != t.s_a || bob_outcome != t.s_b) ++mismatches;
    }
    return mismatches;
}

struct LocalityReport {
    std::uint64_t structural_failures = 0;
    std::uint64_t structural_checks = 0;
    double chi_square = 0.0;
    double chi_square_critical = 0.0;
    std::uint64_t chi_square_runs = 0;
    bool pass = false;
};

namespace detail {

// Honest adapters: the remote setting parameter exists only so an audit can
// offer it; the real protocol functions cannot take it.
inline two_instance::AliceRecord honest_alice(const UnitVector3& a, const SharedRandomness& sr,
                                              const UnitVector3& /*remote*/) {
    return two_instance::alice(a, sr);
}

inline two_instance::BobRecord honest_bob(const UnitVector3& b, const SharedRandomness& sr,
                                          const UnitVector3& /*remote*/) {
    return two_instance::bob(b, sr);
}

}  // namespace detail

// Structural audit: a party's record must be byte-identical under any remote
// setting. Statistical audit: the distribution of (outcome_plus, message bit)
// under a fixed local setting is independent of the remote one (chi-square
// homogeneity over independent run sets, df = 3, significance 1e-3).
template <typename AliceFn = decltype(&detail::honest_alice),
          typename BobFn = decltype(&detail::honest_bob)>
LocalityReport locality_audit(std::uint64_t n_trials, std::uint64_t seed,
                              AliceFn&& alice_fn = &detail::honest_alice,
                              BobFn&& bob_fn = &detail::honest_bob,
                              std::uint64_t chi_runs_per_setting = 1'000'000) {
    LocalityReport report;
    constexpr int kRemoteVariations = 10;

    for (std::uint64_t trial = 0; trial < n_trials; ++trial) {
        RngStream rng = derive_substream(derive_seed(seed, 0xA11CE), trial);
        const UnitVector3 a = sample_unit_vector(rng);
        const UnitVector3 b = sample_unit_vector(rng);
        const SharedRandomness sr = sample_shared_randomness(rng);

        const auto alice_base = alice_fn(a, sr, sample_unit_vector(rng));
        const auto bob_base = bob_fn(b, sr, sample_unit_vector(rng));
        for (int k = 0; k < kRemoteVariations; ++k) {
            const UnitVector3 remote = sample_unit_vector(rng);
            if (!(alice_fn(a, sr, remote) == alice_base)) ++report.structural_failures;
            if (!(bob_fn(b, sr, remote) == bob_base)) ++report.structural_failures;
            report.structural_checks += 2;
        }
    }

    // Chi-square part: Alice's (outcome_plus, message bit) under two remote
    // settings, sampled with independent substreams per setting.
    const UnitVector3 a_fixed(1.0, 1.0, 1.0);
    const std::array<UnitVector3, 2> remotes = {x_axis(), z_axis()};
    std::array<std::array<std::uint64_t, 4>, 2> table{};
    for (std::size_t j = 0; j < 2; ++j) {
        const std::uint64_t sj = derive_seed(seed, 0xC41 + j);
        for (std::uint64_t i = 0; i < chi_runs_per_setting; ++i) {
            RngStream rng = derive_substream(sj, i);
            const SharedRandomness sr = sample_shared_randomness(rng);
            const auto rec = alice_fn(a_fixed, sr, remotes[j]);
            const std::size_t cat = rec.outcome_plus().index() * 2 + rec.message_bit().index();
            ++table[j][cat];
        }
    }
    report.chi_square = chi_square_homogeneity(table[0], table[1]);
    report.chi_square_critical = chi_square_critical_1e3(3);
    report.chi_square_runs = chi_runs_per_setting;
    report.pass =
        report.structural_failures == 0 && report.chi_square < report.chi_square_critical;
    return report;
}

}  // namespace singletsim
