#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "singletsim/rng.hpp"

namespace singletsim {

// The m labeled parallel instances of one macroscopic quantity. The list
// length is the instance count and is conserved by every operation; the
// auxiliary record Eta is owned by protocols and never inspected here.
template <typename Value, typename Eta = std::monostate>
class InstanceSet {
public:
    explicit InstanceSet(std::vector<Value> values, Eta eta = Eta{})
        : values_(std::move(values)), eta_(std::move(eta)) {
        if (values_.empty()) throw std::invalid_argument("InstanceSet: instance count must be positive");
    }

    std::size_t m() const { return values_.size(); }
    const std::vector<Value>& values() const { return values_; }
    const Eta& eta() const { return eta_; }

    bool operator==(const InstanceSet&) const = default;

private:
    std::vector<Value> values_;
    Eta eta_;
};

// Permutation-invariant form: occupation numbers over an ordered domain of
// distinct branch values. Total occupation equals the instance count.
template <typename Value, typename Eta = std::monostate>
class OccupationState {
public:
    OccupationState(std::vector<Value> domain, std::vector<std::uint64_t> counts, Eta eta = Eta{})
        : domain_(std::move(domain)), counts_(std::move(counts)), eta_(std::move(eta)) {
        if (domain_.size() != counts_.size())
            throw std::invalid_argument("OccupationState: domain and counts differ in length");
        for (std::size_t i = 0; i < domain_.size(); ++i)
            for (std::size_t j = i + 1; j < domain_.size(); ++j)
                if (domain_[i] == domain_[j])
                    throw std::invalid_argument("OccupationState: domain values must be distinct");
        if (total() == 0)
            throw std::invalid_argument("OccupationState: total occupation must be positive");
    }

    const std::vector<Value>& domain() const { return domain_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    const Eta& eta() const { return eta_; }

    std::uint64_t total() const {
        return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    }

    bool operator==(const OccupationState&) const = default;

private:
    std::vector<Value> domain_;
    std::vector<std::uint64_t> counts_;
    Eta eta_;
};

// Branch weights |psi_i|^2; nonnegative and normalized to 1 within 1e-12.
class BranchWeights {
public:
    static constexpr double kNormalizationTolerance = 1e-12;

    explicit BranchWeights(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw std::invalid_argument("BranchWeights: empty");
        double sum = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0)) throw std::invalid_argument("BranchWeights: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kNormalizationTolerance)
            throw std::invalid_argument("BranchWeights: weights must sum to 1");
    }

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> weights_;
};

// Which instance the observer happens to inhabit, and what it shows.
template <typename Value>
struct ObserverSample {
    std::size_t instance_index;
    Value value;
};

// Bijection between two parties' instance labels {0,...,m-1}.
class PairingMap {
public:
    explicit PairingMap(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
        std::vector<char> seen(map_.size(), 0);
        for (std::size_t k : map_) {
            if (k >= map_.size() || seen[k])
                throw std::invalid_argument("PairingMap: mapping is not a bijection");
            seen[k] = 1;
        }
        if (map_.empty()) throw std::invalid_argument("PairingMap: m must be positive");
    }

    static PairingMap identity(std::size_t m) {
        std::vector<std::size_t> v(m);
        std::iota(v.begin(), v.end(), std::size_t{0});
        return PairingMap(std::move(v));
    }

    // Swap of the two labels; the m = 2 transposition.
    static PairingMap swap2() { return PairingMap({1, 0}); }

    std::size_t m() const { return map_.size(); }
    std::size_t operator()(std::size_t i) const { return map_.at(i); }
    const std::vector<std::size_t>& mapping() const { return map_; }

    bool operator==(const PairingMap&) const = default;

private:
    std::vector<std::size_t> map_;
};

// Count instances per domain value. Every instance value must lie in the
// domain; eta is carried through untouched.
template <typename Value, typename Eta>
OccupationState<Value, Eta> to_occupation(const InstanceSet<Value, Eta>& s,
                                          const std::vector<Value>& domain) {
    std::vector<std::uint64_t> counts(domain.size(), 0);
    for (const Value& v : s.values()) {
        const auto it = std::find(domain.begin(), domain.end(), v);
        if (it == domain.end())
            throw std::invalid_argument("to_occupation: instance value outside domain");
        ++counts[static_cast<std::size_t>(it - domain.begin())];
    }
    return OccupationState<Value, Eta>(domain, std::move(counts), s.eta());
}

// Canonical labeled form: domain values in domain order, each repeated by its
// occupation number. Inverse of to_occupation up to instance relabeling.
template <typename Value, typename Eta>
InstanceSet<Value, Eta> from_occupation(const OccupationState<Value, Eta>& o) {
    std::vector<Value> values;
    values.reserve(o.total());
    for (std::size_t i = 0; i < o.domain().size(); ++i)
        values.insert(values.end(), o.counts()[i], o.domain()[i]);
    return InstanceSet<Value, Eta>(std::move(values), o.eta());
}

// Unweighted counting rule over an ensemble of runs: count instances per
// value, sum exactly over runs, divide by m*R at the very end. All runs must
// share the same instance count.
template <typename Value, typename Eta>
std::map<Value, double> outcome_distribution(std::span<const InstanceSet<Value, Eta>> ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("outcome_distribution: empty ensemble");
    const std::size_t m = ensemble.front().m();
    std::map<Value, std::uint64_t> tally;
    for (const auto& run : ensemble) {
        if (run.m() != m)
            throw std::invalid_argument("outcome_distribution: instance count differs across runs");
        for (const Value& v : run.values()) ++tally[v];
    }
    std::map<Value, double> freq;
    const double denom = static_cast<double>(m) * static_cast<double>(ensemble.size());
    for (const auto& [v, n] : tally) freq[v] = static_cast<double>(n) / denom;
    return freq;
}

template <typename Value, typename Eta>
std::map<Value, double> outcome_distribution(const std::vector<InstanceSet<Value, Eta>>& ensemble) {
    return outcome_distribution(std::span<const InstanceSet<Value, Eta>>(ensemble));
}

// The observer lands in each instance with equal probability.
template <typename Value, typename Eta>
ObserverSample<Value> select_instance_uniform(const InstanceSet<Value, Eta>& s, RngStream& rng) {
    const std::size_t idx = static_cast<std::size_t>(rng.next_below(s.m()));
    return {idx, s.values()[idx]};
}

// Combine two local quantities into one: instance i of the result holds the
// tuple (a_i, b_{pairing(i)}). A direct sum, not a tensor product -- the
// instance count is conserved.
template <typename VA, typename EA, typename VB, typename EB>
InstanceSet<std::pair<VA, VB>, std::pair<EA, EB>> combine_local(const InstanceSet<VA, EA>& a,
                                                                const InstanceSet<VB, EB>& b,
                                                                const PairingMap& pairing) {
    if (a.m() != b.m() || a.m() != pairing.m())
        throw std::invalid_argument("combine_local: instance counts and pairing cardinality must match");
    std::vector<std::pair<VA, VB>> values;
    values.reserve(a.m());
    for (std::size_t i = 0; i < a.m(); ++i)
        values.emplace_back(a.values()[i], b.values()[pairing(i)]);
    return InstanceSet<std::pair<VA, VB>, std::pair<EA, EB>>(std::move(values),
                                                             {a.eta(), b.eta()});
}

// Convergence report for the stochastic occupation picture: m instances drawn
// i.i.d. from the branch weights per repetition. Mean occupation fractions
// approach the weights; a branch of weight p is realized at least once with
// probability 1-(1-p)^m <= m*p.
struct BornConvergenceReport {
    std::vector<double> mean_occupation;         // averaged n_i/m per branch
    double max_deviation = 0.0;                  // max_i |mean_occupation[i] - w_i|
    std::vector<double> realization_frequency;   // empirical P(n_i >= 1)
    std::vector<double> realization_bound;       // m * w_i
    std::size_t repetitions = 0;
};

inline BornConvergenceReport born_limit_demo(const BranchWeights& w, std::size_t m,
                                             std::size_t repetitions, RngStream& rng) {
    if (m == 0) throw std::invalid_argument("born_limit_demo: m must be positive");
    if (repetitions == 0) throw std::invalid_argument("born_limit_demo: repetitions must be positive");

    std::vector<double> cumulative(w.size());
    std::partial_sum(w.weights().begin(), w.weights().end(), cumulative.begin());

    const std::size_t nb = w.size();
    std::vector<std::uint64_t> occupation_sum(nb, 0);
    std::vector<std::uint64_t> realized(nb, 0);
    std::vector<std::uint64_t> run_counts(nb);

    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        std::fill(run_counts.begin(), run_counts.end(), std::uint64_t{0});
        for (std::size_t k = 0; k < m; ++k) {
            const double u = rng.uniform01();
            std::size_t branch = nb - 1;
            for (std::size_t i = 0; i < nb; ++i) {
                if (u <= cumulative[i]) {
                    branch = i;
                    break;
                }
            }
            ++run_counts[branch];
        }
        for (std::size_t i = 0; i < nb; ++i) {
            occupation_sum[i] += run_counts[i];
            if (run_counts[i] > 0) ++realized[i];
        }
    }

    BornConvergenceReport report;
    report.repetitions = repetitions;
    report.mean_occupation.resize(nb);
    report.realization_frequency.resize(nb);
    report.realization_bound.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        report.mean_occupation[i] = static_cast<double>(occupation_sum[i]) /
                                    (static_cast<double>(m) * static_cast<double>(repetitions));
        report.max_deviation = std::max(report.max_deviation,
                                        std::abs(report.mean_occupation[i] - w[i]));
        report.realization_frequency[i] =
            static_cast<double>(realized[i]) / static_cast<double>(repetitions);
        report.realization_bound[i] = static_cast<double>(m) * w[i];
    }
    return report;
}

}  // namespace singletsim
