#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace singletsim {

// Welford accumulator with exact pairwise merge, so partitioned estimates
// combine independently of scheduling.
class RunningStats {
public:
    void push(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningStats& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double d = o.mean_ - mean_;
        mean_ = (na * mean_ + nb * o.mean_) / (na + nb);
        m2_ += o.m2_ + d * d * (na * nb / (na + nb));
        n_ += o.n_;
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }

    double variance_sample() const {
        if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
        return m2_ / static_cast<double>(n_ - 1);
    }

    double std_error_of_mean() const {
        return std::sqrt(variance_sample() / static_cast<double>(n_));
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline double binomial_std_error(double p, std::uint64_t n) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Upper critical values of the chi-square distribution at significance 1e-3
// (standard tables, e.g. NIST/SEMATECH e-Handbook).
inline double chi_square_critical_1e3(int df) {
    switch (df) {
        case 1: return 10.828;
        case 2: return 13.816;
        case 3: return 16.266;
        case 4: return 18.467;
        default: throw std::invalid_argument("chi_square_critical_1e3: df not tabulated");
    }
}

// Pearson chi-square statistic for homogeneity of two samples over k
// categories (df = k - 1). Expected counts come from the pooled margins.
inline double chi_square_homogeneity(std::span<const std::uint64_t> sample_a,
                                     std::span<const std::uint64_t> sample_b) {
    if (sample_a.size() != sample_b.size() || sample_a.empty())
        throw std::invalid_argument("chi_square_homogeneity: category counts must match");
    std::uint64_t na = 0, nb = 0;
    for (std::size_t i = 0; i < sample_a.size(); ++i) {
        na += sample_a[i];
        nb += sample_b[i];
    }
    if (na == 0 || nb == 0) throw std::invalid_argument("chi_square_homogeneity: empty sample");
    const double total = static_cast<double>(na + nb);
    double stat = 0.0;
    for (std::size_t i = 0; i < sample_a.size(); ++i) {
        const double col = static_cast<double>(sample_a[i] + sample_b[i]);
        if (col == 0.0) continue;  // empty category contributes nothing
        const double ea = col * static_cast<double>(na) / total;
        const double eb = col * static_cast<double>(nb) / total;
        const double da = static_cast<double>(sample_a[i]) - ea;
        const double db = static_cast<double>(sample_b[i]) - eb;
        stat += da * da / ea + db * db / eb;
    }
    return stat;
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Asymptotic KS critical value: D_crit = sqrt(-ln(alpha/2) / (2n)).
inline double ks_critical(std::size_t n, double alpha) {
    return std::sqrt(-std::log(alpha / 2.0) / (2.0 * static_cast<double>(n)));
}

// Two-proportion z statistic for p_hat_a vs p_hat_b observed on n_a and n_b
// trials (pooled variance).
inline double two_proportion_z(double p_a, std::uint64_t n_a, double p_b, std::uint64_t n_b) {
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double pooled = (p_a * na + p_b * nb) / (na + nb);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
    if (se == 0.0) return 0.0;
    return (p_a - p_b) / se;
}

}  // namespace singletsim
