#pragma once

// Streaming sufficient statistics and the pairwise generalized log-likelihood
// ratio (GLLR) between two arms.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"

namespace ttsprt {

class SufficientStats {
public:
    SufficientStats() = default;
    explicit SufficientStats(std::size_t num_arms) : counts_(num_arms, 0), sums_(num_arms, 0.0) {}

    std::size_t num_arms() const noexcept { return counts_.size(); }
    std::uint64_t rounds() const noexcept { return rounds_; }
    std::uint64_t count(std::size_t arm) const { return counts_.at(arm); }
    double sum(std::size_t arm) const { return sums_.at(arm); }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }

    bool all_pulled() const noexcept {
        for (auto c : counts_) {
            if (c == 0) return false;
        }
        return true;
    }

    void update(std::size_t arm, double reward) {
        check_index(arm);
        ++counts_[arm];
        sums_[arm] += reward;
        ++rounds_;
    }

    /// Empirical mean; requires at least one pull.
    double mean(std::size_t arm) const {
        check_pulled(arm);
        return sums_[arm] / static_cast<double>(counts_[arm]);
    }

    /// Count-weighted pooled mean of arms i and j.
    double weighted_mean(std::size_t i, std::size_t j) const {
        check_pulled(i);
        check_pulled(j);
        if (i == j) return mean(i);
        const double ti = static_cast<double>(counts_[i]);
        const double tj = static_cast<double>(counts_[j]);
        return (sums_[i] + sums_[j]) / (ti + tj);
    }

    // Overwrites one arm's history; used to build synthetic histories.
    void set_arm(std::size_t arm, std::uint64_t count, double mean) {
        check_index(arm);
        rounds_ = rounds_ - counts_[arm] + count;
        counts_[arm] = count;
        sums_[arm] = mean * static_cast<double>(count);
    }

    void check_index(std::size_t arm) const {
        if (arm >= counts_.size()) {
            throw index_error("arm index " + std::to_string(arm) + " out of range for " +
                              std::to_string(counts_.size()) + " arms");
        }
    }

    void check_pulled(std::size_t arm) const {
        check_index(arm);
        if (counts_[arm] == 0) {
            throw unpulled_arm_error("arm " + std::to_string(arm) + " has not been pulled");
        }
    }

private:
    std::vector<std::uint64_t> counts_;
    std::vector<double> sums_;
    std::uint64_t rounds_ = 0;
};

namespace detail {

// Empirical means of continuous families can drift a few ulps outside the
// closed range through summation; Bernoulli means cannot, but clamp anyway.
inline double clamp_empirical(const RewardFamily& family, double mu) {
    switch (family.kind()) {
        case family_kind::bernoulli: return std::clamp(mu, 0.0, 1.0);
        case family_kind::exponential: return std::max(mu, 0.0);
        case family_kind::gaussian: return mu;
    }
    return mu;
}

}  // namespace detail

/// GLLR statistic Lambda_n(i, j) for "arm i beats arm j". Zero unless the
/// empirical mean of i is strictly larger than that of j.
inline double gllr(const RewardFamily& family, const SufficientStats& stats, std::size_t i, std::size_t j) {
    stats.check_pulled(i);
    stats.check_pulled(j);
    if (i == j) throw index_error("gllr needs two distinct arms");
    const double mi = detail::clamp_empirical(family, stats.mean(i));
    const double mj = detail::clamp_empirical(family, stats.mean(j));
    if (!(mi > mj)) return 0.0;
    const double pooled = detail::clamp_empirical(family, stats.weighted_mean(i, j));
    const double ti = static_cast<double>(stats.count(i));
    const double tj = static_cast<double>(stats.count(j));
    return ti * kl_divergence(family, mi, pooled) + tj * kl_divergence(family, mj, pooled);
}

/// Quadratic form of the GLLR for Gaussian rewards with known sigma.
inline double gllr_gaussian(double sigma, const SufficientStats& stats, std::size_t i, std::size_t j) {
    stats.check_pulled(i);
    stats.check_pulled(j);
    if (i == j) throw index_error("gllr needs two distinct arms");
    const double mi = stats.mean(i);
    const double mj = stats.mean(j);
    if (!(mi > mj)) return 0.0;
    const double d = mi - mj;
    const double inv = 1.0 / static_cast<double>(stats.count(i)) + 1.0 / static_cast<double>(stats.count(j));
    return d * d / (2.0 * sigma * sigma * inv);
}

}  // namespace ttsprt
