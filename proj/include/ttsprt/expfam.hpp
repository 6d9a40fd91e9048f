#pragma once

// Single-parameter exponential-family reward models, identified by their mean.
//
//   Gaussian (known sigma):  theta = mu / sigma^2,  b(theta) = sigma^2 theta^2 / 2
//   Bernoulli:               theta = logit(mu),     b(theta) = log(1 + e^theta)
//   Exponential (mean mu):   theta = -1 / mu,       b(theta) = -log(-theta)
//
// KL divergences are returned as extended reals: +inf is an ordinary double
// value and compares above every finite value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ttsprt/errors.hpp"

namespace ttsprt {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class family_kind { gaussian, bernoulli, exponential };

class RewardFamily {
public:
    static RewardFamily gaussian(double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw domain_error("gaussian family requires sigma > 0");
        }
        return RewardFamily(family_kind::gaussian, sigma);
    }
    static RewardFamily bernoulli() { return RewardFamily(family_kind::bernoulli, 0.0); }
    static RewardFamily exponential() { return RewardFamily(family_kind::exponential, 0.0); }

    family_kind kind() const noexcept { return kind_; }
    // Only meaningful for the Gaussian family.
    double sigma() const noexcept { return sigma_; }

    std::string_view name() const noexcept {
        switch (kind_) {
            case family_kind::gaussian: return "gaussian";
            case family_kind::bernoulli: return "bernoulli";
            case family_kind::exponential: return "exponential";
        }
        return "unknown";
    }

    // Open interval of means a distribution of the family can have.
    bool valid_mean(double mu) const noexcept {
        switch (kind_) {
            case family_kind::gaussian: return std::isfinite(mu);
            case family_kind::bernoulli: return mu > 0.0 && mu < 1.0;
            case family_kind::exponential: return mu > 0.0 && std::isfinite(mu);
        }
        return false;
    }

    // Closure of the mean range; empirical means live here.
    bool valid_empirical_mean(double mu) const noexcept {
        switch (kind_) {
            case family_kind::gaussian: return std::isfinite(mu);
            case family_kind::bernoulli: return mu >= 0.0 && mu <= 1.0;
            case family_kind::exponential: return mu >= 0.0 && std::isfinite(mu);
        }
        return false;
    }

    // Variance of the member with mean mu.
    double variance(double mu) const noexcept {
        switch (kind_) {
            case family_kind::gaussian: return sigma_ * sigma_;
            case family_kind::bernoulli: return mu * (1.0 - mu);
            case family_kind::exponential: return mu * mu;
        }
        return 0.0;
    }

    friend bool operator==(const RewardFamily&, const RewardFamily&) = default;

private:
    RewardFamily(family_kind kind, double sigma) : kind_(kind), sigma_(sigma) {}

    family_kind kind_;
    double sigma_;
};

namespace detail {

inline void require_mean(const RewardFamily& family, double mu, bool closed) {
    const bool ok = closed ? family.valid_empirical_mean(mu) : family.valid_mean(mu);
    if (!ok) {
        std::ostringstream msg;
        msg << "mean " << mu << " outside the " << (closed ? "closed" : "open")
            << " mean range of the " << family.name() << " family";
        throw invalid_mean_error(msg.str());
    }
}

// x log(x / y) with 0 log 0 = 0.
inline double xlogx_over_y(double x, double y) {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return infinity;
    return x * std::log(x / y);
}

}  // namespace detail

/// d_KL(mu_i || mu_j): divergence of the member with mean mu_j from the member
/// with mean mu_i. Arguments may sit on the boundary of the mean range, in
/// which case the result can be +inf.
inline double kl_divergence(const RewardFamily& family, double mu_i, double mu_j) {
    detail::require_mean(family, mu_i, true);
    detail::require_mean(family, mu_j, true);
    if (mu_i == mu_j) return 0.0;
    switch (family.kind()) {
        case family_kind::gaussian: {
            const double d = mu_i - mu_j;
            return d * d / (2.0 * family.sigma() * family.sigma());
        }
        case family_kind::bernoulli:
            return std::max(0.0, detail::xlogx_over_y(mu_i, mu_j) +
                                     detail::xlogx_over_y(1.0 - mu_i, 1.0 - mu_j));
        case family_kind::exponential: {
            if (mu_i == 0.0 || mu_j == 0.0) return infinity;
            const double r = mu_i / mu_j;
            return std::max(0.0, r - 1.0 - std::log(r));
        }
    }
    return 0.0;
}

/// Natural parameter theta = bdot^{-1}(mu).
inline double natural_param(const RewardFamily& family, double mu) {
    detail::require_mean(family, mu, false);
    switch (family.kind()) {
        case family_kind::gaussian: return mu / (family.sigma() * family.sigma());
        case family_kind::bernoulli: return std::log(mu / (1.0 - mu));
        case family_kind::exponential: return -1.0 / mu;
    }
    return 0.0;
}

/// Mean bdot(theta); inverse of natural_param.
inline double mean_from_natural(const RewardFamily& family, double theta) {
    switch (family.kind()) {
        case family_kind::gaussian: return family.sigma() * family.sigma() * theta;
        case family_kind::bernoulli: return 1.0 / (1.0 + std::exp(-theta));
        case family_kind::exponential:
            if (!(theta < 0.0)) throw domain_error("exponential natural parameter must be negative");
            return -1.0 / theta;
    }
    return 0.0;
}

/// Log-partition function b(theta).
inline double log_partition(const RewardFamily& family, double theta) {
    switch (family.kind()) {
        case family_kind::gaussian: return family.sigma() * family.sigma() * theta * theta / 2.0;
        case family_kind::bernoulli:
            return theta > 0.0 ? theta + std::log1p(std::exp(-theta)) : std::log1p(std::exp(theta));
        case family_kind::exponential:
            if (!(theta < 0.0)) throw domain_error("exponential natural parameter must be negative");
            return -std::log(-theta);
    }
    return 0.0;
}

/// One draw from the member of the family with mean mu.
template <class URBG>
double sample_reward(const RewardFamily& family, double mu, URBG& rng) {
    detail::require_mean(family, mu, false);
    switch (family.kind()) {
        case family_kind::gaussian: return std::normal_distribution<double>(mu, family.sigma())(rng);
        case family_kind::bernoulli: return std::bernoulli_distribution(mu)(rng) ? 1.0 : 0.0;
        case family_kind::exponential: return std::exponential_distribution<double>(1.0 / mu)(rng);
    }
    return 0.0;
}

/// Ground-truth bandit: a family and one mean per arm, with a unique best arm.
class BanditInstance {
public:
    BanditInstance(RewardFamily family, std::vector<double> means)
        : family_(family), means_(std::move(means)) {
        if (means_.size() < 2) throw domain_error("a bandit instance needs at least two arms");
        for (double mu : means_) detail::require_mean(family_, mu, false);
        const auto top = std::max_element(means_.begin(), means_.end());
        best_ = static_cast<std::size_t>(top - means_.begin());
        if (std::count(means_.begin(), means_.end(), *top) > 1) {
            throw non_unique_best_error("best arm is not unique: the largest mean appears more than once");
        }
    }

    const RewardFamily& family() const noexcept { return family_; }
    std::span<const double> means() const noexcept { return means_; }
    double mean(std::size_t arm) const { return means_.at(arm); }
    std::size_t num_arms() const noexcept { return means_.size(); }
    std::size_t best_arm() const noexcept { return best_; }

    // Gap to the best arm; zero for the best arm itself.
    double gap(std::size_t arm) const { return means_[best_] - means_.at(arm); }

    // Smallest gap between the best arm and any other arm.
    double min_gap_to_best() const {
        double g = infinity;
        for (std::size_t i = 0; i < means_.size(); ++i) {
            if (i != best_) g = std::min(g, gap(i));
        }
        return g;
    }

    // Smallest gap between any two distinct arms; zero when two arms tie.
    double min_pairwise_gap() const {
        std::vector<double> sorted = means_;
        std::sort(sorted.begin(), sorted.end());
        double g = infinity;
        for (std::size_t i = 1; i < sorted.size(); ++i) g = std::min(g, sorted[i] - sorted[i - 1]);
        return g;
    }

    double max_gap() const {
        double g = 0.0;
        for (std::size_t i = 0; i < means_.size(); ++i) g = std::max(g, gap(i));
        return g;
    }

private:
    RewardFamily family_;
    std::vector<double> means_;
    std::size_t best_ = 0;
};

}  // namespace ttsprt
