#pragma once

// Sequential best-arm identification policies.
//
// Every policy pulls each arm once in rounds 1..K, then hands control to its
// sampling rule. All argmax/argmin operations break ties toward the lowest
// arm index. Stopping is shared: stop as soon as the GLLR of the empirical
// leader against its challenger strictly exceeds c_{n,delta}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"
#include "ttsprt/rng.hpp"
#include "ttsprt/stats.hpp"
#include "ttsprt/thresholds.hpp"

namespace ttsprt {

enum class policy_kind { ttsprt, ttsprt_gaussian, ttts, t3c, uniform };

inline std::string_view to_string(policy_kind kind) {
    switch (kind) {
        case policy_kind::ttsprt: return "ttsprt";
        case policy_kind::ttsprt_gaussian: return "ttsprt-gaussian";
        case policy_kind::ttts: return "ttts";
        case policy_kind::t3c: return "t3c";
        case policy_kind::uniform: return "uniform";
    }
    return "unknown";
}

inline std::optional<policy_kind> parse_policy(std::string_view id) {
    for (auto kind : {policy_kind::ttsprt, policy_kind::ttsprt_gaussian, policy_kind::ttts, policy_kind::t3c,
                      policy_kind::uniform}) {
        if (id == to_string(kind)) return kind;
    }
    return std::nullopt;
}

inline constexpr std::uint64_t default_resample_cap = 10'000'000;

struct PolicyState {
    PolicyState(std::size_t num_arms, double beta_, rng_type coin, rng_type posterior,
                std::uint64_t cap = default_resample_cap)
        : stats(num_arms), beta(beta_), coin_rng(std::move(coin)), posterior_rng(std::move(posterior)),
          resample_cap(cap), theta(num_arms, 0.0), gllrs(num_arms, 0.0) {
        if (!(beta > 0.0 && beta < 1.0)) throw domain_error("beta must lie in the open interval (0, 1)");
        if (num_arms < 2) throw domain_error("a policy needs at least two arms");
        if (cap < 1) throw domain_error("resample cap must be at least 1");
    }

    SufficientStats stats;
    std::optional<std::size_t> leader;
    std::optional<std::size_t> challenger;
    // Lambda_n(leader, challenger), valid when leader_round == stats.rounds().
    double leader_gllr = 0.0;
    std::uint64_t leader_round = ~std::uint64_t{0};

    double beta;
    rng_type coin_rng;
    rng_type posterior_rng;

    // TTTS bookkeeping.
    std::uint64_t resample_cap;
    std::uint64_t last_resample_count = 0;
    bool last_resample_censored = false;

    // Total posterior vectors drawn (TTTS and T3C).
    std::uint64_t posterior_draws = 0;

    std::vector<double> theta;
    std::vector<double> gllrs;
};

/// Index of the largest value; ties to the lowest index. +inf is a regular value.
inline std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

/// Index of the smallest value, skipping `excluded`; ties to the lowest index.
inline std::size_t argmin_lowest(std::span<const double> values, std::optional<std::size_t> excluded = std::nullopt) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (excluded && i == *excluded) continue;
        if (!best || values[i] < values[*best]) best = i;
    }
    if (!best) throw index_error("argmin over an empty set");
    return *best;
}

/// Lambda_n(i, j) using the quadratic form for Gaussian rewards.
inline double pair_gllr(const RewardFamily& family, const SufficientStats& stats, std::size_t i, std::size_t j) {
    if (family.kind() == family_kind::gaussian) return gllr_gaussian(family.sigma(), stats, i, j);
    return gllr(family, stats, i, j);
}

/// Empirical leader: argmax of the sample means.
inline std::size_t empirical_leader(const SufficientStats& stats) {
    std::size_t best = 0;
    double best_mean = stats.mean(0);
    for (std::size_t i = 1; i < stats.num_arms(); ++i) {
        const double m = stats.mean(i);
        if (m > best_mean) {
            best = i;
            best_mean = m;
        }
    }
    return best;
}

/// argmin over j != leader of Lambda_n(leader, j). Writes each Lambda into `out`
/// (the leader's own slot is set to +inf).
inline std::size_t challenger_for(const RewardFamily& family, const SufficientStats& stats, std::size_t leader,
                                  std::span<double> out) {
    for (std::size_t j = 0; j < stats.num_arms(); ++j) {
        out[j] = j == leader ? infinity : pair_gllr(family, stats, leader, j);
    }
    return argmin_lowest(out, leader);
}

inline std::size_t challenger_for(const RewardFamily& family, const SufficientStats& stats, std::size_t leader) {
    std::vector<double> scratch(stats.num_arms());
    return challenger_for(family, stats, leader, scratch);
}

/// Recomputes a_n^1, a_n^2 and Lambda_n(a_n^1, a_n^2) if the statistics moved.
inline void refresh_leader(PolicyState& state, const RewardFamily& family) {
    if (state.leader_round == state.stats.rounds()) return;
    for (std::size_t i = 0; i < state.stats.num_arms(); ++i) state.stats.check_pulled(i);
    const std::size_t leader = empirical_leader(state.stats);
    const std::size_t challenger = challenger_for(family, state.stats, leader, state.gllrs);
    state.leader = leader;
    state.challenger = challenger;
    state.leader_gllr = state.gllrs[challenger];
    state.leader_round = state.stats.rounds();
}

/// Least-pulled arm among those with T_{n,i} <= ceil(sqrt(n / K)), if any.
inline std::optional<std::size_t> least_pulled_under_explored(const SufficientStats& stats) {
    const double k = static_cast<double>(stats.num_arms());
    const auto floor_count =
        static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(stats.rounds()) / k)));
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < stats.num_arms(); ++i) {
        const auto t = stats.count(i);
        if (t <= floor_count && (!pick || t < stats.count(*pick))) pick = i;
    }
    return pick;
}

/// D_n ~ Bern(beta); true selects the leader.
inline bool draw_coin(PolicyState& state) {
    return std::bernoulli_distribution(state.beta)(state.coin_rng);
}

/// TT-SPRT sampling rule with forced exploration of under-explored arms.
/// The coin is drawn every round, even when exploration overrides it.
inline std::size_t ttsprt_select(PolicyState& state, const RewardFamily& family) {
    const bool coin = draw_coin(state);
    for (std::size_t i = 0; i < state.stats.num_arms(); ++i) state.stats.check_pulled(i);
    if (auto forced = least_pulled_under_explored(state.stats)) return *forced;
    refresh_leader(state, family);
    return coin ? *state.leader : *state.challenger;
}

/// TT-SPRT sampling rule for Gaussian rewards: top-two randomization only.
inline std::size_t ttsprt_gaussian_select(PolicyState& state, double sigma) {
    const auto family = RewardFamily::gaussian(sigma);
    const bool coin = draw_coin(state);
    refresh_leader(state, family);
    return coin ? *state.leader : *state.challenger;
}

/// One draw from the uninformative-prior posterior over the arm means.
/// Gaussian: N(mean, sigma^2 / T). Bernoulli: Beta(S + 1, T - S + 1).
/// Exponential: S / Gamma(T, 1), i.e. the inverse of a Gamma(T, S) rate.
template <class URBG>
void sample_posterior(const RewardFamily& family, const SufficientStats& stats, URBG& rng, std::span<double> out) {
    for (std::size_t i = 0; i < stats.num_arms(); ++i) {
        stats.check_pulled(i);
        const double t = static_cast<double>(stats.count(i));
        const double s = stats.sum(i);
        switch (family.kind()) {
            case family_kind::gaussian:
                out[i] = s / t + family.sigma() / std::sqrt(t) * std::normal_distribution<double>()(rng);
                break;
            case family_kind::bernoulli: {
                const double a = std::gamma_distribution<double>(s + 1.0, 1.0)(rng);
                const double b = std::gamma_distribution<double>(t - s + 1.0, 1.0)(rng);
                out[i] = a / (a + b);
                break;
            }
            case family_kind::exponential:
                out[i] = s / std::gamma_distribution<double>(t, 1.0)(rng);
                break;
        }
    }
}

struct TttsChoice {
    std::size_t arm = 0;
    std::size_t leader = 0;
    std::optional<std::size_t> challenger;
    // Posterior draws spent finding the challenger (>= 1).
    std::uint64_t resample_count = 0;
    // True when the resample cap was hit before a posterior challenger appeared.
    bool censored = false;
};

/// Top-two Thompson sampling: leader from one posterior draw, challenger by
/// redrawing until the argmax moves. If the resample cap binds, the outcome is
/// flagged censored and the transport-cost challenger is used instead.
inline TttsChoice ttts_select(PolicyState& state, const RewardFamily& family) {
    TttsChoice out;
    const bool coin = draw_coin(state);
    sample_posterior(family, state.stats, state.posterior_rng, state.theta);
    ++state.posterior_draws;
    out.leader = argmax_lowest(state.theta);
    while (out.resample_count < state.resample_cap) {
        sample_posterior(family, state.stats, state.posterior_rng, state.theta);
        ++state.posterior_draws;
        ++out.resample_count;
        const std::size_t top = argmax_lowest(state.theta);
        if (top != out.leader) {
            out.challenger = top;
            break;
        }
    }
    out.censored = !out.challenger.has_value();
    if (out.censored) {
        // Smallest-GLLR arm against the sampled leader stands in for the
        // challenger the posterior never produced.
        out.challenger = challenger_for(family, state.stats, out.leader, state.gllrs);
    }
    out.arm = coin ? out.leader : *out.challenger;
    state.last_resample_count = out.resample_count;
    state.last_resample_censored = out.censored;
    return out;
}

/// Top-two transportation cost: leader from one posterior draw, challenger by
/// smallest GLLR against that leader.
inline std::size_t t3c_select(PolicyState& state, const RewardFamily& family) {
    const bool coin = draw_coin(state);
    sample_posterior(family, state.stats, state.posterior_rng, state.theta);
    ++state.posterior_draws;
    const std::size_t leader = argmax_lowest(state.theta);
    if (coin) return leader;
    return challenger_for(family, state.stats, leader, state.gllrs);
}

/// Round-robin control.
inline std::size_t uniform_select(const PolicyState& state) {
    return static_cast<std::size_t>(state.stats.rounds() % state.stats.num_arms());
}

struct StopCheck {
    double gllr_value = 0.0;
    double threshold_value = 0.0;
    bool stopped = false;
    std::size_t recommendation = 0;
};

/// Strict test Lambda_n(a_n^1, a_n^2) > c_{n,delta} on the current statistics.
inline StopCheck stopping_check(PolicyState& state, const RewardFamily& family, const ThresholdSchedule& schedule) {
    StopCheck out;
    refresh_leader(state, family);
    out.gllr_value = state.leader_gllr;
    out.threshold_value = schedule(state.stats.rounds());
    out.stopped = out.gllr_value > out.threshold_value;
    out.recommendation = *state.leader;
    return out;
}

inline StopCheck stopping_check(PolicyState& state, const RewardFamily& family, const ThresholdSpec& spec) {
    return stopping_check(state, family, ThresholdSchedule(spec));
}

struct StepOutcome {
    std::size_t arm = 0;
    bool stopped = false;
    double gllr_value = 0.0;
    double threshold_value = 0.0;
    std::uint64_t challenger_resamples = 0;
    bool resample_censored = false;
};

/// Drives one policy: initial pass over the arms, then the policy's rule.
class Policy {
public:
    Policy(policy_kind kind, RewardFamily family, PolicyState state)
        : kind_(kind), family_(family), state_(std::move(state)) {
        if (kind_ == policy_kind::ttsprt_gaussian && family_.kind() != family_kind::gaussian) {
            throw config_error("ttsprt-gaussian requires the gaussian family");
        }
    }

    policy_kind kind() const noexcept { return kind_; }
    const RewardFamily& family() const noexcept { return family_; }
    const PolicyState& state() const noexcept { return state_; }
    PolicyState& state() noexcept { return state_; }

    /// Arm to pull next. Resample statistics of the last TTTS decision are
    /// left in state().
    std::size_t select() {
        state_.last_resample_count = 0;
        state_.last_resample_censored = false;
        if (state_.stats.rounds() < state_.stats.num_arms()) {
            return static_cast<std::size_t>(state_.stats.rounds());
        }
        switch (kind_) {
            case policy_kind::ttsprt: return ttsprt_select(state_, family_);
            case policy_kind::ttsprt_gaussian: return ttsprt_gaussian_select(state_, family_.sigma());
            case policy_kind::ttts: return ttts_select(state_, family_).arm;
            case policy_kind::t3c: return t3c_select(state_, family_);
            case policy_kind::uniform: return uniform_select(state_);
        }
        return 0;
    }

    void observe(std::size_t arm, double reward) { state_.stats.update(arm, reward); }

    /// Stopping is only evaluated once every arm has a sample.
    StopCheck check_stop(const ThresholdSchedule& schedule) {
        if (!state_.stats.all_pulled()) return {};
        return stopping_check(state_, family_, schedule);
    }

private:
    policy_kind kind_;
    RewardFamily family_;
    PolicyState state_;
};

struct TttsBounds {
    double lower = 0.0;
    // Absent when the smallest pairwise gap is zero.
    std::optional<double> upper;
    // n > 32 sigma^2 / (9 Delta_min^2), the regime where the upper curve applies.
    bool upper_in_regime = false;
};

namespace detail {

inline void require_gaussian(const BanditInstance& instance) {
    if (instance.family().kind() != family_kind::gaussian) {
        throw domain_error("TTTS posterior-cost bounds are stated for gaussian rewards");
    }
}

}  // namespace detail

/// min over suboptimal i of 2 exp(sqrt(n / K) (Delta_i - Delta_min / 2)^2 / (4 sigma^2)).
inline double ttts_lower_bound(const BanditInstance& instance, double n) {
    detail::require_gaussian(instance);
    const double sigma2 = instance.family().sigma() * instance.family().sigma();
    const double dmin = instance.min_pairwise_gap();
    const double root = std::sqrt(n / static_cast<double>(instance.num_arms()));
    double out = infinity;
    for (std::size_t i = 0; i < instance.num_arms(); ++i) {
        if (i == instance.best_arm()) continue;
        const double d = instance.gap(i) - dmin / 2.0;
        out = std::min(out, 2.0 * std::exp(root * d * d / (4.0 * sigma2)));
    }
    return out;
}

/// max over suboptimal i of sqrt(2 pi e) exp(n (Delta_i + Delta_min / 2)^2 / (2 sigma^2)).
inline double ttts_upper_bound(const BanditInstance& instance, double n) {
    detail::require_gaussian(instance);
    const double dmin = instance.min_pairwise_gap();
    if (!(dmin > 0.0)) throw domain_error("TTTS upper bound is undefined when the minimum gap is zero");
    const double sigma2 = instance.family().sigma() * instance.family().sigma();
    double out = 0.0;
    for (std::size_t i = 0; i < instance.num_arms(); ++i) {
        if (i == instance.best_arm()) continue;
        const double d = instance.gap(i) + dmin / 2.0;
        out = std::max(out, std::sqrt(2.0 * std::numbers::pi * std::numbers::e) * std::exp(n * d * d / (2.0 * sigma2)));
    }
    return out;
}

inline TttsBounds ttts_bound_curves(const BanditInstance& instance, double n) {
    TttsBounds out;
    out.lower = ttts_lower_bound(instance, n);
    const double dmin = instance.min_pairwise_gap();
    if (dmin > 0.0) {
        out.upper = ttts_upper_bound(instance, n);
        const double sigma2 = instance.family().sigma() * instance.family().sigma();
        out.upper_in_regime = n > 32.0 * sigma2 / (9.0 * dmin * dmin);
    }
    return out;
}

}  // namespace ttsprt
