#pragma once

// Monte Carlo experiment engine.
//
// A trial is a pure function of (config, trial index): its reward, coin and
// posterior streams are all derived from the base seed and the index, so
// trials can run on any number of threads and aggregate to the same report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ttsprt/algorithms.hpp"
#include "ttsprt/allocation.hpp"
#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"
#include "ttsprt/rng.hpp"
#include "ttsprt/stats.hpp"
#include "ttsprt/thresholds.hpp"

namespace ttsprt {

inline constexpr std::uint64_t default_horizon_cap = 10'000'000;

struct ExperimentConfig {
    explicit ExperimentConfig(BanditInstance inst) : instance(std::move(inst)) {}

    BanditInstance instance;
    policy_kind policy = policy_kind::ttsprt;
    double delta = 0.1;
    double beta = 0.5;
    std::uint64_t trials = 1;
    std::uint64_t base_seed = 0;
    std::uint64_t resample_cap = default_resample_cap;
    // Hard cap on rounds; trials reaching it are censored.
    std::uint64_t horizon_cap = default_horizon_cap;
    // When set, stopping is disabled and every trial runs exactly this many rounds.
    std::optional<std::uint64_t> fixed_horizon;
    // Defaults to the gaussian threshold for gaussian rewards, the
    // exponential-family threshold otherwise. The gaussian threshold carries
    // no delta-PAC guarantee for other families.
    std::optional<threshold_kind> threshold;
    // Record T_{n,.} every this many rounds (0 disables the trace).
    std::uint64_t trace_every = 0;
    unsigned threads = 1;

    threshold_kind effective_threshold() const {
        if (threshold) return *threshold;
        return instance.family().kind() == family_kind::gaussian ? threshold_kind::gaussian
                                                                 : threshold_kind::exponential_family;
    }

    void validate() const {
        if (trials < 1) throw config_error("trial count must be at least 1");
        if (!(delta > 0.0 && delta < 1.0)) throw config_error("delta must lie in the open interval (0, 1)");
        if (!(beta > 0.0 && beta < 1.0)) throw config_error("beta must lie in the open interval (0, 1)");
        if (resample_cap < 1) throw config_error("resample cap must be at least 1");
        if (horizon_cap < instance.num_arms()) throw config_error("horizon cap must cover the initial pass");
        if (fixed_horizon && *fixed_horizon < instance.num_arms()) {
            throw config_error("fixed horizon must cover the initial pass");
        }
        if (policy == policy_kind::ttsprt_gaussian && instance.family().kind() != family_kind::gaussian) {
            throw config_error("ttsprt-gaussian requires the gaussian family");
        }
    }
};

struct TraceSample {
    std::uint64_t round = 0;
    std::vector<std::uint64_t> counts;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct TrialRecord {
    std::uint64_t trial_index = 0;
    std::uint64_t tau = 0;
    std::size_t recommended = 0;
    bool correct = false;
    // Hit the horizon cap before stopping.
    bool censored = false;
    std::vector<std::uint64_t> counts;
    // Posterior draws spent on challengers (TTTS).
    std::uint64_t total_resamples = 0;
    std::uint64_t max_resamples = 0;
    // Rounds where the TTTS resample cap bound.
    std::uint64_t censored_resample_rounds = 0;
    std::vector<TraceSample> trace;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
    config.validate();
    const auto& instance = config.instance;
    const auto& family = instance.family();
    const std::size_t k = instance.num_arms();

    rng_type rewards = make_stream(config.base_seed, trial_index, stream_id::rewards);
    PolicyState state(k, config.beta, make_stream(config.base_seed, trial_index, stream_id::coin),
                      make_stream(config.base_seed, trial_index, stream_id::posterior), config.resample_cap);
    Policy policy(config.policy, family, std::move(state));
    const ThresholdSchedule schedule(ThresholdSpec{config.effective_threshold(), config.delta, k});

    TrialRecord rec;
    rec.trial_index = trial_index;
    const std::uint64_t cap = config.fixed_horizon ? *config.fixed_horizon : config.horizon_cap;
    bool stopped = false;
    while (policy.state().stats.rounds() < cap) {
        const std::size_t arm = policy.select();
        const auto& st = policy.state();
        rec.total_resamples += st.last_resample_count;
        rec.max_resamples = std::max(rec.max_resamples, st.last_resample_count);
        if (st.last_resample_censored) ++rec.censored_resample_rounds;
        policy.observe(arm, sample_reward(family, instance.mean(arm), rewards));

        const std::uint64_t n = policy.state().stats.rounds();
        if (config.trace_every > 0 && n % config.trace_every == 0) {
            const auto c = policy.state().stats.counts();
            rec.trace.push_back({n, std::vector<std::uint64_t>(c.begin(), c.end())});
        }
        if (config.fixed_horizon) continue;
        const StopCheck check = policy.check_stop(schedule);
        if (check.stopped) {
            stopped = true;
            rec.recommended = check.recommendation;
            break;
        }
    }
    const auto& stats = policy.state().stats;
    rec.tau = stats.rounds();
    rec.counts.assign(stats.counts().begin(), stats.counts().end());
    if (!stopped) {
        rec.censored = !config.fixed_horizon.has_value();
        rec.recommended = empirical_leader(stats);
    }
    rec.correct = rec.recommended == instance.best_arm();
    return rec;
}

/// Runs `count` jobs on up to `threads` workers; job i writes slot i only.
template <class Job>
void parallel_for(std::uint64_t count, unsigned threads, Job&& job) {
    threads = std::max(1u, threads);
    if (threads == 1 || count <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::vector<TrialRecord> run_trials(const ExperimentConfig& config) {
    config.validate();
    std::vector<TrialRecord> records(config.trials);
    parallel_for(config.trials, config.threads, [&](std::uint64_t i) { records[i] = run_trial(config, i); });
    return records;
}

struct AggregateReport {
    std::string policy;
    std::string family;
    std::size_t num_arms = 0;
    double delta = 0.0;
    double beta = 0.0;
    std::uint64_t trials = 0;
    double mean_tau = 0.0;
    double stderr_tau = 0.0;
    double median_tau = 0.0;
    double q10_tau = 0.0;
    double q25_tau = 0.0;
    double q75_tau = 0.0;
    double q90_tau = 0.0;
    double min_tau = 0.0;
    double max_tau = 0.0;
    double error_rate = 0.0;
    double error_stderr = 0.0;
    std::uint64_t censored = 0;
    std::uint64_t censored_resample_rounds = 0;
    double mean_resamples_per_round = 0.0;
    // Mean of T_{tau,i} / tau across trials.
    std::vector<double> mean_allocation;
    double gamma = 0.0;
    // log(1/delta) / Gamma_mu(beta).
    double lower_bound = 0.0;
};

/// Linear-interpolation quantile of sorted data (q in [0, 1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Order-independent summary of a set of trials (records are reduced in index order).
inline AggregateReport aggregate(const ExperimentConfig& config, std::span<const TrialRecord> records) {
    AggregateReport rep;
    rep.policy = std::string(to_string(config.policy));
    rep.family = std::string(config.instance.family().name());
    rep.num_arms = config.instance.num_arms();
    rep.delta = config.delta;
    rep.beta = config.beta;
    rep.trials = records.size();
    rep.mean_allocation.assign(rep.num_arms, 0.0);
    if (records.empty()) return rep;

    std::vector<double> taus;
    taus.reserve(records.size());
    double sum = 0.0;
    double errors = 0.0;
    double resamples = 0.0;
    double rounds = 0.0;
    for (const auto& r : records) {
        const double tau = static_cast<double>(r.tau);
        taus.push_back(tau);
        sum += tau;
        if (!r.correct) errors += 1.0;
        if (r.censored) ++rep.censored;
        rep.censored_resample_rounds += r.censored_resample_rounds;
        resamples += static_cast<double>(r.total_resamples);
        rounds += tau;
        for (std::size_t i = 0; i < rep.num_arms; ++i) {
            rep.mean_allocation[i] += static_cast<double>(r.counts[i]) / tau;
        }
    }
    const double m = static_cast<double>(records.size());
    rep.mean_tau = sum / m;
    double ss = 0.0;
    for (double t : taus) ss += (t - rep.mean_tau) * (t - rep.mean_tau);
    rep.stderr_tau = records.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    std::sort(taus.begin(), taus.end());
    rep.min_tau = taus.front();
    rep.max_tau = taus.back();
    rep.q10_tau = quantile_sorted(taus, 0.10);
    rep.q25_tau = quantile_sorted(taus, 0.25);
    rep.median_tau = quantile_sorted(taus, 0.50);
    rep.q75_tau = quantile_sorted(taus, 0.75);
    rep.q90_tau = quantile_sorted(taus, 0.90);
    rep.error_rate = errors / m;
    rep.error_stderr = std::sqrt(rep.error_rate * (1.0 - rep.error_rate) / m);
    rep.mean_resamples_per_round = rounds > 0.0 ? resamples / rounds : 0.0;
    for (auto& a : rep.mean_allocation) a /= m;

    const auto alloc = solve_allocation(config.instance, config.beta);
    rep.gamma = alloc.gamma;
    rep.lower_bound = std::log(1.0 / config.delta) / alloc.gamma;
    return rep;
}

inline AggregateReport run_experiment(const ExperimentConfig& config) {
    const auto records = run_trials(config);
    return aggregate(config, records);
}

/// One report per beta; instance, seeds and every other setting are shared.
inline std::vector<AggregateReport> sweep_beta(const ExperimentConfig& config, std::span<const double> betas) {
    std::vector<AggregateReport> rows;
    rows.reserve(betas.size());
    for (double beta : betas) {
        if (!(beta > 0.0 && beta < 1.0)) throw config_error("every beta must lie in the open interval (0, 1)");
        ExperimentConfig c = config;
        c.beta = beta;
        rows.push_back(run_experiment(c));
    }
    return rows;
}

struct CostSweepRow {
    double n = 0.0;
    // Smallest gap to the best arm of the instance the cell was run on.
    double gap = 0.0;
    std::uint64_t draws = 0;
    double mean_samples = 0.0;
    double stderr_samples = 0.0;
    double lower_bound = 0.0;
    std::optional<double> upper_bound;
    bool upper_in_regime = false;
    std::uint64_t censored = 0;
};

struct CostSweepOptions {
    std::uint64_t draws_per_n = 1000;
    std::uint64_t base_seed = 0;
    std::uint64_t resample_cap = default_resample_cap;
    // Sampling proportions of the synthetic history; omega*(0.5) when empty.
    std::vector<double> weights;
    unsigned threads = 1;
};

/// Idealized converged history: T_i = max(1, round(n w_i)) and empirical means equal to the true means.
inline SufficientStats converged_history(const BanditInstance& instance, std::span<const double> weights,
                                         std::uint64_t n) {
    SufficientStats stats(instance.num_arms());
    for (std::size_t i = 0; i < instance.num_arms(); ++i) {
        const auto t = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * weights[i]));
        stats.set_arm(i, std::max<std::uint64_t>(1, t), instance.mean(i));
    }
    return stats;
}

/// Empirical mean number of posterior draws TTTS needs to find a challenger,
/// per n, next to the lower and upper bound curves. Censored draws enter the
/// mean at the cap and are counted.
inline std::vector<CostSweepRow> ttts_cost_sweep(const BanditInstance& instance, std::span<const std::uint64_t> n_grid,
                                                 const CostSweepOptions& opts) {
    if (instance.family().kind() != family_kind::gaussian) {
        throw config_error("ttts cost sweep requires the gaussian family");
    }
    if (opts.draws_per_n < 2) throw config_error("draws per n must be at least 2");
    std::vector<double> weights = opts.weights;
    if (weights.empty()) weights = solve_allocation(instance, 0.5).weights;
    if (weights.size() != instance.num_arms()) throw config_error("weights must have one entry per arm");

    std::vector<CostSweepRow> rows(n_grid.size());
    parallel_for(n_grid.size(), opts.threads, [&](std::uint64_t cell) {
        const std::uint64_t n = n_grid[cell];
        PolicyState state(instance.num_arms(), 0.5, make_stream(opts.base_seed, cell, stream_id::coin),
                          make_stream(opts.base_seed, cell, stream_id::posterior), opts.resample_cap);
        state.stats = converged_history(instance, weights, n);
        CostSweepRow row;
        row.n = static_cast<double>(n);
        row.gap = instance.min_gap_to_best();
        row.draws = opts.draws_per_n;
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::uint64_t d = 0; d < opts.draws_per_n; ++d) {
            const auto choice = ttts_select(state, instance.family());
            const double c = static_cast<double>(choice.resample_count);
            sum += c;
            sumsq += c * c;
            if (choice.censored) ++row.censored;
        }
        const double m = static_cast<double>(opts.draws_per_n);
        row.mean_samples = sum / m;
        const double var = std::max(0.0, (sumsq - m * row.mean_samples * row.mean_samples) / (m - 1.0));
        row.stderr_samples = std::sqrt(var / m);
        const auto bounds = ttts_bound_curves(instance, row.n);
        row.lower_bound = bounds.lower;
        row.upper_bound = bounds.upper;
        row.upper_in_regime = bounds.upper_in_regime;
        rows[cell] = row;
    });
    return rows;
}

// ---------------------------------------------------------------------------
// CSV output. Reals use 17 significant digits.

inline std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_report_csv(std::ostream& os, std::span<const AggregateReport> rows) {
    std::size_t k = 0;
    for (const auto& r : rows) k = std::max(k, r.num_arms);
    os << "policy,family,num_arms,delta,beta,trials,mean_tau,stderr_tau,median_tau,q10_tau,q25_tau,q75_tau,"
          "q90_tau,min_tau,max_tau,error_rate,error_stderr,censored,censored_resample_rounds,"
          "mean_resamples_per_round,gamma,lower_bound";
    for (std::size_t i = 0; i < k; ++i) os << ",alloc_" << i;
    os << '\n';
    for (const auto& r : rows) {
        os << r.policy << ',' << r.family << ',' << r.num_arms << ',' << format_real(r.delta) << ','
           << format_real(r.beta) << ',' << r.trials << ',' << format_real(r.mean_tau) << ','
           << format_real(r.stderr_tau) << ',' << format_real(r.median_tau) << ',' << format_real(r.q10_tau) << ','
           << format_real(r.q25_tau) << ',' << format_real(r.q75_tau) << ',' << format_real(r.q90_tau) << ','
           << format_real(r.min_tau) << ',' << format_real(r.max_tau) << ',' << format_real(r.error_rate) << ','
           << format_real(r.error_stderr) << ',' << r.censored << ',' << r.censored_resample_rounds << ','
           << format_real(r.mean_resamples_per_round) << ',' << format_real(r.gamma) << ','
           << format_real(r.lower_bound);
        for (std::size_t i = 0; i < k; ++i) {
            os << ',' << (i < r.mean_allocation.size() ? format_real(r.mean_allocation[i]) : std::string());
        }
        os << '\n';
    }
}

inline void write_trials_csv(std::ostream& os, std::span<const TrialRecord> records) {
    std::size_t k = records.empty() ? 0 : records.front().counts.size();
    os << "trial,tau,recommended,correct,censored,total_resamples,max_resamples,censored_resample_rounds";
    for (std::size_t i = 0; i < k; ++i) os << ",count_" << i;
    os << '\n';
    for (const auto& r : records) {
        os << r.trial_index << ',' << r.tau << ',' << r.recommended << ',' << (r.correct ? 1 : 0) << ','
           << (r.censored ? 1 : 0) << ',' << r.total_resamples << ',' << r.max_resamples << ','
           << r.censored_resample_rounds;
        for (auto c : r.counts) os << ',' << c;
        os << '\n';
    }
}

inline void write_cost_csv(std::ostream& os, std::span<const CostSweepRow> rows) {
    os << "n,gap,draws,mean_samples,stderr_samples,lower_bound,upper_bound,upper_in_regime,censored\n";
    for (const auto& r : rows) {
        os << format_real(r.n) << ',' << format_real(r.gap) << ',' << r.draws << ',' << format_real(r.mean_samples)
           << ',' << format_real(r.stderr_samples) << ',' << format_real(r.lower_bound) << ','
           << (r.upper_bound ? format_real(*r.upper_bound) : std::string()) << ',' << (r.upper_in_regime ? 1 : 0)
           << ',' << r.censored << '\n';
    }
}

}  // namespace ttsprt
