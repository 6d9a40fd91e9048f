#pragma once

// Command-line front end. Each subcommand owns a CLI11 app whose flags can
// also come from a key = value file passed with --config; flags given on the
// command line win. CSV goes to --output (stdout when absent or "-"), the
// one-line summary to stderr.
//
// Exit codes: 0 ok, 2 usage/config/domain error, 3 every trial censored.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ttsprt/allocation.hpp"
#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"
#include "ttsprt/harness.hpp"
#include "ttsprt/thresholds.hpp"

namespace ttsprt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_censored = 3;

struct InstanceFlags {
    std::string family;
    double sigma = 1.0;
    std::vector<double> means;
};

inline void add_instance_flags(CLI::App& app, InstanceFlags& f, bool require_family = true) {
    auto* fam = app.add_option("--family", f.family, "reward family: gaussian, bernoulli, exponential")
                    ->check(CLI::IsMember({"gaussian", "bernoulli", "exponential"}));
    if (require_family) fam->required();
    app.add_option("--sigma", f.sigma, "gaussian noise level")->capture_default_str();
    app.add_option("--means", f.means, "comma-separated arm means")->delimiter(',');
}

inline RewardFamily make_family(const InstanceFlags& f) {
    if (f.family == "gaussian") return RewardFamily::gaussian(f.sigma);
    if (f.family == "bernoulli") return RewardFamily::bernoulli();
    if (f.family == "exponential") return RewardFamily::exponential();
    throw config_error("unknown family '" + f.family + "'");
}

inline BanditInstance make_instance(const InstanceFlags& f) {
    if (f.means.empty()) throw config_error("--means is required");
    return BanditInstance(make_family(f), f.means);
}

inline policy_kind make_policy(const std::string& id) {
    if (auto p = parse_policy(id)) return *p;
    for (const char* baseline : {"dkm", "lucb", "fw", "tas"}) {
        if (id == baseline) throw config_error("policy '" + id + "' not implemented; out of scope");
    }
    throw config_error("unknown policy '" + id + "'");
}

inline std::optional<threshold_kind> make_threshold_kind(const std::string& id) {
    if (id.empty()) return std::nullopt;
    if (id == "gaussian") return threshold_kind::gaussian;
    if (id == "exponential" || id == "exp") return threshold_kind::exponential_family;
    throw config_error("unknown threshold kind '" + id + "'");
}

// Writes through `body` to the named file, or to `out` for "" and "-".
template <class Body>
void emit(const std::string& path, std::ostream& out, Body&& body) {
    if (path.empty() || path == "-") {
        body(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw config_error("cannot open output file '" + path + "'");
    body(file);
    if (!file) throw config_error("failed writing '" + path + "'");
}

inline std::string join_reals(std::span<const double> xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += format_real(xs[i]);
    }
    return s;
}

struct ExperimentFlags {
    InstanceFlags instance;
    std::string policy = "ttsprt";
    double delta = 0.1;
    double beta = 0.5;
    std::uint64_t trials = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::uint64_t resample_cap = default_resample_cap;
    std::uint64_t horizon_cap = default_horizon_cap;
    std::uint64_t fixed_horizon = 0;
    std::string threshold;
    std::string output;
    std::string trials_output;
};

inline void add_experiment_flags(CLI::App& app, ExperimentFlags& f) {
    add_instance_flags(app, f.instance);
    app.add_option("--policy", f.policy, "ttsprt, ttsprt-gaussian, ttts, t3c, uniform")->capture_default_str();
    app.add_option("--delta", f.delta, "confidence parameter")->capture_default_str();
    app.add_option("--beta", f.beta, "leader probability")->capture_default_str();
    app.add_option("--trials", f.trials, "number of trials")->capture_default_str();
    app.add_option("--seed", f.seed, "base seed")->required();
    app.add_option("--threads", f.threads, "worker threads")->capture_default_str();
    app.add_option("--resample-cap", f.resample_cap, "TTTS posterior draws per round")->capture_default_str();
    app.add_option("--horizon-cap", f.horizon_cap, "rounds before a trial is censored")->capture_default_str();
    app.add_option("--fixed-horizon", f.fixed_horizon, "disable stopping and run this many rounds");
    app.add_option("--threshold", f.threshold, "override the threshold: gaussian or exponential");
    app.add_option("--output", f.output, "report CSV path");
    app.add_option("--trials-output", f.trials_output, "per-trial CSV path");
}

inline ExperimentConfig make_config(const ExperimentFlags& f) {
    ExperimentConfig cfg{make_instance(f.instance)};
    cfg.policy = make_policy(f.policy);
    cfg.delta = f.delta;
    cfg.beta = f.beta;
    cfg.trials = f.trials;
    cfg.base_seed = f.seed;
    cfg.threads = f.threads;
    cfg.resample_cap = f.resample_cap;
    cfg.horizon_cap = f.horizon_cap;
    if (f.fixed_horizon > 0) cfg.fixed_horizon = f.fixed_horizon;
    cfg.threshold = make_threshold_kind(f.threshold);
    cfg.validate();
    return cfg;
}

inline std::string summary_line(const AggregateReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "policy=%s family=%s beta=%.17g trials=%llu mean_tau=%.17g stderr_tau=%.17g median_tau=%.17g "
                  "error_rate=%.17g censored=%llu lower_bound=%.17g",
                  r.policy.c_str(), r.family.c_str(), r.beta, static_cast<unsigned long long>(r.trials), r.mean_tau,
                  r.stderr_tau, r.median_tau, r.error_rate, static_cast<unsigned long long>(r.censored),
                  r.lower_bound);
    return buf;
}

inline int cmd_allocation(const InstanceFlags& inst, double beta, std::optional<double> delta, std::ostream& out) {
    const BanditInstance instance = make_instance(inst);
    const auto r = solve_allocation(instance, beta);
    out << "weights=" << join_reals(r.weights) << '\n';
    out << "gamma=" << format_real(r.gamma) << '\n';
    out << "residual=" << format_real(r.residual) << '\n';
    out << "iterations=" << r.solver_iterations << '\n';
    if (delta) out << "lower_bound=" << format_real(lower_bound_samples(instance, beta, *delta)) << '\n';
    return exit_ok;
}

inline int run_allocation(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"beta-optimal allocation and complexity", "ttsprt allocation"};
    InstanceFlags inst;
    double beta = 0.5;
    std::optional<double> delta;
    app.set_config("--config");
    add_instance_flags(app, inst);
    app.get_option("--means")->required();
    app.add_option("--beta", beta, "leader proportion")->capture_default_str();
    app.add_option("--delta", delta, "also print log(1/delta) / Gamma");
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }
    return cmd_allocation(inst, beta, delta, out);
}

inline int run_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo experiment", "ttsprt run"};
    ExperimentFlags f;
    app.set_config("--config");
    add_experiment_flags(app, f);
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }
    const ExperimentConfig cfg = make_config(f);
    const auto records = run_trials(cfg);
    const auto report = aggregate(cfg, records);
    emit(f.output, out, [&](std::ostream& os) { write_report_csv(os, std::span(&report, 1)); });
    if (!f.trials_output.empty()) emit(f.trials_output, out, [&](std::ostream& os) { write_trials_csv(os, records); });
    err << summary_line(report) << '\n';
    return report.censored == report.trials ? exit_censored : exit_ok;
}

inline int run_sweep_beta(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"mean stopping time across beta values", "ttsprt sweep-beta"};
    ExperimentFlags f;
    std::vector<double> betas{0.3, 0.4, 0.5, 0.6, 0.7};
    app.set_config("--config");
    add_experiment_flags(app, f);
    app.add_option("--betas", betas, "comma-separated beta grid")->delimiter(',')->capture_default_str();
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }
    const ExperimentConfig cfg = make_config(f);
    const auto rows = sweep_beta(cfg, betas);
    emit(f.output, out, [&](std::ostream& os) { write_report_csv(os, rows); });
    bool all_censored = true;
    for (const auto& r : rows) {
        err << summary_line(r) << '\n';
        all_censored = all_censored && r.censored == r.trials;
    }
    return all_censored ? exit_censored : exit_ok;
}

inline int run_ttts_cost(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"posterior draws TTTS needs to find a challenger", "ttsprt ttts-cost"};
    InstanceFlags inst;
    inst.family = "gaussian";
    inst.means = {0.15, 0.0};
    std::vector<std::uint64_t> n_grid;
    std::vector<double> gaps;
    std::vector<double> weights;
    std::uint64_t draws = 1000;
    std::uint64_t seed = 0;
    std::uint64_t cap = default_resample_cap;
    unsigned threads = 1;
    std::string output;
    app.set_config("--config");
    add_instance_flags(app, inst, false);
    app.add_option("--n-grid", n_grid, "comma-separated rounds (default 100,200,...,2000)")->delimiter(',');
    app.add_option("--gaps", gaps, "rescale the instance so its smallest gap takes each value")->delimiter(',');
    app.add_option("--weights", weights, "history proportions (default omega*(0.5))")->delimiter(',');
    app.add_option("--draws", draws, "TTTS challenger searches per cell")->capture_default_str();
    app.add_option("--seed", seed, "base seed")->required();
    app.add_option("--resample-cap", cap, "posterior draws per search")->capture_default_str();
    app.add_option("--threads", threads, "worker threads")->capture_default_str();
    app.add_option("--output", output, "CSV path");
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }
    if (n_grid.empty()) {
        for (std::uint64_t n = 100; n <= 2000; n += 100) n_grid.push_back(n);
    }
    const BanditInstance base = make_instance(inst);
    std::vector<BanditInstance> instances;
    if (gaps.empty()) {
        instances.push_back(base);
    } else {
        const double scale_from = base.min_gap_to_best();
        const double top = base.mean(base.best_arm());
        for (double g : gaps) {
            if (!(g > 0.0)) throw config_error("every gap must be positive");
            std::vector<double> m(base.means().begin(), base.means().end());
            for (auto& x : m) x = top - (top - x) * g / scale_from;
            instances.emplace_back(base.family(), m);
        }
    }
    CostSweepOptions opts;
    opts.draws_per_n = draws;
    opts.base_seed = seed;
    opts.resample_cap = cap;
    opts.weights = weights;
    opts.threads = threads;
    std::vector<CostSweepRow> rows;
    for (const auto& i : instances) {
        const auto part = ttts_cost_sweep(i, n_grid, opts);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    emit(output, out, [&](std::ostream& os) { write_cost_csv(os, rows); });
    std::uint64_t censored = 0, total = 0;
    for (const auto& r : rows) {
        censored += r.censored;
        total += r.draws;
    }
    err << "cells=" << rows.size() << " draws=" << total << " censored=" << censored << '\n';
    return censored == total ? exit_censored : exit_ok;
}

inline int run_threshold(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"stopping threshold c_{n,delta}", "ttsprt threshold"};
    std::string kind;
    std::size_t arms = 2;
    double delta = 0.1;
    std::uint64_t n = 1;
    app.set_config("--config");
    app.add_option("--kind", kind, "gaussian or exponential")->required();
    app.add_option("--arms", arms, "number of arms K")->required();
    app.add_option("--delta", delta, "confidence parameter")->required();
    app.add_option("--n", n, "round")->required();
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }
    out << format_real(threshold(ThresholdSpec{*make_threshold_kind(kind), delta, arms}, n)) << '\n';
    return exit_ok;
}

inline void usage(std::ostream& os) {
    os << "usage: ttsprt <command> [options]\n"
          "commands:\n"
          "  allocation   beta-optimal proportions, complexity and lower bound\n"
          "  run          Monte Carlo experiment, report CSV\n"
          "  sweep-beta   one report row per beta\n"
          "  ttts-cost    TTTS challenger cost against its bound curves\n"
          "  threshold    print c_{n,delta}\n"
          "Every command accepts --config FILE with key = value lines; run <command> --help for flags.\n";
}

/// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (args.empty()) {
        usage(err);
        return exit_usage;
    }
    const std::string& cmd = args.front();
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (cmd == "allocation") return run_allocation(rest, out, err);
        if (cmd == "run") return run_run(rest, out, err);
        if (cmd == "sweep-beta") return run_sweep_beta(rest, out, err);
        if (cmd == "ttts-cost") return run_ttts_cost(rest, out, err);
        if (cmd == "threshold") return run_threshold(rest, out, err);
        if (cmd == "-h" || cmd == "--help" || cmd == "help") {
            usage(out);
            return exit_ok;
        }
        err << "error: unknown command '" << cmd << "'\n";
        usage(err);
        return exit_usage;
    } catch (const ttsprt::error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace ttsprt::cli
