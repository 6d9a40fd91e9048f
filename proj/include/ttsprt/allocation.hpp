#pragma once

// beta-optimal sampling proportions and the problem complexity Gamma_mu(beta).
//
// With the best arm's share fixed at beta, the cost of confusing arm i with
// the best arm,
//
//   C_i(w) = beta * d(mu_star || m) + w * d(mu_i || m),
//   m = (beta * mu_star + w * mu_i) / (beta + w),
//
// is strictly increasing in w. At the maximin optimum all C_i are equal, so
// the solver bisects on the common value c and inverts each C_i by an inner
// bisection until the suboptimal shares sum to 1 - beta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ttsprt/errors.hpp"
#include "ttsprt/expfam.hpp"

namespace ttsprt {

struct AllocationResult {
    double beta = 0.5;
    std::vector<double> weights;
    double gamma = 0.0;
    int solver_iterations = 0;
    // max |C_i - C_j| over suboptimal arms at the returned weights.
    double residual = 0.0;
};

struct AllocationOptions {
    double mass_tolerance = 1e-10;
    int max_outer_iterations = 200;
    int inner_iterations = 200;
};

/// Weighted transportation cost between the best arm and arm i.
inline double transport_cost(const RewardFamily& family, double mu_star, double mu_i, double w_star, double w_i) {
    if (!(mu_star > mu_i)) throw ordering_error("transport cost requires mu_star > mu_i");
    if (!(w_star > 0.0) || !(w_i > 0.0)) throw domain_error("transport cost requires positive weights");
    const double m = (w_star * mu_star + w_i * mu_i) / (w_star + w_i);
    return w_star * kl_divergence(family, mu_star, m) + w_i * kl_divergence(family, mu_i, m);
}

namespace detail {

// Smallest w in (0, hi] with C_i(w) >= c, by bisection.
inline double invert_cost(const RewardFamily& family, double mu_star, double mu_i, double beta, double c, double hi,
                          int iterations) {
    double lo = 0.0;
    if (transport_cost(family, mu_star, mu_i, beta, hi) <= c) return hi;
    for (int it = 0; it < iterations && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (transport_cost(family, mu_star, mu_i, beta, mid) < c) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Solves for omega*(beta) and Gamma_mu(beta).
inline AllocationResult solve_allocation(const BanditInstance& instance, double beta, AllocationOptions opts = {}) {
    if (!(beta > 0.0 && beta < 1.0)) throw domain_error("beta must lie in the open interval (0, 1)");
    const auto& family = instance.family();
    const std::size_t k = instance.num_arms();
    const std::size_t best = instance.best_arm();
    const double mu_star = instance.mean(best);
    const double free_mass = 1.0 - beta;

    AllocationResult out;
    out.beta = beta;
    out.weights.assign(k, 0.0);
    out.weights[best] = beta;

    // Each arm reaches at most C_i(1 - beta); the common level cannot exceed the smallest.
    double c_hi = infinity;
    for (std::size_t i = 0; i < k; ++i) {
        if (i != best) c_hi = std::min(c_hi, transport_cost(family, mu_star, instance.mean(i), beta, free_mass));
    }
    double c_lo = 0.0;

    auto mass_at = [&](double c, std::vector<double>& w) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (i == best) continue;
            w[i] = detail::invert_cost(family, mu_star, instance.mean(i), beta, c, free_mass, opts.inner_iterations);
            total += w[i];
        }
        return total;
    };

    std::vector<double> w = out.weights;
    double c = c_hi;
    double mass = mass_at(c, w);
    int it = 0;
    if (k > 2) {
        bool converged = false;
        for (; it < opts.max_outer_iterations; ++it) {
            c = 0.5 * (c_lo + c_hi);
            if (c <= c_lo || c >= c_hi) break;
            mass = mass_at(c, w);
            if (std::abs(mass - free_mass) <= opts.mass_tolerance) {
                converged = true;
                break;
            }
            if (mass < free_mass) {
                c_lo = c;
            } else {
                c_hi = c;
            }
        }
        if (!converged && std::abs(mass - free_mass) > opts.mass_tolerance) {
            throw convergence_error("allocation solver did not reach the mass tolerance");
        }
    }
    out.weights = w;
    out.weights[best] = beta;
    out.solver_iterations = it;

    double c_min = infinity;
    double c_max = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (i == best) continue;
        const double ci = transport_cost(family, mu_star, instance.mean(i), beta, out.weights[i]);
        c_min = std::min(c_min, ci);
        c_max = std::max(c_max, ci);
    }
    out.gamma = c_min;
    out.residual = c_max - c_min;
    return out;
}

/// Maximin objective min_i C_i(beta, w_i) at an arbitrary feasible allocation.
inline double allocation_objective(const BanditInstance& instance, std::span<const double> weights) {
    const std::size_t best = instance.best_arm();
    double value = infinity;
    for (std::size_t i = 0; i < instance.num_arms(); ++i) {
        if (i == best) continue;
        if (weights[i] <= 0.0) return 0.0;
        value = std::min(value, transport_cost(instance.family(), instance.mean(best), instance.mean(i),
                                               weights[best], weights[i]));
    }
    return value;
}

/// Asymptotic lower bound log(1/delta) / Gamma_mu(beta) on the expected stopping time.
inline double lower_bound_samples(const BanditInstance& instance, double beta, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw domain_error("delta must lie in (0, 1]");
    const auto alloc = solve_allocation(instance, beta);
    return std::log(1.0 / delta) / alloc.gamma;
}

}  // namespace ttsprt
