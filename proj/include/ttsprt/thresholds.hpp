#pragma once

// Stopping thresholds c_{n,delta}.
//
// Exponential family:  2 C_exp(log((K-1)/delta)) + 6 log(log(n/2) + 1)
// Gaussian:            4 log(4 + log n) + 2 g((log(K-1) - log delta) / 2),  g(x) = x + log x
//
// C_exp(x) = 2 htilde_{3/2}((h^{-1}(1+x) + log(2 zeta(2))) / 2), where
// h(u) = u - log u on [1, inf) and htilde_z is the piecewise map below.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

#include "ttsprt/errors.hpp"

namespace ttsprt {

inline constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;

inline double h(double u) {
    if (!(u >= 1.0)) throw domain_error("h(u) is defined for u >= 1");
    return u - std::log(u);
}

/// Inverse of h on the branch u >= 1. Safeguarded Newton, bisection fallback.
inline double h_inverse(double x) {
    if (!(x >= 1.0)) throw domain_error("h_inverse(x) is defined for x >= 1");
    if (x == 1.0) return 1.0;
    if (std::isinf(x)) return x;
    // u - log u >= u / 2, so the root lies in [1, 2x].
    double lo = 1.0;
    double hi = 2.0 * x;
    double u = std::max(x, 1.0 + x / 2.0);
    for (int it = 0; it < 200; ++it) {
        const double f = u - std::log(u) - x;
        if (f > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        if (std::abs(f) <= 1e-12 * x || hi - lo <= 1e-15 * hi) break;
        const double slope = 1.0 - 1.0 / u;
        double next = slope > 0.0 ? u - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

/// htilde_z(x) for z in [1, e].
inline double h_tilde(double z, double x) {
    if (!(z >= 1.0 && z <= std::numbers::e)) throw domain_error("h_tilde requires z in [1, e]");
    if (z == 1.0) return std::numeric_limits<double>::infinity();
    const double log_z = std::log(z);
    const double branch = 1.0 / log_z;
    if (branch >= 1.0 && x >= h(branch)) {
        const double u = h_inverse(x);
        return std::exp(1.0 / u) * u;
    }
    return z * (x - std::log(log_z));
}

inline double c_exp(double x) {
    if (!(x >= 0.0)) throw domain_error("C_exp is defined for x >= 0");
    return 2.0 * h_tilde(1.5, (h_inverse(1.0 + x) + std::log(2.0 * zeta2)) / 2.0);
}

enum class threshold_kind { exponential_family, gaussian };

inline std::string_view to_string(threshold_kind kind) {
    return kind == threshold_kind::gaussian ? "gaussian" : "exponential";
}

struct ThresholdSpec {
    threshold_kind kind = threshold_kind::exponential_family;
    double delta = 0.1;
    std::size_t num_arms = 2;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw domain_error("delta must lie in the open interval (0, 1)");
        if (num_arms < 2) throw domain_error("threshold needs at least two arms");
    }
};

/// Threshold c_{n,delta} at round n >= 1.
inline double threshold(const ThresholdSpec& spec, std::uint64_t n) {
    spec.validate();
    if (n < 1) throw domain_error("threshold is defined for n >= 1");
    const double k_minus_1 = static_cast<double>(spec.num_arms - 1);
    const double rounds = static_cast<double>(n);
    if (spec.kind == threshold_kind::exponential_family) {
        // log(n/2) is negative for n < 2; floored at zero.
        const double loglog = std::log(std::max(std::log(rounds / 2.0), 0.0) + 1.0);
        return 2.0 * c_exp(std::log(k_minus_1 / spec.delta)) + 6.0 * loglog;
    }
    const double arg = (std::log(k_minus_1) - std::log(spec.delta)) / 2.0;
    if (!(arg > 0.0)) throw domain_error("gaussian threshold requires log((K-1)/delta) > 0");
    return 4.0 * std::log(4.0 + std::log(rounds)) + 2.0 * (arg + std::log(arg));
}

/// Precomputes the n-independent part so the per-round cost is one or two logs.
class ThresholdSchedule {
public:
    explicit ThresholdSchedule(const ThresholdSpec& spec) : spec_(spec) {
        spec_.validate();
        const double k_minus_1 = static_cast<double>(spec.num_arms - 1);
        if (spec.kind == threshold_kind::exponential_family) {
            constant_ = 2.0 * c_exp(std::log(k_minus_1 / spec.delta));
        } else {
            const double arg = (std::log(k_minus_1) - std::log(spec.delta)) / 2.0;
            if (!(arg > 0.0)) throw domain_error("gaussian threshold requires log((K-1)/delta) > 0");
            constant_ = 2.0 * (arg + std::log(arg));
        }
    }

    const ThresholdSpec& spec() const noexcept { return spec_; }

    double operator()(std::uint64_t n) const {
        const double rounds = static_cast<double>(n);
        if (spec_.kind == threshold_kind::exponential_family) {
            return constant_ + 6.0 * std::log(std::max(std::log(rounds / 2.0), 0.0) + 1.0);
        }
        return constant_ + 4.0 * std::log(4.0 + std::log(rounds));
    }

private:
    ThresholdSpec spec_;
    double constant_ = 0.0;
};

}  // namespace ttsprt
