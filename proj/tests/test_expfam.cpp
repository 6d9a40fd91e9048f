#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "properties.hpp"
#include "ttsprt/expfam.hpp"

using namespace ttsprt;

namespace {

std::vector<RewardFamily> all_families() {
    return {RewardFamily::gaussian(1.0), RewardFamily::bernoulli(), RewardFamily::exponential()};
}

}  // namespace

TEST(KlDivergence, GaussianUnitSigma) {
    EXPECT_DOUBLE_EQ(kl_divergence(RewardFamily::gaussian(1.0), 1.0, 0.0), 0.5);
}

TEST(KlDivergence, IdentityIsZero) {
    for (const auto& f : all_families()) {
        EXPECT_EQ(kl_divergence(f, 0.4, 0.4), 0.0) << f.name();
    }
}

TEST(KlDivergence, BernoulliMatchesDirectFormula) {
    // p log(p/q) + (1-p) log((1-p)/(1-q)) at p = 0.3, q = 0.21, 30-digit evaluation.
    EXPECT_NEAR(kl_divergence(RewardFamily::bernoulli(), 0.3, 0.21), 0.02233565588925596, 1e-15);
}

TEST(KlDivergence, BernoulliBoundary) {
    const auto f = RewardFamily::bernoulli();
    EXPECT_TRUE(std::isinf(kl_divergence(f, 0.5, 0.0)));
    EXPECT_TRUE(std::isinf(kl_divergence(f, 0.5, 1.0)));
    EXPECT_EQ(kl_divergence(f, 0.0, 0.0), 0.0);
    // 0 log 0 = 0: d(1 || q) = -log q.
    EXPECT_NEAR(kl_divergence(f, 1.0, 0.25), -std::log(0.25), 1e-15);
    EXPECT_GT(infinity, kl_divergence(f, 0.99, 0.01));
}

TEST(KlDivergence, RejectsOutOfRange) {
    EXPECT_THROW(kl_divergence(RewardFamily::bernoulli(), 1.2, 0.5), invalid_mean_error);
    EXPECT_THROW(kl_divergence(RewardFamily::exponential(), -0.1, 0.5), invalid_mean_error);
    EXPECT_THROW(kl_divergence(RewardFamily::gaussian(1.0), std::nan(""), 0.5), invalid_mean_error);
}

TEST(KlDivergence, NonnegativeWithEqualityOnlyOnDiagonal) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.01, 0.99);
    for (const auto& f : all_families()) {
        for (int t = 0; t < 2000; ++t) {
            double a = unit(rng), b = unit(rng);
            if (f.kind() == family_kind::gaussian) {
                a = 10 * a - 5;
                b = 10 * b - 5;
            } else if (f.kind() == family_kind::exponential) {
                a *= 5;
                b *= 5;
            }
            const double d = kl_divergence(f, a, b);
            if (a == b) {
                EXPECT_EQ(d, 0.0);
            } else {
                EXPECT_GT(d, 0.0) << f.name() << " " << a << " " << b;
            }
        }
    }
}

TEST(KlDivergence, MatchesQuadratureOracle) {
    const std::vector<std::pair<double, double>> bern{{0.3, 0.21}, {0.8, 0.4}, {0.05, 0.5}};
    const std::vector<std::pair<double, double>> gauss{{1.0, 0.0}, {-2.0, 0.5}, {3.0, 3.3}};
    const std::vector<std::pair<double, double>> expo{{0.9, 0.7}, {0.1, 0.5}, {2.0, 0.3}};
    for (auto [a, b] : bern) {
        const auto f = RewardFamily::bernoulli();
        EXPECT_NEAR(kl_divergence(f, a, b), oracle::kl_quadrature(f, a, b), 1e-6);
    }
    for (auto [a, b] : gauss) {
        const auto f = RewardFamily::gaussian(0.7);
        EXPECT_NEAR(kl_divergence(f, a, b), oracle::kl_quadrature(f, a, b), 1e-6);
    }
    for (auto [a, b] : expo) {
        const auto f = RewardFamily::exponential();
        EXPECT_NEAR(kl_divergence(f, a, b), oracle::kl_quadrature(f, a, b), 1e-6);
    }
}

TEST(KlDivergence, MatchesNaturalParameterForm) {
    // d(mu_i || mu_j) = b(theta_j) - b(theta_i) - mu_i (theta_j - theta_i)
    for (const auto& f : all_families()) {
        for (auto [a, b] : std::vector<std::pair<double, double>>{{0.3, 0.6}, {0.7, 0.2}, {0.45, 0.5}}) {
            const double ti = natural_param(f, a), tj = natural_param(f, b);
            const double generic = log_partition(f, tj) - log_partition(f, ti) - a * (tj - ti);
            EXPECT_NEAR(kl_divergence(f, a, b), generic, 1e-12) << f.name();
        }
    }
}

TEST(NaturalParam, KnownPoints) {
    EXPECT_DOUBLE_EQ(natural_param(RewardFamily::gaussian(1.0), 2.0), 2.0);
    EXPECT_DOUBLE_EQ(natural_param(RewardFamily::bernoulli(), 0.5), 0.0);
    EXPECT_DOUBLE_EQ(natural_param(RewardFamily::exponential(), 0.5), -2.0);
    EXPECT_THROW(natural_param(RewardFamily::bernoulli(), 1.0), invalid_mean_error);
}

TEST(NaturalParam, RoundTrip) {
    const auto f = RewardFamily::bernoulli();
    EXPECT_NEAR(mean_from_natural(f, natural_param(f, 0.3)), 0.3, 1e-12);
    for (const auto& g : all_families()) {
        for (double mu : {0.05, 0.3, 0.77}) {
            EXPECT_NEAR(mean_from_natural(g, natural_param(g, mu)), mu, 1e-12) << g.name();
        }
    }
}

TEST(SampleReward, RejectsBoundaryMean) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(sample_reward(RewardFamily::bernoulli(), 1.0, rng), invalid_mean_error);
    EXPECT_THROW(sample_reward(RewardFamily::exponential(), 0.0, rng), invalid_mean_error);
}

TEST(SampleReward, BernoulliMeanConverges) {
    std::mt19937_64 rng(2);
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) sum += sample_reward(RewardFamily::bernoulli(), 0.3, rng);
    EXPECT_NEAR(sum / 1e6, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / 1e6));
}

TEST(SampleReward, GaussianMeanConverges) {
    std::mt19937_64 rng(3);
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) sum += sample_reward(RewardFamily::gaussian(1.0), 5.0, rng);
    EXPECT_NEAR(sum / 1e6, 5.0, 0.004);
}

TEST(SampleReward, ExponentialMeanConverges) {
    std::mt19937_64 rng(4);
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) sum += sample_reward(RewardFamily::exponential(), 0.7, rng);
    EXPECT_NEAR(sum / 1e6, 0.7, 4.0 * 0.7 / 1e3);
}

TEST(RewardFamily, RejectsNonPositiveSigma) {
    EXPECT_THROW(RewardFamily::gaussian(0.0), domain_error);
    EXPECT_THROW(RewardFamily::gaussian(-1.0), domain_error);
}

TEST(BanditInstance, GapsAndBestArm) {
    BanditInstance inst(RewardFamily::gaussian(1.0), {5, 4.5, 1, 1, 1});
    EXPECT_EQ(inst.best_arm(), 0u);
    EXPECT_DOUBLE_EQ(inst.gap(1), 0.5);
    EXPECT_DOUBLE_EQ(inst.min_gap_to_best(), 0.5);
    EXPECT_DOUBLE_EQ(inst.min_pairwise_gap(), 0.0);
    EXPECT_DOUBLE_EQ(inst.max_gap(), 4.0);
}

TEST(BanditInstance, RejectsTiedBestAndInvalidMeans) {
    EXPECT_THROW(BanditInstance(RewardFamily::gaussian(1.0), {1.0, 1.0, 0.5}), non_unique_best_error);
    EXPECT_THROW(BanditInstance(RewardFamily::bernoulli(), {1.0, 0.5}), invalid_mean_error);
    EXPECT_THROW(BanditInstance(RewardFamily::bernoulli(), {0.5}), domain_error);
}

TEST(Chernoff, TailsWithinExponentialRate) {
    for (const auto& c : props::chernoff_cells(100000, 41)) {
        EXPECT_TRUE(c.ok) << c.family << " n=" << c.n << " zeta=" << c.zeta << (c.upper ? " upper" : " lower")
                          << " freq=" << c.frequency << " bound=" << c.bound;
        EXPECT_GT(c.bound, 0.0);
    }
}
