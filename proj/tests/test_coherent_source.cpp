// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "decoyattack/coherent_source.hpp"

using namespace decoyattack;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(SourceConfig, RejectsInvalidIntensities) {
    EXPECT_THROW(SourceConfig(0.1, 0.5), std::invalid_argument);
    EXPECT_THROW(SourceConfig(0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(SourceConfig(0.5, -0.1), std::invalid_argument);
    EXPECT_THROW(SourceConfig(NAN, 0.1), std::invalid_argument);
    EXPECT_NO_THROW(SourceConfig(0.5, 0.0));
}

TEST(SourceConfig, ReducesPhases) {
    const SourceConfig cfg(0.5, 0.1, 5 * pi, -pi / 2);
    EXPECT_NEAR(cfg.theta_s(), pi, 1e-12);
    EXPECT_NEAR(cfg.theta_d(), 1.5 * pi, 1e-12);
    EXPECT_GE(cfg.theta_s(), 0.0);
    EXPECT_LT(cfg.theta_d(), 2 * pi);
}

TEST(UsdProbabilities, ReferenceIntensities) {
    const SourceConfig cfg(0.5, 0.1);
    // 3.75% and 1.87% as quoted for mu = 0.5, nu = 0.1.
    EXPECT_NEAR(usd_success_optimal(cfg), 0.0375, 5e-5);
    EXPECT_NEAR(1.0 - failure_probability(cfg), 0.0375, 5e-5);
    EXPECT_NEAR(usd_success_linear_optics(cfg), 0.0187, 5e-5);
    // Exact values from 30-digit evaluation.
    EXPECT_NEAR(usd_success_optimal(cfg), 0.0374763109518697, 1e-15);
    EXPECT_NEAR(usd_success_linear_optics(cfg), 0.0187381554759348, 1e-15);
}

TEST(UsdProbabilities, LinearOpticsIsHalfOptimalAtZeroPhase) {
    const SourceConfig cfg(0.5, 0.1);
    EXPECT_DOUBLE_EQ(usd_success_linear_optics(cfg), usd_success_optimal(cfg) / 2.0);
}

TEST(UsdProbabilities, PiRelativePhase) {
    const SourceConfig cfg(0.5, 0.1, pi, 0.0);
    EXPECT_NEAR(usd_success_optimal(cfg), 0.230, 5e-4);
    EXPECT_NEAR(1.0 - failure_probability(cfg), 0.230, 5e-4);
}

TEST(UsdProbabilities, IdenticalStatesAreIndistinguishable) {
    // mu == nu is excluded by SourceConfig; approach the limit instead.
    const SourceConfig cfg(0.3 + 1e-15, 0.3);
    EXPECT_NEAR(failure_probability(cfg), 1.0, 1e-14);
    EXPECT_NEAR(usd_success_optimal(cfg), 0.0, 1e-14);
    EXPECT_NEAR(usd_success_linear_optics(cfg), 0.0, 1e-14);
}

TEST(UsdProbabilities, PhaseExtremes) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double mu = 0.05 + 2.0 * u(rng);
        const double nu = mu * 0.95 * u(rng);
        const double at0 = usd_success_optimal(SourceConfig(mu, nu));
        const double atpi = usd_success_optimal(SourceConfig(mu, nu, pi));
        for (int k = 0; k < 64; ++k) {
            const double q = usd_success_optimal(SourceConfig(mu, nu, 2 * pi * k / 64.0));
            EXPECT_GE(q, at0 - 1e-15);
            EXPECT_LE(q, atpi + 1e-15);
        }
    }
}

TEST(UsdProbabilities, MonotoneInStateDistance) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const SourceConfig a(0.05 + 2 * u(rng), 0.0 + 0.04 * u(rng), 2 * pi * u(rng), 2 * pi * u(rng));
        const SourceConfig b(0.05 + 2 * u(rng), 0.0 + 0.04 * u(rng), 2 * pi * u(rng), 2 * pi * u(rng));
        auto distance = [](const SourceConfig& c) {
            return std::abs(std::sqrt(c.mu()) - std::polar(std::sqrt(c.nu()), -c.relative_phase()));
        };
        if (distance(a) < distance(b)) {
            EXPECT_LE(usd_success_optimal(a), usd_success_optimal(b));
        } else {
            EXPECT_GE(usd_success_optimal(a), usd_success_optimal(b));
        }
    }
}

TEST(UsdProbabilities, LinearOpticsNeverExceedsOptimal) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double mu = 1e-3 + 5.0 * u(rng);
        const SourceConfig cfg(mu, mu * u(rng) * 0.999, 2 * pi * u(rng), 2 * pi * u(rng));
        const double opt = usd_success_optimal(cfg);
        const double lin = usd_success_linear_optics(cfg);
        EXPECT_LE(lin, opt);
        if (opt > 1e-12) {
            EXPECT_LT(lin, opt);
        }
    }
}

TEST(PoissonPmf, Values) {
    EXPECT_EQ(poisson_pmf(0.0, 0), 1.0);
    EXPECT_EQ(poisson_pmf(0.0, 3), 0.0);
    EXPECT_NEAR(poisson_pmf(0.5, 0), 0.606530659712633, 1e-15);
    EXPECT_NEAR(poisson_pmf(0.5, 1), 0.303265329856317, 1e-15);
    EXPECT_THROW(poisson_pmf(-1.0, 0), std::invalid_argument);
}

TEST(PoissonPmf, LargeIndexDoesNotOverflow) {
    const double p = poisson_pmf(0.5, 400);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GE(p, 0.0);
    EXPECT_NEAR(poisson_pmf(150.0, 150), 0.0325554094568366, 1e-14);
}

TEST(PoissonPmf, SumsToOneWithinTail) {
    for (double mean : {0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        for (unsigned n : {1u, 5u, 20u, 60u}) {
            double sum = 0.0;
            for (unsigned i = 0; i <= n; ++i) sum += poisson_pmf(mean, i);
            EXPECT_NEAR(1.0 - sum, poisson_tail(mean, n), 1e-14) << "mean=" << mean << " n=" << n;
        }
    }
}

TEST(PoissonPmf, MinimumCutoff) {
    const unsigned n = minimum_cutoff(0.25, 1e-10);
    EXPECT_LT(poisson_tail(0.25, n), 1e-10);
    EXPECT_GE(poisson_tail(0.25, n - 1), 1e-10);
    EXPECT_LE(n, 40u);
}

TEST(CoherentVector, Vacuum) {
    const CoherentVector v = coherent_vector(0.0, 8);
    ASSERT_EQ(v.coeffs.size(), 9);
    EXPECT_EQ(v.coeffs[0], Complex(1.0, 0.0));
    for (int n = 1; n <= 8; ++n) EXPECT_EQ(v.coeffs[n], Complex(0.0, 0.0));
}

TEST(CoherentVector, NormAndRatio) {
    const CoherentVector v = coherent_vector(std::sqrt(0.25), 40);
    EXPECT_NEAR(v.squared_norm(), 1.0, 1e-12);
    EXPECT_LE(v.squared_norm(), 1.0 + 1e-15);
    EXPECT_NEAR(std::abs(v.coeffs[1] / v.coeffs[0]), std::sqrt(0.25), 1e-15);
}

TEST(CoherentVector, NormWithinTailForShortCutoff) {
    const double mean = 2.0;
    const CoherentVector v = coherent_vector(std::polar(std::sqrt(mean), 0.7), 6);
    EXPECT_NEAR(1.0 - v.squared_norm(), poisson_tail(mean, 6), 1e-14);
}

TEST(CoherentVector, RejectsZeroCutoff) { EXPECT_THROW(coherent_vector(0.5, 0), std::invalid_argument); }

class UsdPovmTest : public ::testing::TestWithParam<double> {};

TEST_P(UsdPovmTest, ElementsAreValidMeasurement) {
    const SourceConfig cfg(0.5, 0.1, GetParam(), 0.0);
    const UsdPovm povm = build_usd_povm(cfg, 40);
    const CoherentVector sig = coherent_vector(cfg.signal_half_amplitude(), 40);
    const CoherentVector dec = coherent_vector(cfg.decoy_half_amplitude(), 40);
    const double q = usd_success_optimal(cfg);

    for (const FockOperator* e : {&povm.e_mu, &povm.e_nu, &povm.e_f}) {
        EXPECT_TRUE(e->is_hermitian(1e-10));
        EXPECT_GE(e->min_eigenvalue(), -1e-8);
    }
    const FockOperator total = povm.e_mu + povm.e_nu + povm.e_f;
    EXPECT_LE((total.entries() - Eigen::MatrixXcd::Identity(41, 41)).cwiseAbs().maxCoeff(), 1e-15);

    EXPECT_NEAR(povm.e_mu.expectation(sig), q, 1e-6);
    EXPECT_NEAR(povm.e_nu.expectation(dec), q, 1e-6);
    EXPECT_NEAR(povm.e_nu.expectation(sig), 0.0, 1e-8);
    EXPECT_NEAR(povm.e_mu.expectation(dec), 0.0, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(RelativePhases, UsdPovmTest, ::testing::Values(0.0, pi / 3, pi, 1.7 * pi));

TEST(UsdPovm, RejectsInsufficientCutoff) {
    const SourceConfig cfg(0.5, 0.1);
    const unsigned need = required_povm_cutoff(cfg);
    try {
        build_usd_povm(cfg, need - 1);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find(std::to_string(need)), std::string::npos);
    }
    EXPECT_NO_THROW(build_usd_povm(cfg, need));
}

TEST(FockOperator, DetectsNonHermitianAndNegative) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 1) = Complex(1.0, 0.0);
    EXPECT_FALSE(FockOperator(m).is_hermitian());
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(3, 3);
    d(2, 2) = -1e-6;
    EXPECT_FALSE(FockOperator(d).is_positive_semidefinite());
    EXPECT_THROW(FockOperator(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
}
