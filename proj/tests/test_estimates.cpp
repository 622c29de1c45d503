#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <relegation/estimates.hpp>

using namespace relegation;

namespace
{

constexpr double e = std::numbers::e;

EstimateInputs unit_inputs()
{
    EstimateInputs in;
    in.dp = {1, 1, 1};
    in.n1 = 1;
    in.epsilon = 1;
    in.H1_norm = 1;
    in.K = 2;
    in.L = 1;
    in.r = 2;
    in.alpha_r = 1;
    return in;
}

EstimateInputs nonresonant_inputs(double eps)
{
    EstimateInputs in = unit_inputs();
    in.epsilon = eps;
    in.module_trivial = true;
    in.gamma = 0.3;
    in.tau = 2;
    return in;
}

} // namespace

TEST(DecayConstants, Examples)
{
    auto in = unit_inputs();
    const auto dc = decay_constants(in);
    EXPECT_NEAR(dc.zeta, std::exp(-1.0), 1e-15);
    EXPECT_NEAR(dc.zeta, 0.36787944117144233, 1e-12);
    const double f = (1 + std::exp(-0.5)) / (1 - std::exp(-0.5));
    EXPECT_NEAR(dc.F, f, 1e-14);
    EXPECT_NEAR(dc.F, 4.0829882, 1e-6);
    in.epsilon = 0;
    EXPECT_EQ(decay_constants(in).F, 0.0);
    in.n1 = 2;
    in.epsilon = 1;
    EXPECT_NEAR(decay_constants(in).F, f * f, 1e-13);
}

TEST(BigA, Examples)
{
    auto in = unit_inputs();
    const double x = 2 / e + 1;
    const double expected = std::pow(2.0, 21) * x * x * (1 + std::exp(-0.5)) / (1 - std::exp(-0.5));
    EXPECT_NEAR(big_A(in) / expected, 1.0, 1e-14);
    EXPECT_NEAR(big_A(in), 2.580e7, 0.001e7);
    in.H1_norm = 0;
    EXPECT_EQ(big_A(in), 0.0);
    in.H1_norm = 2;
    EXPECT_NEAR(big_A(in), 2 * expected, 1e-6);
}

TEST(Conditions, ZeroPerturbation)
{
    auto in = unit_inputs();
    in.mu = 0;
    in.epsilon = 0;
    in.K = 4000;
    const auto c = check_conditions(in);
    EXPECT_TRUE(c.mu_ok);
    EXPECT_EQ(c.mu_margin, 0.0);
    EXPECT_TRUE(c.eta_ok);
    EXPECT_EQ(c.eta_perturbative_margin, 0.0);
    EXPECT_EQ(c.eta, 0.0);
    EXPECT_TRUE(local_stability_time(in, c.eta).unbounded);
}

TEST(Conditions, EtaVanishesForLargeK)
{
    auto in = unit_inputs();
    in.epsilon = 0;
    in.K = 60;
    EXPECT_LT(check_conditions(in).eta, 1e-12);
    EXPECT_TRUE(check_conditions(in).eta_ok);
}

TEST(Conditions, WorkedInstance)
{
    auto in = unit_inputs();
    in.mu = 1e-6;
    in.G = 1;
    in.epsilon = 1e-10;
    const auto c = check_conditions(in);
    const double x = 2 / e + 1;
    const double mu_value = 9 * 4 * 1 * x * 1e-6;
    EXPECT_NEAR(c.mu_value, mu_value, 1e-18);
    EXPECT_NEAR(c.mu_value, 6.2487e-5, 1e-8);
    EXPECT_NEAR(c.mu_margin, mu_value * 128, 1e-15);
    EXPECT_TRUE(c.mu_ok);
    const double A = std::pow(2.0, 21) * x * x * (1 + std::exp(-0.5)) / (1 - std::exp(-0.5));
    const double eta = 1e-10 * 16 * A + 4 * std::exp(-1.0);
    EXPECT_NEAR(c.eta, eta, 1e-14);
    EXPECT_NEAR(c.eta, 1.5128, 1e-4);
    EXPECT_FALSE(c.eta_ok);
    EXPECT_FALSE(c.ok());
}

TEST(Conditions, MissingAlphaIsASequencingError)
{
    auto in = unit_inputs();
    in.alpha_r.reset();
    EXPECT_THROW(check_conditions(in), sequencing_error);
}

TEST(EtaTheta, CollapsedRecursion)
{
    const auto s = eta_theta_sequences(0, 0, 6);
    EXPECT_EQ(s.eta[0], 1.0);
    for (int i = 1; i < 6; ++i) {
        EXPECT_EQ(s.eta[i], 0.0);
    }
    for (int i = 1; i <= 6; ++i) {
        EXPECT_EQ(s.theta[i], 0.0);
    }
}

TEST(EtaTheta, CatalanNumbers)
{
    const auto nu = catalan(12);
    EXPECT_EQ((std::vector<unsigned long long>(nu.begin(), nu.begin() + 5)),
              (std::vector<unsigned long long>{1, 1, 2, 5, 14}));
    EXPECT_EQ(nu[11], 58786u);
    for (int s = 1; s <= 12; ++s) {
        EXPECT_LE(double(nu[s - 1]), std::pow(4.0, s - 1) / s);
    }
    EXPECT_LE(14.0, 256.0 / 5);
}

TEST(EtaTheta, ZetaOnlyIsGeometric)
{
    const auto s = eta_theta_sequences(0, 0.3, 10);
    for (int i = 1; i <= 10; ++i) {
        EXPECT_NEAR(s.eta[i - 1], std::pow(0.3, i - 1), 1e-15);
    }
}

TEST(EtaTheta, ThetaIdentity)
{
    // theta_s = 2 C eta_s - C zeta^{s-1} - (C^2/s) sum_{j<s} j eta_j (zeta^{s-j-1} + eta_{s-j})
    const double C = 0.37, z = 0.21;
    const auto s = eta_theta_sequences(C, z, 15);
    for (int n = 2; n <= 15; ++n) {
        double sum = 0;
        for (int j = 1; j < n; ++j) {
            sum += j * s.eta[j - 1] * (std::pow(z, n - j - 1) + s.eta[n - j - 1]);
        }
        const double expected = 2 * C * s.eta[n - 1] - C * std::pow(z, n - 1) - C * C / n * sum;
        EXPECT_NEAR(s.theta[n], expected, 1e-12 * std::max(1.0, s.theta[n]));
    }
}

TEST(EtaTheta, ScaledTailMatchesDirectValues)
{
    const auto a = eta_theta_sequences(0.4, 0.2, 30);
    const auto b = eta_theta_sequences(0.4, 0.2, 45);
    for (int i = 0; i < 30; ++i) {
        EXPECT_EQ(a.log_eta[i], b.log_eta[i]);
    }
    // Extending past the direct range continues smoothly.
    const double r1 = b.log_eta[30] - b.log_eta[29], r0 = b.log_eta[29] - b.log_eta[28];
    EXPECT_NEAR(r1, r0, 0.05);
}

TEST(EtaTheta, CorrectedCapHoldsOnRandomPairs)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double C = u(rng), z = u(rng);
        const auto s = eta_theta_sequences(C, z, 20);
        for (int i = 0; i < 20; ++i) {
            EXPECT_LE(s.log_eta[i], s.log_corrected_cap[i] + 1e-12) << "C=" << C << " zeta=" << z << " s=" << i + 1;
        }
    }
}

TEST(GeneratingBounds, FirstOrderAndClosedForm)
{
    auto in = unit_inputs();
    in.epsilon = 1e-9;
    const auto g = generating_bounds(in);
    const double F = decay_constants(in).F;
    EXPECT_NEAR(g.psi[0], F, 1e-24);
    EXPECT_NEAR(g.X[0], 2 * F / *in.alpha_r, 1e-24);
    EXPECT_NEAR(g.psi[1], g.b / 2 * F, 1e-24);

    // zeta = 0, r = F = Xi = alpha_r = 1: b = 2^9 / d^4.
    EstimateInputs t;
    t.dp = {2 / e, 1.0, 1e9};
    t.K = 4000;
    t.r = 1;
    t.n1 = 1;
    t.epsilon = 1;
    t.H1_norm = 1 / ((1 + std::exp(-0.5)) / (1 - std::exp(-0.5)));
    t.alpha_r = 1;
    t.d = 0.5;
    const auto tb = generating_bounds(t);
    EXPECT_NEAR(decay_constants(t).F, 1.0, 1e-14);
    EXPECT_NEAR(xi(t.dp), 1.0, 1e-15);
    EXPECT_NEAR(tb.b, 512 * 16, 1e-9);
    t.d = 1 - 1e-9;
    EXPECT_NEAR(generating_bounds(t).b, 512, 1e-5);
}

TEST(Remainder, Examples)
{
    auto in = unit_inputs();
    in.epsilon = 0;
    EXPECT_EQ(remainder_bound(in, 0.3), 0.0);
    in.epsilon = 1e-8;
    const double r2 = remainder_bound(in, 0.3);
    in.r = 3;
    EXPECT_NEAR(remainder_bound(in, 0.3), 0.3 * r2, 1e-15 * r2);
    const double x = xi(in.dp);
    EXPECT_NEAR(remainder_bound(in, 0.3), in.epsilon * big_A(in) / (std::pow(2.0, 18) * x * x) * std::pow(0.3, 3),
                1e-12 * r2);
}

TEST(LocalStability, ScalingAndDriftIdentity)
{
    auto in = unit_inputs();
    in.epsilon = 1e-9;
    const auto a = local_stability_time(in, 0.4);
    in.epsilon = 2e-9;
    const auto b = local_stability_time(in, 0.4);
    EXPECT_NEAR(b.t_star, a.t_star / 2, 1e-12 * a.t_star);
    EXPECT_NEAR(a.drift_rate * a.t_star, in.dp.rho / 4, 1e-12);
    in.dp = {0.7, 0.4, 2.0};
    const auto c = local_stability_time(in, 0.2);
    EXPECT_NEAR(c.drift_rate * c.t_star, 0.7 / 4, 1e-12);
}

TEST(Nonresonant, OptimalK)
{
    const auto c = nonresonant_certificate(nonresonant_inputs(1e-12));
    EXPECT_EQ(c.K_opt, 7);
    EXPECT_EQ(static_cast<int>(std::ceil(2 * (1 + 3 * std::log(2.0)))), 7);
    auto in = nonresonant_inputs(1e-12);
    in.dp.sigma = 0.5;
    EXPECT_EQ(nonresonant_certificate(in).K_opt, 13);
}

TEST(Nonresonant, BoundaryEpsilonGivesFirstOrder)
{
    const auto probe = nonresonant_certificate(nonresonant_inputs(1e-12));
    const auto c = nonresonant_certificate(nonresonant_inputs(probe.epsilon_star));
    EXPECT_NEAR(c.r_real, 1.0, 1e-12);
    EXPECT_EQ(c.r_opt, 1);
    EXPECT_TRUE(c.epsilon_admissible);
}

TEST(Nonresonant, ScalingOfTheOptimalOrder)
{
    const auto a = nonresonant_certificate(nonresonant_inputs(1e-14));
    const auto b = nonresonant_certificate(nonresonant_inputs(1e-14 / 16));
    EXPECT_NEAR(b.r_real / a.r_real, std::pow(16.0, 1.0 / 8), 1e-12);
    for (int dec = 1; dec <= 3; ++dec) {
        const auto c = nonresonant_certificate(nonresonant_inputs(1e-14 * std::pow(10.0, -dec)));
        EXPECT_NEAR(c.r_real / a.r_real, std::pow(10.0, dec / 8.0), 1e-9 * c.r_real / a.r_real);
    }
}

TEST(Nonresonant, Refusals)
{
    auto in = nonresonant_inputs(1e-12);
    in.module_trivial = false;
    EXPECT_THROW(nonresonant_certificate(in), configuration_error);
    in = nonresonant_inputs(1e-12);
    in.tau = 1;
    EXPECT_THROW(nonresonant_certificate(in), parameter_error);
    in = nonresonant_inputs(0);
    EXPECT_THROW(nonresonant_certificate(in), parameter_error);
    in = nonresonant_inputs(1e-12);
    in.gamma.reset();
    EXPECT_THROW(nonresonant_certificate(in), configuration_error);
}

TEST(Estimate, ReportIsConsistent)
{
    auto in = unit_inputs();
    in.epsilon = 1e-12;
    in.mu = 1e-6;
    in.G = 0.5;
    in.K = 5;
    in.r = 4;
    const auto rep = estimate(in);
    EXPECT_TRUE(rep.conditions.ok());
    EXPECT_TRUE(rep.certified());
    // With d = 1/8 the two forms of the constant coincide: b = eta.
    EXPECT_NEAR(rep.bounds.b, rep.conditions.eta, 1e-14);
    EXPECT_NEAR(rep.remainder, remainder_bound(in, rep.conditions.eta), 0.0);
}
