#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "norms.hpp"
#include "resonance.hpp"

namespace relegation
{

struct EstimateInputs {
    DomainParams dp;
    double mu = 0;
    double epsilon = 0;
    // ||f0|| <= G on the full domain.
    double G = 0;
    // Majorant of |H1| on the domain with doubled angle strip.
    double H1_norm = 0;
    int K = 1;
    int Kprime = 0;
    int L = 1;
    int r = 1;
    std::size_t n1 = 1;
    double d = 0.125;
    std::optional<double> alpha_r;
    bool module_trivial = false;
    std::optional<double> gamma;
    std::optional<double> tau;

    void validate() const
    {
        dp.validate();
        if (K < 1 || r < 1 || L < 0 || Kprime < 0 || n1 < 1) {
            throw parameter_error("estimate inputs need K >= 1, r >= 1, L >= 0, Kprime >= 0, n1 >= 1");
        }
        if (mu < 0 || epsilon < 0 || G < 0 || H1_norm < 0) {
            throw parameter_error("mu, epsilon, G and H1_norm must be non-negative");
        }
        if (!(d > 0) || !(d < 1)) {
            throw parameter_error("restriction d must lie in (0, 1)");
        }
    }
};

// Fills alpha_r and the module flag.
inline EstimateInputs with_frequency(EstimateInputs in, const FrequencyVector &w, const ResonanceModule &m,
                                     double budget = default_enumeration_budget)
{
    in.alpha_r = alpha_r(w, m, in.r, in.K, budget).value;
    in.module_trivial = m.dim() == 0;
    in.n1 = w.size();
    if (w.gamma) {
        in.gamma = w.gamma;
    }
    if (w.tau) {
        in.tau = w.tau;
    }
    return in;
}

namespace detail
{

// (1 + e^{-sigma/2}) / (1 - e^{-sigma/2}), raised to n1.
inline double fourier_sum_factor(double sigma, std::size_t n1)
{
    const double e = std::exp(-sigma / 2);
    return std::pow((1 + e) / (1 - e), static_cast<double>(n1));
}

inline double require_alpha(const EstimateInputs &in)
{
    if (!in.alpha_r) {
        throw sequencing_error("alpha_r has not been computed for these estimate inputs");
    }
    if (!(*in.alpha_r > 0)) {
        throw parameter_error("alpha_r must be positive");
    }
    return *in.alpha_r;
}

} // namespace detail

struct DecayConstants {
    double zeta;
    double F;
};

// zeta = e^{-K sigma/2}, F = epsilon ((1+e^{-sigma/2})/(1-e^{-sigma/2}))^{n1} |H1|.
inline DecayConstants decay_constants(const EstimateInputs &in)
{
    in.validate();
    return {std::exp(-in.K * in.dp.sigma / 2),
            in.epsilon * detail::fourier_sum_factor(in.dp.sigma, in.n1) * in.H1_norm};
}

// A = 2^21 Xi^2 ((1+e^{-sigma/2})/(1-e^{-sigma/2}))^{n1} |H1|.
inline double big_A(const EstimateInputs &in)
{
    in.validate();
    const double x = xi(in.dp);
    return std::ldexp(x * x, 21) * detail::fourier_sum_factor(in.dp.sigma, in.n1) * in.H1_norm;
}

struct ConditionCheck {
    // 9 r^2 L Xi mu G / alpha_r against 1/2^7.
    double mu_value = 0;
    double mu_margin = 0;
    bool mu_ok = false;
    // eta = epsilon r^4 A / alpha_r^2 + 4 e^{-K sigma/2} against 1/2.
    double eta = 0;
    double eta_perturbative = 0;
    double eta_decay = 0;
    double eta_margin = 0;
    double eta_perturbative_margin = 0;
    bool eta_ok = false;
    bool ok() const noexcept
    {
        return mu_ok && eta_ok;
    }
};

inline ConditionCheck check_conditions(const EstimateInputs &in)
{
    in.validate();
    const double a = detail::require_alpha(in);
    const double r = in.r;
    ConditionCheck c;
    c.mu_value = 9 * r * r * in.L * xi(in.dp) * in.mu * in.G / a;
    c.mu_margin = c.mu_value / std::ldexp(1.0, -7);
    c.mu_ok = c.mu_value <= std::ldexp(1.0, -7);
    c.eta_perturbative = in.epsilon * std::pow(r, 4) * big_A(in) / (a * a);
    c.eta_decay = 4 * std::exp(-in.K * in.dp.sigma / 2);
    c.eta = c.eta_perturbative + c.eta_decay;
    c.eta_margin = c.eta / 0.5;
    c.eta_perturbative_margin = c.eta_perturbative / 0.5;
    c.eta_ok = c.eta <= 0.5;
    return c;
}

struct EtaTheta {
    // Index s - 1 for eta (s = 1..s_max); index s for theta (s = 0..s_max).
    std::vector<double> eta;
    std::vector<double> theta;
    // Natural logs, finite even where eta itself overflows.
    std::vector<double> log_eta;
    std::vector<double> log_theta;
    // log of (C+zeta)^{s-1} 4^{s-1} / s.
    std::vector<double> log_cap;
    // log of (3C/2+zeta)^{s-1} 4^{s-1} / s.
    std::vector<double> log_corrected_cap;
};

namespace detail
{

inline void eta_theta_direct(double C, double zeta, int s_max, std::vector<double> &eta, std::vector<double> &theta)
{
    eta.assign(s_max + 1, 0.0); // 1-based
    theta.assign(s_max + 1, 0.0);
    eta[1] = 1.0;
    theta[0] = 1.0;
    theta[1] = C * eta[1] * theta[0];
    for (int s = 2; s <= s_max; ++s) {
        double a = 0, b = 0, c = 0;
        for (int j = 1; j < s; ++j) {
            a += j * eta[j] * std::pow(zeta, s - j - 1);
            b += j * eta[j] * eta[s - j];
            c += j * eta[j] * theta[s - j];
        }
        eta[s] = std::pow(zeta, s - 1) + C / s * a + C / s * b + c / s;
        double t = 0;
        for (int j = 1; j <= s; ++j) {
            t += j * eta[j] * theta[s - j];
        }
        theta[s] = C / s * t;
    }
}

// Same recursion for u_s = eta_s / kappa^{s-1}, v_s = theta_s / kappa^s.
inline void eta_theta_scaled(double C, double zeta, int s_max, double kappa, std::vector<double> &u,
                             std::vector<double> &v)
{
    const double c = C / kappa, z = zeta / kappa;
    u.assign(s_max + 1, 0.0);
    v.assign(s_max + 1, 0.0);
    u[1] = 1.0;
    v[0] = 1.0;
    v[1] = c;
    for (int s = 2; s <= s_max; ++s) {
        double a = 0, b = 0, d = 0;
        for (int j = 1; j < s; ++j) {
            a += j * u[j] * std::pow(z, s - j - 1);
            b += j * u[j] * u[s - j];
            d += j * u[j] * v[s - j];
        }
        u[s] = std::pow(z, s - 1) + c / s * a + c / s * b + d / s;
        double t = 0;
        for (int j = 1; j <= s; ++j) {
            t += j * u[j] * v[s - j];
        }
        v[s] = c / s * t;
    }
}

inline double safe_log(double x)
{
    return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

} // namespace detail

inline EtaTheta eta_theta_sequences(double C, double zeta, int s_max)
{
    if (s_max < 1) {
        throw parameter_error("eta_theta_sequences: s_max must be >= 1");
    }
    if (!(C >= 0) || !(zeta >= 0)) {
        throw parameter_error("eta_theta_sequences: C and zeta must be non-negative");
    }
    constexpr int direct_limit = 30;
    std::vector<double> eta, theta;
    detail::eta_theta_direct(C, zeta, std::min(s_max, direct_limit), eta, theta);
    EtaTheta out;
    out.theta.push_back(theta[0]);
    out.log_theta.push_back(0.0);
    for (int s = 1; s <= std::min(s_max, direct_limit); ++s) {
        out.eta.push_back(eta[s]);
        out.log_eta.push_back(detail::safe_log(eta[s]));
        out.theta.push_back(theta[s]);
        out.log_theta.push_back(detail::safe_log(theta[s]));
    }
    if (s_max > direct_limit) {
        const double kappa = 4 * (C + zeta);
        std::vector<double> u, v;
        if (kappa > 0) {
            detail::eta_theta_scaled(C, zeta, s_max, kappa, u, v);
        }
        for (int s = direct_limit + 1; s <= s_max; ++s) {
            double le = -std::numeric_limits<double>::infinity();
            double lt = le;
            if (kappa > 0) {
                le = (s - 1) * std::log(kappa) + detail::safe_log(u[s]);
                lt = s * std::log(kappa) + detail::safe_log(v[s]);
            }
            out.log_eta.push_back(le);
            out.log_theta.push_back(lt);
            out.eta.push_back(std::exp(le));
            out.theta.push_back(std::exp(lt));
        }
    }
    for (int s = 1; s <= s_max; ++s) {
        out.log_cap.push_back((s - 1) * (detail::safe_log(C + zeta) + std::log(4.0)) - std::log(double(s)));
        out.log_corrected_cap.push_back((s - 1) * (detail::safe_log(1.5 * C + zeta) + std::log(4.0))
                                        - std::log(double(s)));
        if (s == 1) {
            out.log_cap.back() = 0.0;
            out.log_corrected_cap.back() = 0.0;
        }
    }
    return out;
}

// nu_1 = 1, nu_s = sum_{j=1}^{s-1} nu_j nu_{s-j}.
inline std::vector<unsigned long long> catalan(int count)
{
    std::vector<unsigned long long> nu(count + 1, 0);
    if (count >= 1) {
        nu[1] = 1;
    }
    for (int s = 2; s <= count; ++s) {
        for (int j = 1; j < s; ++j) {
            nu[s] += nu[j] * nu[s - j];
        }
    }
    return {nu.begin() + 1, nu.end()};
}

struct GeneratingBounds {
    double C_r = 0;
    double b = 0;
    // 9 r^2 L Xi mu G / (alpha_r d^2), certified when <= 1/2.
    double condition_value = 0;
    bool certified = false;
    std::vector<double> psi; // s = 1..r
    std::vector<double> X;
};

// ||Psi_s|| <= (b^{s-1}/s) F, ||X_s|| <= (b^{s-1}/s)(2F/alpha_r), b = 4(2^7 r^4 F Xi^2/(alpha_r^2 d^4) + zeta).
inline GeneratingBounds generating_bounds(const EstimateInputs &in)
{
    in.validate();
    const double a = detail::require_alpha(in);
    const auto [zeta, F] = decay_constants(in);
    const double x = xi(in.dp);
    const double r = in.r;
    GeneratingBounds g;
    g.C_r = std::ldexp(std::pow(r, 4) * F * x * x / (a * a * std::pow(in.d, 4)), 7);
    g.b = 4 * (g.C_r + zeta);
    g.condition_value = 9 * r * r * in.L * x * in.mu * in.G / (a * in.d * in.d);
    g.certified = g.condition_value <= 0.5;
    for (int s = 1; s <= in.r; ++s) {
        const double f = std::pow(g.b, s - 1) / s;
        g.psi.push_back(f * F);
        g.X.push_back(f * 2 * F / a);
    }
    return g;
}

// epsilon (A / (2^18 Xi^2)) eta^r.
inline double remainder_bound(const EstimateInputs &in, double eta)
{
    const double x = xi(in.dp);
    return in.epsilon * big_A(in) / std::ldexp(x * x, 18) * std::pow(eta, in.r);
}

struct LocalStability {
    // t* = 2^12 e rho sigma Xi^2 / (A epsilon eta^r); infinite when epsilon = 0.
    double t_star = std::numeric_limits<double>::infinity();
    double log10_t_star = std::numeric_limits<double>::infinity();
    // Bound on |d Phi / dt|: epsilon A eta^r / (2^14 e sigma Xi^2).
    double drift_rate = 0;
    bool unbounded = false;
};

inline LocalStability local_stability_time(const EstimateInputs &in, double eta)
{
    in.validate();
    if (!(eta >= 0)) {
        throw parameter_error("local_stability_time: eta must be non-negative");
    }
    const double x = xi(in.dp);
    const double A = big_A(in);
    LocalStability ls;
    ls.drift_rate = in.epsilon * A * std::pow(eta, in.r) / (std::ldexp(std::numbers::e * in.dp.sigma * x * x, 14));
    if (in.epsilon == 0 || A == 0 || eta == 0) {
        ls.unbounded = true;
        return ls;
    }
    const double log10_num = std::log10(std::ldexp(std::numbers::e * in.dp.rho * in.dp.sigma * x * x, 12));
    ls.log10_t_star = log10_num - std::log10(A) - std::log10(in.epsilon) - in.r * std::log10(eta);
    ls.t_star = std::pow(10.0, ls.log10_t_star);
    return ls;
}

struct NonresonantCertificate {
    double r_real = 0;
    int r_opt = 1;
    int K_opt = 1;
    double epsilon_star = 0;
    double T_const = 0;
    // log10 of (T/epsilon) exp(r_real).
    double log10_t_star = 0;
    bool epsilon_admissible = false;
};

// Parameter choice for a non-resonant frequency vector (trivial resonance module).
inline NonresonantCertificate nonresonant_certificate(const EstimateInputs &in)
{
    in.validate();
    if (!in.module_trivial) {
        throw configuration_error("non-resonant certificate refused: the resonance module is non-trivial");
    }
    if (!in.gamma || !in.tau) {
        throw configuration_error("non-resonant certificate needs the Diophantine constants gamma and tau");
    }
    if (!(*in.tau > static_cast<double>(in.n1))) {
        throw parameter_error("non-resonant certificate needs tau > n1");
    }
    if (!(in.epsilon > 0)) {
        throw parameter_error("non-resonant certificate needs epsilon > 0");
    }
    const double g = *in.gamma, tau = *in.tau;
    NonresonantCertificate c;
    c.K_opt = static_cast<int>(std::ceil(2 * (1 + 3 * std::numbers::ln2) / in.dp.sigma));
    const double A = big_A(in);
    const double denom = 2 * std::numbers::e * A * std::pow(c.K_opt, 2 * tau);
    c.epsilon_star = g * g / denom;
    c.r_real = std::pow(g * g / (in.epsilon * denom), 1.0 / (4 + 2 * tau));
    c.r_opt = std::max(1, static_cast<int>(std::floor(c.r_real)));
    c.epsilon_admissible = in.epsilon <= c.epsilon_star;
    const double x = xi(in.dp);
    c.T_const = std::ldexp(std::numbers::e * in.dp.rho * in.dp.sigma * x * x, 12) / A;
    c.log10_t_star = std::log10(c.T_const) - std::log10(in.epsilon) + c.r_real / std::numbers::ln10;
    return c;
}

struct EstimateReport {
    DecayConstants decay{};
    double Xi = 0;
    double A = 0;
    double alpha_r = 0;
    ConditionCheck conditions;
    GeneratingBounds bounds;
    double remainder = 0;
    LocalStability local;
    std::optional<NonresonantCertificate> nonresonant;
    bool certified() const noexcept
    {
        return conditions.ok() && bounds.certified;
    }
};

inline EstimateReport estimate(const EstimateInputs &in, bool with_nonresonant = false)
{
    EstimateReport rep;
    rep.decay = decay_constants(in);
    rep.Xi = xi(in.dp);
    rep.A = big_A(in);
    rep.alpha_r = detail::require_alpha(in);
    rep.conditions = check_conditions(in);
    rep.bounds = generating_bounds(in);
    rep.remainder = remainder_bound(in, rep.conditions.eta);
    rep.local = local_stability_time(in, rep.conditions.eta);
    if (with_nonresonant) {
        rep.nonresonant = nonresonant_certificate(in);
    }
    return rep;
}

} // namespace relegation
