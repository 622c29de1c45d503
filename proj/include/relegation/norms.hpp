#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "series.hpp"

namespace relegation
{

// Analyticity radii: actions |p_j| < rho, angles |Im q_j| < sigma, Cartesian |z_j|, |i zbar_j| < R.
struct DomainParams {
    double rho = 1.0;
    double sigma = 1.0;
    double R = 1.0;

    void validate() const
    {
        if (!(rho > 0) || !(sigma > 0) || !(R > 0)) {
            throw parameter_error("domain radii must be strictly positive (rho=" + std::to_string(rho)
                                  + ", sigma=" + std::to_string(sigma) + ", R=" + std::to_string(R) + ")");
        }
    }

    // The domain fraction * (rho, sigma, R).
    DomainParams scaled(double fraction) const
    {
        if (!(fraction > 0) || fraction > 1) {
            throw parameter_error("domain fraction must lie in (0, 1], got " + std::to_string(fraction));
        }
        return {rho * fraction, sigma * fraction, R * fraction};
    }

    // (1 - d) * (rho, sigma, R).
    DomainParams restricted(double d) const
    {
        return scaled(1.0 - d);
    }
};

// Monomial majorant of the weighted Fourier norm:
//   sum over terms |c| rho^|mp| R^(|mz|+|mw|) e^(|k| sigma).
// It bounds the sup-based norm from above and is exact for single positive monomials.
template <typename C>
double weighted_norm(const PoissonSeries<C> &g, const DomainParams &dp)
{
    dp.validate();
    double total = 0.0;
    for (const auto &[key, c] : g) {
        total += coeff_traits<C>::abs(c) * std::pow(dp.rho, key.p_degree()) * std::pow(dp.R, key.zw_degree())
                 * std::exp(key.trig_degree() * dp.sigma);
    }
    return total;
}

// Xi = 2/(e rho sigma) + 1/R^2.
inline double xi(const DomainParams &dp)
{
    dp.validate();
    return 2.0 / (std::numbers::e * dp.rho * dp.sigma) + 1.0 / (dp.R * dp.R);
}

struct CauchyBounds {
    double dp; // on d/dp_j
    double dq; // on d/dq_j
    double dz; // on d/dz_j and d/d(i zbar_j)
};

// Bounds on the restricted domain (1-d) for derivatives of g, given ||g|| on the full one.
inline CauchyBounds cauchy_bounds(double norm_g, const DomainParams &dp, double d)
{
    dp.validate();
    if (!(d > 0) || !(d < 1)) {
        throw parameter_error("cauchy_bounds: restriction d must lie in (0, 1), got " + std::to_string(d));
    }
    return {norm_g / (d * dp.rho), norm_g / (std::numbers::e * d * dp.sigma), norm_g / (d * dp.R)};
}

// ||{g, g'}||_{1-d-d'-delta} <= Xi / ((d+delta) delta) ||g||_{1-d-d'} ||g'||_{1-d'}.
inline double bracket_bound(double norm_g, double norm_gp, double d, double dprime, double delta,
                            const DomainParams &dp)
{
    if (!(d > 0) || !(dprime >= 0) || !(delta > 0) || !(d + dprime + delta < 1)) {
        throw parameter_error("bracket_bound: need d > 0, d' >= 0, delta > 0 and d + d' + delta < 1");
    }
    return xi(dp) / ((d + delta) * delta) * norm_g * norm_gp;
}

// ||L_X^j g||_{1-d-d'} <= (j!/e^2) (e^2 Xi / d^2)^j ||X||^j ||g||.
inline double multi_bracket_bound(double norm_x, double norm_g, int j, double d, const DomainParams &dp)
{
    if (j < 1) {
        throw parameter_error("multi_bracket_bound: j must be >= 1");
    }
    if (!(d > 0) || !(d < 1)) {
        throw parameter_error("multi_bracket_bound: d must lie in (0, 1)");
    }
    constexpr double e2 = std::numbers::e * std::numbers::e;
    const double base = e2 * xi(dp) / (d * d) * norm_x;
    double value = norm_g / e2;
    for (int i = 1; i <= j; ++i) {
        value *= i * base;
    }
    return value;
}

} // namespace relegation
