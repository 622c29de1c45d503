#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lattice.hpp"
#include "series.hpp"

namespace relegation
{

// omega either as exact rationals (resonances decided exactly) or as floats with an
// explicitly declared resonance basis.
class FrequencyVector
{
public:
    enum class Mode { exact, floating };

    static FrequencyVector exact(std::vector<rational> omega)
    {
        FrequencyVector w;
        w.m_mode = Mode::exact;
        w.m_exact = std::move(omega);
        for (const auto &q : w.m_exact) {
            w.m_values.push_back(q.convert_to<double>());
        }
        w.compute_normal();
        return w;
    }

    static FrequencyVector exact(const std::vector<std::string> &omega)
    {
        std::vector<rational> q;
        for (const auto &s : omega) {
            q.push_back(parse_rational(s));
        }
        return exact(std::move(q));
    }

    // `basis` unset means "not declared"; an empty vector declares a non-resonant omega.
    static FrequencyVector floating(std::vector<double> omega, std::optional<std::vector<int_vector>> basis,
                                    double zero_tol = 1e-9)
    {
        FrequencyVector w;
        w.m_mode = Mode::floating;
        w.m_values = std::move(omega);
        w.m_declared = std::move(basis);
        w.m_zero_tol = zero_tol;
        return w;
    }

    Mode mode() const noexcept
    {
        return m_mode;
    }
    bool is_exact() const noexcept
    {
        return m_mode == Mode::exact;
    }
    std::size_t size() const noexcept
    {
        return m_values.size();
    }
    const std::vector<double> &values() const noexcept
    {
        return m_values;
    }
    const std::vector<rational> &exact_values() const noexcept
    {
        return m_exact;
    }
    const std::optional<std::vector<int_vector>> &declared_basis() const noexcept
    {
        return m_declared;
    }
    double zero_tol() const noexcept
    {
        return m_zero_tol;
    }

    // omega = scale * normal with normal a primitive integer vector (exact mode only).
    const int_vector &integer_normal() const
    {
        require_exact();
        return m_normal;
    }
    const rational &normal_scale() const
    {
        require_exact();
        return m_scale;
    }

    template <typename Int>
    double dot(std::span<const Int> k) const
    {
        if (k.size() != size()) {
            throw dimension_error("harmonic length does not match frequency vector");
        }
        if (is_exact()) {
            const auto num = detail::checked_dot<Int, std::int64_t>(k, m_normal);
            return (m_scale * rational(num)).template convert_to<double>();
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) {
            acc += static_cast<double>(k[j]) * m_values[j];
        }
        return acc;
    }
    double dot(const std::vector<int> &k) const
    {
        return dot(std::span<const int>(k));
    }

    template <typename Int>
    rational exact_dot(std::span<const Int> k) const
    {
        require_exact();
        return m_scale * rational(detail::checked_dot<Int, std::int64_t>(k, m_normal));
    }

    double euclidean_norm() const
    {
        double s = 0.0;
        for (auto x : m_values) {
            s += x * x;
        }
        return std::sqrt(s);
    }

    // Optional Diophantine constants used by the non-resonant certificate.
    std::optional<double> gamma;
    std::optional<double> tau;

private:
    void require_exact() const
    {
        if (!is_exact()) {
            throw configuration_error("operation requires an exact-rational frequency vector");
        }
    }

    void compute_normal()
    {
        using boost::multiprecision::cpp_int;
        cpp_int l = 1;
        for (const auto &q : m_exact) {
            l = boost::multiprecision::lcm(l, denominator(q));
        }
        std::vector<cpp_int> ints;
        cpp_int g = 0;
        for (const auto &q : m_exact) {
            ints.push_back(numerator(q) * (l / denominator(q)));
            g = boost::multiprecision::gcd(g, ints.back());
        }
        if (g == 0) {
            g = 1;
        }
        m_normal.clear();
        for (const auto &v : ints) {
            const cpp_int r = v / g;
            if (r > cpp_int(std::numeric_limits<std::int64_t>::max())
                || r < cpp_int(std::numeric_limits<std::int64_t>::min())) {
                throw resource_error("frequency vector entries too large for 64-bit lattice arithmetic");
            }
            m_normal.push_back(r.convert_to<std::int64_t>());
        }
        m_scale = rational(g, l);
    }

    Mode m_mode = Mode::exact;
    std::vector<double> m_values;
    std::vector<rational> m_exact;
    std::optional<std::vector<int_vector>> m_declared;
    double m_zero_tol = 1e-9;
    int_vector m_normal;
    rational m_scale = 1;
};

// The lattice {k : k.omega = 0}. Exact mode computes it; float mode validates and returns
// the declared basis.
inline ResonanceModule resonance_module(const FrequencyVector &w)
{
    if (w.is_exact()) {
        return ResonanceModule(w.size(), integer_kernel(w.integer_normal()), w.integer_normal());
    }
    if (!w.declared_basis()) {
        throw configuration_error("floating-point frequency vector requires an explicit resonance_basis");
    }
    for (const auto &b : *w.declared_basis()) {
        if (b.size() != w.size()) {
            throw dimension_error("resonance_basis vector length does not match omega");
        }
        const double v = w.dot(std::span<const std::int64_t>(b));
        if (!(std::abs(v) < w.zero_tol())) {
            std::string s;
            for (auto x : b) {
                s += std::to_string(x) + " ";
            }
            throw configuration_error("declared resonance vector (" + s + ") has |k.omega| = " + std::to_string(v)
                                      + ", above the zero tolerance");
        }
    }
    return ResonanceModule(w.size(), *w.declared_basis());
}

inline bool is_resonant(std::span<const int> k, const ResonanceModule &m)
{
    return m.contains(k);
}

inline bool is_resonant(const std::vector<int> &k, const ResonanceModule &m)
{
    return m.contains(k);
}

// Number of integer points in the l1 ball of the given radius in Z^n.
inline double l1_ball_count(std::size_t n, int radius)
{
    // sum_i 2^i C(n, i) C(radius, i)
    double total = 0.0;
    for (std::size_t i = 0; i <= n && static_cast<int>(i) <= radius; ++i) {
        double c1 = 1.0, c2 = 1.0;
        for (std::size_t t = 0; t < i; ++t) {
            c1 = c1 * static_cast<double>(n - t) / static_cast<double>(t + 1);
            c2 = c2 * static_cast<double>(radius - static_cast<int>(t)) / static_cast<double>(t + 1);
        }
        total += std::ldexp(c1 * c2, static_cast<int>(i));
    }
    return total;
}

struct AlphaResult {
    double value = 0.0;
    std::vector<int> argmin;
    std::size_t visited = 0;
};

inline constexpr double default_enumeration_budget = 5e7;

namespace detail
{

inline void check_budget(std::size_t n, int radius, double budget)
{
    if (radius < 1) {
        throw parameter_error("enumeration radius rK must be >= 1");
    }
    const double count = l1_ball_count(n, radius);
    if (count > budget) {
        throw resource_error("l1 ball of radius " + std::to_string(radius) + " in dimension " + std::to_string(n)
                             + " has " + std::to_string(count) + " points, over the enumeration budget");
    }
}

// Visit non-zero k with |k| <= radius, shell by shell.
template <typename F>
void for_each_in_l1_ball(std::size_t n, int radius, F &&f)
{
    for (int s = 1; s <= radius; ++s) {
        for_each_on_l1_sphere(n, s, [&](const std::vector<int> &k) {
            f(k);
            return false;
        });
    }
}

} // namespace detail

// min |k.omega| over non-resonant k with |k| <= rK; ties resolved to the lexicographically
// smallest k so that the result is independent of enumeration order.
inline AlphaResult alpha_r(const FrequencyVector &w, const ResonanceModule &m, int r, int K,
                           double budget = default_enumeration_budget)
{
    if (r < 1 || K < 1) {
        throw parameter_error("alpha_r: r and K must be >= 1");
    }
    const int radius = r * K;
    detail::check_budget(w.size(), radius, budget);
    AlphaResult best;
    bool found = false;
    std::int64_t best_int = 0;
    detail::for_each_in_l1_ball(w.size(), radius, [&](const std::vector<int> &k) {
        ++best.visited;
        if (m.contains(k)) {
            return;
        }
        if (w.is_exact()) {
            auto v = detail::checked_dot<int, std::int64_t>(k, w.integer_normal());
            v = v < 0 ? -v : v;
            if (!found || v < best_int || (v == best_int && k < best.argmin)) {
                best_int = v;
                best.argmin = k;
                found = true;
            }
        } else {
            const double v = std::abs(w.dot(k));
            if (!found || v < best.value || (v == best.value && k < best.argmin)) {
                best.value = v;
                best.argmin = k;
                found = true;
            }
        }
    });
    if (!found) {
        throw configuration_error("alpha_r: every harmonic with |k| <= " + std::to_string(radius) + " is resonant");
    }
    if (w.is_exact()) {
        best.value = (w.normal_scale() * rational(best_int)).convert_to<double>();
        if (best.value < 0) {
            best.value = -best.value;
        }
    }
    return best;
}

struct DiophantineResult {
    bool ok = true;
    // min over checked k of |k.omega| |k|^tau / gamma; +inf when nothing was checked.
    double worst_ratio = std::numeric_limits<double>::infinity();
    std::vector<int> worst_k;
};

// Checks |k.omega| >= gamma / |k|^tau for every non-resonant k with 1 <= |k| <= rK.
inline DiophantineResult diophantine_check(const FrequencyVector &w, const ResonanceModule &m, int rK,
                                           double budget = default_enumeration_budget)
{
    if (!w.gamma || !w.tau) {
        throw configuration_error("diophantine_check needs gamma and tau");
    }
    if (!(*w.gamma > 0)) {
        throw parameter_error("gamma must be positive");
    }
    detail::check_budget(w.size(), rK, budget);
    DiophantineResult res;
    detail::for_each_in_l1_ball(w.size(), rK, [&](const std::vector<int> &k) {
        if (m.contains(k)) {
            return;
        }
        int norm = 0;
        for (auto x : k) {
            norm += std::abs(x);
        }
        const double ratio = std::abs(w.dot(k)) * std::pow(static_cast<double>(norm), *w.tau) / *w.gamma;
        if (ratio < res.worst_ratio || (ratio == res.worst_ratio && k < res.worst_k)) {
            res.worst_ratio = ratio;
            res.worst_k = k;
        }
    });
    res.ok = res.worst_ratio >= 1.0;
    return res;
}

} // namespace relegation
