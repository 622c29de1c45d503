#pragma once

#include <random>
#include <vector>

#include <relegation/series.hpp>
#include <relegation/series_io.hpp>

namespace relegation
{

template <typename C>
void PrintTo(const PoissonSeries<C> &g, std::ostream *os)
{
    *os << "\n" << to_text(g);
}

} // namespace relegation

namespace testing_support
{

using relegation::complex;
using relegation::PoissonSeries;
using relegation::TermKey;

struct RandomShape {
    std::size_t n1 = 2, n2 = 1;
    int max_terms = 6;
    int max_degree = 3; // total polynomial degree
    int max_trig = 2;   // l1 size of k
};

inline TermKey random_key(std::mt19937_64 &rng, const RandomShape &sh)
{
    TermKey key(sh.n1, sh.n2);
    std::uniform_int_distribution<int> coin(0, 1);
    int trig = std::uniform_int_distribution<int>(0, sh.max_trig)(rng);
    while (trig > 0) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, sh.n1 - 1)(rng);
        key.k(j) += coin(rng) ? 1 : -1;
        --trig;
    }
    int deg = std::uniform_int_distribution<int>(0, sh.max_degree)(rng);
    const std::size_t slots = sh.n1 + 2 * sh.n2;
    std::uniform_int_distribution<std::size_t> slot(0, slots - 1);
    while (deg > 0) {
        const std::size_t s = slot(rng);
        if (s < sh.n1) {
            ++key.mp(s);
        } else if (s < sh.n1 + sh.n2) {
            ++key.mz(s - sh.n1);
        } else {
            ++key.mw(s - sh.n1 - sh.n2);
        }
        --deg;
    }
    return key;
}

inline PoissonSeries<complex> random_series(std::mt19937_64 &rng, const RandomShape &sh)
{
    PoissonSeries<complex> g(sh.n1, sh.n2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = std::uniform_int_distribution<int>(1, sh.max_terms)(rng);
    for (int i = 0; i < n; ++i) {
        g.add_term(random_key(rng, sh), complex(u(rng), u(rng)));
    }
    return g;
}

// Small integer coefficients so exact and float arithmetic can be compared.
inline PoissonSeries<relegation::gaussian_rational> random_exact_series(std::mt19937_64 &rng, const RandomShape &sh)
{
    PoissonSeries<relegation::gaussian_rational> g(sh.n1, sh.n2);
    std::uniform_int_distribution<int> u(-5, 5), den(1, 4);
    const int n = std::uniform_int_distribution<int>(1, sh.max_terms)(rng);
    for (int i = 0; i < n; ++i) {
        g.add_term(random_key(rng, sh), relegation::gaussian_rational(relegation::rational(u(rng), den(rng)),
                                                                      relegation::rational(u(rng), den(rng))));
    }
    return g;
}

// max |a_k - b_k| / max(1, max |a_k|, max |b_k|)
template <typename C>
double relative_difference(const PoissonSeries<C> &a, const PoissonSeries<C> &b)
{
    double scale = 1.0, diff = 0.0;
    for (const auto &[key, c] : a) {
        scale = std::max(scale, relegation::coeff_traits<C>::abs(c));
    }
    for (const auto &[key, c] : b) {
        scale = std::max(scale, relegation::coeff_traits<C>::abs(c));
    }
    for (const auto &[key, c] : a - b) {
        diff = std::max(diff, relegation::coeff_traits<C>::abs(c));
    }
    return diff / scale;
}

} // namespace testing_support
