#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coefficients.hpp"
#include "error.hpp"
#include "lattice.hpp"

namespace relegation
{

// Exponent record of one term c * p^mp * z^mz * (i zbar)^mw * exp(i k.q).
// Layout of the packed vector: [k (n1) | mp (n1) | mz (n2) | mw (n2)].
// Ordering is lexicographic on that vector, which fixes the canonical term order.
class TermKey
{
public:
    TermKey() = default;
    TermKey(std::size_t n1, std::size_t n2)
        : m_n1(static_cast<std::uint16_t>(n1)), m_n2(static_cast<std::uint16_t>(n2)), m_data(2 * n1 + 2 * n2, 0)
    {
    }

    static TermKey from_parts(std::span<const int> k, std::span<const int> mp, std::span<const int> mz,
                              std::span<const int> mw)
    {
        if (k.size() != mp.size() || mz.size() != mw.size()) {
            throw dimension_error("term key blocks have inconsistent lengths");
        }
        TermKey key(k.size(), mz.size());
        auto out = key.m_data.begin();
        out = std::copy(k.begin(), k.end(), out);
        out = std::copy(mp.begin(), mp.end(), out);
        out = std::copy(mz.begin(), mz.end(), out);
        std::copy(mw.begin(), mw.end(), out);
        for (std::size_t i = k.size(); i < key.m_data.size(); ++i) {
            if (key.m_data[i] < 0) {
                throw parameter_error("negative monomial exponent in term key");
            }
        }
        return key;
    }

    std::size_t n1() const noexcept
    {
        return m_n1;
    }
    std::size_t n2() const noexcept
    {
        return m_n2;
    }

    std::span<const int> k() const noexcept
    {
        return {m_data.data(), m_n1};
    }
    std::span<const int> mp() const noexcept
    {
        return {m_data.data() + m_n1, m_n1};
    }
    std::span<const int> mz() const noexcept
    {
        return {m_data.data() + 2 * m_n1, m_n2};
    }
    std::span<const int> mw() const noexcept
    {
        return {m_data.data() + 2 * m_n1 + m_n2, m_n2};
    }

    int &k(std::size_t j)
    {
        return m_data[j];
    }
    int &mp(std::size_t j)
    {
        return m_data[m_n1 + j];
    }
    int &mz(std::size_t j)
    {
        return m_data[2 * m_n1 + j];
    }
    int &mw(std::size_t j)
    {
        return m_data[2 * m_n1 + m_n2 + j];
    }

    // l1 norm of the harmonic.
    int trig_degree() const noexcept
    {
        int s = 0;
        for (auto x : k()) {
            s += std::abs(x);
        }
        return s;
    }
    int taylor_degree() const noexcept
    {
        int s = 0;
        for (std::size_t i = m_n1; i < m_data.size(); ++i) {
            s += m_data[i];
        }
        return s;
    }
    int p_degree() const noexcept
    {
        int s = 0;
        for (auto x : mp()) {
            s += x;
        }
        return s;
    }
    int zw_degree() const noexcept
    {
        return taylor_degree() - p_degree();
    }

    // Componentwise sum: harmonics add, exponents add.
    friend TermKey operator+(const TermKey &a, const TermKey &b)
    {
        TermKey r = a;
        for (std::size_t i = 0; i < r.m_data.size(); ++i) {
            r.m_data[i] += b.m_data[i];
        }
        return r;
    }

    std::vector<int> harmonic() const
    {
        return {k().begin(), k().end()};
    }

    const std::vector<int> &packed() const noexcept
    {
        return m_data;
    }

    friend bool operator==(const TermKey &a, const TermKey &b) noexcept
    {
        return a.m_data == b.m_data;
    }
    friend bool operator<(const TermKey &a, const TermKey &b) noexcept
    {
        return a.m_data < b.m_data;
    }

private:
    std::uint16_t m_n1 = 0;
    std::uint16_t m_n2 = 0;
    std::vector<int> m_data;
};

namespace detail
{

template <typename C>
C from_int(long long v)
{
    if constexpr (coeff_traits<C>::exact) {
        return C(rational(v));
    } else {
        return C(static_cast<double>(v), 0.0);
    }
}

} // namespace detail

// Finite Fourier-Taylor series in (p, q, z, i zbar). Canonical sparse form: no stored
// coefficient is exactly zero, so two series are equal iff their term maps are equal.
template <coefficient C = complex>
class PoissonSeries
{
public:
    using coeff_type = C;
    using traits = coeff_traits<C>;
    using map_type = std::map<TermKey, C>;

    PoissonSeries() = default;
    PoissonSeries(std::size_t n1, std::size_t n2) : m_n1(n1), m_n2(n2) {}

    static PoissonSeries constant(std::size_t n1, std::size_t n2, const C &c)
    {
        PoissonSeries s(n1, n2);
        s.add_term(TermKey(n1, n2), c);
        return s;
    }
    static PoissonSeries action(std::size_t n1, std::size_t n2, std::size_t j, const C &c = detail::from_int<C>(1))
    {
        TermKey key(n1, n2);
        key.mp(j) = 1;
        return single(std::move(key), c);
    }
    static PoissonSeries z(std::size_t n1, std::size_t n2, std::size_t j, const C &c = detail::from_int<C>(1))
    {
        TermKey key(n1, n2);
        key.mz(j) = 1;
        return single(std::move(key), c);
    }
    // The coordinate i zbar_j.
    static PoissonSeries w(std::size_t n1, std::size_t n2, std::size_t j, const C &c = detail::from_int<C>(1))
    {
        TermKey key(n1, n2);
        key.mw(j) = 1;
        return single(std::move(key), c);
    }
    // c * exp(i k.q).
    static PoissonSeries fourier(std::size_t n1, std::size_t n2, std::span<const int> k,
                                 const C &c = detail::from_int<C>(1))
    {
        if (k.size() != n1) {
            throw dimension_error("harmonic length does not match n1");
        }
        TermKey key(n1, n2);
        for (std::size_t j = 0; j < n1; ++j) {
            key.k(j) = k[j];
        }
        return single(std::move(key), c);
    }
    static PoissonSeries single(TermKey key, const C &c)
    {
        PoissonSeries s(key.n1(), key.n2());
        s.add_term(std::move(key), c);
        return s;
    }

    std::size_t n1() const noexcept
    {
        return m_n1;
    }
    std::size_t n2() const noexcept
    {
        return m_n2;
    }
    std::size_t size() const noexcept
    {
        return m_terms.size();
    }
    bool empty() const noexcept
    {
        return m_terms.empty();
    }
    const map_type &terms() const noexcept
    {
        return m_terms;
    }
    auto begin() const noexcept
    {
        return m_terms.begin();
    }
    auto end() const noexcept
    {
        return m_terms.end();
    }

    void add_term(const TermKey &key, const C &c)
    {
        if (key.n1() != m_n1 || key.n2() != m_n2) {
            throw dimension_error("term key dimensions do not match series");
        }
        if (traits::is_zero(c)) {
            return;
        }
        auto [it, inserted] = m_terms.try_emplace(key, c);
        if (!inserted) {
            it->second += c;
            if (traits::is_zero(it->second)) {
                m_terms.erase(it);
            }
        }
    }

    C coefficient(const TermKey &key) const
    {
        const auto it = m_terms.find(key);
        return it == m_terms.end() ? C{} : it->second;
    }

    // Max |k| over stored terms (0 for the empty series).
    int trig_degree() const noexcept
    {
        int d = 0;
        for (const auto &[key, c] : m_terms) {
            d = std::max(d, key.trig_degree());
        }
        return d;
    }
    int taylor_degree() const noexcept
    {
        int d = 0;
        for (const auto &[key, c] : m_terms) {
            d = std::max(d, key.taylor_degree());
        }
        return d;
    }

    PoissonSeries &operator+=(const PoissonSeries &o)
    {
        check_dims(o);
        for (const auto &[key, c] : o.m_terms) {
            add_term(key, c);
        }
        return *this;
    }
    PoissonSeries &operator-=(const PoissonSeries &o)
    {
        check_dims(o);
        for (const auto &[key, c] : o.m_terms) {
            add_term(key, -c);
        }
        return *this;
    }
    PoissonSeries &operator*=(const C &s)
    {
        if (traits::is_zero(s)) {
            m_terms.clear();
            return *this;
        }
        for (auto it = m_terms.begin(); it != m_terms.end();) {
            it->second *= s;
            it = traits::is_zero(it->second) ? m_terms.erase(it) : std::next(it);
        }
        return *this;
    }

    friend PoissonSeries operator+(PoissonSeries a, const PoissonSeries &b)
    {
        return a += b;
    }
    friend PoissonSeries operator-(PoissonSeries a, const PoissonSeries &b)
    {
        return a -= b;
    }
    friend PoissonSeries operator*(PoissonSeries a, const C &s)
    {
        return a *= s;
    }
    friend PoissonSeries operator*(const C &s, PoissonSeries a)
    {
        return a *= s;
    }
    PoissonSeries operator-() const
    {
        PoissonSeries r(m_n1, m_n2);
        for (const auto &[key, c] : m_terms) {
            r.m_terms.emplace_hint(r.m_terms.end(), key, -c);
        }
        return r;
    }

    friend PoissonSeries operator*(const PoissonSeries &a, const PoissonSeries &b)
    {
        a.check_dims(b);
        PoissonSeries r(a.m_n1, a.m_n2);
        for (const auto &[ka, ca] : a.m_terms) {
            for (const auto &[kb, cb] : b.m_terms) {
                r.accumulate(ka + kb, ca * cb);
            }
        }
        r.prune();
        return r;
    }

    friend bool operator==(const PoissonSeries &a, const PoissonSeries &b)
    {
        return a.m_n1 == b.m_n1 && a.m_n2 == b.m_n2 && a.m_terms == b.m_terms;
    }

    void check_dims(const PoissonSeries &o) const
    {
        if (o.m_n1 != m_n1 || o.m_n2 != m_n2) {
            throw dimension_error("series dimension mismatch: (" + std::to_string(m_n1) + ", " + std::to_string(m_n2)
                                  + ") vs (" + std::to_string(o.m_n1) + ", " + std::to_string(o.m_n2) + ")");
        }
    }

    // Accumulate without pruning; callers must prune() afterwards.
    void accumulate(TermKey &&key, const C &c)
    {
        auto [it, inserted] = m_terms.try_emplace(std::move(key), c);
        if (!inserted) {
            it->second += c;
        }
    }
    void prune()
    {
        std::erase_if(m_terms, [](const auto &kv) { return traits::is_zero(kv.second); });
    }

private:
    std::size_t m_n1 = 0;
    std::size_t m_n2 = 0;
    map_type m_terms;
};

using Series = PoissonSeries<complex>;
using ExactSeries = PoissonSeries<gaussian_rational>;

// ---------------------------------------------------------------------------
// Differentiation.

template <typename C>
PoissonSeries<C> diff_p(const PoissonSeries<C> &g, std::size_t j)
{
    PoissonSeries<C> r(g.n1(), g.n2());
    for (const auto &[key, c] : g) {
        TermKey nk = key;
        const int e = nk.mp(j);
        if (e == 0) {
            continue;
        }
        nk.mp(j) = e - 1;
        r.accumulate(std::move(nk), c * detail::from_int<C>(e));
    }
    r.prune();
    return r;
}

// d/dq_j of exp(i k.q) is i k_j exp(i k.q).
template <typename C>
PoissonSeries<C> diff_q(const PoissonSeries<C> &g, std::size_t j)
{
    PoissonSeries<C> r(g.n1(), g.n2());
    const C iu = coeff_traits<C>::imag_unit();
    for (const auto &[key, c] : g) {
        const int kj = key.k()[j];
        if (kj == 0) {
            continue;
        }
        r.accumulate(TermKey(key), c * iu * detail::from_int<C>(kj));
    }
    r.prune();
    return r;
}

template <typename C>
PoissonSeries<C> diff_z(const PoissonSeries<C> &g, std::size_t j)
{
    PoissonSeries<C> r(g.n1(), g.n2());
    for (const auto &[key, c] : g) {
        TermKey nk = key;
        const int e = nk.mz(j);
        if (e == 0) {
            continue;
        }
        nk.mz(j) = e - 1;
        r.accumulate(std::move(nk), c * detail::from_int<C>(e));
    }
    r.prune();
    return r;
}

// Derivative with respect to the coordinate i zbar_j.
template <typename C>
PoissonSeries<C> diff_w(const PoissonSeries<C> &g, std::size_t j)
{
    PoissonSeries<C> r(g.n1(), g.n2());
    for (const auto &[key, c] : g) {
        TermKey nk = key;
        const int e = nk.mw(j);
        if (e == 0) {
            continue;
        }
        nk.mw(j) = e - 1;
        r.accumulate(std::move(nk), c * detail::from_int<C>(e));
    }
    r.prune();
    return r;
}

// {g, g'} = sum_j (dg/dq_j dg'/dp_j - dg/dp_j dg'/dq_j)
//         + sum_j (dg/d(i zbar_j) dg'/dz_j - dg/dz_j dg'/d(i zbar_j)).
// Under this convention {q_j, p_j} = 1 and {i zbar_j, z_j} = 1.
template <typename C>
PoissonSeries<C> poisson_bracket(const PoissonSeries<C> &g, const PoissonSeries<C> &gp)
{
    g.check_dims(gp);
    const std::size_t n1 = g.n1(), n2 = g.n2();
    const C iu = coeff_traits<C>::imag_unit();
    PoissonSeries<C> r(n1, n2);
    for (const auto &[ka, ca] : g) {
        for (const auto &[kb, cb] : gp) {
            const C cc = ca * cb;
            const TermKey sum = ka + kb;
            for (std::size_t j = 0; j < n1; ++j) {
                // i c c' (k_j mp'_j - mp_j k'_j) at exponent mp + mp' - e_j.
                const long long f = static_cast<long long>(ka.k()[j]) * kb.mp()[j]
                                    - static_cast<long long>(ka.mp()[j]) * kb.k()[j];
                if (f == 0) {
                    continue;
                }
                TermKey nk = sum;
                nk.mp(j) -= 1;
                r.accumulate(std::move(nk), cc * iu * detail::from_int<C>(f));
            }
            for (std::size_t j = 0; j < n2; ++j) {
                const long long f = static_cast<long long>(ka.mw()[j]) * kb.mz()[j]
                                    - static_cast<long long>(ka.mz()[j]) * kb.mw()[j];
                if (f == 0) {
                    continue;
                }
                TermKey nk = sum;
                nk.mz(j) -= 1;
                nk.mw(j) -= 1;
                r.accumulate(std::move(nk), cc * detail::from_int<C>(f));
            }
        }
    }
    r.prune();
    return r;
}

// L_X g = {X, g}.
template <typename C>
PoissonSeries<C> lie_derivative(const PoissonSeries<C> &x, const PoissonSeries<C> &g)
{
    return poisson_bracket(x, g);
}

// Shells h_s = terms with (s-1)K <= |k| < sK, s = 1..s_max. Interior empty shells are kept,
// shells beyond the largest harmonic are not.
template <typename C>
std::vector<PoissonSeries<C>> fourier_split(const PoissonSeries<C> &g, int K)
{
    if (K < 1) {
        throw parameter_error("fourier_split: K must be a positive integer, got " + std::to_string(K));
    }
    std::vector<PoissonSeries<C>> shells;
    for (const auto &[key, c] : g) {
        const auto s = static_cast<std::size_t>(key.trig_degree() / K);
        while (shells.size() <= s) {
            shells.emplace_back(g.n1(), g.n2());
        }
        shells[s].add_term(key, c);
    }
    return shells;
}

template <typename C>
struct TruncationResult {
    PoissonSeries<C> series;
    // Sum of |c| over the dropped terms.
    double dropped_l1 = 0.0;
    std::size_t dropped_terms = 0;
};

template <typename C>
TruncationResult<C> truncate(const PoissonSeries<C> &g, int max_trig, int max_taylor)
{
    if (max_trig < 0 || max_taylor < 0) {
        throw parameter_error("truncate: bounds must be non-negative");
    }
    TruncationResult<C> out{PoissonSeries<C>(g.n1(), g.n2())};
    for (const auto &[key, c] : g) {
        if (key.trig_degree() > max_trig || key.taylor_degree() > max_taylor) {
            out.dropped_l1 += coeff_traits<C>::abs(c);
            ++out.dropped_terms;
        } else {
            out.series.add_term(key, c);
        }
    }
    return out;
}

// (K1, K2) of the class P_{K1,K2}: every harmonic is k' + k'' with k' resonant and |k''| <= K1,
// and |k| <= K2.
struct ClassTag {
    int K1 = 0;
    int K2 = 0;
    friend bool operator==(const ClassTag &, const ClassTag &) = default;
    // Componentwise order.
    bool within(const ClassTag &bound) const noexcept
    {
        return K1 <= bound.K1 && K2 <= bound.K2;
    }
};

namespace detail
{

// Visit every integer vector of the given length with l1 norm exactly `radius`.
inline bool for_each_on_l1_sphere(std::size_t n, int radius, const std::function<bool(const std::vector<int> &)> &f)
{
    std::vector<int> v(n, 0);
    std::function<bool(std::size_t, int)> rec = [&](std::size_t pos, int left) -> bool {
        if (pos + 1 == n) {
            if (left == 0) {
                v[pos] = 0;
                return f(v);
            }
            v[pos] = left;
            if (f(v)) {
                return true;
            }
            v[pos] = -left;
            return f(v);
        }
        for (int a = -left; a <= left; ++a) {
            v[pos] = a;
            if (rec(pos + 1, left - std::abs(a))) {
                return true;
            }
        }
        return false;
    };
    if (n == 0) {
        return radius == 0 && f(v);
    }
    return rec(0, radius);
}

// l1 distance from k to the resonance lattice.
inline int lattice_l1_distance(const std::vector<int> &k, const ResonanceModule &m)
{
    int norm = 0;
    for (auto x : k) {
        norm += std::abs(x);
    }
    std::vector<int> diff(k.size());
    for (int radius = 0; radius < norm; ++radius) {
        const bool hit = for_each_on_l1_sphere(k.size(), radius, [&](const std::vector<int> &kk) {
            for (std::size_t i = 0; i < k.size(); ++i) {
                diff[i] = k[i] - kk[i];
            }
            return m.contains(std::span<const int>(diff));
        });
        if (hit) {
            return radius;
        }
    }
    return norm;
}

} // namespace detail

template <typename C>
ClassTag class_of(const PoissonSeries<C> &g, const ResonanceModule &m)
{
    std::set<std::vector<int>> harmonics;
    for (const auto &[key, c] : g) {
        harmonics.insert(key.harmonic());
    }
    ClassTag tag;
    for (const auto &k : harmonics) {
        int norm = 0;
        for (auto x : k) {
            norm += std::abs(x);
        }
        tag.K2 = std::max(tag.K2, norm);
        tag.K1 = std::max(tag.K1, detail::lattice_l1_distance(k, m));
    }
    return tag;
}

// Terms whose harmonic passes the predicate.
template <typename C, typename Pred>
PoissonSeries<C> filter_harmonics(const PoissonSeries<C> &g, Pred &&pred)
{
    PoissonSeries<C> r(g.n1(), g.n2());
    for (const auto &[key, c] : g) {
        if (pred(key.k())) {
            r.add_term(key, c);
        }
    }
    return r;
}

template <typename To, typename From>
PoissonSeries<To> convert_series(const PoissonSeries<From> &g)
{
    if constexpr (std::is_same_v<To, From>) {
        return g;
    } else {
        PoissonSeries<To> r(g.n1(), g.n2());
        for (const auto &[key, c] : g) {
            if constexpr (std::is_same_v<To, complex>) {
                r.add_term(key, coeff_traits<From>::to_complex(c));
            } else {
                static_assert(std::is_same_v<From, complex>);
                r.add_term(key, To(rational(c.real()), rational(c.imag())));
            }
        }
        return r;
    }
}

} // namespace relegation
