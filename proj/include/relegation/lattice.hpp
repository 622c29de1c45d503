#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "error.hpp"

namespace relegation
{

using int_vector = std::vector<std::int64_t>;

namespace detail
{

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
    std::int64_t r{};
    if (__builtin_mul_overflow(a, b, &r)) {
        throw resource_error("integer overflow in lattice arithmetic");
    }
    return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
    std::int64_t r{};
    if (__builtin_add_overflow(a, b, &r)) {
        throw resource_error("integer overflow in lattice arithmetic");
    }
    return r;
}

template <typename A, typename B>
std::int64_t checked_dot(std::span<const A> a, std::span<const B> b)
{
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc = checked_add(acc, checked_mul(static_cast<std::int64_t>(a[i]), static_cast<std::int64_t>(b[i])));
    }
    return acc;
}

inline std::int64_t norm2(const int_vector &v)
{
    return checked_dot<std::int64_t, std::int64_t>(v, v);
}

inline std::int64_t l1(const int_vector &v)
{
    std::int64_t s = 0;
    for (auto x : v) {
        s = checked_add(s, x < 0 ? -x : x);
    }
    return s;
}

// Pairwise size reduction; keeps the lattice, shortens the vectors.
inline void reduce_basis(std::vector<int_vector> &basis)
{
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            for (std::size_t j = 0; j < basis.size(); ++j) {
                if (i == j) {
                    continue;
                }
                const auto nj = norm2(basis[j]);
                if (nj == 0) {
                    continue;
                }
                const auto ip = checked_dot<std::int64_t, std::int64_t>(basis[i], basis[j]);
                // Nearest integer to ip / nj.
                const auto q = static_cast<std::int64_t>(std::llround(static_cast<long double>(ip) / nj));
                if (q == 0) {
                    continue;
                }
                int_vector cand = basis[i];
                for (std::size_t t = 0; t < cand.size(); ++t) {
                    cand[t] = checked_add(cand[t], -checked_mul(q, basis[j][t]));
                }
                if (norm2(cand) < norm2(basis[i])) {
                    basis[i] = std::move(cand);
                    changed = true;
                }
            }
        }
    }
}

inline void canonicalize(std::vector<int_vector> &basis)
{
    for (auto &v : basis) {
        const auto it = std::find_if(v.begin(), v.end(), [](auto x) { return x != 0; });
        if (it != v.end() && *it < 0) {
            for (auto &x : v) {
                x = -x;
            }
        }
    }
    std::sort(basis.begin(), basis.end(), [](const int_vector &a, const int_vector &b) {
        const auto la = l1(a), lb = l1(b);
        return la != lb ? la < lb : a > b;
    });
}

} // namespace detail

// Integer basis of {k in Z^n : k . v = 0}, by unimodular column reduction.
inline std::vector<int_vector> integer_kernel(const int_vector &v)
{
    const std::size_t n = v.size();
    std::vector<int_vector> cols(n, int_vector(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        cols[i][i] = 1;
    }
    int_vector a = v;
    while (true) {
        std::size_t pivot = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] != 0 && (pivot == n || std::llabs(a[i]) < std::llabs(a[pivot]))) {
                pivot = i;
            }
        }
        if (pivot == n) {
            break;
        }
        bool others = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == pivot || a[j] == 0) {
                continue;
            }
            others = true;
            const auto q = a[j] / a[pivot];
            a[j] -= q * a[pivot];
            for (std::size_t t = 0; t < n; ++t) {
                cols[j][t] = detail::checked_add(cols[j][t], -detail::checked_mul(q, cols[pivot][t]));
            }
        }
        if (!others) {
            std::vector<int_vector> basis;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != pivot) {
                    basis.push_back(cols[j]);
                }
            }
            detail::reduce_basis(basis);
            detail::canonicalize(basis);
            return basis;
        }
    }
    // v == 0: the whole lattice.
    return cols;
}

// The resonance module as an integer lattice. When built from an exact frequency
// vector it also keeps the integer normal v, and membership is k . v == 0.
class ResonanceModule
{
public:
    ResonanceModule() = default;

    explicit ResonanceModule(std::size_t ambient) : m_ambient(ambient) {}

    ResonanceModule(std::size_t ambient, std::vector<int_vector> basis, std::optional<int_vector> normal = {})
        : m_ambient(ambient), m_basis(std::move(basis)), m_normal(std::move(normal))
    {
        for (const auto &b : m_basis) {
            if (b.size() != m_ambient) {
                throw dimension_error("resonance basis vector has length " + std::to_string(b.size())
                                      + ", expected " + std::to_string(m_ambient));
            }
        }
        if (m_normal && m_normal->size() != m_ambient) {
            throw dimension_error("resonance normal has wrong length");
        }
        prepare_span_test();
    }

    std::size_t ambient() const noexcept
    {
        return m_ambient;
    }
    std::size_t dim() const noexcept
    {
        return m_basis.size();
    }
    const std::vector<int_vector> &basis() const noexcept
    {
        return m_basis;
    }
    const std::optional<int_vector> &normal() const noexcept
    {
        return m_normal;
    }

    template <typename Int>
    bool contains(std::span<const Int> k) const
    {
        if (k.size() != m_ambient) {
            throw dimension_error("harmonic length does not match resonance module");
        }
        if (std::all_of(k.begin(), k.end(), [](Int x) { return x == 0; })) {
            return true;
        }
        if (m_normal) {
            return detail::checked_dot<Int, std::int64_t>(k, *m_normal) == 0;
        }
        return in_span(k);
    }

    bool contains(const std::vector<int> &k) const
    {
        return contains(std::span<const int>(k));
    }

private:
    void prepare_span_test()
    {
        const std::size_t m = m_basis.size();
        if (m == 0) {
            return;
        }
        // Gaussian elimination over Q on the m x n basis matrix to pick pivot columns.
        std::vector<std::vector<rational>> a(m, std::vector<rational>(m_ambient));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m_ambient; ++j) {
                a[i][j] = rational(m_basis[i][j]);
            }
        }
        std::size_t row = 0;
        for (std::size_t col = 0; col < m_ambient && row < m; ++col) {
            std::size_t sel = row;
            while (sel < m && a[sel][col] == 0) {
                ++sel;
            }
            if (sel == m) {
                continue;
            }
            std::swap(a[sel], a[row]);
            for (std::size_t i = 0; i < m; ++i) {
                if (i != row && a[i][col] != 0) {
                    const rational f = a[i][col] / a[row][col];
                    for (std::size_t j = 0; j < m_ambient; ++j) {
                        a[i][j] -= f * a[row][j];
                    }
                }
            }
            m_pivots.push_back(col);
            ++row;
        }
        if (row != m) {
            throw configuration_error("resonance basis vectors are linearly dependent");
        }
        // Inverse of the pivot submatrix S (S[i][j] = basis[i][pivot j]).
        std::vector<std::vector<rational>> s(m, std::vector<rational>(2 * m));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                s[i][j] = rational(m_basis[i][m_pivots[j]]);
            }
            s[i][m + i] = 1;
        }
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t sel = col;
            while (s[sel][col] == 0) {
                ++sel;
            }
            std::swap(s[sel], s[col]);
            const rational piv = s[col][col];
            for (auto &x : s[col]) {
                x /= piv;
            }
            for (std::size_t i = 0; i < m; ++i) {
                if (i != col && s[i][col] != 0) {
                    const rational f = s[i][col];
                    for (std::size_t j = 0; j < 2 * m; ++j) {
                        s[i][j] -= f * s[col][j];
                    }
                }
            }
        }
        m_inverse.assign(m, std::vector<rational>(m));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                m_inverse[i][j] = s[i][m + j];
            }
        }
    }

    // Solve c . B = k from the pivot coordinates, then require integral c and full agreement.
    template <typename Int>
    bool in_span(std::span<const Int> k) const
    {
        const std::size_t m = m_basis.size();
        if (m == 0) {
            return false;
        }
        std::vector<std::int64_t> c(m);
        for (std::size_t j = 0; j < m; ++j) {
            rational acc = 0;
            for (std::size_t i = 0; i < m; ++i) {
                acc += rational(static_cast<std::int64_t>(k[m_pivots[i]])) * m_inverse[i][j];
            }
            if (denominator(acc) != 1) {
                return false;
            }
            c[j] = numerator(acc).convert_to<std::int64_t>();
        }
        for (std::size_t t = 0; t < m_ambient; ++t) {
            std::int64_t acc = 0;
            for (std::size_t j = 0; j < m; ++j) {
                acc = detail::checked_add(acc, detail::checked_mul(c[j], m_basis[j][t]));
            }
            if (acc != static_cast<std::int64_t>(k[t])) {
                return false;
            }
        }
        return true;
    }

    std::size_t m_ambient = 0;
    std::vector<int_vector> m_basis;
    std::optional<int_vector> m_normal;
    std::vector<std::size_t> m_pivots;
    std::vector<std::vector<rational>> m_inverse;
};

} // namespace relegation
