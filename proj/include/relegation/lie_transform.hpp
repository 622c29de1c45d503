#pragma once

#include <map>
#include <utility>
#include <vector>

#include "series.hpp"

namespace relegation
{

enum class Direction { forward, inverse };

// Generators are passed as X[0] = X_1, X[1] = X_2, ...; missing entries count as zero.
template <typename C>
using Generators = std::vector<PoissonSeries<C>>;

namespace detail
{

template <typename C>
C ratio(long long num, long long den)
{
    if constexpr (coeff_traits<C>::exact) {
        return C(rational(num, den));
    } else {
        return C(static_cast<double>(num) / static_cast<double>(den), 0.0);
    }
}

template <typename C>
const PoissonSeries<C> *generator(const Generators<C> &x, int i)
{
    if (i < 1 || static_cast<std::size_t>(i) > x.size() || x[i - 1].empty()) {
        return nullptr;
    }
    return &x[i - 1];
}

// E_0 g = g, E_j g = sum_{i=1}^{j} (i/j) L_{X_i} E_{j-i} g.
template <typename C>
std::vector<PoissonSeries<C>> forward_terms(const Generators<C> &x, const PoissonSeries<C> &g, int order)
{
    std::vector<PoissonSeries<C>> e;
    e.reserve(order + 1);
    e.push_back(g);
    for (int j = 1; j <= order; ++j) {
        PoissonSeries<C> acc(g.n1(), g.n2());
        for (int i = 1; i <= j; ++i) {
            const auto *xi = generator(x, i);
            if (!xi || e[j - i].empty()) {
                continue;
            }
            acc += ratio<C>(i, j) * lie_derivative(*xi, e[j - i]);
        }
        e.push_back(std::move(acc));
    }
    return e;
}

// D_0 f = f, D_j f = -sum_{i=1}^{j} (i/j) D_{j-i} (L_{X_i} f), with f = L_{X_{a_m}}...L_{X_{a_1}} g
// identified by the index sequence (a_1, ..., a_m).
template <typename C>
class InverseEvaluator
{
public:
    InverseEvaluator(const Generators<C> &x, const PoissonSeries<C> &g) : m_x(x), m_g(g) {}

    PoissonSeries<C> d(int j)
    {
        return eval(j, {});
    }

private:
    const PoissonSeries<C> &target(const std::vector<int> &seq)
    {
        if (seq.empty()) {
            return m_g;
        }
        auto it = m_targets.find(seq);
        if (it != m_targets.end()) {
            return it->second;
        }
        std::vector<int> parent(seq.begin(), seq.end() - 1);
        const PoissonSeries<C> &inner = target(parent);
        const auto *xi = generator(m_x, seq.back());
        PoissonSeries<C> v = xi ? lie_derivative(*xi, inner) : PoissonSeries<C>(m_g.n1(), m_g.n2());
        return m_targets.emplace(seq, std::move(v)).first->second;
    }

    PoissonSeries<C> eval(int j, const std::vector<int> &seq)
    {
        if (j == 0) {
            return target(seq);
        }
        auto key = std::make_pair(j, seq);
        if (auto it = m_memo.find(key); it != m_memo.end()) {
            return it->second;
        }
        PoissonSeries<C> acc(m_g.n1(), m_g.n2());
        for (int i = 1; i <= j; ++i) {
            if (!generator(m_x, i)) {
                continue;
            }
            std::vector<int> next = seq;
            next.push_back(i);
            if (target(next).empty()) {
                continue;
            }
            acc -= ratio<C>(i, j) * eval(j - i, next);
        }
        m_memo.emplace(std::move(key), acc);
        return acc;
    }

    const Generators<C> &m_x;
    const PoissonSeries<C> &m_g;
    std::map<std::vector<int>, PoissonSeries<C>> m_targets;
    std::map<std::pair<int, std::vector<int>>, PoissonSeries<C>> m_memo;
};

} // namespace detail

// The individual graded pieces E_0 g..E_order g (or D_0 g..D_order g).
template <typename C>
std::vector<PoissonSeries<C>> lie_terms(const Generators<C> &x, const PoissonSeries<C> &g, int order,
                                        Direction dir = Direction::forward)
{
    if (order < 0) {
        throw parameter_error("lie transform order must be non-negative");
    }
    for (const auto &xi : x) {
        g.check_dims(xi);
    }
    if (dir == Direction::forward) {
        return detail::forward_terms(x, g, order);
    }
    detail::InverseEvaluator<C> ev(x, g);
    std::vector<PoissonSeries<C>> out;
    for (int j = 0; j <= order; ++j) {
        out.push_back(ev.d(j));
    }
    return out;
}

// sum_{j=0}^{order} E_j g, or the same with D_j for the inverse.
template <typename C>
PoissonSeries<C> lie_apply(const Generators<C> &x, const PoissonSeries<C> &g, int order,
                           Direction dir = Direction::forward)
{
    PoissonSeries<C> sum(g.n1(), g.n2());
    for (const auto &t : lie_terms(x, g, order, dir)) {
        sum += t;
    }
    return sum;
}

// Transform of a graded function g = sum_i g_i: result[s] = sum_{i+j=s} E_j g_i, s <= max_grade.
template <typename C>
std::vector<PoissonSeries<C>> lie_transform_graded(const Generators<C> &x, const std::vector<PoissonSeries<C>> &g,
                                                    int max_grade, Direction dir = Direction::forward)
{
    if (g.empty()) {
        throw parameter_error("graded transform needs at least the grade-0 part");
    }
    std::vector<PoissonSeries<C>> out(max_grade + 1, PoissonSeries<C>(g[0].n1(), g[0].n2()));
    for (int i = 0; i <= max_grade && i < static_cast<int>(g.size()); ++i) {
        if (g[i].empty()) {
            continue;
        }
        const auto t = lie_terms(x, g[i], max_grade - i, dir);
        for (int j = 0; j <= max_grade - i; ++j) {
            out[i + j] += t[j];
        }
    }
    return out;
}

} // namespace relegation
