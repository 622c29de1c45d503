#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lie_transform.hpp"
#include "norms.hpp"
#include "resonance.hpp"
#include "series.hpp"

namespace relegation
{

// H = omega.p + mu f0 + epsilon H1.
template <typename C = complex>
struct HamiltonianSpec {
    FrequencyVector omega = FrequencyVector::exact(std::vector<rational>{});
    PoissonSeries<C> f0;
    rational mu = 0;
    PoissonSeries<C> H1;
    rational epsilon = 0;
    DomainParams dp;
    int K = 1;
    // Trigonometric degree bound of f0; computed from f0 when unset.
    std::optional<int> Kprime;
    int L = 0;
    int r = 1;
    int buffer = 1;
    // Defaults to 1e-12 |omega|_2.
    std::optional<double> small_divisor_floor;
    std::size_t term_budget = 2'000'000;
    int threads = 1;
    bool check_classes = true;

    std::size_t n1() const noexcept
    {
        return omega.size();
    }
    std::size_t n2() const noexcept
    {
        return f0.n2();
    }
    double divisor_floor() const
    {
        return small_divisor_floor ? *small_divisor_floor : 1e-12 * omega.euclidean_norm();
    }
};

template <typename C>
struct OrderData {
    int s = 0;
    PoissonSeries<C> h;
    PoissonSeries<C> psi;
    PoissonSeries<C> X;
    PoissonSeries<C> Z;
    std::vector<PoissonSeries<C>> X_chain; // X_{s,0..L}
    std::vector<PoissonSeries<C>> Z_chain; // Z_{s,0..L}
    // L_{X_{s,L}} (mu f0), carried into the next orders.
    PoissonSeries<C> leftover;
    double norm_X = 0, norm_Z = 0, norm_psi = 0, norm_h = 0;
    double chain_residual = 0;
    std::optional<ClassTag> psi_class;
    std::vector<ClassTag> X_chain_class;
    ClassTag psi_bound;
    std::vector<ClassTag> X_chain_bound;
};

template <typename C>
struct NormalFormResult {
    std::size_t n1 = 0, n2 = 0;
    PoissonSeries<C> h0;
    PoissonSeries<C> Z0; // h0 + mu f0
    std::vector<PoissonSeries<C>> shells; // h_1..h_{r+buffer}
    std::vector<OrderData<C>> orders;     // s = 1..r
    int Kprime = 0;
    std::vector<std::string> diagnostics;
    bool class_violation = false;

    Generators<C> generators() const
    {
        Generators<C> x;
        for (const auto &o : orders) {
            x.push_back(o.X);
        }
        return x;
    }
    // Z_0, Z_1, ..., Z_r.
    std::vector<PoissonSeries<C>> normal_form_grades() const
    {
        std::vector<PoissonSeries<C>> z{Z0};
        for (const auto &o : orders) {
            z.push_back(o.Z);
        }
        return z;
    }
    PoissonSeries<C> normal_form() const
    {
        PoissonSeries<C> z = Z0;
        for (const auto &o : orders) {
            z += o.Z;
        }
        return z;
    }
    int order() const noexcept
    {
        return static_cast<int>(orders.size());
    }
};

namespace detail
{

template <typename C>
C from_rational(const rational &q)
{
    return coeff_traits<C>::from_rational(q);
}

// Sum of |c|, used as the scale for internal identity checks.
template <typename C>
double l1_mass(const PoissonSeries<C> &g)
{
    double m = 0;
    for (const auto &[key, c] : g) {
        m += coeff_traits<C>::abs(c);
    }
    return m;
}

} // namespace detail

template <typename C>
PoissonSeries<C> frequency_hamiltonian(const FrequencyVector &w, std::size_t n2)
{
    PoissonSeries<C> h0(w.size(), n2);
    for (std::size_t j = 0; j < w.size(); ++j) {
        C c;
        if (w.is_exact()) {
            c = coeff_traits<C>::from_rational(w.exact_values()[j]);
        } else if constexpr (coeff_traits<C>::exact) {
            throw configuration_error("exact coefficients need an exact-rational frequency vector");
        } else {
            c = coeff_traits<C>::from_real(w.values()[j]);
        }
        h0 += PoissonSeries<C>::action(w.size(), n2, j, c);
    }
    return h0;
}

template <typename C>
struct HomologicalSolution {
    PoissonSeries<C> X;
    PoissonSeries<C> Z;
};

// Solves Z - {h0, X} = psi with h0 = omega.p: Z is the resonant part of psi and
// X_k = psi_k / (i k.omega) on the rest.
template <typename C>
HomologicalSolution<C> homological_solve(const PoissonSeries<C> &psi, const FrequencyVector &w,
                                         const ResonanceModule &m, std::optional<double> floor = std::nullopt)
{
    if (psi.n1() != w.size()) {
        throw dimension_error("homological_solve: series n1 does not match omega");
    }
    const double fl = floor ? *floor : 1e-12 * w.euclidean_norm();
    HomologicalSolution<C> out{PoissonSeries<C>(psi.n1(), psi.n2()), PoissonSeries<C>(psi.n1(), psi.n2())};
    const C iu = coeff_traits<C>::imag_unit();
    for (const auto &[key, c] : psi) {
        const auto k = key.k();
        if (m.contains(k)) {
            out.Z.add_term(key, c);
            continue;
        }
        const double kw = w.dot(k);
        if (!(std::abs(kw) >= fl)) {
            throw small_divisor_error("small divisor |k.omega| = " + std::to_string(std::abs(kw))
                                          + " below the floor " + std::to_string(fl),
                                      std::vector<int>(k.begin(), k.end()), kw);
        }
        C divisor;
        if constexpr (coeff_traits<C>::exact) {
            divisor = iu * coeff_traits<C>::from_rational(w.exact_dot(k));
        } else {
            divisor = iu * C(kw, 0.0);
        }
        out.X.add_term(key, c / divisor);
    }
    return out;
}

template <typename C>
struct RelegationStep {
    PoissonSeries<C> X;
    PoissonSeries<C> Z;
    std::vector<PoissonSeries<C>> X_chain;
    std::vector<PoissonSeries<C>> Z_chain;
    PoissonSeries<C> leftover;
    // max over j of |Z_{s,j} - {h0, X_{s,j}} - rhs_j| / scale.
    double chain_residual = 0;
};

// Z_{s,0} - {h0, X_{s,0}} = psi, Z_{s,j} - {h0, X_{s,j}} = {mu f0, X_{s,j-1}} for j = 1..L.
template <typename C>
RelegationStep<C> relegation_step(const PoissonSeries<C> &psi, const PoissonSeries<C> &f0, const rational &mu, int L,
                                  const FrequencyVector &w, const ResonanceModule &m,
                                  std::optional<double> floor = std::nullopt)
{
    if (L < 0) {
        throw parameter_error("relegation depth L must be non-negative");
    }
    psi.check_dims(f0);
    const PoissonSeries<C> muf0 = f0 * detail::from_rational<C>(mu);
    const PoissonSeries<C> h0 = frequency_hamiltonian<C>(w, psi.n2());
    RelegationStep<C> out;
    out.X = PoissonSeries<C>(psi.n1(), psi.n2());
    out.Z = out.X;
    PoissonSeries<C> rhs = psi;
    for (int j = 0; j <= L; ++j) {
        auto sol = homological_solve(rhs, w, m, floor);
        const auto check = sol.Z - poisson_bracket(h0, sol.X) - rhs;
        if (!check.empty()) {
            const double scale = std::max(detail::l1_mass(rhs), 1e-300);
            out.chain_residual = std::max(out.chain_residual, detail::l1_mass(check) / scale);
        }
        out.X += sol.X;
        out.Z += sol.Z;
        if (j < L) {
            rhs = muf0.empty() || sol.X.empty() ? PoissonSeries<C>(psi.n1(), psi.n2()) : poisson_bracket(muf0, sol.X);
        }
        out.X_chain.push_back(std::move(sol.X));
        out.Z_chain.push_back(std::move(sol.Z));
    }
    out.leftover = muf0.empty() || out.X_chain.back().empty() ? PoissonSeries<C>(psi.n1(), psi.n2())
                                                              : lie_derivative(out.X_chain.back(), muf0);
    return out;
}

// epsilon H1 split into shells h_1..h_{tracked}; harmonics beyond the last shell are folded into it.
template <typename C>
std::vector<PoissonSeries<C>> split_perturbation(const PoissonSeries<C> &H1, const rational &epsilon, int K,
                                                 int tracked, std::vector<std::string> *diagnostics = nullptr)
{
    if (tracked < 1) {
        throw parameter_error("split_perturbation: at least one shell must be tracked");
    }
    const auto shells = fourier_split(H1 * detail::from_rational<C>(epsilon), K);
    std::vector<PoissonSeries<C>> out(tracked, PoissonSeries<C>(H1.n1(), H1.n2()));
    std::size_t folded = 0;
    for (std::size_t i = 0; i < shells.size(); ++i) {
        if (static_cast<int>(i) < tracked) {
            out[i] = shells[i];
        } else {
            out.back() += shells[i];
            folded += shells[i].size();
        }
    }
    if (folded > 0 && diagnostics) {
        diagnostics->push_back("folded " + std::to_string(folded) + " terms with |k| >= "
                               + std::to_string(tracked * K) + " into shell " + std::to_string(tracked));
    }
    return out;
}

namespace detail
{

// Incremental table ez[j][m] = E_m Z_j under the generators computed so far.
template <typename C>
void extend_transform_table(std::vector<std::vector<PoissonSeries<C>>> &ez, const Generators<C> &x, int m)
{
    for (auto &row : ez) {
        while (static_cast<int>(row.size()) <= m) {
            const int mm = static_cast<int>(row.size());
            PoissonSeries<C> acc(row[0].n1(), row[0].n2());
            for (int i = 1; i <= mm; ++i) {
                const auto *xi = generator(x, i);
                if (!xi || row[mm - i].empty()) {
                    continue;
                }
                acc += ratio<C>(i, mm) * lie_derivative(*xi, row[mm - i]);
            }
            row.push_back(std::move(acc));
        }
    }
}

template <typename F>
auto run_parallel(int threads, int count, F &&f)
{
    using R = decltype(f(0));
    std::vector<R> out;
    out.reserve(count);
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) {
            out.push_back(f(i));
        }
        return out;
    }
    std::vector<std::future<R>> fut;
    for (int i = 0; i < count; ++i) {
        fut.push_back(std::async(std::launch::async, f, i));
        if (static_cast<int>(fut.size()) >= threads) {
            for (auto &ff : fut) {
                out.push_back(ff.get());
            }
            fut.clear();
        }
    }
    for (auto &ff : fut) {
        out.push_back(ff.get());
    }
    return out;
}

} // namespace detail

// Psi_s = h_s - sum_{j<s} (j/s)(L_{X_j} h_{s-j} + E_{s-j} Z_j)
//             - sum_{j<s} (j/s) L_{X_j}(l_{s-j} - l_{s-j-1}) - l_{s-1},
// with l_t = L_{X_{t,L}} (mu f0) and l_0 = 0. `ez[j-1][m]` must hold E_m Z_j for m <= s - j.
template <typename C>
PoissonSeries<C> assemble_psi(int s, const std::vector<OrderData<C>> &history, const std::vector<PoissonSeries<C>> &h,
                              const std::vector<std::vector<PoissonSeries<C>>> &ez, int threads = 1)
{
    if (s < 1) {
        throw parameter_error("assemble_psi: s must be >= 1");
    }
    if (static_cast<int>(history.size()) < s - 1 || static_cast<int>(h.size()) < s) {
        throw sequencing_error("assemble_psi: orders below " + std::to_string(s) + " are not complete");
    }
    if (static_cast<int>(ez.size()) < s - 1) {
        throw sequencing_error("assemble_psi: transform table is incomplete");
    }
    PoissonSeries<C> psi = h[s - 1];
    if (s == 1) {
        return psi;
    }
    const std::size_t n1 = psi.n1(), n2 = psi.n2();
    auto leftover = [&](int t) { return t >= 1 ? history[t - 1].leftover : PoissonSeries<C>(n1, n2); };
    auto term = [&](int idx) {
        const int j = idx + 1;
        const auto &xj = history[j - 1].X;
        if (static_cast<int>(ez[j - 1].size()) <= s - j) {
            throw sequencing_error("assemble_psi: transform table is incomplete");
        }
        PoissonSeries<C> inner = h[s - j - 1] + leftover(s - j) - leftover(s - j - 1);
        PoissonSeries<C> t = xj.empty() || inner.empty() ? PoissonSeries<C>(n1, n2) : lie_derivative(xj, inner);
        t += ez[j - 1][s - j];
        return t * detail::ratio<C>(j, s);
    };
    const auto parts = detail::run_parallel(threads, s - 1, term);
    for (const auto &p : parts) {
        psi -= p;
    }
    psi -= leftover(s - 1);
    return psi;
}

namespace detail
{

template <typename C>
std::size_t total_terms(const NormalFormResult<C> &res)
{
    std::size_t n = 0;
    for (const auto &o : res.orders) {
        n += o.X.size() + o.Z.size() + o.psi.size() + o.leftover.size();
    }
    return n;
}

} // namespace detail

template <typename C>
NormalFormResult<C> relegate(const HamiltonianSpec<C> &spec)
{
    const std::size_t n1 = spec.n1(), n2 = spec.n2();
    if (n1 == 0) {
        throw dimension_error("at least one action-angle pair is required");
    }
    if (spec.f0.n1() != n1 || spec.H1.n1() != n1 || spec.H1.n2() != n2) {
        throw dimension_error("f0, H1 and omega dimensions disagree");
    }
    if (spec.K < 1) {
        throw parameter_error("K must be a positive integer");
    }
    if (spec.L < 0 || spec.r < 1 || spec.buffer < 0) {
        throw parameter_error("need L >= 0, r >= 1 and buffer >= 0");
    }
    if (spec.epsilon < 0 || spec.mu < 0) {
        throw parameter_error("mu and epsilon must be non-negative");
    }
    spec.dp.validate();

    NormalFormResult<C> res;
    res.n1 = n1;
    res.n2 = n2;
    const ResonanceModule m = resonance_module(spec.omega);
    for (const auto &[key, c] : spec.f0) {
        if (!m.contains(key.k())) {
            auto k = key.harmonic();
            std::string s;
            for (auto x : k) {
                s += std::to_string(x) + " ";
            }
            throw configuration_error("f0 contains the non-resonant harmonic (" + s + "); {h0, f0} must vanish");
        }
    }
    res.Kprime = spec.f0.trig_degree();
    if (spec.Kprime) {
        if (*spec.Kprime < res.Kprime) {
            throw configuration_error("declared Kprime is smaller than the trigonometric degree of f0");
        }
        res.Kprime = *spec.Kprime;
    }
    if (spec.mu <= spec.epsilon && !(spec.mu == 0 && spec.epsilon == 0)) {
        res.diagnostics.push_back("warning: mu <= epsilon; the splitting assumes mu > epsilon");
    }

    res.h0 = frequency_hamiltonian<C>(spec.omega, n2);
    res.Z0 = res.h0 + spec.f0 * detail::from_rational<C>(spec.mu);
    res.shells = split_perturbation(spec.H1, spec.epsilon, spec.K, spec.r + std::max(spec.buffer, 1),
                                    &res.diagnostics);
    if (std::all_of(res.shells.begin(), res.shells.end(), [](const auto &h) { return h.empty(); })) {
        return res; // nothing to normalize: Z = Z_0
    }
    Generators<C> x;
    std::vector<std::vector<PoissonSeries<C>>> ez; // ez[j-1][m] = E_m Z_j

    for (int s = 1; s <= spec.r; ++s) {
        for (int j = 1; j < s; ++j) {
            detail::extend_transform_table(ez, x, s - j);
        }
        OrderData<C> od;
        od.s = s;
        od.h = res.shells[s - 1];
        od.psi = assemble_psi(s, res.orders, res.shells, ez, spec.threads);
        auto step = relegation_step(od.psi, spec.f0, spec.mu, spec.L, spec.omega, m, spec.divisor_floor());
        od.X = std::move(step.X);
        od.Z = std::move(step.Z);
        od.X_chain = std::move(step.X_chain);
        od.Z_chain = std::move(step.Z_chain);
        od.leftover = std::move(step.leftover);
        od.chain_residual = step.chain_residual;
        if (od.chain_residual > 1e-12) {
            throw error("homological chain identity failed at order " + std::to_string(s) + " (relative residual "
                        + std::to_string(od.chain_residual) + ")");
        }
        for (const auto &[key, c] : od.Z) {
            if (!m.contains(key.k())) {
                throw error("normal-form term with a non-resonant harmonic at order " + std::to_string(s));
            }
        }
        od.norm_h = weighted_norm(od.h, spec.dp);
        od.norm_psi = weighted_norm(od.psi, spec.dp);
        od.norm_X = weighted_norm(od.X, spec.dp);
        od.norm_Z = weighted_norm(od.Z, spec.dp);

        od.psi_bound = {s * spec.K, s * (spec.K + spec.L * res.Kprime)};
        for (int j = 0; j <= spec.L; ++j) {
            od.X_chain_bound.push_back({s * spec.K, s * (spec.K + spec.L * res.Kprime) + j * res.Kprime});
        }
        if (spec.check_classes) {
            od.psi_class = class_of(od.psi, m);
            if (!od.psi_class->within(od.psi_bound)) {
                res.class_violation = true;
                res.diagnostics.push_back("order " + std::to_string(s) + ": Psi class (" + std::to_string(od.psi_class->K1)
                                          + ", " + std::to_string(od.psi_class->K2) + ") exceeds ("
                                          + std::to_string(od.psi_bound.K1) + ", " + std::to_string(od.psi_bound.K2)
                                          + ")");
            }
            for (int j = 0; j <= spec.L; ++j) {
                od.X_chain_class.push_back(class_of(od.X_chain[j], m));
                if (!od.X_chain_class.back().within(od.X_chain_bound[j])) {
                    res.class_violation = true;
                    res.diagnostics.push_back("order " + std::to_string(s) + ": X_{s," + std::to_string(j)
                                              + "} class exceeds its bound");
                }
            }
        }
        x.push_back(od.X);
        ez.push_back({od.Z});
        res.orders.push_back(std::move(od));
        if (detail::total_terms(res) > spec.term_budget) {
            throw resource_error("term budget of " + std::to_string(spec.term_budget) + " exceeded at order "
                                 + std::to_string(s));
        }
    }
    return res;
}

// T_X Z^{(r)} - H, keeping grades <= max_grade of the transform. H includes every shell of epsilon H1.
template <typename C>
PoissonSeries<C> transform_residual(const NormalFormResult<C> &res, int max_grade)
{
    const auto graded = lie_transform_graded(res.generators(), res.normal_form_grades(), max_grade);
    PoissonSeries<C> out(res.n1, res.n2);
    for (const auto &g : graded) {
        out += g;
    }
    out -= res.Z0;
    for (const auto &h : res.shells) {
        out -= h;
    }
    return out;
}

// Grade-s part of T_X Z^{(r)} minus h_s (s = 1..max_grade); equals l_s - l_{s-1} for s <= r.
template <typename C>
std::vector<PoissonSeries<C>> graded_defect(const NormalFormResult<C> &res, int max_grade)
{
    const auto graded = lie_transform_graded(res.generators(), res.normal_form_grades(), max_grade);
    std::vector<PoissonSeries<C>> out;
    for (int s = 1; s <= max_grade; ++s) {
        PoissonSeries<C> d = graded[s];
        if (s <= static_cast<int>(res.shells.size())) {
            d -= res.shells[s - 1];
        }
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace relegation
