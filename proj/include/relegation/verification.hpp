#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "lie_transform.hpp"
#include "norms.hpp"
#include "series.hpp"

namespace relegation
{

// Real phase-space point; the Cartesian block uses z = (x + iy)/sqrt2, i zbar = (y + ix)/sqrt2.
struct PhasePoint {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t n1() const noexcept
    {
        return p.size();
    }
    std::size_t n2() const noexcept
    {
        return x.size();
    }
    void reduce_angles()
    {
        for (auto &a : q) {
            a = std::fmod(a, 2 * std::numbers::pi);
            if (a < 0) {
                a += 2 * std::numbers::pi;
            }
        }
    }
    std::complex<double> z(std::size_t j) const
    {
        return std::complex<double>(x[j], y[j]) / std::numbers::sqrt2;
    }
    std::complex<double> w(std::size_t j) const
    {
        return std::complex<double>(y[j], x[j]) / std::numbers::sqrt2;
    }
};

// Flat evaluation form of a series.
class CompiledSeries
{
public:
    CompiledSeries() = default;

    template <typename C>
    explicit CompiledSeries(const PoissonSeries<C> &g) : m_n1(g.n1()), m_n2(g.n2())
    {
        for (const auto &[key, c] : g) {
            m_coeff.push_back(coeff_traits<C>::to_complex(c));
            m_exps.insert(m_exps.end(), key.packed().begin(), key.packed().end());
        }
    }

    std::size_t size() const noexcept
    {
        return m_coeff.size();
    }

    std::complex<double> operator()(const PhasePoint &pt) const
    {
        if (pt.p.size() != m_n1 || pt.q.size() != m_n1 || pt.x.size() != m_n2 || pt.y.size() != m_n2) {
            throw dimension_error("phase point dimensions do not match the series");
        }
        std::vector<std::complex<double>> zz(m_n2), ww(m_n2);
        for (std::size_t j = 0; j < m_n2; ++j) {
            zz[j] = pt.z(j);
            ww[j] = pt.w(j);
        }
        const std::size_t stride = 2 * m_n1 + 2 * m_n2;
        std::complex<double> sum = 0;
        for (std::size_t t = 0; t < m_coeff.size(); ++t) {
            const int *e = m_exps.data() + t * stride;
            double phase = 0;
            double mono = 1;
            for (std::size_t j = 0; j < m_n1; ++j) {
                phase += e[j] * pt.q[j];
                if (e[m_n1 + j]) {
                    mono *= ipow(pt.p[j], e[m_n1 + j]);
                }
            }
            std::complex<double> v = m_coeff[t] * mono * std::polar(1.0, phase);
            for (std::size_t j = 0; j < m_n2; ++j) {
                if (e[2 * m_n1 + j]) {
                    v *= ipow(zz[j], e[2 * m_n1 + j]);
                }
                if (e[2 * m_n1 + m_n2 + j]) {
                    v *= ipow(ww[j], e[2 * m_n1 + m_n2 + j]);
                }
            }
            sum += v;
        }
        return sum;
    }

private:
    template <typename T>
    static T ipow(T b, int e)
    {
        T r = 1;
        while (e > 0) {
            if (e & 1) {
                r *= b;
            }
            b *= b;
            e >>= 1;
        }
        return r;
    }

    std::size_t m_n1 = 0, m_n2 = 0;
    std::vector<std::complex<double>> m_coeff;
    std::vector<int> m_exps;
};

// Value of g at a real point. With require_real the imaginary part must stay below
// 1e-10 (1 + |value|).
template <typename C>
std::complex<double> evaluate(const PoissonSeries<C> &g, const PhasePoint &pt, bool require_real = false)
{
    const auto v = CompiledSeries(g)(pt);
    if (require_real && std::abs(v.imag()) > 1e-10 * (1 + std::abs(v))) {
        throw error("series is not real-valued at the given point (imaginary part " + std::to_string(v.imag()) + ")");
    }
    return v;
}

// x_j and y_j as series in (z, i zbar).
inline Series chart_x(std::size_t n1, std::size_t n2, std::size_t j)
{
    const double s = 1 / std::numbers::sqrt2;
    return Series::z(n1, n2, j, {s, 0}) + Series::w(n1, n2, j, {0, -s});
}
inline Series chart_y(std::size_t n1, std::size_t n2, std::size_t j)
{
    const double s = 1 / std::numbers::sqrt2;
    return Series::w(n1, n2, j, {s, 0}) + Series::z(n1, n2, j, {0, -s});
}

// Confirms {y_j, x_j} = 1 and {x_j, x_j} = {y_j, y_j} = 0 for the chart; throws otherwise.
inline void validate_real_chart(std::size_t n2 = 1)
{
    for (std::size_t j = 0; j < n2; ++j) {
        const auto x = chart_x(1, n2, j), y = chart_y(1, n2, j);
        const auto b = poisson_bracket(y, x);
        const auto one = Series::constant(1, n2, {1, 0});
        const auto diff = b - one;
        for (const auto &[key, c] : diff) {
            if (std::abs(c) > 1e-14) {
                throw error("real chart check failed: {y, x} != 1");
            }
        }
        if (poisson_bracket(x, x).size() || poisson_bracket(y, y).size()) {
            throw error("real chart check failed: self brackets do not vanish");
        }
    }
}

// Hamilton's equations for a series Hamiltonian, with derivatives taken symbolically.
class HamiltonianField
{
public:
    template <typename C>
    explicit HamiltonianField(const PoissonSeries<C> &H) : m_n1(H.n1()), m_n2(H.n2()), m_H(H)
    {
        for (std::size_t j = 0; j < m_n1; ++j) {
            m_dp.emplace_back(diff_p(H, j));
            m_dq.emplace_back(diff_q(H, j));
        }
        for (std::size_t j = 0; j < m_n2; ++j) {
            m_dz.emplace_back(diff_z(H, j));
            m_dw.emplace_back(diff_w(H, j));
        }
    }

    std::size_t dim() const noexcept
    {
        return 2 * m_n1 + 2 * m_n2;
    }
    std::size_t n1() const noexcept
    {
        return m_n1;
    }
    std::size_t n2() const noexcept
    {
        return m_n2;
    }

    // State layout [p | q | x | y].
    PhasePoint point(const std::vector<double> &s) const
    {
        PhasePoint pt;
        pt.p.assign(s.begin(), s.begin() + m_n1);
        pt.q.assign(s.begin() + m_n1, s.begin() + 2 * m_n1);
        pt.x.assign(s.begin() + 2 * m_n1, s.begin() + 2 * m_n1 + m_n2);
        pt.y.assign(s.begin() + 2 * m_n1 + m_n2, s.end());
        return pt;
    }
    std::vector<double> state(const PhasePoint &pt) const
    {
        std::vector<double> s;
        s.insert(s.end(), pt.p.begin(), pt.p.end());
        s.insert(s.end(), pt.q.begin(), pt.q.end());
        s.insert(s.end(), pt.x.begin(), pt.x.end());
        s.insert(s.end(), pt.y.begin(), pt.y.end());
        return s;
    }

    // dp = -H_q, dq = H_p, dx = -dH/dy, dy = dH/dx.
    void operator()(const std::vector<double> &s, std::vector<double> &out) const
    {
        const PhasePoint pt = point(s);
        out.resize(dim());
        for (std::size_t j = 0; j < m_n1; ++j) {
            out[j] = -m_dq[j](pt).real();
            out[m_n1 + j] = m_dp[j](pt).real();
        }
        const double s2 = 1 / std::numbers::sqrt2;
        const std::complex<double> iu(0, 1);
        for (std::size_t j = 0; j < m_n2; ++j) {
            const auto hz = m_dz[j](pt), hw = m_dw[j](pt);
            const auto dHdx = (hz + iu * hw) * s2;
            const auto dHdy = (iu * hz + hw) * s2;
            out[2 * m_n1 + j] = -dHdy.real();
            out[2 * m_n1 + m_n2 + j] = dHdx.real();
        }
    }

    double energy(const std::vector<double> &s) const
    {
        return m_H(point(s)).real();
    }

private:
    std::size_t m_n1, m_n2;
    CompiledSeries m_H;
    std::vector<CompiledSeries> m_dp, m_dq, m_dz, m_dw;
};

namespace detail
{

// One fixed step of the 12-stage, 8th-order Dormand-Prince scheme.
template <typename F>
void dop853_step(const F &f, std::vector<double> &y, double h)
{
    constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                     a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                     a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                     a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                     a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                     a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                     a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                     a76 = -1.7578125E-2, a81 = 3.70920001185047927108779319836E-2,
                     a84 = 1.70383925712239993810214054705E-1, a85 = 1.07262030446373284651809199168E-1,
                     a86 = -1.53194377486244017527936158236E-2, a87 = 8.27378916381402288758473766002E-3,
                     a91 = 6.24110958716075717114429577812E-1, a94 = -3.36089262944694129406857109825E0,
                     a95 = -8.68219346841726006818189891453E-1, a96 = 2.75920996994467083049415600797E1,
                     a97 = 2.01540675504778934086186788979E1, a98 = -4.34898841810699588477366255144E1,
                     a101 = 4.77662536438264365890433908527E-1, a104 = -2.48811461997166764192642586468E0,
                     a105 = -5.90290826836842996371446475743E-1, a106 = 2.12300514481811942347288949897E1,
                     a107 = 1.52792336328824235832596922938E1, a108 = -3.32882109689848629194453265587E1,
                     a109 = -2.03312017085086261358222928593E-2, a111 = -9.3714243008598732571704021658E-1,
                     a114 = 5.18637242884406370830023853209E0, a115 = 1.09143734899672957818500254654E0,
                     a116 = -8.14978701074692612513997267357E0, a117 = -1.85200656599969598641566180701E1,
                     a118 = 2.27394870993505042818970056734E1, a119 = 2.49360555267965238987089396762E0,
                     a1110 = -3.0467644718982195003823669022E0, a121 = 2.27331014751653820792359768449E0,
                     a124 = -1.05344954667372501984066689879E1, a125 = -2.00087205822486249909675718444E0,
                     a126 = -1.79589318631187989172765950534E1, a127 = 2.79488845294199600508499808837E1,
                     a128 = -2.85899827713502369474065508674E0, a129 = -8.87285693353062954433549289258E0,
                     a1210 = 1.23605671757943030647266201528E1, a1211 = 6.43392746015763530355970484046E-1;
    constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                     b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                     b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                     b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;
    const std::size_t n = y.size();
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, t(n);
    auto stage = [&](std::vector<double> &out, auto &&combine) {
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = y[i] + h * combine(i);
        }
        f(t, out);
    };
    f(y, k1);
    stage(k2, [&](std::size_t i) { return a21 * k1[i]; });
    stage(k3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    stage(k4, [&](std::size_t i) { return a41 * k1[i] + a43 * k3[i]; });
    stage(k5, [&](std::size_t i) { return a51 * k1[i] + a53 * k3[i] + a54 * k4[i]; });
    stage(k6, [&](std::size_t i) { return a61 * k1[i] + a64 * k4[i] + a65 * k5[i]; });
    stage(k7, [&](std::size_t i) { return a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]; });
    stage(k8, [&](std::size_t i) { return a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]; });
    stage(k9, [&](std::size_t i) {
        return a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] + a98 * k8[i];
    });
    stage(k10, [&](std::size_t i) {
        return a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] + a107 * k7[i] + a108 * k8[i] + a109 * k9[i];
    });
    stage(k11, [&](std::size_t i) {
        return a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] + a117 * k7[i] + a118 * k8[i] + a119 * k9[i]
               + a1110 * k10[i];
    });
    stage(k12, [&](std::size_t i) {
        return a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] + a127 * k7[i] + a128 * k8[i] + a129 * k9[i]
               + a1210 * k10[i] + a1211 * k11[i];
    });
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += h * (b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k11[i]
                     + b12 * k12[i]);
    }
}

} // namespace detail

struct DriftRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> p_path;
    std::vector<double> phi0_path;
    std::vector<double> phi_path;
    std::vector<double> dist_path;
    double max_fast_drift_distance = 0;
    double max_energy_error = 0;
    // Set when the orbit left the real domain; the record stops there.
    std::optional<double> exit_time;
};

struct FlowOptions {
    // Record every n-th step (the final step is always recorded).
    int record_every = 1;
    // Real domain |p_j| < rho_fraction rho, |z_j| < R.
    std::optional<DomainParams> domain;
    // Observables along the orbit: Phi0 = lambda.p and its transformed version Phi.
    std::optional<CompiledSeries> phi0;
    std::optional<CompiledSeries> phi;
    // Basis of the resonance module for the distance to the plane of fast drift.
    std::vector<std::vector<double>> plane_basis;
};

namespace detail
{

// Distance from v to span(basis) (Euclidean), basis given as rows.
inline double distance_to_span(std::vector<double> v, const std::vector<std::vector<double>> &basis)
{
    std::vector<std::vector<double>> ortho;
    for (auto b : basis) {
        for (const auto &o : ortho) {
            double d = 0;
            for (std::size_t i = 0; i < b.size(); ++i) {
                d += b[i] * o[i];
            }
            for (std::size_t i = 0; i < b.size(); ++i) {
                b[i] -= d * o[i];
            }
        }
        double n = 0;
        for (auto x : b) {
            n += x * x;
        }
        n = std::sqrt(n);
        if (n > 1e-12) {
            for (auto &x : b) {
                x /= n;
            }
            ortho.push_back(std::move(b));
        }
    }
    for (const auto &o : ortho) {
        double d = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            d += v[i] * o[i];
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] -= d * o[i];
        }
    }
    double n = 0;
    for (auto x : v) {
        n += x * x;
    }
    return std::sqrt(n);
}

inline bool in_real_domain(const PhasePoint &pt, const DomainParams &dp)
{
    for (auto p : pt.p) {
        if (!(std::abs(p) < dp.rho)) {
            return false;
        }
    }
    for (std::size_t j = 0; j < pt.n2(); ++j) {
        if (!(std::abs(pt.z(j)) < dp.R)) {
            return false;
        }
    }
    return true;
}

} // namespace detail

inline std::vector<std::vector<double>> module_basis_rows(const ResonanceModule &m)
{
    std::vector<std::vector<double>> rows;
    for (const auto &b : m.basis()) {
        rows.emplace_back(b.begin(), b.end());
    }
    return rows;
}

// Fixed-step integration of Hamilton's equations over [0, t_span].
template <typename C>
DriftRecord integrate_flow(const PoissonSeries<C> &H, const PhasePoint &pt0, double t_span, double dt,
                           const FlowOptions &opt = {})
{
    if (!(dt > 0) || !(t_span >= 0)) {
        throw parameter_error("integrate_flow: need dt > 0 and t_span >= 0");
    }
    if (opt.record_every < 1) {
        throw parameter_error("integrate_flow: record_every must be >= 1");
    }
    const HamiltonianField field(H);
    std::vector<double> y = field.state(pt0);
    const double e0 = field.energy(y);
    DriftRecord rec;
    const std::vector<double> p0 = pt0.p;
    auto record = [&](double t, const std::vector<double> &s) {
        const PhasePoint pt = field.point(s);
        rec.times.push_back(t);
        rec.p_path.push_back(pt.p);
        std::vector<double> dpv(p0.size());
        for (std::size_t j = 0; j < p0.size(); ++j) {
            dpv[j] = pt.p[j] - p0[j];
        }
        const double dist = detail::distance_to_span(dpv, opt.plane_basis);
        rec.dist_path.push_back(dist);
        rec.max_fast_drift_distance = std::max(rec.max_fast_drift_distance, dist);
        if (opt.phi0) {
            rec.phi0_path.push_back((*opt.phi0)(pt).real());
        }
        if (opt.phi) {
            rec.phi_path.push_back((*opt.phi)(pt).real());
        }
    };
    record(0.0, y);
    const long long steps = static_cast<long long>(std::ceil(t_span / dt - 1e-9));
    const double h = steps > 0 ? t_span / steps : dt;
    for (long long i = 1; i <= steps; ++i) {
        detail::dop853_step(field, y, h);
        for (auto v : y) {
            if (!std::isfinite(v)) {
                throw error("integration produced a non-finite state at t = " + std::to_string(i * h));
            }
        }
        rec.max_energy_error = std::max(rec.max_energy_error, std::abs(field.energy(y) - e0));
        const double t = i * h;
        if (opt.domain && !detail::in_real_domain(field.point(y), *opt.domain)) {
            rec.exit_time = t;
            record(t, y);
            break;
        }
        if (i % opt.record_every == 0 || i == steps) {
            record(t, y);
        }
    }
    return rec;
}

// Max distance of p(t) from the plane p(0) + span(M).
inline double measure_drift(const DriftRecord &rec, const ResonanceModule &m)
{
    if (rec.p_path.empty()) {
        throw parameter_error("measure_drift: empty record");
    }
    const auto rows = module_basis_rows(m);
    double worst = 0;
    for (const auto &p : rec.p_path) {
        std::vector<double> d(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) {
            d[j] = p[j] - rec.p_path.front()[j];
        }
        worst = std::max(worst, detail::distance_to_span(d, rows));
    }
    return worst;
}

inline void write_drift_csv(std::ostream &os, const DriftRecord &rec)
{
    const std::size_t n1 = rec.p_path.empty() ? 0 : rec.p_path.front().size();
    os << "t";
    for (std::size_t j = 0; j < n1; ++j) {
        os << ",p" << (j + 1);
    }
    os << ",phi0,phi,dist\n";
    os.precision(17);
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        os << rec.times[i];
        for (auto v : rec.p_path[i]) {
            os << ',' << v;
        }
        os << ',' << (i < rec.phi0_path.size() ? rec.phi0_path[i] : 0.0) << ','
           << (i < rec.phi_path.size() ? rec.phi_path[i] : 0.0) << ',' << rec.dist_path[i] << '\n';
    }
}

namespace detail
{

template <typename C>
void oracle_expand(const Generators<C> &x, const PoissonSeries<C> &g, int remaining, C weight, Direction dir,
                   std::vector<int> &seq, PoissonSeries<C> &out)
{
    if (remaining == 0) {
        // forward: L_{X_{i1}} ... L_{X_{ik}} g (i1 outermost); inverse: i1 innermost.
        PoissonSeries<C> v = g;
        if (dir == Direction::forward) {
            for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
                v = poisson_bracket(x[*it - 1], v);
            }
        } else {
            for (int i : seq) {
                v = poisson_bracket(x[i - 1], v);
            }
        }
        out += v * weight;
        return;
    }
    for (int i = 1; i <= remaining; ++i) {
        if (static_cast<std::size_t>(i) > x.size()) {
            break;
        }
        C w = weight * ratio<C>(i, remaining);
        if (dir == Direction::inverse) {
            w = -w;
        }
        seq.push_back(i);
        oracle_expand(x, g, remaining - i, w, dir, seq, out);
        seq.pop_back();
    }
}

} // namespace detail

// Independent Lie transform: every grade expanded as an explicit sum over compositions of the
// grade, with nested brackets evaluated from scratch.
template <typename C>
PoissonSeries<C> oracle_lie_apply(const Generators<C> &x, const PoissonSeries<C> &g, int order,
                                  Direction dir = Direction::forward)
{
    PoissonSeries<C> out = g;
    for (int j = 1; j <= order; ++j) {
        std::vector<int> seq;
        detail::oracle_expand(x, g, j, detail::ratio<C>(1, 1), dir, seq, out);
    }
    return out;
}

// Uniform points with |p_j| < f rho, q in [0, 2pi), |z_j| < f R.
inline std::vector<PhasePoint> sample_points(std::size_t n1, std::size_t n2, const DomainParams &dp, double fraction,
                                             std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), angle(0.0, 2 * std::numbers::pi), unit(0.0, 1.0);
    std::vector<PhasePoint> pts;
    for (std::size_t i = 0; i < count; ++i) {
        PhasePoint pt;
        for (std::size_t j = 0; j < n1; ++j) {
            pt.p.push_back(fraction * dp.rho * u(rng));
            pt.q.push_back(angle(rng));
        }
        for (std::size_t j = 0; j < n2; ++j) {
            // |z| = sqrt((x^2 + y^2)/2) < f R.
            const double rad = fraction * dp.R * std::numbers::sqrt2 * std::sqrt(unit(rng));
            const double th = angle(rng);
            pt.x.push_back(rad * std::cos(th));
            pt.y.push_back(rad * std::sin(th));
        }
        pts.push_back(std::move(pt));
    }
    return pts;
}

} // namespace relegation
