#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "engine.hpp"
#include "estimates.hpp"
#include "series_io.hpp"
#include "verification.hpp"

namespace relegation
{

inline constexpr const char *tool_name = "relegation";
inline constexpr const char *tool_version = "0.1.0";

struct ProblemConfig {
    std::size_t n1 = 1;
    std::size_t n2 = 0;
    std::optional<std::vector<std::string>> omega;
    std::optional<std::vector<double>> omega_float;
    std::optional<std::vector<int_vector>> resonance_basis;
    double zero_tol = 1e-9;
    std::optional<double> gamma;
    std::optional<double> tau;
    json mu = 0;
    json epsilon = 0;
    std::vector<std::string> f0_terms;
    std::vector<std::string> H1_terms;
    std::optional<double> G;
    std::optional<double> H1_norm;
    std::string coefficients = "complex";
};

struct AlgorithmConfig {
    int K = 1;
    std::optional<int> Kprime;
    int L = 1;
    int r = 1;
    double d = 0.125;
    int buffer = 1;
    std::optional<double> small_divisor_floor;
    std::size_t term_budget = 2'000'000;
    double enumeration_budget = default_enumeration_budget;
    bool check_classes = true;
    bool nonresonant_certificate = false;
};

struct VerifyConfig {
    std::size_t points = 100;
    double t_span = 1000;
    double dt = 0.01;
    std::optional<std::vector<double>> lambda;
    int record_every = 100;
    double sample_fraction = 0.75;
    std::vector<double> p0, q0, x0, y0;
    double order_dt = 0.2;
    double order_t_span = 20;
};

struct OutputConfig {
    std::string dir = "out";
    std::string manifest = "manifest.json";
    std::string certificate = "certificate.json";
    std::string drift_csv = "drift.csv";
};

namespace detail
{

inline void reject_unknown(const json &obj, const std::string &block, std::initializer_list<const char *> allowed)
{
    if (!obj.is_object()) {
        throw configuration_error("[" + block + "] must be a table");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[k, v] : obj.items()) {
        if (!ok.count(k)) {
            throw configuration_error("unknown key '" + k + "' in [" + block + "]");
        }
    }
}

inline std::string field(const std::string &block, const std::string &key)
{
    return "[" + block + "]." + key;
}

inline double get_real(const json &obj, const std::string &block, const std::string &key, double def)
{
    if (!obj.contains(key)) {
        return def;
    }
    const auto &v = obj.at(key);
    if (!v.is_number()) {
        throw configuration_error(field(block, key) + " must be a number");
    }
    return v.get<double>();
}

inline std::optional<double> get_opt_real(const json &obj, const std::string &block, const std::string &key)
{
    if (!obj.contains(key)) {
        return std::nullopt;
    }
    return get_real(obj, block, key, 0);
}

inline long long get_integer(const json &obj, const std::string &block, const std::string &key, long long def)
{
    if (!obj.contains(key)) {
        return def;
    }
    const auto &v = obj.at(key);
    if (!v.is_number_integer()) {
        throw configuration_error(field(block, key) + " must be an integer");
    }
    return v.get<long long>();
}

inline bool get_bool(const json &obj, const std::string &block, const std::string &key, bool def)
{
    if (!obj.contains(key)) {
        return def;
    }
    if (!obj.at(key).is_boolean()) {
        throw configuration_error(field(block, key) + " must be true or false");
    }
    return obj.at(key).get<bool>();
}

inline std::string get_string(const json &obj, const std::string &block, const std::string &key,
                              const std::string &def)
{
    if (!obj.contains(key)) {
        return def;
    }
    if (!obj.at(key).is_string()) {
        throw configuration_error(field(block, key) + " must be a string");
    }
    return obj.at(key).get<std::string>();
}

inline std::vector<double> get_real_array(const json &obj, const std::string &block, const std::string &key)
{
    std::vector<double> out;
    if (!obj.contains(key)) {
        return out;
    }
    if (!obj.at(key).is_array()) {
        throw configuration_error(field(block, key) + " must be an array of numbers");
    }
    for (const auto &v : obj.at(key)) {
        if (!v.is_number()) {
            throw configuration_error(field(block, key) + " must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::vector<std::string> read_term_lines(const json &obj, const std::string &block, const std::string &terms_key,
                                                const std::string &file_key, const std::filesystem::path &base)
{
    if (obj.contains(terms_key) && obj.contains(file_key)) {
        throw configuration_error("give only one of " + field(block, terms_key) + " and " + field(block, file_key));
    }
    std::vector<std::string> lines;
    if (obj.contains(terms_key)) {
        if (!obj.at(terms_key).is_array()) {
            throw configuration_error(field(block, terms_key) + " must be an array of term strings");
        }
        for (const auto &v : obj.at(terms_key)) {
            if (!v.is_string()) {
                throw configuration_error(field(block, terms_key) + " must be an array of term strings");
            }
            lines.push_back(v.get<std::string>());
        }
    } else if (obj.contains(file_key)) {
        const auto path = base / get_string(obj, block, file_key, "");
        std::ifstream in(path);
        if (!in) {
            throw configuration_error("cannot open " + field(block, file_key) + " '" + path.string() + "'");
        }
        std::string line;
        bool header = false;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            if (!header) {
                header = true; // dimensions come from [problem]
                continue;
            }
            lines.push_back(line);
        }
    }
    return lines;
}

inline rational to_rational(const json &v, const std::string &name)
{
    if (v.is_number_integer()) {
        return rational(v.get<long long>());
    }
    if (v.is_number()) {
        return rational(v.get<double>());
    }
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const parameter_error &) {
            throw configuration_error(name + ": malformed rational '" + v.get<std::string>() + "'");
        }
    }
    throw configuration_error(name + " must be a number or a rational string");
}

inline json finite_or_null(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

} // namespace detail

struct RunConfig {
    ProblemConfig problem;
    DomainParams domain;
    AlgorithmConfig algorithm;
    VerifyConfig verify;
    OutputConfig output;

    bool exact() const noexcept
    {
        return problem.coefficients == "exact";
    }

    static RunConfig from_json(const json &j, const std::filesystem::path &base = ".")
    {
        using namespace detail;
        if (!j.is_object()) {
            throw configuration_error("configuration must be a table of blocks");
        }
        reject_unknown(j, "top level", {"problem", "domain", "algorithm", "verify", "output"});
        if (!j.contains("problem")) {
            throw configuration_error("missing [problem] block");
        }
        RunConfig c;
        const json empty = json::object();
        const json &p = j.at("problem");
        reject_unknown(p, "problem",
                       {"n1", "n2", "omega", "omega_float", "resonance_basis", "zero_tol", "gamma", "tau", "mu",
                        "epsilon", "f0_terms", "f0_file", "H1_terms", "H1_file", "G", "H1_norm", "coefficients"});
        const long long n1 = get_integer(p, "problem", "n1", -1), n2 = get_integer(p, "problem", "n2", 0);
        if (n1 < 1) {
            throw configuration_error("[problem].n1 must be a positive integer");
        }
        if (n2 < 0) {
            throw configuration_error("[problem].n2 must be a non-negative integer");
        }
        c.problem.n1 = static_cast<std::size_t>(n1);
        c.problem.n2 = static_cast<std::size_t>(n2);
        if (p.contains("omega") == p.contains("omega_float")) {
            throw configuration_error("give exactly one of [problem].omega and [problem].omega_float");
        }
        if (p.contains("omega")) {
            if (!p.at("omega").is_array()) {
                throw configuration_error("[problem].omega must be an array");
            }
            std::vector<std::string> om;
            for (const auto &v : p.at("omega")) {
                if (v.is_string()) {
                    om.push_back(v.get<std::string>());
                } else if (v.is_number_integer()) {
                    om.push_back(std::to_string(v.get<long long>()));
                } else {
                    throw configuration_error(
                        "[problem].omega entries must be integers or rational strings such as \"1/3\"");
                }
                detail::to_rational(json(om.back()), "[problem].omega");
            }
            c.problem.omega = om;
            if (p.contains("resonance_basis")) {
                throw configuration_error("[problem].resonance_basis is only used with omega_float");
            }
        } else {
            c.problem.omega_float = get_real_array(p, "problem", "omega_float");
            if (p.contains("resonance_basis")) {
                const auto &rb = p.at("resonance_basis");
                if (!rb.is_array()) {
                    throw configuration_error("[problem].resonance_basis must be an array of integer arrays");
                }
                std::vector<int_vector> basis;
                for (const auto &row : rb) {
                    if (!row.is_array()) {
                        throw configuration_error("[problem].resonance_basis must be an array of integer arrays");
                    }
                    int_vector v;
                    for (const auto &x : row) {
                        if (!x.is_number_integer()) {
                            throw configuration_error("[problem].resonance_basis entries must be integers");
                        }
                        v.push_back(x.get<std::int64_t>());
                    }
                    basis.push_back(std::move(v));
                }
                c.problem.resonance_basis = basis;
            }
        }
        const std::size_t omega_len = c.problem.omega ? c.problem.omega->size() : c.problem.omega_float->size();
        if (omega_len != c.problem.n1) {
            throw configuration_error("omega has " + std::to_string(omega_len) + " entries but [problem].n1 = "
                                      + std::to_string(n1));
        }
        c.problem.zero_tol = get_real(p, "problem", "zero_tol", 1e-9);
        c.problem.gamma = get_opt_real(p, "problem", "gamma");
        c.problem.tau = get_opt_real(p, "problem", "tau");
        if (p.contains("mu")) {
            c.problem.mu = p.at("mu");
        }
        if (p.contains("epsilon")) {
            c.problem.epsilon = p.at("epsilon");
        }
        if (to_rational(c.problem.mu, "[problem].mu") < 0) {
            throw configuration_error("[problem].mu must be non-negative");
        }
        if (to_rational(c.problem.epsilon, "[problem].epsilon") < 0) {
            throw configuration_error("[problem].epsilon must be non-negative");
        }
        c.problem.f0_terms = read_term_lines(p, "problem", "f0_terms", "f0_file", base);
        c.problem.H1_terms = read_term_lines(p, "problem", "H1_terms", "H1_file", base);
        c.problem.G = get_opt_real(p, "problem", "G");
        c.problem.H1_norm = get_opt_real(p, "problem", "H1_norm");
        c.problem.coefficients = get_string(p, "problem", "coefficients", "complex");
        if (c.problem.coefficients != "complex" && c.problem.coefficients != "exact") {
            throw configuration_error("[problem].coefficients must be \"complex\" or \"exact\"");
        }
        if (c.exact() && !c.problem.omega) {
            throw configuration_error("[problem].coefficients = \"exact\" needs a rational omega");
        }

        const json &d = j.contains("domain") ? j.at("domain") : empty;
        reject_unknown(d, "domain", {"rho", "sigma", "R"});
        c.domain.rho = get_real(d, "domain", "rho", 1.0);
        c.domain.sigma = get_real(d, "domain", "sigma", 1.0);
        c.domain.R = get_real(d, "domain", "R", 1.0);
        try {
            c.domain.validate();
        } catch (const parameter_error &e) {
            throw configuration_error(std::string("[domain]: ") + e.what());
        }

        const json &a = j.contains("algorithm") ? j.at("algorithm") : empty;
        reject_unknown(a, "algorithm",
                       {"K", "Kprime", "L", "r", "d", "buffer", "small_divisor_floor", "term_budget",
                        "enumeration_budget", "check_classes", "nonresonant_certificate"});
        const long long K = get_integer(a, "algorithm", "K", 1);
        if (K < 1) {
            throw configuration_error("[algorithm].K must be a positive integer, got " + std::to_string(K));
        }
        c.algorithm.K = static_cast<int>(K);
        if (a.contains("Kprime")) {
            const long long kp = get_integer(a, "algorithm", "Kprime", 0);
            if (kp < 0) {
                throw configuration_error("[algorithm].Kprime must be non-negative");
            }
            c.algorithm.Kprime = static_cast<int>(kp);
        }
        const long long L = get_integer(a, "algorithm", "L", 1);
        if (L < 0) {
            throw configuration_error("[algorithm].L must be non-negative");
        }
        c.algorithm.L = static_cast<int>(L);
        const long long r = get_integer(a, "algorithm", "r", 1);
        if (r < 1) {
            throw configuration_error("[algorithm].r must be a positive integer");
        }
        c.algorithm.r = static_cast<int>(r);
        c.algorithm.d = get_real(a, "algorithm", "d", 0.125);
        if (!(c.algorithm.d > 0) || !(c.algorithm.d < 1)) {
            throw configuration_error("[algorithm].d must lie in (0, 1)");
        }
        const long long buf = get_integer(a, "algorithm", "buffer", 1);
        if (buf < 0) {
            throw configuration_error("[algorithm].buffer must be non-negative");
        }
        c.algorithm.buffer = static_cast<int>(buf);
        c.algorithm.small_divisor_floor = get_opt_real(a, "algorithm", "small_divisor_floor");
        const long long tb = get_integer(a, "algorithm", "term_budget", 2'000'000);
        if (tb < 1) {
            throw configuration_error("[algorithm].term_budget must be positive");
        }
        c.algorithm.term_budget = static_cast<std::size_t>(tb);
        c.algorithm.enumeration_budget = get_real(a, "algorithm", "enumeration_budget", default_enumeration_budget);
        c.algorithm.check_classes = get_bool(a, "algorithm", "check_classes", true);
        c.algorithm.nonresonant_certificate = get_bool(a, "algorithm", "nonresonant_certificate", false);

        const json &v = j.contains("verify") ? j.at("verify") : empty;
        reject_unknown(v, "verify",
                       {"points", "t_span", "dt", "lambda", "record_every", "sample_fraction", "p0", "q0", "x0", "y0",
                        "order_dt", "order_t_span"});
        const long long pts = get_integer(v, "verify", "points", 100);
        if (pts < 1) {
            throw configuration_error("[verify].points must be positive");
        }
        c.verify.points = static_cast<std::size_t>(pts);
        c.verify.t_span = get_real(v, "verify", "t_span", 1000);
        c.verify.dt = get_real(v, "verify", "dt", 0.01);
        if (!(c.verify.dt > 0) || !(c.verify.t_span >= 0)) {
            throw configuration_error("[verify] needs dt > 0 and t_span >= 0");
        }
        if (v.contains("lambda")) {
            c.verify.lambda = get_real_array(v, "verify", "lambda");
            if (c.verify.lambda->size() != c.problem.n1) {
                throw configuration_error("[verify].lambda must have n1 entries");
            }
        }
        const long long re = get_integer(v, "verify", "record_every", 100);
        if (re < 1) {
            throw configuration_error("[verify].record_every must be positive");
        }
        c.verify.record_every = static_cast<int>(re);
        c.verify.sample_fraction = get_real(v, "verify", "sample_fraction", 0.75);
        if (!(c.verify.sample_fraction > 0) || c.verify.sample_fraction > 1) {
            throw configuration_error("[verify].sample_fraction must lie in (0, 1]");
        }
        auto vec = [&](const char *key, std::size_t n) {
            auto x = get_real_array(v, "verify", key);
            if (x.empty()) {
                x.assign(n, 0.0);
            }
            if (x.size() != n) {
                throw configuration_error(field("verify", key) + " has the wrong length");
            }
            return x;
        };
        c.verify.p0 = vec("p0", c.problem.n1);
        c.verify.q0 = vec("q0", c.problem.n1);
        c.verify.x0 = vec("x0", c.problem.n2);
        c.verify.y0 = vec("y0", c.problem.n2);
        c.verify.order_dt = get_real(v, "verify", "order_dt", 0.2);
        c.verify.order_t_span = get_real(v, "verify", "order_t_span", 20);
        if (!(c.verify.order_dt > 0) || !(c.verify.order_t_span > 0)) {
            throw configuration_error("[verify] needs order_dt > 0 and order_t_span > 0");
        }

        const json &o = j.contains("output") ? j.at("output") : empty;
        reject_unknown(o, "output", {"dir", "manifest", "certificate", "drift_csv"});
        c.output.dir = get_string(o, "output", "dir", "out");
        c.output.manifest = get_string(o, "output", "manifest", "manifest.json");
        c.output.certificate = get_string(o, "output", "certificate", "certificate.json");
        c.output.drift_csv = get_string(o, "output", "drift_csv", "drift.csv");

        // Parse the series now so that errors surface at load time with their line.
        c.canonicalize_terms();
        return c;
    }

    template <typename C>
    PoissonSeries<C> series_from_lines(const std::vector<std::string> &lines, const std::string &name) const
    {
        PoissonSeries<C> s(problem.n1, problem.n2);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            try {
                auto [key, c] = parse_term_line<C>(lines[i], problem.n1, problem.n2, i + 1);
                s.add_term(key, c);
            } catch (const parse_error &e) {
                throw configuration_error("[problem]." + name + " entry " + std::to_string(i + 1) + ": " + e.what());
            }
        }
        return s;
    }
    template <typename C>
    PoissonSeries<C> f0() const
    {
        return series_from_lines<C>(problem.f0_terms, "f0_terms");
    }
    template <typename C>
    PoissonSeries<C> H1() const
    {
        return series_from_lines<C>(problem.H1_terms, "H1_terms");
    }

    FrequencyVector frequency() const
    {
        FrequencyVector w = problem.omega ? FrequencyVector::exact(*problem.omega)
                                          : FrequencyVector::floating(*problem.omega_float, problem.resonance_basis,
                                                                      problem.zero_tol);
        w.gamma = problem.gamma;
        w.tau = problem.tau;
        return w;
    }
    rational mu() const
    {
        return detail::to_rational(problem.mu, "[problem].mu");
    }
    rational epsilon() const
    {
        return detail::to_rational(problem.epsilon, "[problem].epsilon");
    }

    template <typename C>
    HamiltonianSpec<C> spec(int threads = 1) const
    {
        HamiltonianSpec<C> s;
        s.omega = frequency();
        s.f0 = f0<C>();
        s.H1 = H1<C>();
        s.mu = mu();
        s.epsilon = epsilon();
        s.dp = domain;
        s.K = algorithm.K;
        s.Kprime = algorithm.Kprime;
        s.L = algorithm.L;
        s.r = algorithm.r;
        s.buffer = algorithm.buffer;
        s.small_divisor_floor = algorithm.small_divisor_floor;
        s.term_budget = algorithm.term_budget;
        s.threads = threads;
        s.check_classes = algorithm.check_classes;
        return s;
    }

    // Self-contained, canonical form: defaults filled in, series inlined.
    json echo() const
    {
        json j = json::object();
        json p = json::object();
        p["n1"] = problem.n1;
        p["n2"] = problem.n2;
        if (problem.omega) {
            p["omega"] = *problem.omega;
        } else {
            p["omega_float"] = *problem.omega_float;
            if (problem.resonance_basis) {
                p["resonance_basis"] = *problem.resonance_basis;
            }
        }
        p["zero_tol"] = problem.zero_tol;
        if (problem.gamma) {
            p["gamma"] = *problem.gamma;
        }
        if (problem.tau) {
            p["tau"] = *problem.tau;
        }
        p["mu"] = problem.mu;
        p["epsilon"] = problem.epsilon;
        p["f0_terms"] = problem.f0_terms;
        p["H1_terms"] = problem.H1_terms;
        if (problem.G) {
            p["G"] = *problem.G;
        }
        if (problem.H1_norm) {
            p["H1_norm"] = *problem.H1_norm;
        }
        p["coefficients"] = problem.coefficients;
        j["problem"] = p;
        j["domain"] = {{"rho", domain.rho}, {"sigma", domain.sigma}, {"R", domain.R}};
        json a = json::object();
        a["K"] = algorithm.K;
        if (algorithm.Kprime) {
            a["Kprime"] = *algorithm.Kprime;
        }
        a["L"] = algorithm.L;
        a["r"] = algorithm.r;
        a["d"] = algorithm.d;
        a["buffer"] = algorithm.buffer;
        if (algorithm.small_divisor_floor) {
            a["small_divisor_floor"] = *algorithm.small_divisor_floor;
        }
        a["term_budget"] = algorithm.term_budget;
        a["enumeration_budget"] = algorithm.enumeration_budget;
        a["check_classes"] = algorithm.check_classes;
        a["nonresonant_certificate"] = algorithm.nonresonant_certificate;
        j["algorithm"] = a;
        json v = json::object();
        v["points"] = verify.points;
        v["t_span"] = verify.t_span;
        v["dt"] = verify.dt;
        if (verify.lambda) {
            v["lambda"] = *verify.lambda;
        }
        v["record_every"] = verify.record_every;
        v["sample_fraction"] = verify.sample_fraction;
        v["p0"] = verify.p0;
        v["q0"] = verify.q0;
        v["x0"] = verify.x0;
        v["y0"] = verify.y0;
        v["order_dt"] = verify.order_dt;
        v["order_t_span"] = verify.order_t_span;
        j["verify"] = v;
        j["output"] = {{"dir", output.dir},
                       {"manifest", output.manifest},
                       {"certificate", output.certificate},
                       {"drift_csv", output.drift_csv}};
        return j;
    }

private:
    void canonicalize_terms()
    {
        auto canon = [&](auto tag, std::vector<std::string> &lines, const std::string &name) {
            using C = decltype(tag);
            const auto s = series_from_lines<C>(lines, name);
            lines.clear();
            for (const auto &[key, c] : s) {
                lines.push_back(format_term_line(key, c));
            }
        };
        if (exact()) {
            canon(gaussian_rational{}, problem.f0_terms, "f0_terms");
            canon(gaussian_rational{}, problem.H1_terms, "H1_terms");
        } else {
            canon(complex{}, problem.f0_terms, "f0_terms");
            canon(complex{}, problem.H1_terms, "H1_terms");
        }
    }
};

inline RunConfig load_run_config(const std::string &path)
{
    const auto j = load_config_file(path);
    return RunConfig::from_json(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// JSON forms of the numeric reports.

inline json to_json(const ClassTag &t)
{
    return json::array({t.K1, t.K2});
}

inline json to_json(const ConditionCheck &c)
{
    return {{"mu_condition", detail::finite_or_null(c.mu_value)},
            {"mu_threshold", std::ldexp(1.0, -7)},
            {"mu_margin", detail::finite_or_null(c.mu_margin)},
            {"mu_ok", c.mu_ok},
            {"eta", detail::finite_or_null(c.eta)},
            {"eta_perturbative", detail::finite_or_null(c.eta_perturbative)},
            {"eta_decay", detail::finite_or_null(c.eta_decay)},
            {"eta_threshold", 0.5},
            {"eta_margin", detail::finite_or_null(c.eta_margin)},
            {"eta_perturbative_margin", detail::finite_or_null(c.eta_perturbative_margin)},
            {"eta_ok", c.eta_ok}};
}

inline json to_json(const EstimateInputs &in)
{
    return {{"G", in.G},           {"H1_norm", in.H1_norm},
            {"mu", in.mu},         {"epsilon", in.epsilon},
            {"K", in.K},           {"Kprime", in.Kprime},
            {"L", in.L},           {"r", in.r},
            {"d", in.d},           {"alpha_r", detail::finite_or_null(in.alpha_r.value_or(NAN))},
            {"n1", in.n1},         {"module_trivial", in.module_trivial}};
}

inline json to_json(const EstimateReport &r)
{
    using detail::finite_or_null;
    json j;
    j["zeta"] = finite_or_null(r.decay.zeta);
    j["F"] = finite_or_null(r.decay.F);
    j["Xi"] = finite_or_null(r.Xi);
    j["A"] = finite_or_null(r.A);
    j["alpha_r"] = finite_or_null(r.alpha_r);
    j["conditions"] = to_json(r.conditions);
    json b;
    b["C_r"] = finite_or_null(r.bounds.C_r);
    b["b"] = finite_or_null(r.bounds.b);
    b["generating_condition"] = finite_or_null(r.bounds.condition_value);
    b["certified"] = r.bounds.certified;
    json psi = json::array(), x = json::array();
    for (auto v : r.bounds.psi) {
        psi.push_back(finite_or_null(v));
    }
    for (auto v : r.bounds.X) {
        x.push_back(finite_or_null(v));
    }
    b["psi"] = psi;
    b["X"] = x;
    j["generating_bounds"] = b;
    j["remainder_bound"] = finite_or_null(r.remainder);
    j["t_local"] = finite_or_null(r.local.t_star);
    j["log10_t_local"] = finite_or_null(r.local.log10_t_star);
    j["t_local_unbounded"] = r.local.unbounded;
    j["drift_rate"] = finite_or_null(r.local.drift_rate);
    if (r.nonresonant) {
        const auto &n = *r.nonresonant;
        j["nonresonant"] = {{"r_real", finite_or_null(n.r_real)},
                            {"r_opt", n.r_opt},
                            {"K_opt", n.K_opt},
                            {"epsilon_star", finite_or_null(n.epsilon_star)},
                            {"T_const", finite_or_null(n.T_const)},
                            {"log10_t_nonresonant", finite_or_null(n.log10_t_star)},
                            {"epsilon_admissible", n.epsilon_admissible}};
    }
    j["certified"] = r.certified();
    return j;
}

// ---------------------------------------------------------------------------
// Commands.

struct CommandOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    int threads = 1;
    std::uint64_t seed = 1;
    bool a_posteriori = false;
    bool check_order = false;
    std::ostream *out = &std::cout;
    std::ostream *err = &std::cerr;
};

namespace detail
{

inline std::filesystem::path output_dir(const RunConfig &cfg, const CommandOptions &opt)
{
    return opt.out_dir ? std::filesystem::path(*opt.out_dir) : std::filesystem::path(cfg.output.dir);
}

inline void write_text_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw resource_error("cannot write '" + path.string() + "'");
    }
    os << text;
}

inline std::string dump(const json &j)
{
    return j.dump(2) + "\n";
}

inline json read_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw configuration_error("cannot open '" + path.string() + "'; run 'relegate' first");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw configuration_error("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

inline json tool_json()
{
    return {{"name", tool_name}, {"version", tool_version}};
}

enum class NormSource { declared, measured };

// Estimate inputs at order r. Declared G and |H1| are used for the a-priori mode when present;
// missing ones (and the a-posteriori mode) use the majorant norms of the configured series.
template <typename C>
EstimateInputs estimate_inputs(const RunConfig &cfg, NormSource src, int r, std::vector<std::string> *notes = nullptr)
{
    const auto f0 = cfg.f0<C>();
    const auto H1 = cfg.H1<C>();
    EstimateInputs in;
    in.dp = cfg.domain;
    in.mu = cfg.mu().template convert_to<double>();
    in.epsilon = cfg.epsilon().template convert_to<double>();
    const double G_measured = weighted_norm(f0, cfg.domain);
    const double H1_measured = weighted_norm(H1, DomainParams{cfg.domain.rho, 2 * cfg.domain.sigma, cfg.domain.R});
    if (src == NormSource::declared && cfg.problem.G) {
        in.G = *cfg.problem.G;
    } else {
        in.G = G_measured;
        if (src == NormSource::declared && notes) {
            notes->push_back("G not declared; using the measured majorant norm of f0");
        }
    }
    if (src == NormSource::declared && cfg.problem.H1_norm) {
        in.H1_norm = *cfg.problem.H1_norm;
    } else {
        in.H1_norm = H1_measured;
        if (src == NormSource::declared && notes) {
            notes->push_back("H1_norm not declared; using the measured majorant norm of H1 on the 2 sigma strip");
        }
    }
    in.K = cfg.algorithm.K;
    in.Kprime = cfg.algorithm.Kprime.value_or(f0.trig_degree());
    in.L = cfg.algorithm.L;
    in.r = r;
    in.d = cfg.algorithm.d;
    const auto w = cfg.frequency();
    return with_frequency(in, w, resonance_module(w), cfg.algorithm.enumeration_budget);
}

template <typename C>
json result_orders_json(const NormalFormResult<C> &res, const DomainParams &dp, double d)
{
    json orders = json::array();
    const DomainParams inner = dp.restricted(d);
    for (const auto &o : res.orders) {
        json j;
        j["s"] = o.s;
        j["terms_X"] = o.X.size();
        j["terms_Z"] = o.Z.size();
        j["terms_psi"] = o.psi.size();
        j["norm_h"] = o.norm_h;
        j["norm_psi"] = o.norm_psi;
        j["norm_X"] = o.norm_X;
        j["norm_Z"] = o.norm_Z;
        j["norm_psi_restricted"] = weighted_norm(o.psi, inner);
        j["norm_X_restricted"] = weighted_norm(o.X, inner);
        j["chain_residual"] = o.chain_residual;
        if (o.psi_class) {
            j["psi_class"] = to_json(*o.psi_class);
        }
        j["psi_class_bound"] = to_json(o.psi_bound);
        json xc = json::array(), xb = json::array();
        for (const auto &t : o.X_chain_class) {
            xc.push_back(to_json(t));
        }
        for (const auto &t : o.X_chain_bound) {
            xb.push_back(to_json(t));
        }
        j["X_chain_class"] = xc;
        j["X_chain_class_bound"] = xb;
        orders.push_back(j);
    }
    return orders;
}

template <typename C>
int relegate_impl(const RunConfig &cfg, const CommandOptions &opt)
{
    const auto spec = cfg.spec<C>(opt.threads);
    const auto res = relegate(spec);
    const auto dir = output_dir(cfg, opt);
    std::filesystem::create_directories(dir);
    json files_z = json::array(), files_x = json::array();
    const auto zs = res.normal_form_grades();
    for (std::size_t s = 0; s < zs.size(); ++s) {
        const std::string name = "Z_" + std::to_string(s) + ".txt";
        write_text_file(dir / name, to_text(zs[s]));
        files_z.push_back(name);
    }
    for (const auto &o : res.orders) {
        const std::string name = "X_" + std::to_string(o.s) + ".txt";
        write_text_file(dir / name, to_text(o.X));
        files_x.push_back(name);
    }
    std::vector<std::string> notes;
    const auto inputs = estimate_inputs<C>(cfg, NormSource::declared, cfg.algorithm.r, &notes);
    const auto rep = estimate(inputs);
    json m;
    m["tool"] = tool_json();
    m["config"] = cfg.echo();
    m["order"] = res.order();
    m["Kprime"] = res.Kprime;
    m["files"] = {{"Z", files_z}, {"X", files_x}};
    m["orders"] = result_orders_json(res, cfg.domain, cfg.algorithm.d);
    m["class_violation"] = res.class_violation;
    json diags = res.diagnostics;
    for (const auto &n : notes) {
        diags.push_back(n);
    }
    m["diagnostics"] = diags;
    m["conditions"] = to_json(rep.conditions);
    m["certified"] = rep.certified();
    write_text_file(dir / cfg.output.manifest, dump(m));
    for (const auto &d : res.diagnostics) {
        *opt.err << d << '\n';
    }
    *opt.out << "relegated to order " << res.order() << " (" << files_x.size() << " generators, " << files_z.size()
             << " normal-form grades) -> " << (dir / cfg.output.manifest).string() << '\n';
    if (!rep.certified()) {
        *opt.out << "conditions not satisfied: result is not certified\n";
        return 2;
    }
    return 0;
}

template <typename C>
std::vector<PoissonSeries<C>> load_listed(const json &manifest, const char *which, const std::filesystem::path &dir)
{
    std::vector<PoissonSeries<C>> out;
    for (const auto &f : manifest.at("files").at(which)) {
        out.push_back(load_series<C>((dir / f.get<std::string>()).string()));
    }
    return out;
}

inline void print_report_table(std::ostream &os, const std::string &title, const EstimateReport &r)
{
    os << title << '\n';
    auto row = [&](const std::string &k, double v) {
        os << "  " << std::left << std::setw(26) << k << std::setprecision(6) << v << '\n';
    };
    row("zeta", r.decay.zeta);
    row("F", r.decay.F);
    row("Xi", r.Xi);
    row("A", r.A);
    row("alpha_r", r.alpha_r);
    row("mu condition / threshold", r.conditions.mu_margin);
    row("eta", r.conditions.eta);
    row("eta / threshold", r.conditions.eta_margin);
    row("b", r.bounds.b);
    row("remainder bound", r.remainder);
    row("log10 t_local", r.local.log10_t_star);
    if (r.nonresonant) {
        row("K_opt", r.nonresonant->K_opt);
        row("r_opt", r.nonresonant->r_opt);
        row("epsilon_star", r.nonresonant->epsilon_star);
        row("log10 t_nonresonant", r.nonresonant->log10_t_star);
    }
    os << "  certified                 " << (r.certified() ? "yes" : "no") << '\n';
}

template <typename C>
json estimate_section(const RunConfig &cfg, NormSource src, std::vector<std::string> &notes, EstimateReport &rep)
{
    const auto in = estimate_inputs<C>(cfg, src, cfg.algorithm.r, &notes);
    const auto w = cfg.frequency();
    const bool want_nr = cfg.algorithm.nonresonant_certificate
                         || (in.module_trivial && cfg.problem.gamma && cfg.problem.tau
                             && cfg.problem.tau.value() > static_cast<double>(cfg.problem.n1) && in.epsilon > 0);
    if (cfg.algorithm.nonresonant_certificate && !in.module_trivial) {
        throw configuration_error("non-resonant certificate refused: omega is resonant (the resonance module has "
                                  "dimension " + std::to_string(resonance_module(w).dim()) + ")");
    }
    rep = estimate(in, want_nr);
    json j;
    j["inputs"] = to_json(in);
    j["report"] = to_json(rep);
    if (want_nr && w.gamma && w.tau) {
        const auto dio = diophantine_check(w, resonance_module(w), cfg.algorithm.r * cfg.algorithm.K,
                                           cfg.algorithm.enumeration_budget);
        j["diophantine"] = {{"ok", dio.ok}, {"worst_ratio", finite_or_null(dio.worst_ratio)}, {"worst_k", dio.worst_k}};
    }
    return j;
}

template <typename C>
json a_posteriori_domination(const json &manifest, const EstimateReport &rep)
{
    json out;
    bool all = true;
    json rows = json::array();
    const auto &orders = manifest.at("orders");
    for (std::size_t i = 0; i < orders.size() && i < rep.bounds.psi.size(); ++i) {
        const double np = orders[i].at("norm_psi_restricted").get<double>();
        const double nx = orders[i].at("norm_X_restricted").get<double>();
        const bool ok = np <= rep.bounds.psi[i] && nx <= rep.bounds.X[i];
        all = all && ok;
        rows.push_back({{"s", i + 1},
                        {"norm_psi", np},
                        {"bound_psi", finite_or_null(rep.bounds.psi[i])},
                        {"norm_X", nx},
                        {"bound_X", finite_or_null(rep.bounds.X[i])},
                        {"ok", ok}});
    }
    out["orders"] = rows;
    out["all_dominated"] = all;
    return out;
}

template <typename C>
int estimate_impl(const RunConfig &cfg, const CommandOptions &opt)
{
    const auto dir = output_dir(cfg, opt);
    std::vector<std::string> notes;
    EstimateReport prior, post;
    json cert;
    cert["tool"] = tool_json();
    cert["config"] = cfg.echo();
    cert["mode"] = opt.a_posteriori ? "a-posteriori" : "a-priori";
    cert["a_priori"] = estimate_section<C>(cfg, NormSource::declared, notes, prior);
    cert["a_posteriori"] = estimate_section<C>(cfg, NormSource::measured, notes, post);
    const EstimateReport &primary = opt.a_posteriori ? post : prior;
    bool ok = primary.certified();
    if (opt.a_posteriori) {
        const auto manifest = read_json_file(dir / cfg.output.manifest);
        cert["engine"] = a_posteriori_domination<C>(manifest, post);
        if (primary.certified()) {
            ok = ok && cert["engine"]["all_dominated"].get<bool>();
        }
    }
    cert["notes"] = notes;
    cert["certified"] = ok;
    std::filesystem::create_directories(dir);
    write_text_file(dir / cfg.output.certificate, dump(cert));
    print_report_table(*opt.out, "a-priori estimates", prior);
    print_report_table(*opt.out, "a-posteriori estimates (measured norms)", post);
    return ok ? 0 : 2;
}

// lambda.p with lambda orthogonal to the resonance module.
inline std::vector<double> default_lambda(const RunConfig &cfg, const ResonanceModule &m)
{
    if (cfg.verify.lambda) {
        return *cfg.verify.lambda;
    }
    if (m.dim() == 0) {
        std::vector<double> l(cfg.problem.n1, 0.0);
        l[0] = 1.0;
        return l;
    }
    if (m.normal() && m.dim() + 1 == cfg.problem.n1) {
        return std::vector<double>(m.normal()->begin(), m.normal()->end());
    }
    throw configuration_error("[verify].lambda is required for this resonance module");
}

template <typename C>
NormalFormResult<C> result_prefix(const NormalFormResult<C> &full, int r)
{
    NormalFormResult<C> out = full;
    out.orders.resize(r);
    return out;
}

template <typename C>
int verify_impl(const RunConfig &cfg, const CommandOptions &opt)
{
    const auto dir = output_dir(cfg, opt);
    const auto manifest = read_json_file(dir / cfg.output.manifest);
    const auto zs = load_listed<C>(manifest, "Z", dir);
    const auto xs = load_listed<C>(manifest, "X", dir);
    const int r = static_cast<int>(xs.size());
    const auto w = cfg.frequency();
    const auto m = resonance_module(w);
    const std::size_t n1 = cfg.problem.n1, n2 = cfg.problem.n2;
    const auto f0 = cfg.f0<C>();
    const auto H1 = cfg.H1<C>();
    const auto mu = coeff_traits<C>::from_rational(cfg.mu());
    const auto eps = coeff_traits<C>::from_rational(cfg.epsilon());
    const PoissonSeries<C> H = frequency_hamiltonian<C>(w, n2) + f0 * mu + H1 * eps;

    NormalFormResult<C> res;
    res.n1 = n1;
    res.n2 = n2;
    res.Z0 = zs.at(0);
    res.shells = split_perturbation(H1, cfg.epsilon(), cfg.algorithm.K, r + std::max(cfg.algorithm.buffer, 1));
    for (int s = 1; s <= r; ++s) {
        OrderData<C> od;
        od.s = s;
        od.X = xs[s - 1];
        od.Z = zs.at(s);
        res.orders.push_back(std::move(od));
    }

    json summary;
    json checks = json::object();
    bool all_ok = true;
    auto check = [&](const std::string &name, bool ok, json detail) {
        detail["pass"] = ok;
        checks[name] = detail;
        all_ok = all_ok && ok;
    };

    bool chart_ok = true;
    try {
        validate_real_chart(std::max<std::size_t>(n2, 1));
    } catch (const error &) {
        chart_ok = false;
    }
    check("real_chart", chart_ok, json::object());

    // Residual |T_X Z^{(r')} - H| on sampled points for r' = 1..r.
    const auto pts = sample_points(n1, n2, cfg.domain, cfg.verify.sample_fraction, cfg.verify.points, opt.seed);
    json residual_rows = json::array();
    bool decreasing = true, within = true, certified_all = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int rr = 1; rr <= r; ++rr) {
        const auto pre = result_prefix(res, rr);
        const auto resid = transform_residual(pre, rr + cfg.algorithm.buffer);
        const CompiledSeries cs(resid);
        double worst = 0;
        for (const auto &pt : pts) {
            worst = std::max(worst, std::abs(cs(pt)));
        }
        const auto in = estimate_inputs<C>(cfg, NormSource::measured, rr);
        const auto cond = check_conditions(in);
        const double bound = remainder_bound(in, cond.eta);
        const bool cert = cond.ok();
        certified_all = certified_all && cert;
        if (rr > 1 && !(worst < prev)) {
            decreasing = false;
        }
        if (cert && !(worst <= bound)) {
            within = false;
        }
        residual_rows.push_back({{"r", rr},
                                 {"max_residual", worst},
                                 {"remainder_bound", finite_or_null(bound)},
                                 {"conditions_ok", cert}});
        prev = worst;
    }
    summary["residual"] = residual_rows;
    check("residual_decay", decreasing, {{"orders", r}});
    check("residual_within_bound", within, json::object());

    // Coordinate displacement |T_X p_j - p_j| on the 3/4 domain.
    const auto gens = res.generators();
    const auto pts34 = sample_points(n1, n2, cfg.domain, 0.75, cfg.verify.points, opt.seed + 1);
    double disp = 0;
    for (std::size_t j = 0; j < n1; ++j) {
        const auto pj = PoissonSeries<C>::action(n1, n2, j);
        const CompiledSeries cs(lie_apply(gens, pj, r) - pj);
        for (const auto &pt : pts34) {
            disp = std::max(disp, std::abs(cs(pt)));
        }
    }
    check("displacement", disp <= cfg.domain.rho / 16,
          {{"max_displacement", disp}, {"threshold", cfg.domain.rho / 16}});

    // Drift of Phi = T_X (lambda.p) along an orbit of H.
    const auto lambda = default_lambda(cfg, m);
    for (const auto &b : m.basis()) {
        double dot = 0;
        for (std::size_t j = 0; j < n1; ++j) {
            dot += lambda[j] * static_cast<double>(b[j]);
        }
        if (std::abs(dot) > 1e-12) {
            throw configuration_error("[verify].lambda must be orthogonal to the resonance module");
        }
    }
    PoissonSeries<C> phi0(n1, n2);
    for (std::size_t j = 0; j < n1; ++j) {
        if (lambda[j] != 0) {
            phi0 += PoissonSeries<C>::action(n1, n2, j, coeff_traits<C>::from_real(lambda[j]));
        }
    }
    // With no orders (nothing to normalize) the estimates still refer to the configured order.
    const auto in_r = estimate_inputs<C>(cfg, NormSource::measured, r > 0 ? r : cfg.algorithm.r);
    const auto cond_r = check_conditions(in_r);
    const auto local = local_stability_time(in_r, cond_r.eta);
    const double t_end = std::min(cfg.verify.t_span, local.t_star);
    FlowOptions fo;
    fo.record_every = cfg.verify.record_every;
    fo.domain = cfg.domain;
    fo.phi0 = CompiledSeries(phi0);
    fo.phi = CompiledSeries(lie_apply(gens, phi0, r));
    fo.plane_basis = module_basis_rows(m);
    PhasePoint start{cfg.verify.p0, cfg.verify.q0, cfg.verify.x0, cfg.verify.y0};
    const auto rec = integrate_flow(H, start, t_end, cfg.verify.dt, fo);
    double worst_excess = -std::numeric_limits<double>::infinity();
    double max_phi_change = 0;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const double change = std::abs(rec.phi_path[i] - rec.phi_path[0]);
        max_phi_change = std::max(max_phi_change, change);
        const double allowed = local.drift_rate * rec.times[i] + cfg.domain.rho / 8;
        worst_excess = std::max(worst_excess, change - allowed);
    }
    const double t_reached = rec.times.back();
    const double energy_limit = (local.drift_rate * t_reached + cfg.domain.rho / 8) / 100;
    check("drift_rate", worst_excess <= 0,
          {{"t_end", t_reached},
           {"max_phi_change", max_phi_change},
           {"drift_rate_bound", local.drift_rate},
           {"allowance", cfg.domain.rho / 8},
           {"exit_time", rec.exit_time ? json(*rec.exit_time) : json(nullptr)}});
    check("energy", rec.max_energy_error <= energy_limit,
          {{"max_energy_error", rec.max_energy_error}, {"limit", energy_limit}});
    check("fast_drift_plane", rec.max_fast_drift_distance < cfg.domain.rho / 2,
          {{"max_distance", rec.max_fast_drift_distance}, {"threshold", cfg.domain.rho / 2}});

    if (opt.check_order) {
        // State error against a dt/8 reference for dt and dt/2.
        const double T = cfg.verify.order_t_span, h = cfg.verify.order_dt;
        auto final_state = [&](double dt) {
            FlowOptions o;
            o.record_every = 1 << 30;
            const auto rr = integrate_flow(H, start, T, dt, o);
            return rr;
        };
        const auto ref = final_state(h / 8), a = final_state(h), b = final_state(h / 2);
        auto dist = [&](const DriftRecord &x) {
            double d = 0;
            for (std::size_t j = 0; j < n1; ++j) {
                d = std::max(d, std::abs(x.p_path.back()[j] - ref.p_path.back()[j]));
            }
            return d;
        };
        const double ea = dist(a), eb = dist(b);
        json o = {{"dt", h}, {"error_dt", ea}, {"error_half_dt", eb}};
        if (eb > 0 && ea > 1e-13) {
            o["ratio"] = ea / eb;
            o["observed_order"] = std::log2(ea / eb);
        } else {
            o["ratio"] = nullptr;
            o["observed_order"] = nullptr;
            o["note"] = "errors at round-off level; order not measurable on this orbit";
        }
        summary["integrator_order"] = o;
        if (o["observed_order"].is_null()) {
            *opt.out << "integrator order: not measurable (errors " << ea << ", " << eb << ")\n";
        } else {
            *opt.out << "integrator order: " << std::setprecision(4) << o["observed_order"].template get<double>()
                     << " (error ratio " << ea / eb << " from dt = " << h << " to " << h / 2 << ")\n";
        }
    }

    std::filesystem::create_directories(dir);
    {
        std::ostringstream csv;
        write_drift_csv(csv, rec);
        write_text_file(dir / cfg.output.drift_csv, csv.str());
    }
    std::vector<std::string> notes;
    EstimateReport post;
    json cert;
    cert["tool"] = tool_json();
    cert["config"] = cfg.echo();
    cert["mode"] = "a-posteriori";
    cert["estimates"] = estimate_section<C>(cfg, NormSource::measured, notes, post);
    cert["engine"] = a_posteriori_domination<C>(manifest, post);
    summary["checks"] = checks;
    summary["seed"] = opt.seed;
    cert["verification"] = summary;
    cert["certified"] = certified_all && all_ok;
    write_text_file(dir / cfg.output.certificate, dump(cert));
    for (const auto &[name, c] : checks.items()) {
        *opt.out << (c["pass"].template get<bool>() ? "PASS " : "FAIL ") << name << '\n';
    }
    if (!certified_all) {
        *opt.out << "conditions not satisfied at every order: checks are informational\n";
        return 2;
    }
    return all_ok ? 0 : 1;
}

template <typename C>
int split_impl(const RunConfig &cfg, const CommandOptions &opt)
{
    const auto H1 = cfg.H1<C>();
    const int tracked = std::max(1, (H1.trig_degree() / cfg.algorithm.K) + 1);
    const auto shells = split_perturbation(H1, cfg.epsilon(), cfg.algorithm.K, tracked);
    const auto in = estimate_inputs<C>(cfg, NormSource::measured, cfg.algorithm.r);
    const auto dc = decay_constants(in);
    const auto dir = output_dir(cfg, opt);
    std::filesystem::create_directories(dir);
    json rows = json::array();
    bool ok = true;
    for (std::size_t s = 1; s <= shells.size(); ++s) {
        const std::string name = "h_" + std::to_string(s) + ".txt";
        write_text_file(dir / name, to_text(shells[s - 1]));
        const double n = weighted_norm(shells[s - 1], cfg.domain);
        const double bound = std::pow(dc.zeta, double(s - 1)) * dc.F;
        ok = ok && n <= bound;
        rows.push_back({{"s", s}, {"file", name}, {"terms", shells[s - 1].size()}, {"norm", n}, {"bound", bound}});
        *opt.out << "h_" << s << ": " << shells[s - 1].size() << " terms, norm " << n << " <= " << bound << '\n';
    }
    json j = {{"tool", tool_json()}, {"zeta", dc.zeta}, {"F", dc.F}, {"shells", rows}, {"decay_ok", ok}};
    write_text_file(dir / "split.json", dump(j));
    return 0;
}

template <typename C>
int norm_impl(const RunConfig &cfg, const CommandOptions &opt)
{
    const auto f0 = cfg.f0<C>();
    const auto H1 = cfg.H1<C>();
    const auto m = resonance_module(cfg.frequency());
    const DomainParams wide{cfg.domain.rho, 2 * cfg.domain.sigma, cfg.domain.R};
    json j = {{"tool", tool_json()},
              {"Xi", xi(cfg.domain)},
              {"f0_norm", weighted_norm(f0, cfg.domain)},
              {"f0_class", to_json(class_of(f0, m))},
              {"H1_norm", weighted_norm(H1, cfg.domain)},
              {"H1_norm_2sigma", weighted_norm(H1, wide)},
              {"H1_class", to_json(class_of(H1, m))},
              {"resonance_module_dim", m.dim()},
              {"resonance_basis", m.basis()}};
    const auto dir = output_dir(cfg, opt);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "norms.json", dump(j));
    *opt.out << dump(j);
    return 0;
}

template <typename F>
int dispatch(const RunConfig &cfg, F &&f)
{
    if (cfg.exact()) {
        return f(gaussian_rational{});
    }
    return f(complex{});
}

} // namespace detail

// Runs one command; returns the process exit code (0 ok, 2 completed but uncertified, 1 error).
inline int run_command(const std::string &command, const CommandOptions &opt)
{
    try {
        const RunConfig cfg = load_run_config(opt.config_path);
        return detail::dispatch(cfg, [&](auto tag) {
            using C = decltype(tag);
            if (command == "relegate") {
                return detail::relegate_impl<C>(cfg, opt);
            }
            if (command == "estimate") {
                return detail::estimate_impl<C>(cfg, opt);
            }
            if (command == "verify") {
                return detail::verify_impl<C>(cfg, opt);
            }
            if (command == "split") {
                return detail::split_impl<C>(cfg, opt);
            }
            if (command == "norm") {
                return detail::norm_impl<C>(cfg, opt);
            }
            throw configuration_error("unknown command '" + command + "'");
        });
    } catch (const std::exception &e) {
        *opt.err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace relegation
