#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "series.hpp"

namespace relegation
{

// Line format:
//   n1 n2
//   re im | k_1..k_n1 | mp_1..mp_n1 | mz_1..mz_n2 | mw_1..mw_n2
// Floats are written in shortest round-trip form, so write/read is bit-exact.
// Exact coefficients are written as "num/den". Blank lines and '#' comments are ignored.

namespace detail
{

inline std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, std::size_t line, std::size_t col)
{
    double v = 0;
    const char *first = tok.data();
    const char *last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw parse_error("invalid floating-point number '" + std::string(tok) + "'", line, col);
    }
    return v;
}

inline std::vector<std::pair<std::string, std::size_t>> tokenize(std::string_view field, std::size_t offset)
{
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t i = 0;
    while (i < field.size()) {
        while (i < field.size() && (field[i] == ' ' || field[i] == '\t' || field[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < field.size() && field[i] != ' ' && field[i] != '\t' && field[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.emplace_back(std::string(field.substr(start, i - start)), offset + start + 1);
        }
    }
    return out;
}

inline int parse_int(const std::string &tok, std::size_t line, std::size_t col)
{
    int v = 0;
    const char *first = tok.data();
    if (!tok.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw parse_error("invalid integer '" + tok + "'", line, col);
    }
    return v;
}

template <typename C>
std::string format_coefficient(const C &c)
{
    if constexpr (coeff_traits<C>::exact) {
        return to_string(c.re) + " " + to_string(c.im);
    } else {
        return format_double(c.real()) + " " + format_double(c.imag());
    }
}

template <typename C>
C parse_coefficient(const std::pair<std::string, std::size_t> &re, const std::pair<std::string, std::size_t> &im,
                    std::size_t line)
{
    if constexpr (coeff_traits<C>::exact) {
        try {
            return C(parse_rational(re.first), parse_rational(im.first));
        } catch (const parameter_error &e) {
            throw parse_error(e.what(), line, re.second);
        }
    } else {
        auto one = [&](const std::pair<std::string, std::size_t> &tok) {
            if (tok.first.find('/') == std::string::npos) {
                return parse_double(tok.first, line, tok.second);
            }
            try {
                return parse_rational(tok.first).template convert_to<double>();
            } catch (const parameter_error &e) {
                throw parse_error(e.what(), line, tok.second);
            }
        };
        return C(one(re), one(im));
    }
}

} // namespace detail

// Parses one term line for a series of dimensions (n1, n2).
template <typename C = complex>
std::pair<TermKey, C> parse_term_line(std::string_view text, std::size_t n1, std::size_t n2, std::size_t line = 1)
{
    std::vector<std::string_view> fields;
    std::vector<std::size_t> offsets;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '|') {
            fields.push_back(text.substr(start, i - start));
            offsets.push_back(start);
            start = i + 1;
        }
    }
    if (fields.size() != 5) {
        throw parse_error("term line needs 5 '|'-separated fields, found " + std::to_string(fields.size()), line, 1);
    }
    const auto coeff = detail::tokenize(fields[0], offsets[0]);
    if (coeff.size() != 2) {
        throw parse_error("coefficient field needs 're im'", line, offsets[0] + 1);
    }
    const std::size_t expected[4] = {n1, n1, n2, n2};
    std::vector<int> blocks[4];
    for (int b = 0; b < 4; ++b) {
        const auto toks = detail::tokenize(fields[b + 1], offsets[b + 1]);
        if (toks.size() != expected[b]) {
            throw parse_error("field " + std::to_string(b + 2) + " needs " + std::to_string(expected[b])
                                  + " integers, found " + std::to_string(toks.size()),
                              line, offsets[b + 1] + 1);
        }
        for (const auto &[tok, col] : toks) {
            const int v = detail::parse_int(tok, line, col);
            if (b > 0 && v < 0) {
                throw parse_error("negative exponent '" + tok + "'", line, col);
            }
            blocks[b].push_back(v);
        }
    }
    return {TermKey::from_parts(blocks[0], blocks[1], blocks[2], blocks[3]),
            detail::parse_coefficient<C>(coeff[0], coeff[1], line)};
}

template <typename C>
std::string format_term_line(const TermKey &key, const C &c)
{
    std::string out = detail::format_coefficient(c);
    const std::span<const int> blocks[4] = {key.k(), key.mp(), key.mz(), key.mw()};
    for (const auto &b : blocks) {
        out += " |";
        for (auto x : b) {
            out += ' ';
            out += std::to_string(x);
        }
    }
    return out;
}

template <typename C>
void write_series(std::ostream &os, const PoissonSeries<C> &g)
{
    os << g.n1() << ' ' << g.n2() << '\n';
    for (const auto &[key, c] : g) {
        os << format_term_line(key, c) << '\n';
    }
}

template <typename C>
std::string to_text(const PoissonSeries<C> &g)
{
    std::ostringstream os;
    write_series(os, g);
    return os.str();
}

template <typename C = complex>
PoissonSeries<C> read_series(std::istream &is)
{
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    PoissonSeries<C> out;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        if (!have_header) {
            const auto toks = detail::tokenize(line, 0);
            if (toks.size() != 2) {
                throw parse_error("series header must be 'n1 n2'", lineno, 1);
            }
            const int n1 = detail::parse_int(toks[0].first, lineno, toks[0].second);
            const int n2 = detail::parse_int(toks[1].first, lineno, toks[1].second);
            if (n1 < 0 || n2 < 0) {
                throw parse_error("negative dimension in series header", lineno, 1);
            }
            out = PoissonSeries<C>(static_cast<std::size_t>(n1), static_cast<std::size_t>(n2));
            have_header = true;
            continue;
        }
        auto [key, c] = parse_term_line<C>(line, out.n1(), out.n2(), lineno);
        out.add_term(key, c);
    }
    if (!have_header) {
        throw parse_error("empty series input", lineno == 0 ? 1 : lineno, 1);
    }
    return out;
}

template <typename C = complex>
PoissonSeries<C> from_text(const std::string &text)
{
    std::istringstream is(text);
    return read_series<C>(is);
}

template <typename C = complex>
PoissonSeries<C> load_series(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw configuration_error("cannot open series file '" + path + "'");
    }
    return read_series<C>(in);
}

} // namespace relegation
