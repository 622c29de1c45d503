#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"

namespace relegation
{

using rational = boost::multiprecision::cpp_rational;
using complex = std::complex<double>;

// Parses "a/b", "a" or a decimal literal such as "0.25" into an exact rational.
inline rational parse_rational(const std::string &text)
{
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            boost::multiprecision::cpp_int num(text.substr(0, slash));
            boost::multiprecision::cpp_int den(text.substr(slash + 1));
            if (den == 0) {
                throw parameter_error("zero denominator in rational '" + text + "'");
            }
            return rational(num, den);
        }
        const auto dot = text.find_first_of(".eE");
        if (dot == std::string::npos) {
            return rational(boost::multiprecision::cpp_int(text));
        }
    } catch (const std::runtime_error &) {
        throw parameter_error("malformed rational '" + text + "'");
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw parameter_error("malformed rational '" + text + "'");
    }
    return rational(v);
}

inline std::string to_string(const rational &q)
{
    return q.str();
}

// Gaussian rationals: exact coefficients for small correctness runs.
struct gaussian_rational {
    rational re;
    rational im;

    gaussian_rational() = default;
    gaussian_rational(rational r, rational i = 0) : re(std::move(r)), im(std::move(i)) {}
    gaussian_rational(int r) : re(r), im(0) {}

    friend gaussian_rational operator+(const gaussian_rational &a, const gaussian_rational &b)
    {
        return {a.re + b.re, a.im + b.im};
    }
    friend gaussian_rational operator-(const gaussian_rational &a, const gaussian_rational &b)
    {
        return {a.re - b.re, a.im - b.im};
    }
    friend gaussian_rational operator*(const gaussian_rational &a, const gaussian_rational &b)
    {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend gaussian_rational operator/(const gaussian_rational &a, const gaussian_rational &b)
    {
        const rational n = b.re * b.re + b.im * b.im;
        if (n == 0) {
            throw parameter_error("division by zero gaussian rational");
        }
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    gaussian_rational operator-() const
    {
        return {-re, -im};
    }
    gaussian_rational &operator+=(const gaussian_rational &o)
    {
        re += o.re;
        im += o.im;
        return *this;
    }
    gaussian_rational &operator-=(const gaussian_rational &o)
    {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    gaussian_rational &operator*=(const gaussian_rational &o)
    {
        return *this = *this * o;
    }
    friend bool operator==(const gaussian_rational &a, const gaussian_rational &b)
    {
        return a.re == b.re && a.im == b.im;
    }
};

// Uniform access to the two coefficient fields the series algebra is instantiated on.
template <typename C>
struct coeff_traits;

template <>
struct coeff_traits<complex> {
    static constexpr bool exact = false;
    static complex imag_unit()
    {
        return {0.0, 1.0};
    }
    static bool is_zero(const complex &c)
    {
        return c.real() == 0.0 && c.imag() == 0.0;
    }
    static double abs(const complex &c)
    {
        return std::abs(c);
    }
    static complex from_rational(const rational &q)
    {
        return {q.convert_to<double>(), 0.0};
    }
    static complex from_real(double x)
    {
        return {x, 0.0};
    }
    static complex to_complex(const complex &c)
    {
        return c;
    }
};

template <>
struct coeff_traits<gaussian_rational> {
    static constexpr bool exact = true;
    static gaussian_rational imag_unit()
    {
        return {0, 1};
    }
    static bool is_zero(const gaussian_rational &c)
    {
        return c.re == 0 && c.im == 0;
    }
    static double abs(const gaussian_rational &c)
    {
        return std::hypot(c.re.convert_to<double>(), c.im.convert_to<double>());
    }
    static gaussian_rational from_rational(const rational &q)
    {
        return {q, 0};
    }
    // Every finite double is a dyadic rational, so this is exact.
    static gaussian_rational from_real(double x)
    {
        return {rational(x), 0};
    }
    static complex to_complex(const gaussian_rational &c)
    {
        return {c.re.convert_to<double>(), c.im.convert_to<double>()};
    }
};

template <typename C>
concept coefficient = requires(const C &a, const C &b) {
    { a + b } -> std::convertible_to<C>;
    { a * b } -> std::convertible_to<C>;
    { a / b } -> std::convertible_to<C>;
    { coeff_traits<C>::is_zero(a) } -> std::convertible_to<bool>;
    { coeff_traits<C>::abs(a) } -> std::convertible_to<double>;
};

} // namespace relegation
