#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace relegation
{

// Base of every error thrown by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Operands with incompatible (n1, n2).
class dimension_error : public error
{
public:
    using error::error;
};

// A numeric argument outside its admissible range.
class parameter_error : public error
{
public:
    using error::error;
};

// Inconsistent or incomplete problem setup.
class configuration_error : public error
{
public:
    using error::error;
};

// Enumeration or term-count budget exhausted, or integer overflow.
class resource_error : public error
{
public:
    using error::error;
};

// An order was requested before its prerequisites were computed.
class sequencing_error : public error
{
public:
    using error::error;
};

class small_divisor_error : public error
{
public:
    small_divisor_error(const std::string &what, std::vector<int> k, double divisor)
        : error(what), m_k(std::move(k)), m_divisor(divisor)
    {
    }
    const std::vector<int> &harmonic() const noexcept
    {
        return m_k;
    }
    double divisor() const noexcept
    {
        return m_divisor;
    }

private:
    std::vector<int> m_k;
    double m_divisor;
};

class parse_error : public error
{
public:
    parse_error(const std::string &what, std::size_t line, std::size_t column)
        : error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"), m_line(line),
          m_column(column)
    {
    }
    std::size_t line() const noexcept
    {
        return m_line;
    }
    std::size_t column() const noexcept
    {
        return m_column;
    }

private:
    std::size_t m_line;
    std::size_t m_column;
};

} // namespace relegation
