#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "error.hpp"

namespace relegation
{

using json = nlohmann::ordered_json;

// Parser for the configuration dialect: a TOML subset with bare [table] headers, `key = value`
// lines, '#' comments, basic and literal strings, integers, floats, booleans and (nested,
// multi-line) arrays. Dotted keys, inline tables and dates are not supported.
class TomlLite
{
public:
    static json parse(std::string_view text)
    {
        TomlLite p(text);
        return p.document();
    }

private:
    explicit TomlLite(std::string_view text) : m_text(text) {}

    [[noreturn]] void fail(const std::string &what) const
    {
        throw parse_error(what, m_line, m_col);
    }

    bool eof() const
    {
        return m_pos >= m_text.size();
    }
    char peek() const
    {
        return eof() ? '\0' : m_text[m_pos];
    }
    char get()
    {
        const char c = m_text[m_pos++];
        if (c == '\n') {
            ++m_line;
            m_col = 1;
        } else {
            ++m_col;
        }
        return c;
    }
    void skip_inline_ws()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) {
            get();
        }
    }
    void skip_comment()
    {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') {
                get();
            }
        }
    }
    // Whitespace, newlines and comments (inside arrays).
    void skip_all_ws()
    {
        for (;;) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\n') {
                get();
                continue;
            }
            return;
        }
    }
    void end_of_line()
    {
        skip_inline_ws();
        skip_comment();
        if (!eof() && peek() != '\n') {
            fail(std::string("unexpected character '") + peek() + "' after value");
        }
        if (!eof()) {
            get();
        }
    }

    static bool bare_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }
    std::string bare_key()
    {
        std::string k;
        while (!eof() && bare_char(peek())) {
            k += get();
        }
        if (k.empty()) {
            fail("expected a key");
        }
        return k;
    }

    json document()
    {
        json root = json::object();
        json *table = &root;
        while (true) {
            skip_all_ws();
            if (eof()) {
                break;
            }
            if (peek() == '[') {
                get();
                skip_inline_ws();
                const std::size_t l = m_line, c = m_col;
                const std::string name = bare_key();
                skip_inline_ws();
                if (peek() != ']') {
                    fail("expected ']' to close the table header");
                }
                get();
                if (root.contains(name)) {
                    throw parse_error("duplicate table [" + name + "]", l, c);
                }
                root[name] = json::object();
                table = &root[name];
                end_of_line();
                continue;
            }
            const std::size_t l = m_line, c = m_col;
            const std::string key = bare_key();
            skip_inline_ws();
            if (peek() != '=') {
                fail("expected '=' after key '" + key + "'");
            }
            get();
            skip_inline_ws();
            json v = value();
            if (table->contains(key)) {
                throw parse_error("duplicate key '" + key + "'", l, c);
            }
            (*table)[key] = std::move(v);
            end_of_line();
        }
        return root;
    }

    json value()
    {
        const char c = peek();
        if (c == '"') {
            return basic_string();
        }
        if (c == '\'') {
            return literal_string();
        }
        if (c == '[') {
            return array();
        }
        if (c == 't' || c == 'f') {
            const std::string w = bare_key();
            if (w == "true") {
                return true;
            }
            if (w == "false") {
                return false;
            }
            fail("unknown bare value '" + w + "'");
        }
        if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
            return number();
        }
        if (eof() || c == '\n') {
            fail("missing value");
        }
        fail(std::string("unexpected character '") + c + "' at start of value");
    }

    json basic_string()
    {
        get();
        std::string s;
        while (true) {
            if (eof() || peek() == '\n') {
                fail("unterminated string");
            }
            char c = get();
            if (c == '"') {
                return s;
            }
            if (c == '\\') {
                if (eof()) {
                    fail("unterminated escape");
                }
                const char e = get();
                switch (e) {
                case '"': s += '"'; break;
                case '\\': s += '\\'; break;
                case 'n': s += '\n'; break;
                case 't': s += '\t'; break;
                default: fail(std::string("unsupported escape '\\") + e + "'");
                }
                continue;
            }
            s += c;
        }
    }

    json literal_string()
    {
        get();
        std::string s;
        while (true) {
            if (eof() || peek() == '\n') {
                fail("unterminated string");
            }
            const char c = get();
            if (c == '\'') {
                return s;
            }
            s += c;
        }
    }

    json array()
    {
        get();
        json arr = json::array();
        while (true) {
            skip_all_ws();
            if (peek() == ']') {
                get();
                return arr;
            }
            arr.push_back(value());
            skip_all_ws();
            if (peek() == ',') {
                get();
                continue;
            }
            if (peek() == ']') {
                get();
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    json number()
    {
        const std::size_t l = m_line, c = m_col;
        std::string tok;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-'
                          || peek() == '.' || peek() == '_')) {
            const char ch = get();
            if (ch != '_') {
                tok += ch;
            }
        }
        const bool is_float = tok.find_first_of(".eE") != std::string::npos;
        const char *first = tok.data() + (tok[0] == '+' ? 1 : 0);
        const char *last = tok.data() + tok.size();
        if (!is_float) {
            long long v = 0;
            const auto r = std::from_chars(first, last, v);
            if (r.ec == std::errc{} && r.ptr == last) {
                return v;
            }
        } else {
            double v = 0;
            const auto r = std::from_chars(first, last, v);
            if (r.ec == std::errc{} && r.ptr == last && std::isfinite(v)) {
                return v;
            }
        }
        throw parse_error("invalid number '" + tok + "'", l, c);
    }

    std::string_view m_text;
    std::size_t m_pos = 0;
    std::size_t m_line = 1;
    std::size_t m_col = 1;
};

// JSON if the first non-blank character is '{', the TOML subset otherwise.
inline json parse_config_text(std::string_view text)
{
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            continue;
        }
        if (c == '{') {
            try {
                return json::parse(text);
            } catch (const json::parse_error &e) {
                throw configuration_error(std::string("invalid JSON configuration: ") + e.what());
            }
        }
        break;
    }
    return TomlLite::parse(text);
}

inline json load_config_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw configuration_error("cannot open configuration file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace relegation
