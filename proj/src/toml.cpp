#include "aobs/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "aobs/error.hpp"

namespace aobs::toml {

namespace {

[[noreturn]] void bad(int line, const std::string& what) {
    fail(errc::config_error, "config line " + std::to_string(line) + ": " + what);
}

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips a trailing comment, honoring quoted strings
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_str = false;
            }
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

std::string parse_basic_string(const std::string& tok, int line) {
    if (tok.size() < 2 || tok.back() != '"') bad(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
        char c = tok[i];
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (i + 2 >= tok.size()) bad(line, "dangling escape in string");
        char e = tok[++i];
        switch (e) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: bad(line, std::string("unsupported escape \\") + e);
        }
    }
    return out;
}

Value parse_scalar(const std::string& raw, int line) {
    Value v;
    v.line = line;
    std::string tok = trim(raw);
    if (tok.empty()) bad(line, "empty value");
    if (tok.front() == '"') {
        v.kind = Value::Kind::string;
        v.s = parse_basic_string(tok, line);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = Value::Kind::boolean;
        v.b = (tok == "true");
        return v;
    }
    // number: integer unless it carries ., e, E, inf, or nan
    bool looks_real = tok.find_first_of(".eE") != std::string::npos ||
                      tok.find("inf") != std::string::npos || tok.find("nan") != std::string::npos;
    // "0xe" style is not supported; a leading sign is
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (!looks_real) {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(b, e, iv);
        if (ec == std::errc() && p == e) {
            v.kind = Value::Kind::integer;
            v.i = iv;
            return v;
        }
        bad(line, "cannot parse value '" + tok + "'");
    }
    double dv = 0.0;
    auto [p, ec] = std::from_chars(b, e, dv);
    if (ec != std::errc() || p != e) bad(line, "cannot parse value '" + tok + "'");
    v.kind = Value::Kind::real;
    v.d = dv;
    return v;
}

// splits "a, b, c" at top level (no nested arrays supported)
std::vector<std::string> split_items(const std::string& body, int line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_str = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (in_str) {
            cur.push_back(c);
            if (c == '\\' && i + 1 < body.size()) {
                cur.push_back(body[++i]);
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
            cur.push_back(c);
        } else if (c == '[') {
            bad(line, "nested arrays are not supported");
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (in_str) bad(line, "unterminated string in array");
    if (!trim(cur).empty()) out.push_back(cur);
    return out;
}

Value parse_value(const std::string& raw, int line) {
    std::string tok = trim(raw);
    if (tok.empty()) bad(line, "missing value");
    if (tok.front() != '[') return parse_scalar(tok, line);
    if (tok.back() != ']') bad(line, "unterminated array");
    Value v;
    v.kind = Value::Kind::array;
    v.line = line;
    for (const auto& item : split_items(tok.substr(1, tok.size() - 2), line)) {
        if (trim(item).empty()) bad(line, "empty array element");
        v.items.push_back(parse_scalar(item, line));
    }
    if (!v.items.empty()) {
        auto k0 = v.items.front().kind;
        for (const auto& it : v.items) {
            bool numeric_mix = (k0 == Value::Kind::integer || k0 == Value::Kind::real) &&
                               (it.kind == Value::Kind::integer || it.kind == Value::Kind::real);
            if (it.kind != k0 && !numeric_mix) bad(line, "mixed types in array");
        }
    }
    return v;
}

}  // namespace

bool Value::as_bool() const {
    if (kind != Kind::boolean) fail(errc::config_error, "config line " + std::to_string(line) + ": expected a boolean");
    return b;
}

std::int64_t Value::as_int() const {
    if (kind != Kind::integer) fail(errc::config_error, "config line " + std::to_string(line) + ": expected an integer");
    return i;
}

double Value::as_real() const {
    if (kind == Kind::real) return d;
    if (kind == Kind::integer) return static_cast<double>(i);
    fail(errc::config_error, "config line " + std::to_string(line) + ": expected a number");
}

const std::string& Value::as_string() const {
    if (kind != Kind::string) fail(errc::config_error, "config line " + std::to_string(line) + ": expected a string");
    return s;
}

std::vector<double> Value::as_real_array() const {
    if (kind != Kind::array) fail(errc::config_error, "config line " + std::to_string(line) + ": expected an array");
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.as_real());
    return out;
}

std::vector<std::string> Value::as_string_array() const {
    if (kind != Kind::array) fail(errc::config_error, "config line " + std::to_string(line) + ": expected an array");
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.as_string());
    return out;
}

const Value& Table::at(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) fail(errc::config_error, "missing config key '" + key + "'");
    return it->second;
}

Table parse_toml(std::istream& in) {
    Table tbl;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') bad(lineno, "unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) bad(lineno, "empty section name");
            for (char c : section)
                if (!is_key_char(c)) bad(lineno, "bad section name '" + section + "'");
            continue;
        }
        std::size_t eq = std::string::npos;
        {
            bool in_str = false;
            for (std::size_t i = 0; i < body.size(); ++i) {
                char c = body[i];
                if (in_str) {
                    if (c == '\\') ++i;
                    else if (c == '"') in_str = false;
                } else if (c == '"') {
                    in_str = true;
                } else if (c == '=') {
                    eq = i;
                    break;
                }
            }
        }
        if (eq == std::string::npos) bad(lineno, "expected key = value");
        std::string key = trim(body.substr(0, eq));
        if (key.empty()) bad(lineno, "empty key");
        for (char c : key)
            if (!is_key_char(c)) bad(lineno, "bad key '" + key + "'");
        std::string full = section.empty() ? key : section + "." + key;
        if (tbl.entries.count(full)) bad(lineno, "duplicate key '" + full + "'");
        tbl.entries.emplace(full, parse_value(body.substr(eq + 1), lineno));
    }
    return tbl;
}

Table parse_toml_string(const std::string& text) {
    std::istringstream in(text);
    return parse_toml(in);
}

Table parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::config_error, "cannot open config file '" + path + "'");
    return parse_toml(in);
}

}  // namespace aobs::toml
