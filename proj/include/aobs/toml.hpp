#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace aobs::toml {

// Minimal TOML subset: comments, [section] headers, key = value pairs where
// value is a string, bool, integer, float, or a flat array of those.
// Keys are flattened to "section.key". Duplicate keys are rejected.
struct Value {
    enum class Kind { boolean, integer, real, string, array };
    Kind kind = Kind::integer;
    bool b = false;
    std::int64_t i = 0;
    double d = 0.0;
    std::string s;
    std::vector<Value> items;
    int line = 0;

    bool as_bool() const;
    std::int64_t as_int() const;
    double as_real() const;  // accepts integer values too
    const std::string& as_string() const;
    std::vector<double> as_real_array() const;
    std::vector<std::string> as_string_array() const;
};

struct Table {
    std::map<std::string, Value> entries;

    bool has(const std::string& key) const { return entries.count(key) != 0; }
    const Value& at(const std::string& key) const;
};

Table parse_toml(std::istream& in);
Table parse_toml_string(const std::string& text);
Table parse_toml_file(const std::string& path);

}  // namespace aobs::toml
