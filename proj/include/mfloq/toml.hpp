#pragma once

#include <map>
#include <string>
#include <vector>

#include "mfloq/core.hpp"

namespace mfloq::toml {

// Minimal TOML reader covering what problem files use: [table] and
// [table.sub] headers, key = value with strings, booleans, numbers, and
// (arbitrarily nested, multi-line) arrays, plus # comments.
struct Value {
    enum class Type { String, Number, Boolean, Array, Table };
    Type type = Type::Table;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<Value> arr;
    std::map<std::string, Value> tab;

    bool is_table() const { return type == Type::Table; }
    bool has(const std::string& key) const { return is_table() && tab.count(key) > 0; }
    const Value& at(const std::string& key) const;

    double as_number(const std::string& what) const;
    long as_integer(const std::string& what) const;
    const std::string& as_string(const std::string& what) const;
    bool as_bool(const std::string& what) const;
    const std::vector<Value>& as_array(const std::string& what) const;
};

Value parse(const std::string& text);
Value parse_file(const std::string& path);

}  // namespace mfloq::toml
