#include "mfloq/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mfloq::toml {

const Value& Value::at(const std::string& key) const {
    if (!is_table()) throw parse_error("toml: '" + key + "' looked up on a non-table value");
    auto it = tab.find(key);
    if (it == tab.end()) throw parse_error("toml: missing key '" + key + "'");
    return it->second;
}

double Value::as_number(const std::string& what) const {
    if (type != Type::Number) throw parse_error("toml: " + what + " must be a number");
    return num;
}

long Value::as_integer(const std::string& what) const {
    const double v = as_number(what);
    if (v != std::floor(v)) throw parse_error("toml: " + what + " must be an integer");
    return static_cast<long>(v);
}

const std::string& Value::as_string(const std::string& what) const {
    if (type != Type::String) throw parse_error("toml: " + what + " must be a string");
    return str;
}

bool Value::as_bool(const std::string& what) const {
    if (type != Type::Boolean) throw parse_error("toml: " + what + " must be a boolean");
    return boolean;
}

const std::vector<Value>& Value::as_array(const std::string& what) const {
    if (type != Type::Array) throw parse_error("toml: " + what + " must be an array");
    return arr;
}

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line = 1;

    explicit Cursor(const std::string& text) : s(text) {}
    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    char take() {
        char c = s[i++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error("toml: " + msg + " (line " + std::to_string(line) + ")");
    }
    // Whitespace and comments; newlines skipped only when `multiline`.
    void skip(bool multiline) {
        while (!done()) {
            char c = peek();
            if (c == '#') {
                while (!done() && peek() != '\n') take();
            } else if (c == ' ' || c == '\t' || c == '\r' || (multiline && c == '\n')) {
                take();
            } else {
                return;
            }
        }
    }
};

std::string parse_key(Cursor& c) {
    c.skip(false);
    std::string key;
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' || c.peek() == '-'))
        key += c.take();
    if (key.empty()) c.fail("expected a key");
    return key;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    Value v;
    v.type = Value::Type::Array;
    c.take();  // '['
    for (;;) {
        c.skip(true);
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ']') {
            c.take();
            return v;
        }
        v.arr.push_back(parse_value(c));
        c.skip(true);
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ',') {
            c.take();
        } else if (c.peek() != ']') {
            c.fail("expected ',' or ']' in array");
        }
    }
}

Value parse_value(Cursor& c) {
    c.skip(true);
    if (c.done()) c.fail("expected a value");
    const char ch = c.peek();
    Value v;
    if (ch == '[') return parse_array(c);
    if (ch == '"') {
        c.take();
        v.type = Value::Type::String;
        while (!c.done() && c.peek() != '"') {
            char d = c.take();
            if (d == '\\') {
                if (c.done()) c.fail("bad escape");
                char e = c.take();
                switch (e) {
                    case 'n': v.str += '\n'; break;
                    case 't': v.str += '\t'; break;
                    case '"': v.str += '"'; break;
                    case '\\': v.str += '\\'; break;
                    default: c.fail("unsupported escape sequence");
                }
            } else {
                v.str += d;
            }
        }
        if (c.done()) c.fail("unterminated string");
        c.take();
        return v;
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
        std::string word;
        while (!c.done() && std::isalpha(static_cast<unsigned char>(c.peek()))) word += c.take();
        if (word == "true" || word == "false") {
            v.type = Value::Type::Boolean;
            v.boolean = (word == "true");
            return v;
        }
        c.fail("unknown literal '" + word + "'");
    }
    // number
    std::string num;
    while (!c.done() && (std::isdigit(static_cast<unsigned char>(c.peek())) || c.peek() == '+' || c.peek() == '-' ||
                         c.peek() == '.' || c.peek() == 'e' || c.peek() == 'E' || c.peek() == '_'))
        num += c.take();
    std::erase(num, '_');
    if (num.empty()) c.fail("expected a value");
    try {
        size_t used = 0;
        v.num = std::stod(num, &used);
        if (used != num.size()) c.fail("bad number '" + num + "'");
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        c.fail("bad number '" + num + "'");
    }
    v.type = Value::Type::Number;
    return v;
}

Value& descend(Value& root, const std::string& dotted, Cursor& c) {
    Value* cur = &root;
    std::string part;
    std::istringstream ss(dotted);
    while (std::getline(ss, part, '.')) {
        if (part.empty()) c.fail("empty table-name component");
        Value& next = cur->tab[part];
        if (next.type != Value::Type::Table && !(next.tab.empty() && next.arr.empty() && next.str.empty()))
            c.fail("table name collides with an existing value");
        next.type = Value::Type::Table;
        cur = &next;
    }
    return *cur;
}

}  // namespace

Value parse(const std::string& text) {
    Value root;
    root.type = Value::Type::Table;
    Cursor c(text);
    Value* current = &root;
    for (;;) {
        c.skip(true);
        if (c.done()) return root;
        if (c.peek() == '[') {
            c.take();
            std::string name;
            while (!c.done() && c.peek() != ']') name += c.take();
            if (c.done()) c.fail("unterminated table header");
            c.take();
            current = &descend(root, name, c);
            continue;
        }
        std::string key = parse_key(c);
        c.skip(false);
        if (c.done() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
        if (current->tab.count(key)) c.fail("duplicate key '" + key + "'");
        current->tab[key] = parse_value(c);
    }
}

Value parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("toml: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace mfloq::toml
