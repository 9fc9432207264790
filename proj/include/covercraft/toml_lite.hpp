#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace covercraft::toml {

// Minimal TOML subset: [tables], [[arrays of tables]], bare keys, basic
// strings, integers, floats, booleans, and single-line arrays. Enough for
// suite/config files; dotted keys and multiline values are rejected.

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<std::string, std::int64_t, double, bool, Array> data;

    const std::string& as_string() const {
        if (auto* s = std::get_if<std::string>(&data)) return *s;
        throw std::invalid_argument("toml: expected string");
    }
    std::int64_t as_int() const {
        if (auto* i = std::get_if<std::int64_t>(&data)) return *i;
        throw std::invalid_argument("toml: expected integer");
    }
    double as_double() const {
        if (auto* d = std::get_if<double>(&data)) return *d;
        if (auto* i = std::get_if<std::int64_t>(&data)) return static_cast<double>(*i);
        throw std::invalid_argument("toml: expected number");
    }
    bool as_bool() const {
        if (auto* b = std::get_if<bool>(&data)) return *b;
        throw std::invalid_argument("toml: expected boolean");
    }
    const Array& as_array() const {
        if (auto* a = std::get_if<Array>(&data)) return *a;
        throw std::invalid_argument("toml: expected array");
    }
};

struct Table {
    std::map<std::string, Value> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    const Value& at(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) throw std::invalid_argument("toml: missing key '" + key + "'");
        return it->second;
    }
    std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
        return has(key) ? at(key).as_int() : dflt;
    }
    double get_double(const std::string& key, double dflt) const {
        return has(key) ? at(key).as_double() : dflt;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        return has(key) ? at(key).as_string() : dflt;
    }
};

struct Document {
    Table root;
    std::map<std::string, Table> tables;
    std::map<std::string, std::vector<Table>> table_arrays;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline Value parse_scalar(const std::string& tok) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            if (tok[i] == '\\' && i + 2 < tok.size()) {
                ++i;
                switch (tok[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw std::invalid_argument("toml: unsupported escape");
                }
            } else {
                out += tok[i];
            }
        }
        return Value{out};
    }
    if (tok == "true") return Value{true};
    if (tok == "false") return Value{false};
    if (tok.find_first_of(".eE") == std::string::npos || (tok.size() > 1 && tok[0] == '0' && tok[1] == 'x')) {
        try {
            std::size_t used = 0;
            const std::int64_t v = std::stoll(tok, &used);
            if (used == tok.size()) return Value{v};
        } catch (const std::exception&) {
        }
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return Value{v};
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("toml: cannot parse value '" + tok + "'");
}

inline Value parse_value(const std::string& tok) {
    if (!tok.empty() && tok.front() == '[') {
        if (tok.back() != ']') throw std::invalid_argument("toml: arrays must be single-line");
        Array arr;
        std::string inner = tok.substr(1, tok.size() - 2);
        std::string cur;
        int depth = 0;
        bool in_str = false;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (!in_str && c == '[') ++depth;
            if (!in_str && c == ']') --depth;
            if (!in_str && depth == 0 && c == ',') {
                const std::string t = strip(cur);
                if (!t.empty()) arr.push_back(parse_value(t));
                cur.clear();
            } else {
                cur += c;
            }
        }
        const std::string t = strip(cur);
        if (!t.empty()) arr.push_back(parse_value(t));
        return Value{arr};
    }
    return parse_scalar(tok);
}

// Removes a trailing comment, respecting string literals.
inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (!in_str && line[i] == '#') return line.substr(0, i);
    }
    return line;
}

} // namespace detail

inline Document parse(std::istream& in) {
    Document doc;
    Table* current = &doc.root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = detail::strip(detail::strip_comment(line));
        if (text.empty()) continue;
        if (text.size() >= 4 && text.substr(0, 2) == "[[" && text.substr(text.size() - 2) == "]]") {
            const std::string name = detail::strip(text.substr(2, text.size() - 4));
            doc.table_arrays[name].emplace_back();
            current = &doc.table_arrays[name].back();
            continue;
        }
        if (text.front() == '[' && text.back() == ']') {
            const std::string name = detail::strip(text.substr(1, text.size() - 2));
            current = &doc.tables[name];
            continue;
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("toml: line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::strip(text.substr(0, eq));
        const std::string val = detail::strip(text.substr(eq + 1));
        if (key.empty() || val.empty() || key.find('.') != std::string::npos)
            throw std::invalid_argument("toml: line " + std::to_string(lineno) + ": unsupported key/value");
        current->entries[key] = detail::parse_value(val);
    }
    return doc;
}

inline Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open TOML file: " + path);
    return parse(in);
}

} // namespace covercraft::toml
