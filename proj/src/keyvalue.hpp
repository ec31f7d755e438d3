#ifndef NETCLASS_KEYVALUE_HPP
#define NETCLASS_KEYVALUE_HPP

#include "netclass/error.hpp"
#include "text.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace netclass::kv {

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Reads `key = value` lines; '#' starts a comment, blank lines are skipped.
inline std::vector<Entry> read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    std::vector<Entry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        auto body = text::trim(line);
        if (body.empty()) {
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidSpec, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        out.push_back(Entry{std::string(text::trim(body.substr(0, eq))), std::string(text::trim(body.substr(eq + 1))), lineno});
    }
    return out;
}

inline Error bad(const Entry& e, const std::string& why) {
    return Error(ErrorCode::InvalidSpec, "line " + std::to_string(e.line) + " (" + e.key + "): " + why);
}

inline double as_double(const Entry& e) {
    auto v = text::parse_double(e.value);
    if (!v) {
        throw bad(e, "expected a number");
    }
    return *v;
}

inline std::uint64_t as_uint(const Entry& e) {
    std::uint64_t v = 0;
    auto s = text::trim(e.value);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw bad(e, "expected a non-negative integer");
    }
    return v;
}

inline bool as_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") {
        return true;
    }
    if (e.value == "false" || e.value == "0" || e.value == "no") {
        return false;
    }
    throw bad(e, "expected true or false");
}

/// Comma- or whitespace-separated list.
inline std::vector<std::string> as_list(const Entry& e) {
    std::string v = e.value;
    for (auto& c : v) {
        if (c == ',') {
            c = ' ';
        }
    }
    std::vector<std::string> out;
    for (auto tok : text::split_ws(v)) {
        out.emplace_back(tok);
    }
    return out;
}

}

#endif
