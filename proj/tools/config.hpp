// config.hpp — flat sectioned key=value configuration for the ndweak CLI
#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ndweak::cli {

// Config syntax or schema problem; carries line/field diagnostics (exit 2).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IniValue {
    std::string text;
    int line = 0;
    mutable bool used = false;
};

class IniFile {
public:
    static IniFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open config file '" + path + "'");
        IniFile f;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError(path + ":" + std::to_string(lineno)
                                     + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                f.sections_[section]; // create
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(path + ":" + std::to_string(lineno)
                                 + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
            if (f.sections_[section].count(key))
                throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate key '"
                                 + key + "' in section [" + section + "]");
            f.sections_[section][key] = IniValue{value, lineno, false};
        }
        f.path_ = path;
        return f;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        k->second.used = true;
        return k->second.text;
    }

    double number(const std::string& section, const std::string& key, double fallback) const {
        auto v = raw(section, key);
        if (!v) return fallback;
        return parse_number(section, key, *v);
    }

    std::string text(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
        auto v = raw(section, key);
        return v ? *v : fallback;
    }

    std::vector<double> number_list(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
        auto v = raw(section, key);
        if (!v) return fallback;
        std::vector<double> out;
        for (const auto& tok : split(*v, ','))
            out.push_back(parse_number(section, key, trim(tok)));
        return out;
    }

    // Matrix rows separated by ';', entries by spaces or commas.
    Eigen::MatrixXd matrix(const std::string& section, const std::string& key,
                           std::size_t dim) const {
        auto v = raw(section, key);
        if (!v)
            return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                         static_cast<Eigen::Index>(dim));
        const auto rows = split(*v, ';');
        if (rows.size() != dim)
            throw ParseError(where(section, key) + ": expected " + std::to_string(dim)
                             + " matrix rows, got " + std::to_string(rows.size()));
        Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < dim; ++r) {
            std::vector<std::string> entries;
            for (const auto& t : split_ws_or_comma(rows[r]))
                if (!t.empty()) entries.push_back(t);
            if (entries.size() != dim)
                throw ParseError(where(section, key) + ": row " + std::to_string(r + 1)
                                 + " has " + std::to_string(entries.size()) + " entries, expected "
                                 + std::to_string(dim));
            for (std::size_t c = 0; c < dim; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    parse_number(section, key, entries[c]);
        }
        return m;
    }

    // Every key must have been consumed; unknown keys are schema errors.
    void ensure_all_used() const {
        for (const auto& [sec, kv] : sections_)
            for (const auto& [key, val] : kv)
                if (!val.used)
                    throw ParseError(path_ + ":" + std::to_string(val.line) + ": unknown key '"
                                     + key + "' in section [" + sec + "]");
    }

    const std::string& path() const { return path_; }

private:
    std::string where(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s != sections_.end()) {
            auto k = s->second.find(key);
            if (k != s->second.end())
                return path_ + ":" + std::to_string(k->second.line) + ": [" + section + "] "
                     + key;
        }
        return path_ + ": [" + section + "] " + key;
    }

    double parse_number(const std::string& section, const std::string& key,
                        const std::string& tok) const {
        if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
        try {
            std::size_t pos = 0;
            const double x = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("trailing characters");
            return x;
        } catch (const std::exception&) {
            throw ParseError(where(section, key) + ": cannot parse number '" + tok + "'");
        }
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream is(s);
        while (std::getline(is, cur, sep)) out.push_back(trim(cur));
        if (!s.empty() && s.back() == sep) out.push_back("");
        return out;
    }

    static std::vector<std::string> split_ws_or_comma(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ' ' || c == '\t' || c == ',') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    }

    std::map<std::string, std::map<std::string, IniValue>> sections_;
    std::string path_;
};

} // namespace ndweak::cli
