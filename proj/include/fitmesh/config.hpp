#pragma once

#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fitmesh/errors.hpp"
#include "fitmesh/expression.hpp"
#include "fitmesh/problem.hpp"

namespace fitmesh {

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t' || s[begin] == '\r')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return std::string(s.substr(begin, end - begin));
}

inline double constant_value(const Expression& e, const std::string& key) {
    if (!e.is_constant()) throw ConfigError("config: " + key + " must be a constant expression");
    return e(0.0, 0.0);
}

} // namespace detail

/// Parse a problem definition from flat `key = value` text.
///
/// Keys: n, epsilons (comma-separated constants), alpha, T, A.i.j, f.i,
/// phi_left.i, phi_right.i, phi_bottom.i with 1-based indices; values are
/// expressions over x and t. Blank lines and '#' comments are ignored.
/// phi_left/phi_right may use t only, phi_bottom may use x only, and
/// epsilons/alpha/T must be constant.
inline ProblemSpec parse_problem_config(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_number) + ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_number) + ": empty key or value");
        if (!entries.emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }

    auto take = [&](const std::string& key) -> std::string {
        auto it = entries.find(key);
        if (it == entries.end()) throw ConfigError("config: missing key '" + key + "'");
        std::string value = it->second;
        entries.erase(it);
        return value;
    };
    auto parse_value = [&](const std::string& key, const std::string& value) -> Expression {
        try {
            return parse_expression(value);
        } catch (const ParseError& e) {
            throw ConfigError("config: key '" + key + "': " + e.what());
        }
    };

    ProblemSpec spec;
    {
        const std::string value = take("n");
        const Expression e = parse_value("n", value);
        const double v = detail::constant_value(e, "n");
        spec.n = static_cast<int>(v);
        if (spec.n < 1 || static_cast<double>(spec.n) != v)
            throw ConfigError("config: n must be a positive integer");
    }
    {
        const std::string value = take("epsilons");
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
            const std::string piece = detail::trim(item);
            if (piece.empty()) throw ConfigError("config: empty entry in epsilons");
            spec.epsilons.push_back(detail::constant_value(parse_value("epsilons", piece), "epsilons"));
        }
    }
    spec.alpha = detail::constant_value(parse_value("alpha", take("alpha")), "alpha");
    spec.horizon = detail::constant_value(parse_value("T", take("T")), "T");

    const auto size = static_cast<std::size_t>(spec.n);
    spec.coeff.assign(size, std::vector<SpaceTimeFn>(size));
    spec.source.assign(size, nullptr);
    spec.phi_left.assign(size, nullptr);
    spec.phi_right.assign(size, nullptr);
    spec.phi_bottom.assign(size, nullptr);

    for (int i = 1; i <= spec.n; ++i) {
        for (int j = 1; j <= spec.n; ++j) {
            const std::string key = "A." + std::to_string(i) + "." + std::to_string(j);
            const Expression e = parse_value(key, take(key));
            spec.coeff[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] =
                [e](double x, double t) { return e(x, t); };
        }
        const std::string fkey = "f." + std::to_string(i);
        const Expression fe = parse_value(fkey, take(fkey));
        spec.source[static_cast<std::size_t>(i) - 1] = [fe](double x, double t) { return fe(x, t); };

        const std::string lkey = "phi_left." + std::to_string(i);
        const Expression le = parse_value(lkey, take(lkey));
        if (le.uses_x()) throw ConfigError("config: " + lkey + " must not reference x");
        spec.phi_left[static_cast<std::size_t>(i) - 1] = [le](double t) { return le(0.0, t); };

        const std::string rkey = "phi_right." + std::to_string(i);
        const Expression re = parse_value(rkey, take(rkey));
        if (re.uses_x()) throw ConfigError("config: " + rkey + " must not reference x");
        spec.phi_right[static_cast<std::size_t>(i) - 1] = [re](double t) { return re(1.0, t); };

        const std::string bkey = "phi_bottom." + std::to_string(i);
        const Expression be = parse_value(bkey, take(bkey));
        if (be.uses_t()) throw ConfigError("config: " + bkey + " must not reference t");
        spec.phi_bottom[static_cast<std::size_t>(i) - 1] = [be](double x) { return be(x, 0.0); };
    }

    if (!entries.empty())
        throw ConfigError("config: unknown key '" + entries.begin()->first + "'");
    require_well_formed(spec);
    return spec;
}

} // namespace fitmesh
