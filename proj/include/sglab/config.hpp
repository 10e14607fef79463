#ifndef SGLAB_CONFIG_HPP
#define SGLAB_CONFIG_HPP

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coefficients.hpp"
#include "liouville.hpp"

namespace sglab {

/// Error in an experiment config file, carrying file:line context.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfg {

struct Value {
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::vector<double>>> v;
    int line = 0;
};

using Table = std::map<std::string, Value>;

inline void fail(const std::string& file, int line, const std::string& msg)
{
    throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
}

inline std::string trim(const std::string& s)
{
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& s)
{
    bool in_str = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] == '"') in_str = !in_str;
        if (s[k] == '#' && !in_str) return s.substr(0, k);
    }
    return s;
}

inline bool parse_number(const std::string& tok, double& out)
{
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

/// Parses an array literal: flat [1, 2, 3] or nested [[...], [...]].
inline Value parse_array(const std::string& file, int line, const std::string& body)
{
    std::string s = trim(body);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        fail(file, line, "malformed array literal");
    s = trim(s.substr(1, s.size() - 2));
    Value val;
    val.line = line;
    if (s.empty()) {
        val.v = std::vector<double>{};
        return val;
    }
    if (s.front() == '[') {
        std::vector<std::vector<double>> rows;
        int depth = 0;
        std::string cur;
        for (char c : s + ",") {
            if (c == '[') { ++depth; cur += c; }
            else if (c == ']') { --depth; cur += c; if (depth < 0) fail(file, line, "unbalanced ']'"); }
            else if (c == ',' && depth == 0) {
                const std::string item = trim(cur);
                cur.clear();
                if (item.empty()) continue;
                Value inner = parse_array(file, line, item);
                rows.push_back(std::get<std::vector<double>>(inner.v));
            } else cur += c;
        }
        if (depth != 0) fail(file, line, "unbalanced '['");
        val.v = std::move(rows);
        return val;
    }
    std::vector<double> nums;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        double x;
        if (!parse_number(tok, x)) fail(file, line, "expected number in array, got '" + tok + "'");
        nums.push_back(x);
    }
    val.v = std::move(nums);
    return val;
}

inline Value parse_value(const std::string& file, int line, const std::string& raw)
{
    const std::string s = trim(raw);
    if (s.empty()) fail(file, line, "missing value after '='");
    Value val;
    val.line = line;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            fail(file, line, "unterminated string literal");
        val.v = s.substr(1, s.size() - 2);
        return val;
    }
    if (s.front() == '[') return parse_array(file, line, s);
    if (s == "true") { val.v = true; return val; }
    if (s == "false") { val.v = false; return val; }
    double x;
    if (parse_number(s, x)) { val.v = x; return val; }
    fail(file, line, "cannot parse value '" + s + "' (strings must be quoted)");
    return val;   // unreachable
}

/// Key-value file with nested tables: [section] headers, key = value lines,
/// '#' comments.  Keys are stored as "section.key".
inline Table parse_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file: " + path);
    Table tab;
    std::string section, line;
    int ln = 0;
    while (std::getline(is, line)) {
        ++ln;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(path, ln, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                fail(path, ln, "empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(path, ln, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            fail(path, ln, "empty key before '='");
        const std::string full = section.empty() ? key : section + "." + key;
        if (tab.count(full))
            fail(path, ln, "duplicate key '" + full + "'");
        tab[full] = parse_value(path, ln, line.substr(eq + 1));
    }
    return tab;
}

} // namespace cfg

// ---------------------------------------------------------------------------
// Coefficient presets: "const:c", "linear:a,b" (a + b x), "gauss:amp,cx,cy,w"
// (1 + amp exp(-|x - c|^2 / w^2)), and "none" to disable a component.
// ---------------------------------------------------------------------------

inline Sampler parse_preset(const std::string& spec)
{
    auto args_of = [&](std::size_t colon) {
        std::vector<double> a;
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double x;
            if (!cfg::parse_number(cfg::trim(tok), x))
                throw ConfigError("bad preset argument in '" + spec + "'");
            a.push_back(x);
        }
        return a;
    };
    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    if (kind == "const") {
        const auto a = args_of(colon);
        if (a.size() != 1) throw ConfigError("const preset needs 1 argument: '" + spec + "'");
        return [c = a[0]](Vec2) { return c; };
    }
    if (kind == "linear") {
        const auto a = args_of(colon);
        if (a.size() != 2) throw ConfigError("linear preset needs 2 arguments: '" + spec + "'");
        return [p = a](Vec2 x) { return p[0] + p[1] * x.x; };
    }
    if (kind == "gauss") {
        const auto a = args_of(colon);
        if (a.size() != 4) throw ConfigError("gauss preset needs 4 arguments: '" + spec + "'");
        return [p = a](Vec2 x) {
            const double dx = x.x - p[1], dy = x.y - p[2];
            return 1.0 + p[0] * std::exp(-(dx * dx + dy * dy) / (p[3] * p[3]));
        };
    }
    throw ConfigError("unknown coefficient preset '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class ExperimentMode { synthetic, continuation, analyze_snapshot };

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::synthetic;
    unsigned seed = 12345;             ///< probe placement only
    std::string output_dir = "out";

    int n_r = 256, n_theta = 256;
    double radius = 1.0;
    double stretch = 1.05;

    std::string h1_spec = "const:1", h2_spec = "const:1";
    double bound_C = 2.0;

    SyntheticFamily family;            // synthetic mode

    std::vector<std::pair<double, double>> path;   // continuation mode
    double solver_tol = 1e-10;
    int solver_max_iters = 40;

    double c1_threshold = 3.0;
    double threshold_N = 5.0;
    double ratio_tau = 3.0;
    double gap_factor = 10.0;
    int m_max = 50;

    int max_bubbles = 16;
    int ladder_count = 40;
    double ladder_r_min = 0.0;         ///< 0: auto from the detected scales
    double ladder_r_max = 0.0;         ///< 0: auto from the domain
    int patch_n_r = 128, patch_n_theta = 128;
    int oscillation_probes = 20;

    cfg::Table raw;                    ///< echoed into the manifest

    CoefficientPair make_pair() const
    {
        CoefficientPair pair;
        const bool off1 = (h1_spec == "none"), off2 = (h2_spec == "none");
        if (off1 && off2)
            throw ConfigError("coefficients: h1 and h2 cannot both be 'none'");
        pair.mode = off1 ? PairMode::second_only
                         : (off2 ? PairMode::first_only : PairMode::two_signed);
        pair.h1 = off1 ? Sampler([](Vec2) { return 1.0; }) : parse_preset(h1_spec);
        pair.h2 = off2 ? Sampler([](Vec2) { return 1.0; }) : parse_preset(h2_spec);
        pair.bound_C = bound_C;
        pair.name1 = h1_spec;
        pair.name2 = h2_spec;
        return pair;
    }
};

namespace cfg {

struct Reader {
    const Table& tab;
    const std::string& file;
    std::vector<std::string> seen;

    bool has(const std::string& key) const { return tab.count(key) > 0; }

    const Value& get(const std::string& key)
    {
        auto it = tab.find(key);
        if (it == tab.end())
            throw ConfigError(file + ": missing required key '" + key + "'");
        seen.push_back(key);
        return it->second;
    }

    template <class T>
    T as(const std::string& key)
    {
        const Value& v = get(key);
        if (!std::holds_alternative<T>(v.v))
            fail(file, v.line, "key '" + key + "' has the wrong type");
        return std::get<T>(v.v);
    }

    double number(const std::string& key) { return as<double>(key); }
    std::string str(const std::string& key) { return as<std::string>(key); }

    double number_or(const std::string& key, double dflt)
    {
        return has(key) ? number(key) : dflt;
    }
    std::string str_or(const std::string& key, const std::string& dflt)
    {
        return has(key) ? str(key) : dflt;
    }
    int integer(const std::string& key)
    {
        const double x = number(key);
        if (x != std::floor(x))
            fail(file, tab.at(key).line, "key '" + key + "' must be an integer");
        return static_cast<int>(x);
    }
    int integer_or(const std::string& key, int dflt) { return has(key) ? integer(key) : dflt; }

    void forbid_section(const std::string& prefix, const std::string& why)
    {
        for (const auto& [k, v] : tab)
            if (k.rfind(prefix + ".", 0) == 0)
                fail(file, v.line, "key '" + k + "' is not allowed: " + why);
    }

    void reject_unknown()
    {
        for (const auto& [k, v] : tab)
            if (std::find(seen.begin(), seen.end(), k) == seen.end())
                fail(file, v.line, "unknown key '" + k + "'");
    }
};

} // namespace cfg

/// Loads and validates an experiment config.  Exactly the fields required by the
/// chosen mode must be present; unknown keys are rejected with their line.
inline ExperimentConfig load_config(const std::string& path)
{
    ExperimentConfig c;
    c.raw = cfg::parse_file(path);
    cfg::Reader r{c.raw, path, {}};

    const std::string mode = r.str("mode");
    if (mode == "synthetic") c.mode = ExperimentMode::synthetic;
    else if (mode == "continuation") c.mode = ExperimentMode::continuation;
    else if (mode == "analyze-snapshot") c.mode = ExperimentMode::analyze_snapshot;
    else throw ConfigError(path + ": mode must be synthetic, continuation or analyze-snapshot");

    c.seed = static_cast<unsigned>(r.integer_or("seed", 12345));
    c.output_dir = r.str_or("output_dir", "out");

    if (c.mode != ExperimentMode::analyze_snapshot || r.has("grid.n_r")) {
        c.n_r = r.integer("grid.n_r");
        c.n_theta = r.integer("grid.n_theta");
    }
    c.radius = r.number_or("grid.radius", 1.0);
    c.stretch = r.number_or("grid.stretch", 1.05);

    c.h1_spec = r.str("coefficients.h1");
    c.h2_spec = r.str("coefficients.h2");
    c.bound_C = r.number_or("coefficients.bound_C", 2.0);
    if (!(c.bound_C >= 1.0))
        throw ConfigError(path + ": coefficients.bound_C must be >= 1");

    if (c.mode == ExperimentMode::synthetic) {
        r.forbid_section("path", "only continuation mode takes a parameter path");
        const auto rows = r.as<std::vector<std::vector<double>>>("family.bubbles");
        for (const auto& row : rows) {
            if (row.size() != 5)
                throw ConfigError(path + ": family.bubbles rows must be [x, y, sign, lambda, h]");
            BubbleSpec b;
            b.center = {row[0], row[1]};
            b.sign = static_cast<int>(row[2]);
            b.lambda = row[3];
            b.h_value = row[4];
            c.family.bubbles.push_back(b);
        }
        c.family.background = r.number_or("family.background", 0.0);
    } else {
        r.forbid_section("family", "only synthetic mode takes a bubble family");
    }

    if (c.mode == ExperimentMode::continuation) {
        if (r.has("path.points")) {
            const auto rows = r.as<std::vector<std::vector<double>>>("path.points");
            for (const auto& row : rows) {
                if (row.size() != 2)
                    throw ConfigError(path + ": path.points rows must be [rho1, rho2]");
                c.path.emplace_back(row[0], row[1]);
            }
        } else {
            const double f1 = r.number("path.rho1_from"), t1 = r.number("path.rho1_to");
            const double f2 = r.number_or("path.rho2_from", 0.0);
            const double t2 = r.number_or("path.rho2_to", 0.0);
            const int steps = r.integer("path.steps");
            if (steps < 1)
                throw ConfigError(path + ": path.steps must be >= 1");
            for (int k = 1; k <= steps; ++k) {
                const double s = double(k) / steps;
                c.path.emplace_back(f1 + s * (t1 - f1), f2 + s * (t2 - f2));
            }
        }
        for (const auto& [a, b] : c.path)
            if (a < 0.0 || b < 0.0)
                throw ConfigError(path + ": path parameters must be non-negative");
        c.solver_tol = r.number_or("path.tol", 1e-10);
        c.solver_max_iters = r.integer_or("path.max_iters", 40);
        if (!(c.solver_tol > 0.0))
            throw ConfigError(path + ": path.tol must be positive");
    } else {
        r.forbid_section("path", "only continuation mode takes a parameter path");
    }

    c.c1_threshold = r.number_or("thresholds.c1", 3.0);
    c.threshold_N = r.number_or("thresholds.decay_N", 5.0);
    c.ratio_tau = r.number_or("thresholds.ratio_tau", 3.0);
    c.gap_factor = r.number_or("thresholds.gap_factor", 10.0);
    c.m_max = r.integer_or("thresholds.m_max", 50);
    if (!(c.c1_threshold > 0.0) || !(c.threshold_N > 0.0) || !(c.ratio_tau > 1.0) ||
        !(c.gap_factor > 1.0) || c.m_max < 0)
        throw ConfigError(path + ": thresholds must be positive (ratio_tau and gap_factor > 1)");

    c.max_bubbles = r.integer_or("analysis.max_bubbles", 16);
    c.ladder_count = r.integer_or("analysis.ladder_count", 40);
    c.ladder_r_min = r.number_or("analysis.ladder_r_min", 0.0);
    c.ladder_r_max = r.number_or("analysis.ladder_r_max", 0.0);
    c.patch_n_r = r.integer_or("analysis.patch_n_r", 128);
    c.patch_n_theta = r.integer_or("analysis.patch_n_theta", 128);
    c.oscillation_probes = r.integer_or("analysis.oscillation_probes", 20);

    r.reject_unknown();
    return c;
}

} // namespace sglab

#endif
