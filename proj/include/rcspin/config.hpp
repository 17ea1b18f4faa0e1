#pragma once

/**
 * Run configuration.
 *
 * One flat `Settings` value feeds every subcommand. Values resolve in
 * precedence order: built-in defaults, then a plain-text config file
 * (`key = value` lines, optional `[section]` grouping), then environment
 * variables (`RCSPIN_<KEY>`), then command-line flags. Unknown keys and
 * unparsable values are hard errors, and every offending entry is reported
 * at once.
 */

#include <rcspin/constraints.hpp>
#include <rcspin/csv.hpp>
#include <rcspin/evolve.hpp>
#include <rcspin/lls.hpp>
#include <rcspin/sector.hpp>
#include <rcspin/spectral.hpp>
#include <rcspin/tli.hpp>

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rcspin {

struct Settings {
    // model
    int n_sites = 12;
    double mu = 1.0;
    std::vector<double> mu_over_n;   ///< sweep values; empty selects the default sweep
    int epsilon = 1;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    // time grid
    std::optional<double> t_max;     ///< unset -> default_t_max(n_sites)
    double dt = 0.05;
    // long-lived-state criterion
    double threshold = 0.5;
    int min_crossings = 3;
    // truncated Lanczos
    double cost_tol = default_cost_tol;
    // spectral statistics
    double degeneracy_tol = default_degeneracy_tol;
    double central_fraction = 1.0;   ///< share of distinct levels kept for gap ratios
    // execution
    std::uint64_t seed = 1;
    std::size_t workers = 0;         ///< 0 -> one per hardware thread
    std::uint64_t realisations = 100;
    std::uint64_t realisation_offset = 0;
    std::uint64_t candidate_cap = default_candidate_cap;
    std::size_t dense_limit = default_dense_limit;
    std::size_t sector_capacity = default_sector_capacity;
    std::size_t krylov_dim = 30;
    double substep_tol = 1e-10;
    std::string method = "auto";     ///< evolve method: exact | krylov | auto
};

/// Observation-window default: 18 time units for small chains, 50 for long
/// ones (above 20 sites).
[[nodiscard]] inline double default_t_max(int n_sites) { return n_sites > 20 ? 50.0 : 18.0; }

[[nodiscard]] inline double resolved_t_max(const Settings& s) {
    return s.t_max ? *s.t_max : default_t_max(s.n_sites);
}

[[nodiscard]] inline TimeGrid make_grid(const Settings& s) {
    return TimeGrid{resolved_t_max(s), s.dt};
}

[[nodiscard]] inline EvolveMethod method_from_string(const std::string& name) {
    if (name == "exact") return EvolveMethod::exact;
    if (name == "krylov") return EvolveMethod::krylov;
    if (name == "auto") return EvolveMethod::auto_;
    throw std::invalid_argument("unknown evolve method '" + name + "' (use exact|krylov|auto)");
}

[[nodiscard]] inline EvolveOptions make_evolve_options(const Settings& s) {
    EvolveOptions opts;
    opts.method = method_from_string(s.method);
    opts.dense_limit = s.dense_limit;
    opts.krylov_dim = s.krylov_dim;
    opts.substep_tol = s.substep_tol;
    return opts;
}

[[nodiscard]] inline LLSCriterion make_criterion(const Settings& s) {
    return LLSCriterion{s.threshold, s.min_crossings};
}

/// All configuration problems discovered in one pass.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> messages)
        : std::runtime_error(join(messages)), messages_(std::move(messages)) {}
    [[nodiscard]] const std::vector<std::string>& messages() const { return messages_; }

private:
    static std::string join(const std::vector<std::string>& messages) {
        std::string out = "configuration error";
        for (const std::string& m : messages) out += "\n  - " + m;
        return out;
    }
    std::vector<std::string> messages_;
};

/// "start:stop:step" (inclusive stop), a comma list, or a single value.
[[nodiscard]] inline std::vector<double> parse_sweep(const std::string& text) {
    const auto colon1 = text.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = text.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw std::invalid_argument("sweep '" + text + "' must be start:stop:step");
        const double start = parse_double(std::string_view(text).substr(0, colon1));
        const double stop = parse_double(std::string_view(text).substr(colon1 + 1, colon2 - colon1 - 1));
        const double step = parse_double(std::string_view(text).substr(colon2 + 1));
        if (step <= 0.0) throw std::invalid_argument("sweep step must be positive");
        if (stop < start) throw std::invalid_argument("sweep stop must be >= start");
        const auto count = static_cast<std::size_t>((stop - start) / step + 1e-9) + 1;
        std::vector<double> values(count);
        for (std::size_t k = 0; k < count; ++k) values[k] = start + static_cast<double>(k) * step;
        return values;
    }
    std::vector<double> values;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t end = std::min(text.find(',', begin), text.size());
        values.push_back(parse_double(std::string_view(text).substr(begin, end - begin)));
        begin = end + 1;
        if (end == text.size()) break;
    }
    return values;
}

[[nodiscard]] inline std::vector<double> default_mu_over_n_sweep() {
    return parse_sweep("0.05:0.5:0.025");
}

namespace detail {

struct ConfigKey {
    std::string_view name;
    std::function<void(Settings&, const std::string&)> apply;
};

inline std::uint64_t parse_u64_value(const std::string& v) { return parse_u64(v); }

inline int parse_int_value(const std::string& v) {
    const std::uint64_t u = parse_u64(v);
    if (u > 1u << 30) throw std::invalid_argument("integer out of range");
    return static_cast<int>(u);
}

[[nodiscard]] inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"n", [](Settings& s, const std::string& v) { s.n_sites = parse_int_value(v); }},
        {"mu", [](Settings& s, const std::string& v) { s.mu = parse_double(v); }},
        {"mu_over_n", [](Settings& s, const std::string& v) { s.mu_over_n = parse_sweep(v); }},
        {"epsilon", [](Settings& s, const std::string& v) { s.epsilon = parse_int_value(v); }},
        {"min_range", [](Settings& s, const std::string& v) { s.min_range = parse_int_value(v); }},
        {"boundary", [](Settings& s, const std::string& v) { s.boundary = boundary_from_string(v); }},
        {"tmax", [](Settings& s, const std::string& v) { s.t_max = parse_double(v); }},
        {"dt", [](Settings& s, const std::string& v) { s.dt = parse_double(v); }},
        {"threshold", [](Settings& s, const std::string& v) { s.threshold = parse_double(v); }},
        {"min_crossings",
         [](Settings& s, const std::string& v) { s.min_crossings = parse_int_value(v); }},
        {"cost_tol", [](Settings& s, const std::string& v) { s.cost_tol = parse_double(v); }},
        {"degeneracy_tol",
         [](Settings& s, const std::string& v) { s.degeneracy_tol = parse_double(v); }},
        {"central_fraction",
         [](Settings& s, const std::string& v) { s.central_fraction = parse_double(v); }},
        {"seed", [](Settings& s, const std::string& v) { s.seed = parse_u64_value(v); }},
        {"workers",
         [](Settings& s, const std::string& v) { s.workers = static_cast<std::size_t>(parse_u64_value(v)); }},
        {"realisations", [](Settings& s, const std::string& v) { s.realisations = parse_u64_value(v); }},
        {"realisation_offset",
         [](Settings& s, const std::string& v) { s.realisation_offset = parse_u64_value(v); }},
        {"candidate_cap",
         [](Settings& s, const std::string& v) { s.candidate_cap = parse_u64_value(v); }},
        {"dense_limit",
         [](Settings& s, const std::string& v) { s.dense_limit = static_cast<std::size_t>(parse_u64_value(v)); }},
        {"sector_capacity",
         [](Settings& s, const std::string& v) { s.sector_capacity = static_cast<std::size_t>(parse_u64_value(v)); }},
        {"krylov_dim",
         [](Settings& s, const std::string& v) { s.krylov_dim = static_cast<std::size_t>(parse_u64_value(v)); }},
        {"substep_tol", [](Settings& s, const std::string& v) { s.substep_tol = parse_double(v); }},
        {"method", [](Settings& s, const std::string& v) { s.method = v; (void)method_from_string(v); }},
    };
    return keys;
}

[[nodiscard]] inline std::string normalize_key(std::string_view raw) {
    std::string key;
    key.reserve(raw.size());
    for (char c : raw) key.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return key;
}

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool apply_key(Settings& settings, const std::string& key, const std::string& value,
                      const std::string& where, std::vector<std::string>& errors) {
    for (const ConfigKey& entry : config_keys()) {
        if (entry.name != key) continue;
        try {
            entry.apply(settings, value);
        } catch (const std::exception& e) {
            errors.push_back(where + ": bad value for '" + key + "': " + e.what());
        }
        return true;
    }
    errors.push_back(where + ": unknown key '" + key + "'");
    return false;
}

} // namespace detail

/// Parse a config file over `base`. Lines: `key = value`, blank, `#`/`;`
/// comments, and `[section]` headers (grouping only; keys are global).
/// `applied_keys`, when given, collects the normalized keys the file set.
[[nodiscard]] inline Settings load_config_file(const std::string& path, Settings base = {},
                                               std::vector<std::string>* applied_keys = nullptr) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});

    std::vector<std::string> errors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = detail::trim(line);
        if (body.empty() || body.front() == '#' || body.front() == ';') continue;
        const std::string where = path + ":" + std::to_string(line_no);
        if (body.front() == '[') {
            if (body.back() != ']') errors.push_back(where + ": malformed section header");
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back(where + ": expected key = value");
            continue;
        }
        const std::string key = detail::normalize_key(detail::trim(body.substr(0, eq)));
        const std::string value{detail::trim(body.substr(eq + 1))};
        if (detail::apply_key(base, key, value, where, errors) && applied_keys)
            applied_keys->push_back(key);
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return base;
}

inline constexpr std::string_view env_prefix = "RCSPIN_";

/// Apply RCSPIN_<KEY> environment overrides (key upper-cased, e.g.
/// RCSPIN_THRESHOLD). Returns the list of applied variable names.
inline std::vector<std::string> apply_env_overrides(Settings& settings) {
    std::vector<std::string> errors;
    std::vector<std::string> applied;
    for (const detail::ConfigKey& entry : detail::config_keys()) {
        std::string var{env_prefix};
        for (char c : entry.name) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        const char* value = std::getenv(var.c_str());
        if (!value) continue;
        try {
            entry.apply(settings, value);
            applied.push_back(var);
        } catch (const std::exception& e) {
            errors.push_back("environment " + var + ": " + e.what());
        }
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return applied;
}

/// Cross-field validation; collects every violation.
inline void validate_settings(const Settings& s) {
    std::vector<std::string> errors;
    if (s.n_sites < 2 || s.n_sites > 63) errors.push_back("n must be in [2, 63]");
    if (s.mu < 0.0) errors.push_back("mu must be >= 0");
    if (s.epsilon < 0) errors.push_back("epsilon must be >= 0");
    if (s.min_range < 0) errors.push_back("min_range must be >= 0");
    if (s.dt <= 0.0) errors.push_back("dt must be > 0");
    if (s.t_max && *s.t_max < 0.0) errors.push_back("tmax must be >= 0");
    if (!(s.threshold > 0.0 && s.threshold < 1.0)) errors.push_back("threshold must be in (0, 1)");
    if (s.min_crossings < 1) errors.push_back("min_crossings must be >= 1");
    if (s.cost_tol <= 0.0) errors.push_back("cost_tol must be > 0");
    if (s.degeneracy_tol < 0.0) errors.push_back("degeneracy_tol must be >= 0");
    if (!(s.central_fraction > 0.0) || s.central_fraction > 1.0)
        errors.push_back("central_fraction must be in (0, 1]");
    if (s.realisations == 0) errors.push_back("realisations must be >= 1");
    if (s.candidate_cap == 0) errors.push_back("candidate_cap must be >= 1");
    if (s.dense_limit == 0) errors.push_back("dense_limit must be >= 1");
    if (s.sector_capacity == 0) errors.push_back("sector_capacity must be >= 1");
    if (s.krylov_dim < 2) errors.push_back("krylov_dim must be >= 2");
    if (s.substep_tol <= 0.0) errors.push_back("substep_tol must be > 0");
    for (double v : s.mu_over_n)
        if (v < 0.0) errors.push_back("mu_over_n values must be >= 0");
    try {
        (void)method_from_string(s.method);
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

inline void to_json(nlohmann::json& j, const Settings& s) {
    j = nlohmann::json{{"n", s.n_sites},
                       {"mu", s.mu},
                       {"mu_over_n", s.mu_over_n},
                       {"epsilon", s.epsilon},
                       {"min_range", s.min_range},
                       {"boundary", to_string(s.boundary)},
                       {"tmax", resolved_t_max(s)},
                       {"dt", s.dt},
                       {"threshold", s.threshold},
                       {"min_crossings", s.min_crossings},
                       {"cost_tol", s.cost_tol},
                       {"degeneracy_tol", s.degeneracy_tol},
                       {"central_fraction", s.central_fraction},
                       {"seed", s.seed},
                       {"workers", s.workers},
                       {"realisations", s.realisations},
                       {"realisation_offset", s.realisation_offset},
                       {"candidate_cap", s.candidate_cap},
                       {"dense_limit", s.dense_limit},
                       {"sector_capacity", s.sector_capacity},
                       {"krylov_dim", s.krylov_dim},
                       {"substep_tol", s.substep_tol},
                       {"method", s.method}};
}

} // namespace rcspin
