#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sletip/charts.hpp"
#include "sletip/errors.hpp"
#include "sletip/samples.hpp"

namespace sletip {

enum class Command { simulate, moments, profiles, solve_fpk, verify, occupation, plot };

inline std::string command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::moments: return "moments";
        case Command::profiles: return "profiles";
        case Command::solve_fpk: return "solve-fpk";
        case Command::verify: return "verify";
        case Command::occupation: return "occupation";
        case Command::plot: return "plot";
    }
    return "?";
}

inline Command command_from_name(const std::string& s) {
    for (Command c : {Command::simulate, Command::moments, Command::profiles, Command::solve_fpk,
                      Command::verify, Command::occupation, Command::plot})
        if (command_name(c) == s) return c;
    throw config_error("unknown command: " + s);
}

enum class OutputFormat { csv, json_text, svg };

inline std::string format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::json_text: return "json-text";
        case OutputFormat::svg: return "svg";
    }
    return "?";
}

// Flat experiment configuration. Every field is reachable both as a
// `key=value` line in a config file and as a `--kebab-case` flag; flags
// override the file, and SLE_TIP_SEED overrides the seed last.
struct ExperimentConfig {
    Command command = Command::simulate;
    double kappa = 2.0;
    std::int64_t n_samples = 100000;
    double dt = 1e-3;
    double t_horizon = 1e4;
    double burn_in = 40.0;
    std::uint64_t seed = 1;
    SamplerId sampler = SamplerId::reverse_flow;
    int nx = 200;
    int ny = 200;
    double x_half_width = 8.0;
    double z_min = -6.0;
    int n_alpha_bins = 48;
    int moment_order = 1; // n in E u^{-n}
    double alpha_lo = 1e-6;
    double alpha_hi = pi_const_cfg() - 1e-6;
    double u_lo = 1.0;
    double u_hi = 2.0;
    double t_max = 1e4;
    int threads = 0;
    Chart chart = Chart::alpha_im;
    std::string input;
    std::string output_dir = "out";
    OutputFormat format = OutputFormat::csv;

    static constexpr double pi_const_cfg() { return 3.14159265358979323846; }
};

namespace detail {

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw config_error("malformed number for key '" + key + "': " + v);
    }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw config_error("malformed integer for key '" + key + "': " + v);
    }
}

inline std::string format_double_cfg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"command",
         [](ExperimentConfig& c, const std::string& v) { c.command = command_from_name(v); },
         [](const ExperimentConfig& c) { return command_name(c.command); }},
        {"kappa",
         [](ExperimentConfig& c, const std::string& v) { c.kappa = parse_double("kappa", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.kappa); }},
        {"n-samples",
         [](ExperimentConfig& c, const std::string& v) {
             c.n_samples = parse_int("n-samples", v);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.n_samples); }},
        {"dt", [](ExperimentConfig& c, const std::string& v) { c.dt = parse_double("dt", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.dt); }},
        {"t-horizon",
         [](ExperimentConfig& c, const std::string& v) {
             c.t_horizon = parse_double("t-horizon", v);
         },
         [](const ExperimentConfig& c) { return format_double_cfg(c.t_horizon); }},
        {"burn-in",
         [](ExperimentConfig& c, const std::string& v) { c.burn_in = parse_double("burn-in", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.burn_in); }},
        {"seed",
         [](ExperimentConfig& c, const std::string& v) {
             c.seed = std::uint64_t(parse_int("seed", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
        {"sampler",
         [](ExperimentConfig& c, const std::string& v) { c.sampler = sampler_from_name(v); },
         [](const ExperimentConfig& c) { return sampler_name(c.sampler); }},
        {"nx",
         [](ExperimentConfig& c, const std::string& v) { c.nx = int(parse_int("nx", v)); },
         [](const ExperimentConfig& c) { return std::to_string(c.nx); }},
        {"ny",
         [](ExperimentConfig& c, const std::string& v) { c.ny = int(parse_int("ny", v)); },
         [](const ExperimentConfig& c) { return std::to_string(c.ny); }},
        {"x-half-width",
         [](ExperimentConfig& c, const std::string& v) {
             c.x_half_width = parse_double("x-half-width", v);
         },
         [](const ExperimentConfig& c) { return format_double_cfg(c.x_half_width); }},
        {"z-min",
         [](ExperimentConfig& c, const std::string& v) { c.z_min = parse_double("z-min", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.z_min); }},
        {"n-alpha-bins",
         [](ExperimentConfig& c, const std::string& v) {
             c.n_alpha_bins = int(parse_int("n-alpha-bins", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.n_alpha_bins); }},
        {"moment-order",
         [](ExperimentConfig& c, const std::string& v) {
             c.moment_order = int(parse_int("moment-order", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.moment_order); }},
        {"alpha-lo",
         [](ExperimentConfig& c, const std::string& v) {
             c.alpha_lo = parse_double("alpha-lo", v);
         },
         [](const ExperimentConfig& c) { return format_double_cfg(c.alpha_lo); }},
        {"alpha-hi",
         [](ExperimentConfig& c, const std::string& v) {
             c.alpha_hi = parse_double("alpha-hi", v);
         },
         [](const ExperimentConfig& c) { return format_double_cfg(c.alpha_hi); }},
        {"u-lo",
         [](ExperimentConfig& c, const std::string& v) { c.u_lo = parse_double("u-lo", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.u_lo); }},
        {"u-hi",
         [](ExperimentConfig& c, const std::string& v) { c.u_hi = parse_double("u-hi", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.u_hi); }},
        {"t-max",
         [](ExperimentConfig& c, const std::string& v) { c.t_max = parse_double("t-max", v); },
         [](const ExperimentConfig& c) { return format_double_cfg(c.t_max); }},
        {"threads",
         [](ExperimentConfig& c, const std::string& v) {
             c.threads = int(parse_int("threads", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.threads); }},
        {"chart",
         [](ExperimentConfig& c, const std::string& v) { c.chart = chart_from_name(v); },
         [](const ExperimentConfig& c) { return chart_name(c.chart); }},
        {"input",
         [](ExperimentConfig& c, const std::string& v) { c.input = v; },
         [](const ExperimentConfig& c) { return c.input; }},
        {"output-dir",
         [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
         [](const ExperimentConfig& c) { return c.output_dir; }},
        {"format",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "csv") c.format = OutputFormat::csv;
             else if (v == "json-text") c.format = OutputFormat::json_text;
             else if (v == "svg") c.format = OutputFormat::svg;
             else throw config_error("unknown format: " + v);
         },
         [](const ExperimentConfig& c) { return format_name(c.format); }},
    };
    return table;
}

inline const Field* find_field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return &f;
    return nullptr;
}

} // namespace detail

inline void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto* f = detail::find_field(key);
    if (f == nullptr) throw config_error("unknown key: " + key);
    f->set(cfg, value);
}

// Parse a flat key=value file into cfg. Duplicate keys warn and keep the last
// occurrence; blank lines and '#' comments are skipped; unknown keys and
// malformed values are errors that name the key and line.
inline void config_load(ExperimentConfig& cfg, const std::string& path,
                        std::ostream& warnings = std::cerr) {
    std::ifstream is(path);
    if (!is) throw config_error("config file not found: " + path);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (auto it = seen.find(key); it != seen.end())
            warnings << "warning: " << path << ":" << lineno << ": duplicate key '" << key
                     << "' overrides line " << it->second << "\n";
        seen[key] = lineno;
        try {
            config_set(cfg, key, value);
        } catch (const config_error& e) {
            throw config_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const invalid_parameter& e) {
            throw config_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

// Environment override: SLE_TIP_SEED beats both file and flags.
inline void apply_env_overrides(ExperimentConfig& cfg) {
    if (const char* s = std::getenv("SLE_TIP_SEED")) {
        cfg.seed = std::uint64_t(detail::parse_int("SLE_TIP_SEED", s));
    }
}

// Canonical serialization: every field, fixed order. Used for the manifest
// and for content addressing.
inline std::string config_canonical(const ExperimentConfig& cfg) {
    std::ostringstream os;
    for (const auto& f : detail::fields()) os << f.key << "=" << f.get(cfg) << "\n";
    return os.str();
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Content address of a run: every field except the output location and the
// worker count (results are thread-count invariant by construction).
inline std::string config_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    for (const auto& f : detail::fields()) {
        if (f.key == "output-dir" || f.key == "threads") continue;
        os << f.key << "=" << f.get(cfg) << "\n";
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(os.str())));
    return buf;
}

// Validate numeric fields against the owning preconditions before dispatch.
inline void config_validate(const ExperimentConfig& cfg) {
    if (!(cfg.kappa >= 0.0)) throw config_error("kappa must be >= 0");
    if (cfg.n_samples < 1) throw config_error("n-samples must be >= 1");
    if (!(cfg.dt > 0.0)) throw config_error("dt must be > 0");
    if (!(cfg.t_horizon >= 1.0)) throw config_error("t-horizon must be >= 1");
    if (cfg.sampler == SamplerId::diffusion && !(cfg.burn_in >= 20.0))
        throw config_error("burn-in must be >= 20");
    if (cfg.sampler == SamplerId::diffusion && !(cfg.dt <= 1e-2))
        throw config_error("dt must be <= 1e-2 for the diffusion sampler");
    if (cfg.command == Command::solve_fpk && (cfg.nx < 50 || cfg.ny < 50))
        throw config_error("solve-fpk needs nx, ny >= 50");
    if (cfg.nx < 1 || cfg.ny < 1) throw config_error("nx, ny must be >= 1");
    if (cfg.n_alpha_bins < 4) throw config_error("n-alpha-bins must be >= 4");
    if (cfg.moment_order < 1) throw config_error("moment-order must be >= 1");
    if (!(cfg.t_max > 0.0)) throw config_error("t-max must be > 0");
    if (cfg.command == Command::occupation) {
        if (!(0.0 < cfg.alpha_lo && cfg.alpha_lo < cfg.alpha_hi &&
              cfg.alpha_hi < ExperimentConfig::pi_const_cfg()))
            throw config_error("occupation needs 0 < alpha-lo < alpha-hi < pi");
        if (!(0.0 < cfg.u_lo && cfg.u_lo < cfg.u_hi))
            throw config_error("occupation needs 0 < u-lo < u-hi");
    }
}

} // namespace sletip
