#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sletip/errors.hpp"

namespace sletip {

enum class SamplerId { reverse_flow, diffusion };

inline std::string sampler_name(SamplerId s) {
    return s == SamplerId::reverse_flow ? "reverse_flow" : "diffusion";
}

inline SamplerId sampler_from_name(const std::string& s) {
    if (s == "reverse_flow") return SamplerId::reverse_flow;
    if (s == "diffusion") return SamplerId::diffusion;
    throw invalid_parameter("unknown sampler id: " + s);
}

// Columnar draws of the tip law together with their provenance. For the
// diffusion sampler, t_horizon records the burn-in time.
struct SampleSet {
    double kappa = 0.0;
    std::int64_t n_samples = 0;
    std::vector<double> x, y, alpha, u;
    std::uint64_t master_seed = 0;
    double dt = 0.0;
    double t_horizon = 0.0;
    SamplerId sampler = SamplerId::reverse_flow;
    std::string created_at; // in-memory only; persisted artifacts stay reproducible
};

namespace detail {
inline std::string format_full17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

inline void write_samples_csv(const SampleSet& s, std::ostream& os) {
    os << "# kappa,dt,t_horizon,seed,sampler\n";
    os << "# " << detail::format_full17(s.kappa) << ',' << detail::format_full17(s.dt) << ','
       << detail::format_full17(s.t_horizon) << ',' << s.master_seed << ','
       << sampler_name(s.sampler) << "\n";
    os << "x,y,alpha,u\n";
    for (std::int64_t i = 0; i < s.n_samples; ++i) {
        os << detail::format_full17(s.x[i]) << ',' << detail::format_full17(s.y[i]) << ','
           << detail::format_full17(s.alpha[i]) << ',' << detail::format_full17(s.u[i]) << "\n";
    }
}

inline void write_samples_csv_file(const SampleSet& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_samples_csv(s, os);
}

inline SampleSet read_samples_csv(std::istream& is) {
    SampleSet s;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# kappa", 0) != 0)
        throw io_error("sample csv: missing '# kappa,...' header");
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
        throw io_error("sample csv: missing metadata line");
    {
        std::istringstream ms(line.substr(2));
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ms, field, ',')) fields.push_back(field);
        if (fields.size() != 5) throw io_error("sample csv: metadata line needs 5 fields");
        s.kappa = std::stod(fields[0]);
        s.dt = std::stod(fields[1]);
        s.t_horizon = std::stod(fields[2]);
        s.master_seed = std::stoull(fields[3]);
        s.sampler = sampler_from_name(fields[4]);
    }
    if (!std::getline(is, line) || line != "x,y,alpha,u")
        throw io_error("sample csv: missing column header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double v[4];
        const char* p = line.c_str();
        char* end = nullptr;
        for (int k = 0; k < 4; ++k) {
            v[k] = std::strtod(p, &end);
            if (end == p) throw io_error("sample csv: malformed data row: " + line);
            p = end;
            if (k < 3) {
                if (*p != ',') throw io_error("sample csv: expected comma in row: " + line);
                ++p;
            }
        }
        s.x.push_back(v[0]);
        s.y.push_back(v[1]);
        s.alpha.push_back(v[2]);
        s.u.push_back(v[3]);
    }
    s.n_samples = std::int64_t(s.x.size());
    return s;
}

inline SampleSet read_samples_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open for reading: " + path);
    return read_samples_csv(is);
}

} // namespace sletip
