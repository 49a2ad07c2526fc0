#pragma once

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace sletip {

// One verified quantity: estimate vs closed-form reference.
struct CheckResult {
    std::string name;
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::optional<double> reference;
    std::optional<double> z_score;
    bool pass = false;
};

inline CheckResult make_check(std::string name, double estimate, double stderr_,
                              std::optional<double> reference, bool pass) {
    CheckResult c;
    c.name = std::move(name);
    c.estimate = estimate;
    c.stderr_ = stderr_;
    c.reference = reference;
    if (reference && stderr_ > 0.0) c.z_score = (estimate - *reference) / stderr_;
    c.pass = pass;
    return c;
}

inline nlohmann::ordered_json to_json(const CheckResult& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["estimate"] = c.estimate;
    j["stderr"] = c.stderr_;
    if (c.reference)
        j["reference"] = *c.reference;
    else
        j["reference"] = nullptr;
    if (c.z_score)
        j["z_score"] = *c.z_score;
    else
        j["z_score"] = nullptr;
    j["pass"] = c.pass;
    return j;
}

inline nlohmann::ordered_json to_json(const std::vector<CheckResult>& checks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) arr.push_back(to_json(c));
    return arr;
}

inline void print_check_table(const std::vector<CheckResult>& checks, std::ostream& os) {
    os << std::left << std::setw(44) << "check" << std::right << std::setw(14) << "estimate"
       << std::setw(12) << "stderr" << std::setw(14) << "reference" << std::setw(9) << "z"
       << "  result\n";
    for (const auto& c : checks) {
        os << std::left << std::setw(44) << c.name << std::right << std::setw(14)
           << std::setprecision(6) << c.estimate << std::setw(12) << std::setprecision(3)
           << c.stderr_;
        if (c.reference)
            os << std::setw(14) << std::setprecision(6) << *c.reference;
        else
            os << std::setw(14) << "-";
        if (c.z_score)
            os << std::setw(9) << std::setprecision(2) << *c.z_score;
        else
            os << std::setw(9) << "-";
        os << (c.pass ? "  pass" : "  FAIL") << "\n";
    }
}

} // namespace sletip
