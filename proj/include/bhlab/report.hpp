#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bhlab::expt {

/// One named pass/fail assertion with the value and the accepted interval.
struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double lo = -1e308;
    double hi = 1e308;
    std::string note;
};

/// Plot-ready columnar data attached to a report (survival curves, means
/// profiles, ratio sequences).
struct Curve {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Machine-readable experiment outcome: flat metrics plus the assertion list
/// and full provenance (config hash, domain hash, seed). Serialization lives
/// in the io module.
struct Report {
    std::string experiment;
    std::uint64_t config_hash = 0;
    std::uint64_t domain_hash = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> info;
    std::vector<Check> checks;
    std::vector<Curve> curves;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add_check(const std::string& name, double value, double lo, double hi, const std::string& note = "") {
        checks.push_back({name, value >= lo && value <= hi, value, lo, hi, note});
    }
    void add_flag(const std::string& name, bool pass, const std::string& note = "") {
        checks.push_back({name, pass, pass ? 1.0 : 0.0, 1.0, 1.0, note});
    }
};

}  // namespace bhlab::expt
