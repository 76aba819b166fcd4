#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhlab/geometry.hpp"

namespace bhlab::hardy {

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Analytic maps of the unit disk from the catalog: the identity, the
/// Moebius map (1-z)/(1+z), its positive powers, and exp((1-z)/(1+z)).
struct MapSpec {
    enum class Kind { Identity, Moebius, WedgePower, ExpMoebius } kind = Kind::Moebius;
    double exponent = 1.0;  // WedgePower only; must be positive

    static MapSpec identity() { return {Kind::Identity, 1.0}; }
    static MapSpec moebius() { return {Kind::Moebius, 1.0}; }
    static MapSpec wedge_power(double exponent);
    static MapSpec exp_moebius() { return {Kind::ExpMoebius, 1.0}; }

    std::string name() const;
};

/// |f(r e^{it})| evaluated directly (never through series expansions).
double modulus_on_circle(const MapSpec& f, double r, double t);

/// (1/2pi) * integral over [0, 2pi) of |f(r e^{it})|^p dt, by adaptive
/// Gauss-Kronrod quadrature with subdivision refined toward t = pi where
/// |1 + z| degenerates. Relative tolerance 1e-8; +infinity when the mean
/// overflows the double range. r must stay below 1 - 1e-8.
double integral_mean(const MapSpec& f, double p, double r, double rel_tol = 1e-8, int max_panels = 4000);

struct MeansProfile {
    double p = 0.0;
    std::vector<double> radii;
    std::vector<double> means;
    std::optional<double> growth_exponent;  // slope of log mean vs -log(1-r)
};

MeansProfile means_profile(const MapSpec& f, double p, const std::vector<double>& radii);

enum class GrowthClass { Bounded, Divergent, Inconclusive };

struct PClassification {
    double p = 0.0;
    GrowthClass cls = GrowthClass::Inconclusive;
    double growth_exponent = 0.0;
};

struct HardyNumberResult {
    double h = 0.0;
    double grid_step = 0.0;
    bool inconclusive = false;
    std::vector<PClassification> grid;
};

struct HardyNumberOptions {
    double p_min = 0.1;
    double p_max = 2.0;
    double p_step = 0.1;
    int r_levels = 13;          // radii 1 - 2^{-k}, k = 3..r_levels
    int refine_levels = 3;      // extra levels when the growth fit is ambiguous
    double slope_eps = 0.05;    // divergence threshold on the growth exponent
    double mean_cap = 1e12;     // means beyond this classify as divergent outright
    int bisect_iters = 3;
};

/// h(f) = sup{p : means of |f|^p stay bounded as r -> 1}, located by
/// classifying each grid p through the growth of log means along
/// r_k = 1 - 2^{-k} and bisecting the boundary down to the grid resolution.
HardyNumberResult hardy_number(const MapSpec& f, const HardyNumberOptions& opts = {});

struct BurkholderReport {
    std::string map_name;
    double h_estimate = 0.0;
    double bh_exact = 0.0;
    double grid_tol = 0.0;
    bool equivalence_pass = false;  // |h - 2 bh| <= grid_tol
    std::optional<double> mc_tail_exponent;
    std::optional<double> mc_tolerance;
    bool mc_pass = true;
};

/// Checks h(f) against 2 * bh(domain) for a catalog pair, optionally
/// cross-checking against a Monte Carlo tail exponent.
BurkholderReport check_burkholder_equivalence(const geom::Domain& d, const MapSpec& f,
                                              const HardyNumberOptions& opts = {},
                                              std::optional<double> mc_tail_exponent = std::nullopt,
                                              double mc_tolerance = 0.15);

}  // namespace bhlab::hardy
