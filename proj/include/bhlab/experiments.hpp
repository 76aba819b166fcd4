#pragma once

#include <cstdint>
#include <vector>

#include "bhlab/estimators.hpp"
#include "bhlab/geometry.hpp"
#include "bhlab/hardy.hpp"
#include "bhlab/report.hpp"
#include "bhlab/sampler.hpp"

namespace bhlab::expt {

struct SearchExhausted : std::runtime_error {
    explicit SearchExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Shared execution knobs for the drivers.
struct Engine {
    mc::SamplerConfig sampler;
    std::size_t samples = 100000;
    unsigned threads = 0;
    /// Survival-curve points written to report artifacts.
    std::size_t curve_points = 48;
};

// --------------------------------------------------------- exact-mean checks

struct CalibrationParams {
    double tolerance_disk = 0.02;
    double tolerance_strip = 0.02;
    double tolerance_wedge = 0.03;
};
Report run_calibration(const CalibrationParams& params, const Engine& eng);

// ------------------------------------------------------------ half-plane tail

struct HalfPlaneTailParams {
    geom::Point start{0.0, 1.0};
    double p_stable = 0.4;
    double p_divergent = 0.6;
    double stabilization_tol = 0.05;  // relative change when the horizon doubles
};
Report run_half_plane_tail(const HalfPlaneTailParams& params, const Engine& eng);

// --------------------------------------------------- dashed half-plane study

struct DashedHalfPlaneParams {
    std::vector<std::pair<double, double>> grid = {{2.0, 0.5}, {2.0, 0.9}, {5.0, 0.5}};  // (period, seg half-length)
    geom::Point start{0.0, 1.0};
    // the alternating-layer decay runs on the first grid pair only: each
    // half-trip between the lines survives with probability ~0.1, so deeper
    // levels need large trace counts
    int max_layers = 14;
    std::size_t layer_samples = 50000;
    std::size_t layer_min_count = 15;
    std::size_t wos_samples = 100000;
    double wos_tolerance = 0.01;
};
Report run_dashed_half_plane_study(const DashedHalfPlaneParams& params, const Engine& eng);

// -------------------------------------------------------------- lattice study

struct LatticeParams {
    double hole_radius = 0.25;
    geom::Point start{0.5, 0.5};
    std::vector<double> moment_orders = {1.0, 2.0, 3.0};
    double stabilization_tol = 0.05;
    double decade_slope_increase = 1.0;  // rolling log-log slope must grow this much per decade
    double decade_t1 = 0.15;
    // masked variants
    bool run_wedge_complement = true;
    double wedge_complement_alpha = 0.39269908169872414;  // pi/8
    geom::Point wedge_complement_start{1.0, 0.0};
    bool run_edge_removed = false;
    geom::Point edge_removed_start{-3.0, 0.0};
};
Report run_lattice_study(const LatticeParams& params, const Engine& eng);

// --------------------------------------------------------- dashed wedge study

struct DashedWedgeParams {
    double alpha = 0.7853981633974483;  // half-angle of the inner wedge
    double gap_len = 0.5;
    double gap_period = 1.0;
    geom::Point start{1.0, 0.0};
    std::vector<double> condition_grid = {1.0, 2.0, 4.0, 8.0};  // distances along the upper ray of k
    std::size_t condition_samples = 4000;
    double condition_p = 0.25;  // moment order for the hitting-time condition
};
Report run_dashed_wedge_study(const DashedWedgeParams& params, const Engine& eng);

// ----------------------------------------------------- staircase construction

struct BudgetSchedule {
    double base = 0.0;             // C
    std::vector<double> budgets;   // budget_n = C * (2 - 2^{-n}), n = 1..N

    static BudgetSchedule make(double base, int stages);
};

struct StageCertificate {
    int stage = 0;
    double alpha = 0.0;
    double radius = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci99_hi = 0.0;
    double budget = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

struct StaircasePlan {
    std::vector<double> angles;  // per stage, increasing toward pi/4
    std::vector<double> radii;   // radii[0] = 0
    double base_mean = 0.0;      // C, the measured stage-1 mean
    std::vector<StageCertificate> certificates;

    geom::Domain domain(int deepest_stage) const;
};

struct StaircaseParams {
    int stages = 5;                    // deepest stage index N (angles n = 1..N)
    double angle_scale = 0.7853981633974483;  // angles = scale/... see default_angles
    std::vector<double> angles;        // optional explicit override
    double radius_cap = 1e6;
    int bisect_iters = 5;
    double certify_level_z = 2.5758293035489004;  // 99% two-sided normal quantile
    int retry_factor = 4;              // sample multiplier for one certification retry
};

/// Default angle schedule alpha_n = (pi/4)(1 - 2^{-(n+1)}).
std::vector<double> default_staircase_angles(int stages);

/// Searches the smallest tested cut radius whose certified mean stays within
/// the stage budget (doubling then bisection); throws SearchExhausted past
/// the radius cap.
StageCertificate choose_radius(int stage, const StaircasePlan& plan_so_far, double budget,
                               const StaircaseParams& params, const Engine& eng);

Report run_staircase_budget(const StaircaseParams& params, const Engine& eng, StaircasePlan* plan_out = nullptr);

// ---------------------------------------------------------- growth-ratio study

struct GrowthRatioParams {
    StaircaseParams staircase;
    /// Scaled truncation horizons per ratio stage n = 2, 3, ...: the run from
    /// (2 R_n, 0) uses t_max = tau * 4 R_n^2, so the measured ratio is the
    /// scale-free truncated mean. Deep stages need long horizons because the
    /// tail exponent approaches 1 and the mean mass spreads over decades.
    std::vector<double> scaled_horizons = {1.0e3, 4.0e3, 3.0e4, 1.0e6};
    std::size_t deep_samples_scale = 4;  // extra samples for the last stage
    double ci_slack_z = 2.5758293035489004;
    double wedge_sanity_tau = 2.0e4;  // scaled horizon of the pure-wedge checks (stage-1 angle)
    std::vector<double> wedge_sanity_radii = {2.0, 8.0};
};
Report run_growth_ratio_study(const GrowthRatioParams& params, const Engine& eng, const StaircasePlan* plan = nullptr);

// -------------------------------------------------------- critical-moment study

struct CriticalMomentParams {
    StaircaseParams staircase;
    double tail_slack = 0.12;
};
Report run_critical_moment_study(const CriticalMomentParams& params, const Engine& eng,
                                 const StaircasePlan* plan = nullptr);

// ---------------------------------------------------------------- winding times

struct WindingParams {
    std::vector<double> alphas = {1.5707963267948966, 3.141592653589793, 6.283185307179586};
    std::vector<double> t_max_scale = {1.0, 1.0, 2.0};  // per-alpha horizon multiplier
    geom::Point start{1.0, 0.0};
    double tolerance = 0.0;  // extra allowance on the CI coverage checks
};
Report run_winding_study(const WindingParams& params, const Engine& eng);

// ------------------------------------------------------------------ hardy suite

struct HardyParams {
    hardy::HardyNumberOptions moebius_opts{0.2, 2.0, 0.1, 13, 3, 0.05, 1e12, 3};
    hardy::HardyNumberOptions wedge_opts{3.0, 5.0, 0.1, 13, 3, 0.05, 1e12, 3};
    hardy::HardyNumberOptions exp_opts{0.05, 1.0, 0.05, 13, 3, 0.05, 1e12, 3};
    double wedge_alpha = 0.39269908169872414;  // pi/8
    bool mc_cross_check = true;
    std::size_t mc_samples = 60000;
};
Report run_hardy_study(const HardyParams& params, const Engine& eng);

}  // namespace bhlab::expt
