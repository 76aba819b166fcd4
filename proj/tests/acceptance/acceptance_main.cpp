// Acceptance suite: one deterministic pass/fail line per criterion, with the
// sample counts, seeds, horizons and tolerances pinned below. Exits nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "bhlab/experiments.hpp"
#include "bhlab/oracles.hpp"
#include "bhlab/serialize.hpp"

namespace {

using namespace bhlab;
using Clock = std::chrono::steady_clock;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr std::uint64_t kSeed = 20260809;

struct Outcome {
    int id;
    std::string name;
    bool pass;
    double seconds;
    std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(int id, const std::string& name, bool pass, double seconds, const std::string& detail = "") {
    g_outcomes.push_back({id, name, pass, seconds, detail});
    std::printf("[%s] criterion %2d  %-28s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
}

void report_checks(int id, const std::string& name, const expt::Report& rep, double seconds) {
    for (const auto& c : rep.checks)
        if (!c.pass)
            std::printf("       failed check: %s  value=%.6g  accepted=[%.6g, %.6g] %s\n", c.name.c_str(), c.value,
                        c.lo, c.hi, c.note.c_str());
    report(id, name, rep.all_pass(), seconds);
}

expt::Engine engine(std::uint64_t salt, std::size_t samples, double t_max, double dt_max, double beta) {
    expt::Engine eng;
    eng.sampler.dt_max = dt_max;
    eng.sampler.step_factor = beta;
    eng.sampler.shell_eps = 1e-4;
    eng.sampler.t_max = t_max;
    eng.sampler.seed = kSeed ^ salt;
    eng.samples = samples;
    eng.threads = 0;
    return eng;
}

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- criteria

void criterion_1_calibration() {
    const auto t0 = Clock::now();
    // 1e5 samples per target; tolerances 2%, 2%, 3%
    const auto rep = expt::run_calibration({0.02, 0.02, 0.03}, engine(0x1001, 100000, 400.0, 0.02, 0.4));
    report_checks(1, "oracle calibration", rep, elapsed(t0));
}

void criterion_2_halfplane() {
    const auto t0 = Clock::now();
    expt::HalfPlaneTailParams params;
    const auto rep = expt::run_half_plane_tail(params, engine(0x1002, 1000000, 1000.0, 1e6, 0.4));
    report_checks(2, "half-plane tail", rep, elapsed(t0));
}

void criterion_3_dashed_half_plane() {
    const auto t0 = Clock::now();
    expt::DashedHalfPlaneParams params;
    params.grid = {{2.0, 0.5}, {2.0, 0.9}, {5.0, 0.5}};
    params.layer_samples = 30000;
    params.wos_samples = 100000;
    params.wos_tolerance = 0.01;
    const auto rep = expt::run_dashed_half_plane_study(params, engine(0x1003, 200000, 500.0, 1e6, 0.4));
    report_checks(3, "dashed half-plane suite", rep, elapsed(t0));
}

void criterion_4_lattice() {
    const auto t0 = Clock::now();
    expt::LatticeParams params;  // Z^2, r = 1/4, wedge-complement at pi/8
    const auto rep = expt::run_lattice_study(params, engine(0x1004, 200000, 60.0, 1e6, 0.4));
    report_checks(4, "disk-lattice suite", rep, elapsed(t0));
}

void criterion_5_dashed_wedge() {
    const auto t0 = Clock::now();
    expt::DashedWedgeParams params;  // alpha = pi/4 -> target 1/3
    const auto rep = expt::run_dashed_wedge_study(params, engine(0x1005, 200000, 2000.0, 1e6, 0.4));
    report_checks(5, "dashed wedge (min rule)", rep, elapsed(t0));
}

void criterion_6_hardy() {
    const auto t0 = Clock::now();
    const auto rep = expt::run_hardy_study({}, engine(0x1006, 60000, 1000.0, 1e6, 0.4));
    report_checks(6, "hardy module", rep, elapsed(t0));
}

expt::StaircasePlan g_plan;
bool g_have_plan = false;

void criterion_7_staircase() {
    const auto t0 = Clock::now();
    expt::StaircaseParams params;
    params.stages = 5;  // alpha_n = (pi/4)(1 - 2^{-(n+1)}), stages certified for n = 2..5
    const auto rep = expt::run_staircase_budget(params, engine(0x1007, 100000, 400.0, 1e6, 0.4), &g_plan);
    g_have_plan = rep.all_pass() || g_plan.radii.size() == 5;
    const double secs = elapsed(t0);
    report_checks(7, "staircase budget search", rep, secs);
    if (secs > 1800.0) report(7, "staircase runtime bound", false, secs, "exceeded 30 minutes");
}

void criterion_8_growth_ratio() {
    const auto t0 = Clock::now();
    expt::GrowthRatioParams params;
    params.staircase.stages = 5;
    const auto rep = expt::run_growth_ratio_study(params, engine(0x1008, 100000, 400.0, 1e6, 0.4),
                                                  g_have_plan ? &g_plan : nullptr);
    report_checks(8, "growth-ratio bound", rep, elapsed(t0));
}

void criterion_9_winding() {
    const auto t0 = Clock::now();
    expt::WindingParams params;  // pi/2, pi, 2pi -> 1/2, 1/4, 1/8
    auto eng = engine(0x1009, 400000, 1000.0, 1e6, 0.3);
    const auto rep = expt::run_winding_study(params, eng);
    report_checks(9, "winding-time tails", rep, elapsed(t0));
}

void criterion_10_determinism() {
    const auto t0 = Clock::now();
    const auto eng = engine(0x100A, 20000, 100.0, 0.02, 0.4);
    const auto r1 = expt::run_calibration({}, eng);
    const auto r2 = expt::run_calibration({}, eng);
    auto eng_threads = eng;
    eng_threads.threads = 3;
    const auto r3 = expt::run_calibration({}, eng_threads);
    const bool same = io::report_to_json(r1).dump() == io::report_to_json(r2).dump();
    const bool thread_free = io::report_to_json(r1).dump() == io::report_to_json(r3).dump();
    report(10, "byte-identical reruns", same && thread_free, elapsed(t0),
           same ? (thread_free ? "" : "worker count changed the metrics") : "rerun diverged");
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    std::printf("acceptance suite: seed %llu\n", static_cast<unsigned long long>(kSeed));
    try {
        criterion_1_calibration();
        criterion_2_halfplane();
        criterion_3_dashed_half_plane();
        criterion_4_lattice();
        criterion_5_dashed_wedge();
        criterion_6_hardy();
        criterion_7_staircase();
        criterion_8_growth_ratio();
        criterion_9_winding();
        criterion_10_determinism();
    } catch (const std::exception& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 2;
    }
    int failed = 0;
    for (const auto& o : g_outcomes) failed += o.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed (total %.1fs)\n", static_cast<int>(g_outcomes.size()) - failed,
                g_outcomes.size(), elapsed(t0));
    return failed == 0 ? 0 : 1;
}
