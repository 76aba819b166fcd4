#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhlab/geometry.hpp"
#include "bhlab/rng.hpp"

namespace bhlab::mc {

struct StepBudgetExceeded : std::runtime_error {
    explicit StepBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct OriginTooClose : std::runtime_error {
    explicit OriginTooClose(const std::string& what) : std::runtime_error(what) {}
};

enum class Scheme { BridgeEuler, WalkOnSpheres };

struct SamplerConfig {
    // The step rule dt = min(dt_max, (beta * dist)^2) controls accuracy
    // through beta; dt_max matters only when absolute time resolution is
    // needed (mean calibration), so it defaults to effectively uncapped.
    double dt_max = 1e6;
    double step_factor = 0.5;   // beta
    double shell_eps = 1e-4;    // absorption shell around the boundary
    double t_max = 1e3;         // truncation horizon
    std::optional<double> r_max;  // spatial bailout radius (diagnostic only)
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::BridgeEuler;
    std::uint64_t max_steps = 200'000'000;  // per-sample guard (walk-on-spheres reports overruns)
    double dt_min = 1e-15;      // winding sampler: finest retry step
    double origin_excl = 1e-12; // winding sampler: exclusion radius around 0

    void validate() const;
};

/// One simulated trajectory outcome. `time` is NaN for position-only schemes
/// (walk-on-spheres); `feature_id` is geom::kNoFeature when truncated.
struct ExitSample {
    double time = 0.0;
    geom::Point position;
    std::int64_t feature_id = geom::kNoFeature;
    bool truncated = false;
    bool hit_rmax = false;
    std::uint32_t steps = 0;

    bool has_time() const { return !(time != time); }
};

struct SampleBatch {
    SamplerConfig cfg;
    geom::Point start;
    std::vector<ExitSample> samples;

    std::size_t size() const { return samples.size(); }
};

/// Draw of (T(D) /\ t_max, B at that time) for Brownian motion started at a.
/// Deterministic given (d, a, cfg, sample_index).
ExitSample sample_exit(const geom::Domain& d, geom::Point a, const SamplerConfig& cfg, std::uint64_t sample_index);

/// Exit position by walk-on-spheres to the eps-shell; time is left unset.
ExitSample sample_exit_position_wos(const geom::Domain& d, geom::Point a, const SamplerConfig& cfg,
                                    std::uint64_t sample_index);

/// n reproducible samples, evaluated by `threads` workers (0 = hardware
/// concurrency). Sample i owns the stream (cfg.seed, i), so the result is
/// identical for every worker count.
SampleBatch sample_batch(const geom::Domain& d, geom::Point a, const SamplerConfig& cfg, std::size_t n,
                         unsigned threads = 0);

// ---------------------------------------------------------------- layer sets

/// A closed set used by the alternating-layer sampler: a single line, a
/// periodic family of parallel lines, or a translated closed wedge.
struct LayerSet {
    enum class Kind { Line, LineFamily, WedgeRegion } kind = Kind::Line;
    // Line: points with normal . p == level
    geom::Point normal{0.0, 1.0};
    double level = 0.0;
    // LineFamily: lines {coord = offset + k*period}, coord selected by `vertical`
    bool vertical = false;
    double period = 1.0;
    double offset = 0.0;
    // WedgeRegion: closed wedge of half-angle `half_angle`, apex, axis
    double half_angle = 0.0;
    geom::Point apex{0.0, 0.0};
    double axis_angle = 0.0;

    static LayerSet line(geom::Point normal, double level);
    static LayerSet horizontal_lines(double period, double offset);
    static LayerSet vertical_lines(double period, double offset);
    static LayerSet wedge_region(double half_angle, geom::Point apex, double axis_angle);

    bool member(geom::Point p, double tol) const;
};

/// Alternating hit record: hit j (1-based) is a visit to the target set
/// (the sets alternate, first target = k_tilde since the path starts in k).
struct LayerTrace {
    std::vector<double> layer_times;  // times of completed hits, nondecreasing
    int layers_completed = 0;
    bool exited_first = false;  // exited before the first hit
    double exit_time = 0.0;     // T(D) /\ t_max
    bool truncated = false;
};

/// Successive hitting times of k_tilde, k, k_tilde, ... truncated at
/// T(D) /\ t_max, up to max_layers hits. Precondition: a is in k.
LayerTrace sample_layered(const geom::Domain& d, const LayerSet& k, const LayerSet& k_tilde, geom::Point a,
                          int max_layers, const SamplerConfig& cfg, std::uint64_t sample_index);

std::vector<LayerTrace> sample_layered_batch(const geom::Domain& d, const LayerSet& k, const LayerSet& k_tilde,
                                             geom::Point a, int max_layers, const SamplerConfig& cfg, std::size_t n,
                                             unsigned threads = 0);

/// First time the continuous argument of the path reaches +-alpha, started
/// at a != 0 (alpha > pi allowed; the stopping time then is not a domain exit
/// time). The winding is accumulated per step with |increment| < pi/2
/// enforced by retrying oversized steps at dt/4. Features: 0 = +alpha,
/// 1 = -alpha.
ExitSample sample_winding_exit(double alpha, geom::Point a, const SamplerConfig& cfg, std::uint64_t sample_index);

SampleBatch sample_winding_batch(double alpha, geom::Point a, const SamplerConfig& cfg, std::size_t n,
                                 unsigned threads = 0);

}  // namespace bhlab::mc
