#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhlab/sampler.hpp"

namespace bhlab::est {

struct EmptyBatch : std::runtime_error {
    explicit EmptyBatch(const std::string& what) : std::runtime_error(what) {}
};
struct WindowTooSparse : std::runtime_error {
    explicit WindowTooSparse(const std::string& what) : std::runtime_error(what) {}
};
struct TruncationContamination : std::runtime_error {
    explicit TruncationContamination(const std::string& what) : std::runtime_error(what) {}
};
struct InsufficientLayers : std::runtime_error {
    explicit InsufficientLayers(const std::string& what) : std::runtime_error(what) {}
};

struct MomentEstimate {
    double p = 1.0;
    double value = 0.0;
    double stderr_ = 0.0;
    double truncation_share = 0.0;  // fraction of truncated samples
    bool divergence_flag = false;   // truncated mass dominates the estimate
};

/// Mean of min(T, t_max)^p with its standard error. Truncated samples
/// contribute t_max^p; the divergence flag fires when that contribution
/// exceeds `divergence_share` of the estimate. `horizon` defaults to the
/// batch t_max and may be lowered to re-read the same batch at a shorter
/// horizon.
MomentEstimate truncated_moment(const mc::SampleBatch& batch, double p,
                                std::optional<double> horizon = std::nullopt, double divergence_share = 0.20);

struct SurvivalPoint {
    double t = 0.0;
    double prob = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Empirical survival P(T > t) on the given grid with pointwise binomial
/// (normal-approximation, 95%) intervals; truncated samples count as T > t_max.
std::vector<SurvivalPoint> survival_curve(const mc::SampleBatch& batch, const std::vector<double>& time_grid);

enum class TailMethod { LogLogLS, Hill };

struct Window {
    double t1 = 0.0;
    double t2 = 0.0;
};

struct TailEstimate {
    double exponent = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    Window fit_window;
    TailMethod method = TailMethod::LogLogLS;
    double gof = 0.0;  // R^2 of the log-log fit; 1 - dispersion for Hill
    std::size_t n_used = 0;
};

struct TailOptions {
    std::optional<Window> window;   // default: (0.80-quantile of untruncated times, t_max/4)
    std::size_t min_in_window = 200;
    std::size_t min_count_per_point = 25;  // log-log grid points need this many survivors
    std::size_t grid_points = 40;
    int bootstrap = 200;
    double ci_level = 0.95;
};

/// Tail exponent of P(T > t) over the window: least squares on
/// (log t, log P(T>t)) or the Hill estimator on exceedances of t1. The
/// window must stay below t_max/2. Confidence interval by seeded bootstrap.
TailEstimate tail_index(const mc::SampleBatch& batch, TailMethod method, const TailOptions& opts = {});

struct DecayFit {
    double alpha_hat = 0.0;  // fitted geometric ratio of P(layers >= j)
    double c = 0.0;
    double residual = 0.0;   // rms residual of the log-linear fit
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int j_used = 0;
};

struct DecayOptions {
    std::size_t min_count = 20;  // layer levels fitted only with this many traces
    int bootstrap = 200;
    double ci_level = 0.95;
    std::uint64_t seed = 0x1eaf;
};

/// Geometric fit of j -> P(layers_completed >= j). Throws InsufficientLayers
/// when fewer than 3 usable levels remain.
DecayFit layer_decay_fit(const std::vector<mc::LayerTrace>& traces, const DecayOptions& opts = {});

/// Default tail window: (0.80-quantile of untruncated times, t_max / 4).
Window default_tail_window(const mc::SampleBatch& batch);

}  // namespace bhlab::est
