#include "bhlab/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "bhlab/rng.hpp"

namespace bhlab::est {

namespace {

constexpr std::uint64_t kBootstrapSalt = 0x9E3779B97F4A7C15ull;

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw EmptyBatch("quantile of empty data");
    const double idx = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

/// Effective time of a sample at a (possibly lowered) horizon.
double clipped_time(const mc::ExitSample& s, double horizon) {
    return std::min(s.truncated ? std::numeric_limits<double>::infinity() : s.time, horizon);
}

std::vector<double> gather_times(const mc::SampleBatch& batch, double horizon) {
    std::vector<double> t;
    t.reserve(batch.size());
    for (const auto& s : batch.samples) {
        if (!s.has_time()) throw std::invalid_argument("estimator: batch has samples without exit times");
        t.push_back(clipped_time(s, horizon));
    }
    return t;
}

/// Log-spaced evaluation grid over a window.
std::vector<double> loglog_grid(const Window& win, std::size_t points) {
    const double lt1 = std::log(win.t1), lt2 = std::log(win.t2);
    const std::size_t g = std::max<std::size_t>(points, 4);
    std::vector<double> out(g);
    for (std::size_t i = 0; i < g; ++i)
        out[i] = std::exp(lt1 + (lt2 - lt1) * static_cast<double>(i) / static_cast<double>(g - 1));
    return out;
}

/// -slope of log P(T>t) vs log t given survivor counts per grid point; the
/// grid is trimmed at the first point with too few survivors.
std::optional<double> slope_from_counts(const std::vector<double>& grid, const std::vector<std::size_t>& survivors,
                                        double n_total, std::size_t min_count, double* gof) {
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (survivors[g] < min_count) break;
        xs.push_back(std::log(grid[g]));
        ys.push_back(std::log(static_cast<double>(survivors[g]) / n_total));
    }
    if (xs.size() < 4) return std::nullopt;
    const LineFit f = least_squares(xs, ys);
    if (gof) *gof = f.r2;
    return -f.slope;
}

double hill_from_logs(const std::vector<double>& logs) {
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    return 1.0 / mean;
}

}  // namespace

Window default_tail_window(const mc::SampleBatch& batch) {
    std::vector<double> finite;
    for (const auto& s : batch.samples)
        if (!s.truncated) finite.push_back(s.time);
    if (finite.empty()) throw WindowTooSparse("default_tail_window: every sample is truncated");
    std::sort(finite.begin(), finite.end());
    Window w;
    w.t2 = batch.cfg.t_max / 4.0;
    // past the transient and clear of truncation; the t2/30 floor keeps the
    // fit inside the asymptotic regime for light tails, where the 0.80
    // quantile still sits in the bulk
    w.t1 = std::max({quantile_sorted(finite, 0.80), w.t2 / 30.0, 1e-12});
    return w;
}

MomentEstimate truncated_moment(const mc::SampleBatch& batch, double p, std::optional<double> horizon_opt,
                                double divergence_share) {
    if (batch.samples.empty()) throw EmptyBatch("truncated_moment: empty batch");
    if (!(p > 0.0)) throw std::invalid_argument("truncated_moment: p must be positive");
    const double horizon = horizon_opt.value_or(batch.cfg.t_max);
    if (!(horizon > 0.0) || horizon > batch.cfg.t_max)
        throw std::invalid_argument("truncated_moment: horizon must lie in (0, t_max]");
    const auto n = static_cast<double>(batch.size());
    double sum = 0.0, sum_sq = 0.0, truncated_mass = 0.0;
    std::size_t n_trunc = 0;
    for (const auto& s : batch.samples) {
        if (!s.has_time()) throw std::invalid_argument("truncated_moment: batch has samples without exit times");
        const double t = clipped_time(s, horizon);
        const double v = std::pow(t, p);
        sum += v;
        sum_sq += v * v;
        if (t >= horizon) {
            ++n_trunc;
            truncated_mass += v;
        }
    }
    MomentEstimate m;
    m.p = p;
    m.value = sum / n;
    const double var = std::max(0.0, sum_sq / n - m.value * m.value);
    m.stderr_ = std::sqrt(var / n);
    m.truncation_share = static_cast<double>(n_trunc) / n;
    m.divergence_flag = m.value > 0.0 && truncated_mass / n > divergence_share * m.value;
    return m;
}

std::vector<SurvivalPoint> survival_curve(const mc::SampleBatch& batch, const std::vector<double>& time_grid) {
    if (batch.samples.empty()) throw EmptyBatch("survival_curve: empty batch");
    for (double t : time_grid)
        if (!(t > 0.0) || t > batch.cfg.t_max)
            throw std::invalid_argument("survival_curve: grid must lie in (0, t_max]");
    // truncated samples survive every grid point (T > t_max >= t)
    std::vector<double> sorted;
    sorted.reserve(batch.size());
    for (const auto& s : batch.samples) {
        if (!s.has_time()) throw std::invalid_argument("survival_curve: batch has samples without exit times");
        sorted.push_back(s.truncated ? std::numeric_limits<double>::infinity() : s.time);
    }
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<SurvivalPoint> out;
    out.reserve(time_grid.size());
    for (double t : time_grid) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        const double surv = static_cast<double>(sorted.end() - it) / n;
        const double se = std::sqrt(std::max(surv * (1.0 - surv), 0.0) / n);
        out.push_back({t, surv, std::max(0.0, surv - 1.96 * se), std::min(1.0, surv + 1.96 * se)});
    }
    return out;
}

TailEstimate tail_index(const mc::SampleBatch& batch, TailMethod method, const TailOptions& opts) {
    if (batch.samples.empty()) throw EmptyBatch("tail_index: empty batch");
    const double t_max = batch.cfg.t_max;
    const Window win = opts.window.value_or(default_tail_window(batch));
    if (!(win.t1 > 0.0 && win.t1 < win.t2)) throw std::invalid_argument("tail_index: need 0 < t1 < t2");
    if (win.t2 >= t_max / 2.0)
        throw TruncationContamination("tail_index: window upper end must stay below t_max/2");

    // Only window samples matter: survivors beyond t1 determine both the
    // log-log counts and the Hill exceedances, and the overall survival level
    // only shifts the intercept. The bootstrap therefore resamples the window
    // subset.
    std::vector<double> window_samples;
    for (const auto& s : batch.samples) {
        if (!s.has_time()) throw std::invalid_argument("tail_index: batch has samples without exit times");
        const double t = clipped_time(s, t_max);
        if (t > win.t1) window_samples.push_back(t);
    }
    const std::size_t k = window_samples.size();
    if (k < opts.min_in_window)
        throw WindowTooSparse("tail_index: fewer than the configured minimum of samples in the window");
    const auto n_total = static_cast<double>(batch.size());

    TailEstimate est;
    est.method = method;
    est.fit_window = win;
    est.n_used = k;

    std::vector<double> reps;
    reps.reserve(opts.bootstrap);

    if (method == TailMethod::LogLogLS) {
        const std::vector<double> grid = loglog_grid(win, opts.grid_points);
        const std::size_t g = grid.size();
        // bin index of a sample = number of grid points strictly below it
        std::vector<std::size_t> hist(g + 1, 0);
        for (double v : window_samples) {
            const auto b = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), v) - grid.begin());
            ++hist[b];
        }
        const auto survivors_of = [&](const std::vector<std::size_t>& h) {
            std::vector<std::size_t> surv(g, 0);
            std::size_t acc = 0;
            for (std::size_t b = g; b-- > 0;) {
                acc += h[b + 1];
                surv[b] = acc;
            }
            return surv;
        };
        const auto point = slope_from_counts(grid, survivors_of(hist), n_total, opts.min_count_per_point, &est.gof);
        if (!point) throw WindowTooSparse("tail_index: not enough usable grid points in the window");
        est.exponent = *point;

        std::vector<double> cum(hist.size());
        double acc = 0.0;
        for (std::size_t b = 0; b < hist.size(); ++b) {
            acc += static_cast<double>(hist[b]);
            cum[b] = acc;
        }
        std::vector<std::size_t> hist_rep(hist.size());
        for (int rep = 0; rep < opts.bootstrap; ++rep) {
            mc::CounterRng rng(batch.cfg.seed ^ kBootstrapSalt, static_cast<std::uint64_t>(rep));
            std::fill(hist_rep.begin(), hist_rep.end(), 0);
            for (std::size_t i = 0; i < k; ++i) {
                const double u = rng.uniform() * static_cast<double>(k);
                const auto b = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
                ++hist_rep[std::min(b, hist.size() - 1)];
            }
            if (const auto r = slope_from_counts(grid, survivors_of(hist_rep), n_total, opts.min_count_per_point, nullptr))
                reps.push_back(*r);
        }
    } else {
        std::vector<double> logs;
        logs.reserve(k);
        for (double v : window_samples) logs.push_back(std::log(std::min(v, win.t2) / win.t1));
        est.exponent = hill_from_logs(logs);
        {
            double mean = 0.0, var = 0.0;
            for (double v : logs) mean += v;
            mean /= static_cast<double>(k);
            for (double v : logs) var += (v - mean) * (v - mean);
            var /= static_cast<double>(k);
            est.gof = 1.0 - std::min(1.0, std::fabs(var / (mean * mean) - 1.0));
        }
        std::vector<double> resample(k);
        for (int rep = 0; rep < opts.bootstrap; ++rep) {
            mc::CounterRng rng(batch.cfg.seed ^ kBootstrapSalt, (1ull << 32) + static_cast<std::uint64_t>(rep));
            for (std::size_t i = 0; i < k; ++i)
                resample[i] = logs[static_cast<std::size_t>(rng.uniform() * static_cast<double>(k))];
            reps.push_back(hill_from_logs(resample));
        }
    }

    if (reps.size() >= 20) {
        std::sort(reps.begin(), reps.end());
        const double a = (1.0 - opts.ci_level) / 2.0;
        est.ci_lo = std::min(quantile_sorted(reps, a), est.exponent);
        est.ci_hi = std::max(quantile_sorted(reps, 1.0 - a), est.exponent);
    } else {
        est.ci_lo = est.ci_hi = est.exponent;
    }
    return est;
}

DecayFit layer_decay_fit(const std::vector<mc::LayerTrace>& traces, const DecayOptions& opts) {
    if (traces.empty()) throw EmptyBatch("layer_decay_fit: no traces");
    const auto fit_once = [&](const std::vector<int>& completed) -> std::optional<LineFit> {
        int max_j = 0;
        for (int c : completed) max_j = std::max(max_j, c);
        std::vector<double> xs, ys;
        const auto n = static_cast<double>(completed.size());
        for (int j = 1; j <= max_j; ++j) {
            std::size_t count = 0;
            for (int c : completed)
                if (c >= j) ++count;
            if (count < opts.min_count) break;
            xs.push_back(static_cast<double>(j));
            ys.push_back(std::log(static_cast<double>(count) / n));
        }
        if (xs.size() < 3) return std::nullopt;
        return least_squares(xs, ys);
    };

    std::vector<int> completed;
    completed.reserve(traces.size());
    for (const auto& tr : traces) completed.push_back(tr.layers_completed);
    const auto fit = fit_once(completed);
    if (!fit) throw InsufficientLayers("layer_decay_fit: fewer than 3 layer levels with enough traces");

    DecayFit out;
    out.alpha_hat = std::exp(fit->slope);
    out.c = std::exp(fit->intercept);
    out.j_used = 0;
    {
        // recompute rms residual on the fitted levels
        int max_j = 0;
        for (int c : completed) max_j = std::max(max_j, c);
        double ss = 0.0;
        int k = 0;
        const auto n = static_cast<double>(completed.size());
        for (int j = 1; j <= max_j; ++j) {
            std::size_t count = 0;
            for (int c : completed)
                if (c >= j) ++count;
            if (count < opts.min_count) break;
            const double pred = fit->intercept + fit->slope * j;
            const double obs = std::log(static_cast<double>(count) / n);
            ss += (obs - pred) * (obs - pred);
            ++k;
        }
        out.residual = std::sqrt(ss / std::max(k, 1));
        out.j_used = k;
    }

    std::vector<double> reps;
    std::vector<int> resample(completed.size());
    for (int b = 0; b < opts.bootstrap; ++b) {
        mc::CounterRng rng(opts.seed ^ kBootstrapSalt, static_cast<std::uint64_t>(b));
        for (std::size_t i = 0; i < completed.size(); ++i)
            resample[i] = completed[static_cast<std::size_t>(rng.uniform() * static_cast<double>(completed.size()))];
        if (const auto r = fit_once(resample)) reps.push_back(std::exp(r->slope));
    }
    if (reps.size() >= 20) {
        std::sort(reps.begin(), reps.end());
        const double a = (1.0 - opts.ci_level) / 2.0;
        out.ci_lo = std::min(quantile_sorted(reps, a), out.alpha_hat);
        out.ci_hi = std::max(quantile_sorted(reps, 1.0 - a), out.alpha_hat);
    } else {
        out.ci_lo = out.ci_hi = out.alpha_hat;
    }
    return out;
}

}  // namespace bhlab::est
