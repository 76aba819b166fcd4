#include "bhlab/sampler.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace bhlab::mc {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using geom::ClosestFeature;
using geom::Point;

/// Uniform access to the concrete variant when it has its own queries,
/// falling back to the Domain dispatcher for set combinations.
template <class Impl>
struct Geo {
    const Impl* impl;
    const geom::Domain* dom;

    bool contains(Point p) const {
        if constexpr (requires(const Impl& i) { { i.contains(p) } -> std::convertible_to<bool>; })
            return impl->contains(p);
        else
            return dom->contains(p);
    }
    ClosestFeature closest(Point p) const {
        if constexpr (requires(const Impl& i) { { i.closest(p) } -> std::convertible_to<ClosestFeature>; })
            return impl->closest(p);
        else
            return dom->closest(p);
    }
};

/// One Gaussian step with the Brownian-bridge crossing correction aimed at
/// the nearest boundary feature, flattened to its tangent line. The step size
/// never depends on t_max, so a path is draw-for-draw identical under any
/// horizon and min(exit, t_max) is monotone in t_max.
template <class G>
class BridgeWalker {
  public:
    enum class Event { Shell, Crossed, Moved, Truncated };
    struct Step {
        Event ev;
        double t0 = 0.0;    // time at the start of the step
        double dt = 0.0;    // step length (0 for Shell/Truncated)
        double frac = 0.0;  // exit fraction within the step, for Crossed
        Point from, to;     // positions before/after the step (Moved/Crossed)
        Point exit_pos;
        std::int64_t exit_feature = geom::kNoFeature;
    };

    BridgeWalker(G geo, Point a, const SamplerConfig& cfg, std::uint64_t idx)
        : geo_(geo), cfg_(&cfg), rng_(cfg.seed, idx), p_(a) {}

    Step step() {
        Step s;
        s.t0 = t_;
        s.from = p_;
        const ClosestFeature cf = geo_.closest(p_);
        if (cf.dist <= cfg_->shell_eps) {
            s.ev = Event::Shell;
            s.exit_pos = cf.foot;
            s.exit_feature = cf.feature_id;
            return s;
        }
        if (t_ >= cfg_->t_max) {
            s.ev = Event::Truncated;
            return s;
        }
        const double beta = cfg_->step_factor;
        const double dt = std::min(cfg_->dt_max, beta * beta * cf.dist * cf.dist);
        const Point g = rng_.gaussian_step(dt);
        const Point pn = p_ + g;
        s.dt = dt;
        s.to = pn;
        ++steps_;
        if (steps_ > cfg_->max_steps) throw StepBudgetExceeded("bridge walker: step budget exceeded");

        const Point nhat = (1.0 / cf.dist) * (p_ - cf.foot);
        if (!geo_.contains(pn)) {
            // landed outside: locate the crossing on the segment
            const double d2 = geo_.closest(pn).dist;
            s.frac = cf.dist / (cf.dist + d2);
            Point lo = p_, hi = pn;
            for (int it = 0; it < 50; ++it) {
                const Point mid = 0.5 * (lo + hi);
                (geo_.contains(mid) ? lo : hi) = mid;
            }
            const ClosestFeature hit = geo_.closest(hi);
            s.ev = Event::Crossed;
            s.exit_pos = hit.foot;
            s.exit_feature = hit.feature_id;
            finish_move(s);
            return s;
        }
        const bool flat_ok = cf.curvature_radius == 0.0 || cf.dist < 0.25 * cf.curvature_radius;
        if (flat_ok) {
            const double d2 = dot(pn - cf.foot, nhat);
            const double p_cross = d2 <= 0.0 ? 1.0 : std::exp(-2.0 * cf.dist * d2 / dt);
            if (p_cross >= 1.0 || rng_.uniform() < p_cross) {
                const double ad2 = std::fabs(d2);
                const double frac = cf.dist / (cf.dist + ad2);
                const Point pc = p_ + frac * g;
                const Point on_line = pc - dot(pc - cf.foot, nhat) * nhat;
                bool accept = true;
                ClosestFeature hit = cf;
                if (cf.curvature_radius == 0.0) {
                    // segments may have gaps: the crossing counts only where
                    // the boundary actually is
                    hit = geo_.closest(on_line);
                    accept = hit.dist <= std::max(4.0 * cfg_->shell_eps, 1e-12);
                } else {
                    hit = geo_.closest(on_line);
                }
                if (accept) {
                    s.ev = Event::Crossed;
                    s.frac = frac;
                    s.exit_pos = hit.foot;
                    s.exit_feature = hit.feature_id;
                    finish_move(s);
                    return s;
                }
            }
        }
        s.ev = Event::Moved;
        finish_move(s);
        p_ = pn;
        t_ += dt;
        return s;
    }

    CounterRng& rng() { return rng_; }
    double time() const { return t_; }
    std::uint32_t steps() const { return static_cast<std::uint32_t>(steps_); }
    bool hit_rmax() const { return hit_rmax_; }
    Point position() const { return p_; }

  private:
    void finish_move(const Step& s) {
        if (cfg_->r_max && norm(s.to) > *cfg_->r_max) hit_rmax_ = true;
    }

    G geo_;
    const SamplerConfig* cfg_;
    CounterRng rng_;
    Point p_;
    double t_ = 0.0;
    std::uint64_t steps_ = 0;
    bool hit_rmax_ = false;
};

template <class G>
ExitSample run_exit(G geo, Point a, const SamplerConfig& cfg, std::uint64_t idx) {
    BridgeWalker<G> w(geo, a, cfg, idx);
    for (;;) {
        const auto s = w.step();
        ExitSample out;
        out.hit_rmax = w.hit_rmax();
        out.steps = w.steps();
        switch (s.ev) {
            case BridgeWalker<G>::Event::Shell:
                out.time = s.t0;
                out.position = s.exit_pos;
                out.feature_id = s.exit_feature;
                return out;
            case BridgeWalker<G>::Event::Crossed: {
                const double te = s.t0 + s.dt * s.frac;
                if (te > cfg.t_max) {
                    out.time = cfg.t_max;
                    out.position = s.from + ((cfg.t_max - s.t0) / s.dt) * (s.to - s.from);
                    out.truncated = true;
                    return out;
                }
                out.time = te;
                out.position = s.exit_pos;
                out.feature_id = s.exit_feature;
                return out;
            }
            case BridgeWalker<G>::Event::Truncated:
                out.time = cfg.t_max;
                out.position = s.from;
                out.truncated = true;
                return out;
            case BridgeWalker<G>::Event::Moved:
                if (s.t0 + s.dt >= cfg.t_max) {
                    out.time = cfg.t_max;
                    out.position = s.from + ((cfg.t_max - s.t0) / s.dt) * (s.to - s.from);
                    out.truncated = true;
                    return out;
                }
                break;
        }
    }
}

template <class G>
ExitSample run_wos(G geo, Point a, const SamplerConfig& cfg, std::uint64_t idx) {
    CounterRng rng(cfg.seed, idx);
    ExitSample out;
    out.time = kNaN;
    Point p = a;
    std::uint64_t steps = 0;
    for (;;) {
        const ClosestFeature cf = geo.closest(p);
        if (cf.dist <= cfg.shell_eps) {
            out.position = cf.foot;
            out.feature_id = cf.feature_id;
            out.steps = static_cast<std::uint32_t>(steps);
            return out;
        }
        if (++steps > cfg.max_steps)
            throw StepBudgetExceeded("walk-on-spheres: shell not reached within the step budget");
        const double th = kTwoPi * rng.uniform();
        p = p + cf.dist * Point{std::cos(th), std::sin(th)};
        if (cfg.r_max && norm(p) > *cfg.r_max) out.hit_rmax = true;
    }
}

void check_start(const geom::Domain& d, Point a) {
    if (!geom::is_finite(a)) throw std::invalid_argument("sampler: start point must be finite");
    if (!d.contains(a)) throw geom::PointOutsideDomain("sampler: start point is not in the domain");
}

template <class F>
void parallel_samples(std::size_t n, unsigned threads, F&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::max(1u, std::min(threads, 256u));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        constexpr std::size_t chunk = 64;
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(begin + chunk, n);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::scoped_lock lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

void SamplerConfig::validate() const {
    if (!(dt_max > 0.0)) throw std::invalid_argument("sampler config: dt_max must be positive");
    if (!(step_factor > 0.0 && step_factor <= 1.0))
        throw std::invalid_argument("sampler config: step_factor in (0, 1]");
    if (!(shell_eps > 0.0)) throw std::invalid_argument("sampler config: shell_eps must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("sampler config: t_max must be positive");
    if (r_max && !(*r_max > 0.0)) throw std::invalid_argument("sampler config: r_max must be positive");
    if (!(dt_min > 0.0) || !(origin_excl > 0.0))
        throw std::invalid_argument("sampler config: dt_min and origin_excl must be positive");
}

ExitSample sample_exit(const geom::Domain& d, Point a, const SamplerConfig& cfg, std::uint64_t sample_index) {
    cfg.validate();
    check_start(d, a);
    return d.visit([&](const auto& impl) { return run_exit(Geo<std::decay_t<decltype(impl)>>{&impl, &d}, a, cfg, sample_index); });
}

ExitSample sample_exit_position_wos(const geom::Domain& d, Point a, const SamplerConfig& cfg,
                                    std::uint64_t sample_index) {
    cfg.validate();
    check_start(d, a);
    return d.visit([&](const auto& impl) { return run_wos(Geo<std::decay_t<decltype(impl)>>{&impl, &d}, a, cfg, sample_index); });
}

SampleBatch sample_batch(const geom::Domain& d, Point a, const SamplerConfig& cfg, std::size_t n, unsigned threads) {
    cfg.validate();
    check_start(d, a);
    SampleBatch batch;
    batch.cfg = cfg;
    batch.start = a;
    batch.samples.resize(n);
    d.visit([&](const auto& impl) {
        Geo<std::decay_t<decltype(impl)>> geo{&impl, &d};
        parallel_samples(n, threads, [&](std::size_t i) {
            batch.samples[i] = cfg.scheme == Scheme::WalkOnSpheres ? run_wos(geo, a, cfg, i) : run_exit(geo, a, cfg, i);
        });
    });
    return batch;
}

// ------------------------------------------------------------------ LayerSet

LayerSet LayerSet::line(Point normal, double level) {
    const double n = norm(normal);
    if (!(n > 0.0)) throw std::invalid_argument("layer set: zero normal");
    LayerSet s;
    s.kind = Kind::Line;
    s.normal = (1.0 / n) * normal;
    s.level = level / n;
    return s;
}

LayerSet LayerSet::horizontal_lines(double period, double offset) {
    if (!(period > 0.0)) throw std::invalid_argument("layer set: period must be positive");
    LayerSet s;
    s.kind = Kind::LineFamily;
    s.vertical = false;
    s.period = period;
    s.offset = offset;
    return s;
}

LayerSet LayerSet::vertical_lines(double period, double offset) {
    LayerSet s = horizontal_lines(period, offset);
    s.vertical = true;
    return s;
}

LayerSet LayerSet::wedge_region(double half_angle, Point apex, double axis_angle) {
    if (!(half_angle > 0.0 && half_angle < kPi))
        throw std::invalid_argument("layer set: wedge half-angle in (0, pi)");
    LayerSet s;
    s.kind = Kind::WedgeRegion;
    s.half_angle = half_angle;
    s.apex = apex;
    s.axis_angle = axis_angle;
    return s;
}

bool LayerSet::member(Point p, double tol) const {
    switch (kind) {
        case Kind::Line:
            return std::fabs(dot(normal, p) - level) <= tol;
        case Kind::LineFamily: {
            const double c = vertical ? p.x : p.y;
            const double u = (c - offset) / period;
            return std::fabs(u - std::nearbyint(u)) * period <= tol;
        }
        case Kind::WedgeRegion: {
            const Point w = rotate(p - apex, -axis_angle);
            if (w.x == 0.0 && w.y == 0.0) return true;
            return std::fabs(arg(w)) <= half_angle;
        }
    }
    return false;
}

namespace {

/// Fraction in (0, 1] at which the step from->to first hits the set, if it
/// does. Single lines get the Brownian-bridge near-miss correction; line
/// families use discrete crossings; wedge regions use endpoint membership.
std::optional<double> layer_hit(const LayerSet& set, Point from, Point to, double dt, CounterRng& rng) {
    switch (set.kind) {
        case LayerSet::Kind::Line: {
            const double s1 = dot(set.normal, from) - set.level;
            const double s2 = dot(set.normal, to) - set.level;
            if (s1 == 0.0) return 1e-12;
            if (s1 * s2 <= 0.0) return s1 / (s1 - s2);
            const double p_cross = std::exp(-2.0 * std::fabs(s1) * std::fabs(s2) / dt);
            if (rng.uniform() < p_cross) return std::fabs(s1) / (std::fabs(s1) + std::fabs(s2));
            return std::nullopt;
        }
        case LayerSet::Kind::LineFamily: {
            const double c1 = set.vertical ? from.x : from.y;
            const double c2 = set.vertical ? to.x : to.y;
            const double k1 = std::floor((c1 - set.offset) / set.period);
            const double k2 = std::floor((c2 - set.offset) / set.period);
            if (k1 == k2) return std::nullopt;
            const double line = c2 > c1 ? (k1 + 1.0) * set.period + set.offset : k1 * set.period + set.offset;
            return (line - c1) / (c2 - c1);
        }
        case LayerSet::Kind::WedgeRegion:
            if (set.member(to, 0.0)) return 1.0;
            return std::nullopt;
    }
    return std::nullopt;
}

template <class G>
LayerTrace run_layered(G geo, const LayerSet& set_k, const LayerSet& set_kt, Point a, int max_layers,
                       const SamplerConfig& cfg, std::uint64_t idx) {
    BridgeWalker<G> w(geo, a, cfg, idx);
    LayerTrace trace;
    const LayerSet* targets[2] = {&set_kt, &set_k};  // start in k, so first target is k_tilde
    int parity = 0;
    for (;;) {
        const auto s = w.step();
        using Ev = typename BridgeWalker<G>::Event;
        if (s.ev == Ev::Shell) {
            trace.exit_time = s.t0;
            break;
        }
        if (s.ev == Ev::Truncated) {
            trace.exit_time = cfg.t_max;
            trace.truncated = true;
            break;
        }
        const double exit_frac = s.ev == Ev::Crossed ? s.frac : 2.0;
        if (trace.layers_completed < max_layers) {
            const auto hit = layer_hit(*targets[parity], s.from, s.to, s.dt, w.rng());
            if (hit && *hit < exit_frac && s.t0 + s.dt * *hit <= cfg.t_max) {
                trace.layer_times.push_back(s.t0 + s.dt * *hit);
                ++trace.layers_completed;
                parity ^= 1;
            }
        }
        if (s.ev == Ev::Crossed) {
            const double te = s.t0 + s.dt * s.frac;
            if (te > cfg.t_max) {
                trace.exit_time = cfg.t_max;
                trace.truncated = true;
            } else {
                trace.exit_time = te;
            }
            break;
        }
        if (s.t0 + s.dt >= cfg.t_max) {
            trace.exit_time = cfg.t_max;
            trace.truncated = true;
            break;
        }
    }
    trace.exited_first = trace.layers_completed == 0;
    return trace;
}

}  // namespace

LayerTrace sample_layered(const geom::Domain& d, const LayerSet& k, const LayerSet& k_tilde, Point a, int max_layers,
                          const SamplerConfig& cfg, std::uint64_t sample_index) {
    cfg.validate();
    check_start(d, a);
    if (max_layers < 1) throw std::invalid_argument("sample_layered: max_layers must be >= 1");
    if (!k.member(a, 1e-9)) throw std::invalid_argument("sample_layered: start point must lie in k");
    return d.visit([&](const auto& impl) {
        return run_layered(Geo<std::decay_t<decltype(impl)>>{&impl, &d}, k, k_tilde, a, max_layers, cfg, sample_index);
    });
}

std::vector<LayerTrace> sample_layered_batch(const geom::Domain& d, const LayerSet& k, const LayerSet& k_tilde,
                                             Point a, int max_layers, const SamplerConfig& cfg, std::size_t n,
                                             unsigned threads) {
    cfg.validate();
    check_start(d, a);
    if (!k.member(a, 1e-9)) throw std::invalid_argument("sample_layered: start point must lie in k");
    std::vector<LayerTrace> traces(n);
    d.visit([&](const auto& impl) {
        Geo<std::decay_t<decltype(impl)>> geo{&impl, &d};
        parallel_samples(n, threads, [&](std::size_t i) {
            traces[i] = run_layered(geo, k, k_tilde, a, max_layers, cfg, i);
        });
    });
    return traces;
}

// ------------------------------------------------------------- winding times

namespace {

ExitSample run_winding(double alpha, Point a, const SamplerConfig& cfg, std::uint64_t idx) {
    CounterRng rng(cfg.seed, idx);
    ExitSample out;
    Point p = a;
    double theta = 0.0;
    double t = 0.0;
    std::uint64_t steps = 0;
    for (;;) {
        const double r = norm(p);
        const double gap_up = alpha - theta;
        const double gap_dn = theta + alpha;
        // perpendicular distances to the two lifted boundary rays
        const double d_up = gap_up < kPi / 2.0 ? r * std::sin(gap_up) : std::numeric_limits<double>::infinity();
        const double d_dn = gap_dn < kPi / 2.0 ? r * std::sin(gap_dn) : std::numeric_limits<double>::infinity();
        if (std::min(d_up, d_dn) <= cfg.shell_eps) {
            const bool upper = d_up <= d_dn;
            out.time = t;
            out.position = rotate(p, upper ? gap_up : -gap_dn);
            out.feature_id = upper ? 0 : 1;
            out.steps = static_cast<std::uint32_t>(steps);
            return out;
        }
        if (t >= cfg.t_max) {
            out.time = cfg.t_max;
            out.position = p;
            out.truncated = true;
            out.steps = static_cast<std::uint32_t>(steps);
            return out;
        }
        const double d_ctrl = r * std::sin(std::min(std::min(gap_up, gap_dn), kPi / 2.0));
        double dt = std::min(cfg.dt_max, cfg.step_factor * cfg.step_factor * d_ctrl * d_ctrl);
        Point pn;
        double dtheta;
        for (;;) {
            const Point g = rng.gaussian_step(dt);
            pn = p + g;
            dtheta = std::atan2(cross(p, pn), dot(p, pn));
            if (norm(pn) > cfg.origin_excl && std::fabs(dtheta) < kPi / 2.0) break;
            dt *= 0.25;
            if (dt < cfg.dt_min)
                throw OriginTooClose("winding sampler: step retry reached dt_min near the origin");
        }
        ++steps;
        if (steps > cfg.max_steps) throw StepBudgetExceeded("winding sampler: step budget exceeded");
        const double theta_n = theta + dtheta;
        // direct crossing of either angular boundary within the step
        if (theta_n >= alpha || theta_n <= -alpha) {
            const bool upper = theta_n >= alpha;
            const double frac = (upper ? alpha - theta : -alpha - theta) / dtheta;
            const double te = t + dt * frac;
            if (te > cfg.t_max) {
                out.time = cfg.t_max;
                out.position = p + ((cfg.t_max - t) / dt) * (pn - p);
                out.truncated = true;
            } else {
                out.time = te;
                const Point pc = p + frac * (pn - p);
                out.position = norm(pc) > 0.0 ? rotate(pc, upper ? alpha - (theta + frac * dtheta) : -(theta + frac * dtheta) - alpha) : pc;
                out.feature_id = upper ? 0 : 1;
            }
            out.steps = static_cast<std::uint32_t>(steps);
            return out;
        }
        // bridge correction against whichever rays are locally visible
        const double rn = norm(pn);
        for (int side = 0; side < 2; ++side) {
            const double g1 = side == 0 ? gap_up : gap_dn;
            if (!(g1 < kPi / 2.0)) continue;
            const double g2 = side == 0 ? alpha - theta_n : theta_n + alpha;
            const double d1 = r * std::sin(g1);
            const double d2 = rn * std::sin(std::min(g2, kPi / 2.0));
            const double p_cross = std::exp(-2.0 * d1 * d2 / dt);
            if (rng.uniform() < p_cross) {
                const double frac = d1 / (d1 + d2);
                const double te = t + dt * frac;
                if (te > cfg.t_max) {
                    out.time = cfg.t_max;
                    out.position = p + ((cfg.t_max - t) / dt) * (pn - p);
                    out.truncated = true;
                } else {
                    out.time = te;
                    out.position = rotate(pn, side == 0 ? alpha - theta_n : -theta_n - alpha);
                    out.feature_id = side;
                }
                out.steps = static_cast<std::uint32_t>(steps);
                return out;
            }
        }
        p = pn;
        theta = theta_n;
        t += dt;
        if (cfg.r_max && norm(p) > *cfg.r_max) out.hit_rmax = true;
        if (t >= cfg.t_max) {
            out.time = cfg.t_max;
            out.position = p;
            out.truncated = true;
            out.steps = static_cast<std::uint32_t>(steps);
            return out;
        }
    }
}

}  // namespace

ExitSample sample_winding_exit(double alpha, Point a, const SamplerConfig& cfg, std::uint64_t sample_index) {
    cfg.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("sample_winding_exit: alpha must be positive");
    if (!geom::is_finite(a) || (a.x == 0.0 && a.y == 0.0))
        throw std::invalid_argument("sample_winding_exit: start point must be finite and nonzero");
    return run_winding(alpha, a, cfg, sample_index);
}

SampleBatch sample_winding_batch(double alpha, Point a, const SamplerConfig& cfg, std::size_t n, unsigned threads) {
    cfg.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("sample_winding_batch: alpha must be positive");
    if (!geom::is_finite(a) || (a.x == 0.0 && a.y == 0.0))
        throw std::invalid_argument("sample_winding_batch: start point must be finite and nonzero");
    SampleBatch batch;
    batch.cfg = cfg;
    batch.start = a;
    batch.samples.resize(n);
    parallel_samples(n, threads, [&](std::size_t i) { batch.samples[i] = run_winding(alpha, a, cfg, i); });
    return batch;
}

}  // namespace bhlab::mc
