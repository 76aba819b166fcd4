#include <doctest.h>

#include <cmath>

#include "bhlab/estimators.hpp"
#include "bhlab/oracles.hpp"
#include "bhlab/rng.hpp"

using namespace bhlab;
using est::TailMethod;
using est::TailOptions;
using mc::SampleBatch;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

/// Synthetic batch with exponent q: P(T > t) = t^{-q} for t >= 1.
SampleBatch pareto_batch(double q, std::size_t n, double t_max, std::uint64_t seed) {
    SampleBatch b;
    b.cfg.t_max = t_max;
    b.cfg.seed = seed;
    mc::CounterRng rng(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        mc::ExitSample s;
        const double t = std::pow(rng.uniform_pos(), -1.0 / q);
        s.time = std::min(t, t_max);
        s.truncated = t >= t_max;
        b.samples.push_back(s);
    }
    return b;
}

SampleBatch constant_batch(double value, std::size_t n, double t_max) {
    SampleBatch b;
    b.cfg.t_max = t_max;
    for (std::size_t i = 0; i < n; ++i) {
        mc::ExitSample s;
        s.time = value;
        b.samples.push_back(s);
    }
    return b;
}
}  // namespace

TEST_CASE("truncated moment basics") {
    const auto b = constant_batch(2.0, 100, 10.0);
    const auto m = est::truncated_moment(b, 1.0);
    CHECK(m.value == doctest::Approx(2.0));
    CHECK(m.stderr_ == doctest::Approx(0.0));
    CHECK(m.truncation_share == 0.0);
    CHECK_FALSE(m.divergence_flag);
    CHECK_THROWS_AS(est::truncated_moment(SampleBatch{}, 1.0), est::EmptyBatch);
    CHECK_THROWS_AS(est::truncated_moment(b, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(est::truncated_moment(b, 1.0, 20.0), std::invalid_argument);
}

TEST_CASE("moment monotonicity in p and in the horizon") {
    auto b = pareto_batch(0.8, 20000, 100.0, 5);
    // all synthetic times are >= 1, so p -> mean(T^p) is nondecreasing
    double prev = 0.0;
    for (double p : {0.1, 0.3, 0.5, 0.7}) {
        const double v = est::truncated_moment(b, p).value;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(est::truncated_moment(b, 0.5, 50.0).value <= est::truncated_moment(b, 0.5, 100.0).value);
}

TEST_CASE("divergence flag fires when truncated mass dominates") {
    // q = 0.4 < p = 0.6: the truncated contribution carries the estimate
    const auto b = pareto_batch(0.4, 20000, 1000.0, 6);
    CHECK(est::truncated_moment(b, 0.6).divergence_flag);
    CHECK_FALSE(est::truncated_moment(b, 0.1).divergence_flag);
}

TEST_CASE("survival curve") {
    const auto b = pareto_batch(1.0, 50000, 100.0, 7);
    const auto curve = est::survival_curve(b, {1.0, 2.0, 4.0, 8.0});
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) CHECK(curve[i].prob >= curve[i + 1].prob);
    CHECK(curve[1].prob == doctest::Approx(0.5).epsilon(0.03));
    CHECK(curve[1].ci_lo < curve[1].prob);
    CHECK(curve[1].ci_hi > curve[1].prob);
    // all-truncated batch: survival is identically 1
    auto all_trunc = constant_batch(10.0, 100, 10.0);
    for (auto& s : all_trunc.samples) s.truncated = true;
    for (const auto& pt : est::survival_curve(all_trunc, {1.0, 5.0, 10.0})) CHECK(pt.prob == doctest::Approx(1.0));
    CHECK_THROWS_AS(est::survival_curve(b, {0.0}), std::invalid_argument);
}

TEST_CASE("tail index recovers synthetic Pareto exponents") {
    for (double q : {0.5, 1.5}) {
        const auto b = pareto_batch(q, 200000, 4000.0, 8);
        const auto ls = est::tail_index(b, TailMethod::LogLogLS);
        CHECK(ls.exponent == doctest::Approx(q).epsilon(0.05));
        CHECK(ls.ci_lo <= q);
        CHECK(ls.ci_hi >= q);
        const auto hill = est::tail_index(b, TailMethod::Hill);
        CHECK(hill.exponent == doctest::Approx(q).epsilon(0.08));
    }
}

TEST_CASE("tail index guards") {
    const auto b = pareto_batch(0.5, 5000, 100.0, 9);
    TailOptions opts;
    opts.window = est::Window{1.0, 60.0};
    CHECK_THROWS_AS(est::tail_index(b, TailMethod::LogLogLS, opts), est::TruncationContamination);
    opts.window = est::Window{20.0, 24.0};
    opts.min_in_window = 100000;
    CHECK_THROWS_AS(est::tail_index(b, TailMethod::LogLogLS, opts), est::WindowTooSparse);
    CHECK_THROWS_AS(est::tail_index(SampleBatch{}, TailMethod::LogLogLS), est::EmptyBatch);
}

TEST_CASE("tail bootstrap is deterministic") {
    const auto b = pareto_batch(0.7, 30000, 1000.0, 10);
    const auto a1 = est::tail_index(b, TailMethod::LogLogLS);
    const auto a2 = est::tail_index(b, TailMethod::LogLogLS);
    CHECK(a1.exponent == a2.exponent);
    CHECK(a1.ci_lo == a2.ci_lo);
    CHECK(a1.ci_hi == a2.ci_hi);
}

TEST_CASE("layer decay fit recovers a geometric law") {
    std::vector<mc::LayerTrace> traces;
    mc::CounterRng rng(11, 0);
    const double alpha = 0.55;
    for (int i = 0; i < 20000; ++i) {
        mc::LayerTrace tr;
        int j = 0;
        while (rng.uniform() < alpha) ++j;
        tr.layers_completed = j;
        tr.exit_time = 1.0;
        traces.push_back(tr);
    }
    const auto fit = est::layer_decay_fit(traces);
    CHECK(fit.alpha_hat == doctest::Approx(alpha).epsilon(0.04));
    CHECK(fit.ci_lo <= alpha + 0.02);
    CHECK(fit.ci_hi >= alpha - 0.02);
    CHECK(fit.ci_hi < 1.0);

    // degenerate: everything exits at once
    std::vector<mc::LayerTrace> flat(500);
    CHECK_THROWS_AS(est::layer_decay_fit(flat), est::InsufficientLayers);
}

TEST_CASE("wedge tail CIs cover pi/(4 alpha) in at least 90% of replications") {
    // the coverage sweep from the estimator contract: 4 angles x 8 seeds;
    // horizons push the default window past each angle's transient
    const std::vector<std::pair<double, double>> cases = {
        {kPi / 8, 200.0}, {kPi / 6, 400.0}, {kPi / 4, 6000.0}, {kPi / 2, 6000.0}};
    int covered = 0, total = 0;
    for (const auto& [alpha, t_max] : cases) {
        const double target = kPi / (4.0 * alpha);
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            mc::SamplerConfig cfg;
            cfg.step_factor = 0.4;
            cfg.shell_eps = 1e-4;
            cfg.t_max = t_max;
            cfg.seed = seed * 7919;
            const auto b = mc::sample_batch(geom::make_wedge(alpha), {1, 0}, cfg, 50000, 2);
            const auto te = est::tail_index(b, TailMethod::LogLogLS);
            ++total;
            if (te.ci_lo <= target && target <= te.ci_hi) ++covered;
        }
    }
    CHECK(total == 32);
    CHECK(covered >= 29);  // >= 90%
}

TEST_CASE("layer sums dominate the total: subadditive moment split") {
    // reconstruct tilde-tau increments from traces and verify the p-th
    // moment subadditivity for p = 0.4
    mc::SamplerConfig cfg;
    cfg.dt_max = 0.05;
    cfg.step_factor = 0.4;
    cfg.shell_eps = 1e-4;
    cfg.t_max = 100.0;
    cfg.seed = 12;
    const auto d = geom::make_dashed_half_plane(2.0, 0.5);
    const auto k = mc::LayerSet::line({0, 1}, 1.0);
    const auto kt = mc::LayerSet::line({0, 1}, -1.0);
    const int max_layers = 10;
    const auto traces = mc::sample_layered_batch(d, k, kt, {0, 1}, max_layers, cfg, 4000, 2);
    const double p = 0.4;
    double lhs = 0.0;  // E[tilde_tau_K^p]
    double rhs = 0.0;  // sum_j E[(tilde_tau_j - tilde_tau_{j-1})^p]
    for (const auto& tr : traces) {
        const double exit = std::min(tr.exit_time, cfg.t_max);
        std::vector<double> tau(max_layers + 1, exit);
        tau[0] = 0.0;
        for (int j = 1; j <= max_layers; ++j)
            if (j <= tr.layers_completed) tau[j] = tr.layer_times[j - 1];
        lhs += std::pow(tau[max_layers], p);
        for (int j = 1; j <= max_layers; ++j) rhs += std::pow(std::max(tau[j] - tau[j - 1], 0.0), p);
    }
    CHECK(lhs <= rhs * (1.0 + 1e-9));
}
