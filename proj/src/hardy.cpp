#include "bhlab/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "bhlab/oracles.hpp"

namespace bhlab::hardy {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
constexpr double kKronrodNodes[8] = {0.0,
                                     0.2077849550078984676006894037732449,
                                     0.4058451513773971669066064120769615,
                                     0.5860872354676911302941448382587296,
                                     0.7415311855993944398638647732807884,
                                     0.8648644233597690727897127886409262,
                                     0.9491079123427585245261896840478513,
                                     0.9914553711208126392068546975263285};
constexpr double kKronrodWeights[8] = {0.2094821410847278280129991748917143,
                                       0.2044329400752988924141619992346491,
                                       0.1903505780647854099132564024210137,
                                       0.1690047266392679028265834265985503,
                                       0.1406532597155259187451895905102379,
                                       0.1047900103222501838398763225415180,
                                       0.0630920926299785532907006631892043,
                                       0.0229353220105292249637320080589696};
constexpr double kGaussWeights[4] = {0.4179591836734693877551020408163265,
                                     0.3818300505051189449503697754889751,
                                     0.2797054960861841629199745460199910,
                                     0.1294849661688696932706114326790820};

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
PanelResult gauss_kronrod(F&& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    double gk = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * kKronrodNodes[i];
        const double f1 = f(c + x);
        const double f2 = i == 0 ? f1 : f(c - x);
        const double fs = i == 0 ? f1 : f1 + f2;
        gk += kKronrodWeights[i] * fs;
        // the embedded Gauss-7 rule lives on the even-indexed nodes
        if (i % 2 == 0) g += kGaussWeights[i / 2] * (i == 0 ? f1 : fs);
    }
    PanelResult out;
    out.value = gk * h;
    out.error = std::fabs((gk - g) * h);
    return out;
}

}  // namespace

MapSpec MapSpec::wedge_power(double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("map spec: wedge power exponent must be positive");
    return {Kind::WedgePower, exponent};
}

std::string MapSpec::name() const {
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Moebius: return "moebius";
        case Kind::WedgePower: return "wedge-power(" + std::to_string(exponent) + ")";
        case Kind::ExpMoebius: return "exp-moebius";
    }
    return "?";
}

double modulus_on_circle(const MapSpec& f, double r, double t) {
    const std::complex<double> z = std::polar(r, t);
    const std::complex<double> m = (1.0 - z) / (1.0 + z);
    switch (f.kind) {
        case MapSpec::Kind::Identity:
            return r;
        case MapSpec::Kind::Moebius:
            return std::abs(m);
        case MapSpec::Kind::WedgePower:
            return std::pow(std::abs(m), f.exponent);
        case MapSpec::Kind::ExpMoebius:
            return std::exp(m.real());
    }
    return 0.0;
}

double integral_mean(const MapSpec& f, double p, double r, double rel_tol, int max_panels) {
    if (!(p > 0.0)) throw std::invalid_argument("integral_mean: p must be positive");
    if (!(r > 0.0 && r <= 1.0 - 1e-8))
        throw std::invalid_argument("integral_mean: r must lie in (0, 1 - 1e-8]");

    const auto integrand = [&](double t) {
        const double v = std::pow(modulus_on_circle(f, r, t), p);
        return v;
    };

    // |f(re^{it})| is even in t for every catalog map, so integrate [0, pi]
    // and average: mean = (1/pi) * integral. The initial panels refine
    // geometrically into the near-singularity at t = pi, down to the width
    // scale (1 - r)/4.
    struct Panel {
        double a, b, value, error;
    };
    const int depth = std::clamp(static_cast<int>(std::ceil(std::log2(4.0 * kPi / (1.0 - r)))), 8, 48);
    std::vector<Panel> panels;
    double total = 0.0, err = 0.0;
    double prev = 0.0;
    for (int k = 1; k <= depth; ++k) {
        const double next = k == depth ? kPi : kPi * (1.0 - std::pow(0.5, k));
        const PanelResult res = gauss_kronrod(integrand, prev, next);
        if (!std::isfinite(res.value)) return kInf;
        panels.push_back({prev, next, res.value, res.error});
        total += res.value;
        err += res.error;
        prev = next;
    }
    int used = static_cast<int>(panels.size());
    while (err > rel_tol * std::fabs(total)) {
        // split the worst panel
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].error > panels[worst].error) worst = i;
        const Panel pan = panels[worst];
        if (used >= max_panels || pan.b - pan.a < 1e-15)
            throw QuadratureFailure("integral_mean: tolerance unreachable at the panel budget");
        const double mid = 0.5 * (pan.a + pan.b);
        const PanelResult left = gauss_kronrod(integrand, pan.a, mid);
        const PanelResult right = gauss_kronrod(integrand, mid, pan.b);
        if (!std::isfinite(left.value) || !std::isfinite(right.value)) return kInf;
        total += left.value + right.value - pan.value;
        err += left.error + right.error - pan.error;
        panels[worst] = {pan.a, mid, left.value, left.error};
        panels.push_back({mid, pan.b, right.value, right.error});
        ++used;
    }
    if (!std::isfinite(total)) return kInf;
    return total / kPi;
}

MeansProfile means_profile(const MapSpec& f, double p, const std::vector<double>& radii) {
    MeansProfile out;
    out.p = p;
    out.radii = radii;
    out.means.reserve(radii.size());
    for (double r : radii) out.means.push_back(integral_mean(f, p, r));
    // growth exponent: slope of log mean against -log(1 - r), fitted on the
    // last half of the schedule
    std::vector<double> xs, ys;
    for (std::size_t i = radii.size() / 2; i < radii.size(); ++i) {
        if (!std::isfinite(out.means[i])) return out;  // growth beyond double range: no finite fit
        xs.push_back(-std::log(1.0 - radii[i]));
        ys.push_back(std::log(std::max(out.means[i], 1e-300)));
    }
    if (xs.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto n = static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        out.growth_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return out;
}

namespace {

PClassification classify_p(const MapSpec& f, double p, const HardyNumberOptions& opts, int levels) {
    std::vector<double> radii;
    for (int k = 3; k <= levels; ++k) radii.push_back(1.0 - std::pow(2.0, -k));
    PClassification out;
    out.p = p;
    std::vector<double> means;
    for (double r : radii) {
        const double m = integral_mean(f, p, r);
        if (!std::isfinite(m) || m > opts.mean_cap) {
            out.cls = GrowthClass::Divergent;
            out.growth_exponent = kInf;
            return out;
        }
        means.push_back(m);
    }
    // slope of log mean vs k*log 2 over the last 6 levels
    const std::size_t tail = std::min<std::size_t>(6, means.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = means.size() - tail; i < means.size(); ++i) {
        const double x = static_cast<double>(i) * std::log(2.0);
        const double y = std::log(std::max(means[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const auto n = static_cast<double>(tail);
    out.growth_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.cls = out.growth_exponent > opts.slope_eps ? GrowthClass::Divergent : GrowthClass::Bounded;
    return out;
}

GrowthClass classify_refining(const MapSpec& f, double p, const HardyNumberOptions& opts, double* slope_out) {
    PClassification c = classify_p(f, p, opts, opts.r_levels);
    if (std::fabs(c.growth_exponent) <= opts.slope_eps) {
        // ambiguous: refine the radius schedule once
        const PClassification c2 = classify_p(f, p, opts, opts.r_levels + opts.refine_levels);
        if (slope_out) *slope_out = c2.growth_exponent;
        if (c2.growth_exponent > opts.slope_eps) return GrowthClass::Divergent;
        if (c2.growth_exponent < 0.8 * opts.slope_eps) return GrowthClass::Bounded;
        return GrowthClass::Inconclusive;
    }
    if (slope_out) *slope_out = c.growth_exponent;
    return c.cls;
}

}  // namespace

HardyNumberResult hardy_number(const MapSpec& f, const HardyNumberOptions& opts) {
    if (!(opts.p_min > 0.0 && opts.p_min < opts.p_max && opts.p_step > 0.0))
        throw std::invalid_argument("hardy_number: invalid p grid");
    HardyNumberResult out;
    out.grid_step = opts.p_step;

    double last_bounded = 0.0;
    std::optional<double> first_divergent;
    for (double p = opts.p_min; p <= opts.p_max + 1e-12; p += opts.p_step) {
        double slope = 0.0;
        const GrowthClass cls = classify_refining(f, p, opts, &slope);
        out.grid.push_back({p, cls, slope});
        if (cls == GrowthClass::Bounded && !first_divergent) last_bounded = p;
        if (cls == GrowthClass::Divergent && !first_divergent) first_divergent = p;
        if (cls == GrowthClass::Inconclusive) out.inconclusive = true;
    }
    if (!first_divergent) {
        out.h = opts.p_max;  // bounded across the whole grid
        return out;
    }
    if (last_bounded == 0.0) {
        out.h = 0.0;  // divergent for every grid p
        return out;
    }
    // bisect the bracketing pair down to the grid resolution
    double lo = last_bounded, hi = *first_divergent;
    for (int it = 0; it < opts.bisect_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const GrowthClass cls = classify_refining(f, mid, opts, nullptr);
        if (cls == GrowthClass::Divergent) hi = mid;
        else if (cls == GrowthClass::Bounded) lo = mid;
        else {
            out.inconclusive = true;
            break;
        }
    }
    out.h = 0.5 * (lo + hi);
    return out;
}

BurkholderReport check_burkholder_equivalence(const geom::Domain& d, const MapSpec& f, const HardyNumberOptions& opts,
                                              std::optional<double> mc_tail_exponent, double mc_tolerance) {
    // the catalog pairs: half-plane <-> moebius, wedge <-> its power map,
    // disk complement <-> exp-moebius
    const bool valid_pair = d.visit([&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, geom::HalfPlane>) return f.kind == MapSpec::Kind::Moebius;
        else if constexpr (std::is_same_v<T, geom::Wedge>)
            return f.kind == MapSpec::Kind::WedgePower &&
                   std::fabs(f.exponent - 2.0 * v.half_angle / kPi) < 1e-12;
        else if constexpr (std::is_same_v<T, geom::DiskComplement>)
            return f.kind == MapSpec::Kind::ExpMoebius;
        else return false;
    });
    if (!valid_pair) throw std::invalid_argument("check_burkholder_equivalence: not a catalog (domain, map) pair");

    const auto bh = oracle::known_bh(d);
    if (!bh) throw std::invalid_argument("check_burkholder_equivalence: domain has no tabulated bh");

    BurkholderReport rep;
    rep.map_name = f.name();
    rep.bh_exact = *bh;
    const HardyNumberResult hn = hardy_number(f, opts);
    rep.h_estimate = hn.h;
    rep.grid_tol = opts.p_step;
    rep.equivalence_pass = std::fabs(hn.h - 2.0 * *bh) <= opts.p_step + 1e-12;
    if (mc_tail_exponent) {
        rep.mc_tail_exponent = mc_tail_exponent;
        rep.mc_tolerance = mc_tolerance;
        rep.mc_pass = std::fabs(*mc_tail_exponent - hn.h / 2.0) <= mc_tolerance;
    }
    return rep;
}

}  // namespace bhlab::hardy
