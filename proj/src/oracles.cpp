#include "bhlab/oracles.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace bhlab::oracle {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double wedge_mean(double alpha, geom::Point p) {
    if (!(alpha > 0.0)) throw std::invalid_argument("wedge_mean: alpha must be positive");
    if (alpha >= kPi / 4.0) throw MeanInfinite("wedge_mean: mean exit time is infinite for alpha >= pi/4");
    const double t = std::tan(alpha);
    const double t2 = t * t;
    if (std::fabs(p.y) > p.x * t)
        throw geom::PointOutsideDomain("wedge_mean: point is outside the wedge");
    return (p.x * p.x * t2 - p.y * p.y) / (1.0 - t2);
}

double strip_mean(double halfwidth, geom::Point p) {
    if (!(halfwidth > 0.0)) throw std::invalid_argument("strip_mean: halfwidth must be positive");
    if (std::fabs(p.x) > halfwidth) throw geom::PointOutsideDomain("strip_mean: point is outside the strip");
    return halfwidth * halfwidth - p.x * p.x;
}

double disk_mean(double radius, geom::Point center, geom::Point p) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk_mean: radius must be positive");
    const double d2 = norm_sq(p - center);
    if (d2 > radius * radius) throw geom::PointOutsideDomain("disk_mean: point is outside the disk");
    return (radius * radius - d2) / 2.0;
}

double half_plane_survival(double y, double t) {
    if (!(y > 0.0 && t > 0.0)) throw std::invalid_argument("half_plane_survival: need y > 0 and t > 0");
    return std::erf(y / std::sqrt(2.0 * t));
}

double dashed_segments_harmonic_measure(double period, double seg_half_len, geom::Point a, double tol) {
    if (!(period > 0.0 && seg_half_len > 0.0 && 2.0 * seg_half_len < period))
        throw std::invalid_argument("dashed_segments_harmonic_measure: need 0 < 2r < period");
    if (!(a.y > 0.0)) throw std::invalid_argument("dashed_segments_harmonic_measure: start must be in the upper half-plane");
    (void)tol;  // the product form below is exact, far below any requested tolerance
    // Each term is Im log((n - z+)/(n - z-)) with z± = (x0 ∓ r + i y0)/x, so
    // the sum telescopes through prod (n - a)/(n - b) = sin(pi a)/sin(pi b)
    // into a single argument. The value lies in (0, 1), matching the
    // principal branch.
    const std::complex<double> zp(a.x - seg_half_len, a.y);
    const std::complex<double> zm(a.x + seg_half_len, a.y);
    if (kPi * a.y / period > 200.0) return 2.0 * seg_half_len / period;  // equidistribution limit
    const std::complex<double> ratio =
        std::sin(kPi / period * zp) / std::sin(kPi / period * zm);
    return std::arg(ratio) / kPi;
}

double dashed_segments_harmonic_measure_series(double period, double seg_half_len, geom::Point a, double tol) {
    if (!(period > 0.0 && seg_half_len > 0.0 && 2.0 * seg_half_len < period))
        throw std::invalid_argument("dashed_segments_harmonic_measure_series: need 0 < 2r < period");
    if (!(a.y > 0.0))
        throw std::invalid_argument("dashed_segments_harmonic_measure_series: start must be in the upper half-plane");
    const double x0 = a.x, y0 = a.y, r = seg_half_len;
    double sum = 0.0;
    long long n_max = 16;
    // term_n <= 2r * y0 / (y0^2 + u_n^2) with u_n the distance from x0 to
    // segment n; comparing with the integral of that envelope gives the tail
    // bound below. Grow the window until the bound clears tol.
    const auto tail_bound = [&](long long n_abs) {
        const double u = static_cast<double>(n_abs) * period - std::fabs(x0) - r;
        if (u <= 0.0) return kInf;
        return (4.0 * r / period) * (kPi / 2.0 - std::atan(u / y0));
    };
    while (tail_bound(n_max) > tol * kPi && n_max < (1LL << 28)) n_max *= 2;
    for (long long n = -n_max; n <= n_max; ++n) {
        const double c = static_cast<double>(n) * period;
        sum += std::atan((c + r - x0) / y0) - std::atan((c - r - x0) / y0);
    }
    return sum / kPi;
}

const std::vector<BhEntry>& bh_table() {
    // Parametric families carry NaN here; their formula lives in the
    // provenance note and is evaluated by known_bh.
    const double parametric = std::numeric_limits<double>::quiet_NaN();
    static const std::vector<BhEntry> table = {
        {"half-plane", 0.5, "exit moments finite exactly below 1/2; the Moebius map (1-z)/(1+z) lies in H^{1-eps}"},
        {"strip", kInf, "one-dimensional exit from a bounded interval has sub-exponential tail"},
        {"wedge(alpha)", parametric,
         "pi/(4*alpha); the disk-to-wedge power map lies in H^{2p} exactly when 4*alpha*p/pi < 1"},
        {"disk", kInf, "bounded domains have all exit moments finite"},
        {"disk-complement", 0.0, "covering map exp((1-z)/(1+z)) lies in no Hardy space"},
        {"dashed-half-plane", 0.5, "alternating-layer bound gives >= 1/2; containment of the half-plane gives <= 1/2"},
        {"dashed-wedge(alpha)", parametric, "min{pi/(4*alpha), pi/(4*(pi-alpha))}: the smaller of the two wedge values"},
        {"disk-lattice", kInf, "layer argument over the grid of lattice edges bounds every moment"},
        {"graph-complement(all)", kInf, "same layer argument as the full disk lattice"},
        {"graph-complement(right-half-plane)", 0.5,
         "largest hole-free component is a half-plane: containment gives <= 1/2, the layer bound gives >= 1/2"},
        {"graph-complement(wedge-complement, alpha)", parametric,
         "pi/(4*alpha): holes force the layer bound, the hole-free wedge caps it"},
        {"staircase-wedge(alpha_1..alpha_N)", parametric,
         "pi/(4*alpha_N): the set is sandwiched between W(alpha_1) and W(alpha_N) and agrees with W(alpha_N) "
         "outside a bounded set"},
    };
    return table;
}

std::optional<double> known_bh(const geom::Domain& d) {
    using namespace geom;
    return d.visit([](const auto& v) -> std::optional<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HalfPlane>) return 0.5;
        else if constexpr (std::is_same_v<T, Strip>) return kInf;
        else if constexpr (std::is_same_v<T, Wedge>) return kPi / (4.0 * v.half_angle);
        else if constexpr (std::is_same_v<T, Disk>) return kInf;
        else if constexpr (std::is_same_v<T, DiskComplement>) return 0.0;
        else if constexpr (std::is_same_v<T, DashedHalfPlane>) return 0.5;
        else if constexpr (std::is_same_v<T, DashedWedge>)
            return std::min(kPi / (4.0 * v.half_angle), kPi / (4.0 * (kPi - v.half_angle)));
        else if constexpr (std::is_same_v<T, DiskLattice>) return kInf;
        else if constexpr (std::is_same_v<T, GraphComplement>) {
            switch (v.mask) {
                case LatticeMask::All: return kInf;
                case LatticeMask::RightHalfPlane: return 0.5;
                case LatticeMask::WedgeComplement: return kPi / (4.0 * v.mask_alpha);
            }
            return std::nullopt;
        } else if constexpr (std::is_same_v<T, StaircaseWedge>) {
            return kPi / (4.0 * v.stages.back().alpha);
        } else {
            return std::nullopt;
        }
    });
}

}  // namespace bhlab::oracle
