#include "bhlab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace bhlab::geom {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

/// Distance from w to the ray {s*(cos a, sin a): s >= 0} out of the origin,
/// with the nearest ray point returned through `foot`.
double ray_distance(Point w, double cos_a, double sin_a, Point& foot) {
    const double s = w.x * cos_a + w.y * sin_a;
    if (s <= 0.0) {
        foot = {0.0, 0.0};
        return norm(w);
    }
    foot = {s * cos_a, s * sin_a};
    return norm(w - foot);
}

double segment_distance(Point p, Point a, Point b, Point& foot) {
    const Point ab = b - a;
    const double len_sq = norm_sq(ab);
    double t = len_sq > 0.0 ? dot(p - a, ab) / len_sq : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    foot = a + t * ab;
    return norm(p - foot);
}

bool better(double dist, std::int64_t id, double best_dist, std::int64_t best_id) {
    return dist < best_dist || (dist == best_dist && id < best_id);
}

}  // namespace

// ---------------------------------------------------------------------- Wedge

ClosestFeature Wedge::closest(Point p) const {
    const Point w = rotate(p - apex, -axis_angle);
    const double c = std::cos(half_angle), s = std::sin(half_angle);
    Point fu, fl;
    const double du = ray_distance(w, c, s, fu);
    const double dl = ray_distance(w, c, -s, fl);
    Point foot_local;
    std::int64_t id;
    double d;
    if (du <= dl) {
        d = du;
        foot_local = fu;
        id = 0;
    } else {
        d = dl;
        foot_local = fl;
        id = 1;
    }
    return {d, apex + rotate(foot_local, axis_angle), id, 0.0};
}

// ----------------------------------------------------------------------- Disk

ClosestFeature Disk::closest(Point p) const {
    const Point u = p - center;
    const double r = norm(u);
    if (r == 0.0) return {radius, {center.x + radius, center.y}, 0, radius};
    const Point foot = center + (radius / r) * u;
    return {std::fabs(radius - r), foot, 0, radius};
}

ClosestFeature DiskComplement::closest(Point p) const {
    const double r = norm(p);
    if (r == 0.0) return {radius, {radius, 0.0}, 0, radius};
    return {std::fabs(r - radius), (radius / r) * p, 0, radius};
}

// ------------------------------------------------------------ DashedHalfPlane

ClosestFeature DashedHalfPlane::closest(Point p) const {
    const double n0 = std::nearbyint(p.x / period);
    double best = std::numeric_limits<double>::infinity();
    Point best_foot;
    std::int64_t best_id = kNoFeature;
    for (int k = -1; k <= 1; ++k) {
        const double n = n0 + k;
        const double cx = n * period;
        const double fx = std::clamp(p.x, cx - seg_half_len, cx + seg_half_len);
        const double d = std::hypot(p.x - fx, p.y);
        const auto id = static_cast<std::int64_t>(n);
        if (better(d, id, best, best_id)) {
            best = d;
            best_foot = {fx, 0.0};
            best_id = id;
        }
    }
    return {best, best_foot, best_id, 0.0};
}

// ---------------------------------------------------------------- DashedWedge

bool DashedWedge::solid_at(double s) const {
    if (s < 0.0) return false;
    if (s <= gap_period) return true;
    const double k = std::floor(s / gap_period);
    const double u = s - k * gap_period;
    return u <= 0.0 || u >= gap_len;
}

bool DashedWedge::contains(Point p) const {
    const double c = std::cos(half_angle), s = std::sin(half_angle);
    for (int sign = 0; sign < 2; ++sign) {
        const double sy = sign == 0 ? s : -s;
        const double along = p.x * c + p.y * sy;
        const double perp = p.y * c - p.x * sy;  // signed distance to the ray line
        if (perp == 0.0 && along >= 0.0 && solid_at(along)) return false;
    }
    return true;
}

ClosestFeature DashedWedge::closest(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    Point best_foot;
    std::int64_t best_id = kNoFeature;
    const double c = std::cos(half_angle), s = std::sin(half_angle);
    for (int ray = 0; ray < 2; ++ray) {
        const double sy = ray == 0 ? s : -s;
        const double along = p.x * c + p.y * sy;
        const double perp = p.y * c - p.x * sy;
        // nearest solid arclength parameter
        double sn;
        long long seg;
        if (along <= gap_period) {
            sn = std::max(along, 0.0);
            seg = 0;
        } else {
            const double k = std::floor(along / gap_period);
            const double u = along - k * gap_period;
            if (u > 0.0 && u < gap_len) {
                // inside a gap: snap to whichever end is nearer
                if (u <= gap_len - u) {
                    sn = k * gap_period;
                    seg = static_cast<long long>(k) - 1;
                } else {
                    sn = k * gap_period + gap_len;
                    seg = static_cast<long long>(k);
                }
            } else {
                sn = along;
                seg = u == 0.0 ? static_cast<long long>(k) - 1 : static_cast<long long>(k);
            }
        }
        if (seg < 0) seg = 0;  // [0, q] is segment 0 on each ray
        const double d = std::hypot(perp, along - sn);
        const std::int64_t id = 2 * seg + ray;
        if (better(d, id, best, best_id)) {
            best = d;
            best_foot = {sn * c, sn * sy};
            best_id = id;
        }
    }
    return {best, best_foot, best_id, 0.0};
}

// ---------------------------------------------------------------- DiskLattice

void DiskLattice::finalize() {
    b1 = gen_a;
    b2 = gen_b;
    if (std::fabs(cross(b1, b2)) <= 0.0) throw InvalidDomain("disk lattice: generators are collinear");
    // Lagrange-Gauss reduction: afterwards b1 is a shortest lattice vector.
    for (int iter = 0; iter < 64; ++iter) {
        if (norm_sq(b1) > norm_sq(b2)) std::swap(b1, b2);
        const double mu = std::nearbyint(dot(b1, b2) / norm_sq(b1));
        if (mu == 0.0) break;
        b2 = b2 - mu * b1;
    }
    if (norm_sq(b1) > norm_sq(b2)) std::swap(b1, b2);
    const double det = cross(b1, b2);
    inv_[0] = b2.y / det;
    inv_[1] = -b2.x / det;
    inv_[2] = -b1.y / det;
    inv_[3] = b1.x / det;
    if (norm(b1) < 2.0 * hole_radius)
        throw InvalidDomain("disk lattice: holes overlap (shortest lattice vector < 2r)");
}

Point DiskLattice::nearest_center(Point p) const {
    const double u = inv_[0] * p.x + inv_[1] * p.y;
    const double v = inv_[2] * p.x + inv_[3] * p.y;
    const double m0 = std::nearbyint(u), n0 = std::nearbyint(v);
    double best = std::numeric_limits<double>::infinity();
    Point best_c{};
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
            const double m = m0 + i, n = n0 + j;
            const Point cpt = {m * b1.x + n * b2.x, m * b1.y + n * b2.y};
            const double d = norm_sq(p - cpt);
            if (d < best) {
                best = d;
                best_c = cpt;
            }
        }
    return best_c;
}

ClosestFeature DiskLattice::closest(Point p) const {
    const Point cpt = nearest_center(p);
    const double u = inv_[0] * cpt.x + inv_[1] * cpt.y;
    const double v = inv_[2] * cpt.x + inv_[3] * cpt.y;
    const Point rel = p - cpt;
    const double r = norm(rel);
    Point foot = r == 0.0 ? cpt + Point{hole_radius, 0.0} : cpt + (hole_radius / r) * rel;
    return {std::fabs(r - hole_radius), foot,
            pack_lattice_id(static_cast<long long>(std::llround(u)), static_cast<long long>(std::llround(v))),
            hole_radius};
}

// ------------------------------------------------------------ GraphComplement

bool GraphComplement::center_exists(long long cx, long long cy) const {
    switch (mask) {
        case LatticeMask::All:
            return true;
        case LatticeMask::RightHalfPlane:
            return cx >= 0;
        case LatticeMask::WedgeComplement: {
            // outside the closed wedge {|Arg z| <= mask_alpha}, mask_alpha < pi/2
            if (cx == 0 && cy == 0) return false;
            if (cx <= 0) return true;
            return std::fabs(static_cast<double>(cy)) > static_cast<double>(cx) * std::tan(mask_alpha);
        }
    }
    return true;
}

bool GraphComplement::contains(Point p) const {
    const long long cx = std::llround(p.x), cy = std::llround(p.y);
    if (!center_exists(cx, cy)) return true;
    const double dx = p.x - static_cast<double>(cx), dy = p.y - static_cast<double>(cy);
    return dx * dx + dy * dy > hole_radius * hole_radius;
}

ClosestFeature GraphComplement::closest(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    long long bm = 0, bn = 0;
    const auto scan_window = [&](double cx, double cy, int half) {
        const long long m0 = std::llround(cx), n0 = std::llround(cy);
        for (long long i = -half; i <= half; ++i)
            for (long long j = -half; j <= half; ++j) {
                const long long m = m0 + i, n = n0 + j;
                if (!center_exists(m, n)) continue;
                const double dx = p.x - static_cast<double>(m), dy = p.y - static_cast<double>(n);
                const double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    bm = m;
                    bn = n;
                }
            }
    };
    scan_window(p.x, p.y, 2);
    // The near window covers every mask when p sits in populated territory;
    // otherwise seed extra windows at the projection of p onto the populated
    // region so far-interior queries stay O(1).
    if (mask == LatticeMask::RightHalfPlane) {
        if (p.x < 2.0) scan_window(0.0, p.y, 2);
    } else if (mask == LatticeMask::WedgeComplement) {
        const double c = std::cos(mask_alpha), s = std::sin(mask_alpha);
        for (int sign = -1; sign <= 1; sign += 2) {
            const double sy = sign * s;
            const double along = std::max(p.x * c + p.y * sy, 0.0);
            // seed sits 1.5 beyond the ray along its outward normal
            scan_window(along * c - 1.5 * s, along * sy + sign * 1.5 * c, 3);
        }
    }
    if (!std::isfinite(best)) throw InvalidDomain("graph complement: no populated center found near query");
    best = std::sqrt(best);
    const Point cpt{static_cast<double>(bm), static_cast<double>(bn)};
    const Point rel = p - cpt;
    Point foot = best == 0.0 ? cpt + Point{hole_radius, 0.0} : cpt + (hole_radius / best) * rel;
    return {std::fabs(best - hole_radius), foot, pack_lattice_id(bm, bn), hole_radius};
}

// ------------------------------------------------------------- StaircaseWedge

StaircaseWedge StaircaseWedge::make(const std::vector<double>& angles, const std::vector<double>& radii,
                                    bool quarter_plane_tail, double tail_radius) {
    if (angles.empty() || angles.size() != radii.size())
        throw InvalidDomain("staircase wedge: need matching, nonempty angle/radius lists");
    if (radii.front() != 0.0) throw InvalidDomain("staircase wedge: first stage radius must be 0");
    StaircaseWedge sw;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (angles[i] <= 0.0 || angles[i] >= kPi / 4.0)
            throw InvalidDomain("staircase wedge: stage angles must lie in (0, pi/4)");
        if (i > 0 && (angles[i] <= angles[i - 1] || radii[i] <= radii[i - 1]))
            throw InvalidDomain("staircase wedge: angles and radii must increase strictly");
        sw.stages.push_back({angles[i], radii[i], std::tan(angles[i])});
    }
    if (quarter_plane_tail) {
        if (tail_radius <= radii.back())
            throw InvalidDomain("staircase wedge: tail radius must exceed the last stage radius");
        sw.stages.push_back({kPi / 4.0, tail_radius, 1.0});
        sw.quarter_plane_tail = true;
    }
    return sw;
}

bool StaircaseWedge::contains(Point p) const {
    if (p.x <= 0.0) return false;
    const double rho_sq = norm_sq(p);
    // deepest stage whose cut radius is within |p|
    std::size_t j = 0;
    for (std::size_t k = 1; k < stages.size(); ++k) {
        if (stages[k].radius * stages[k].radius <= rho_sq) j = k;
        else break;
    }
    return std::fabs(p.y) < p.x * stages[j].tan_alpha;
}

ClosestFeature StaircaseWedge::closest(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    Point best_foot;
    std::int64_t best_id = kNoFeature;
    double best_curv = 0.0;
    const double rho = norm(p);
    const double phi = rho == 0.0 ? 0.0 : std::fabs(arg(p));
    const double ysign = p.y >= 0.0 ? 1.0 : -1.0;
    const std::size_t n = stages.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double a = stages[k].alpha;
        const double c = std::cos(a), s = std::sin(a);
        const double r_lo = stages[k].radius;
        const bool last = k + 1 == n;
        const double r_hi = last ? std::numeric_limits<double>::infinity() : stages[k + 1].radius;
        const std::int64_t base = 4 * static_cast<std::int64_t>(k + 1);
        // ray pieces at +-alpha_k between radii [r_lo, r_hi]
        for (int side = 0; side < 2; ++side) {
            const double sy = side == 0 ? s : -s;
            Point foot;
            double d;
            if (last) {
                // infinite ray from r_lo
                const double along = std::max(p.x * c + p.y * sy, r_lo);
                foot = {along * c, along * sy};
                d = norm(p - foot);
            } else {
                d = segment_distance(p, {r_lo * c, r_lo * sy}, {r_hi * c, r_hi * sy}, foot);
            }
            if (better(d, base + side, best, best_id)) {
                best = d;
                best_foot = foot;
                best_id = base + side;
                best_curv = 0.0;
            }
        }
        // arc pieces at radius r_hi between angles [alpha_k, alpha_{k+1}]
        if (!last) {
            const double a_next = stages[k + 1].alpha;
            const double phi_c = std::clamp(phi, a, a_next);
            const Point foot = {r_hi * std::cos(phi_c), ysign * r_hi * std::sin(phi_c)};
            const double d = norm(p - foot);
            const std::int64_t id = base + 2 + (ysign > 0.0 ? 0 : 1);
            if (better(d, id, best, best_id)) {
                best = d;
                best_foot = foot;
                best_id = id;
                best_curv = r_hi;
            }
        }
    }
    return {best, best_foot, best_id, best_curv};
}

// ------------------------------------------------------- Union / Intersection

namespace {

std::int64_t tag_part(std::size_t part, std::int64_t id) {
    return (static_cast<std::int64_t>(part + 1) << 48) | (id & 0xFFFFFFFFFFFFLL);
}

}  // namespace

bool Domain::contains(Point p) const {
    return visit([&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DomainUnion>) {
            for (const auto& part : d.parts)
                if (part.contains(p)) return true;
            return false;
        } else if constexpr (std::is_same_v<T, DomainIntersection>) {
            for (const auto& part : d.parts)
                if (!part.contains(p)) return false;
            return true;
        } else {
            return d.contains(p);
        }
    });
}

ClosestFeature Domain::closest(Point p) const {
    return visit([&](const auto& d) -> ClosestFeature {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DomainUnion>) {
            ClosestFeature out;
            bool inside = false;
            double best = -1.0;
            for (std::size_t i = 0; i < d.parts.size(); ++i) {
                if (!d.parts[i].contains(p)) continue;
                inside = true;
                ClosestFeature cf = d.parts[i].closest(p);
                if (cf.dist > best) {
                    best = cf.dist;
                    out = cf;
                    out.feature_id = tag_part(i, cf.feature_id);
                }
            }
            if (inside) return out;
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < d.parts.size(); ++i) {
                ClosestFeature cf = d.parts[i].closest(p);
                if (cf.dist < worst) {
                    worst = cf.dist;
                    out = cf;
                    out.feature_id = tag_part(i, cf.feature_id);
                }
            }
            return out;
        } else if constexpr (std::is_same_v<T, DomainIntersection>) {
            ClosestFeature out;
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < d.parts.size(); ++i) {
                ClosestFeature cf = d.parts[i].closest(p);
                if (cf.dist < worst) {
                    worst = cf.dist;
                    out = cf;
                    out.feature_id = tag_part(i, cf.feature_id);
                }
            }
            return out;
        } else {
            return d.closest(p);
        }
    });
}

double Domain::dist_to_boundary(Point p) const {
    if (!contains(p)) throw PointOutsideDomain("dist_to_boundary: point is not in the open set");
    return closest(p).dist;
}

BoundaryFeature Domain::classify_boundary_hit(Point p, double tol) const {
    if (tol <= 0.0) throw std::invalid_argument("classify_boundary_hit: tol must be positive");
    const ClosestFeature cf = closest(p);
    if (cf.dist > tol) throw NotNearBoundary("classify_boundary_hit: point is not within tol of the boundary");
    return {cf.feature_id};
}

void Domain::validate() const {
    visit([](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Strip>) {
            if (!(d.halfwidth > 0.0)) throw InvalidDomain("strip: halfwidth must be positive");
        } else if constexpr (std::is_same_v<T, Wedge>) {
            if (!(d.half_angle > 0.0 && d.half_angle <= kPi)) throw InvalidDomain("wedge: half-angle in (0, pi]");
            if (!is_finite(d.apex)) throw InvalidDomain("wedge: apex must be finite");
        } else if constexpr (std::is_same_v<T, Disk>) {
            if (!(d.radius > 0.0)) throw InvalidDomain("disk: radius must be positive");
        } else if constexpr (std::is_same_v<T, DiskComplement>) {
            if (!(d.radius > 0.0)) throw InvalidDomain("disk complement: radius must be positive");
        } else if constexpr (std::is_same_v<T, DashedHalfPlane>) {
            if (!(d.period > 0.0 && d.seg_half_len > 0.0))
                throw InvalidDomain("dashed half-plane: period and segment length must be positive");
            if (!(2.0 * d.seg_half_len < d.period))
                throw InvalidDomain("dashed half-plane: segments must stay disjoint (2r < x)");
        } else if constexpr (std::is_same_v<T, DashedWedge>) {
            if (!(d.half_angle > 0.0 && d.half_angle <= kPi / 2.0))
                throw InvalidDomain("dashed wedge: half-angle in (0, pi/2]");
            if (!(d.gap_len > 0.0 && d.gap_len < d.gap_period))
                throw InvalidDomain("dashed wedge: need 0 < gap length < gap period");
        } else if constexpr (std::is_same_v<T, DiskLattice>) {
            if (!(d.hole_radius > 0.0)) throw InvalidDomain("disk lattice: hole radius must be positive");
        } else if constexpr (std::is_same_v<T, GraphComplement>) {
            if (!(d.hole_radius > 0.0 && 2.0 * d.hole_radius < 1.0))
                throw InvalidDomain("graph complement: need 0 < 2r < 1 for disjoint holes");
            if (d.mask == LatticeMask::WedgeComplement && !(d.mask_alpha > 0.0 && d.mask_alpha < kPi / 2.0))
                throw InvalidDomain("graph complement: mask angle in (0, pi/2)");
        } else if constexpr (std::is_same_v<T, StaircaseWedge>) {
            if (d.stages.empty()) throw InvalidDomain("staircase wedge: no stages");
        } else if constexpr (std::is_same_v<T, DomainUnion> || std::is_same_v<T, DomainIntersection>) {
            if (d.parts.empty()) throw InvalidDomain("set combination: no operands");
            if (d.parts.size() > 1000) throw InvalidDomain("set combination: too many operands");
        }
    });
}

// ------------------------------------------------------------------ factories

Domain make_half_plane() { return Domain(HalfPlane{}); }
Domain make_strip(double halfwidth) { return Domain(Strip{halfwidth}); }
Domain make_wedge(double half_angle, Point apex, double axis_angle) {
    return Domain(Wedge{half_angle, apex, axis_angle});
}
Domain make_disk(Point center, double radius) { return Domain(Disk{center, radius}); }
Domain make_disk_complement(double radius) { return Domain(DiskComplement{radius}); }
Domain make_dashed_half_plane(double period, double seg_half_len) {
    return Domain(DashedHalfPlane{period, seg_half_len});
}
Domain make_dashed_wedge(double half_angle, double gap_len, double gap_period) {
    return Domain(DashedWedge{half_angle, gap_len, gap_period});
}
Domain make_disk_lattice(Point gen_a, Point gen_b, double hole_radius) {
    DiskLattice dl{gen_a, gen_b, hole_radius};
    dl.finalize();
    return Domain(dl);
}
Domain make_graph_complement(double hole_radius, LatticeMask mask, double mask_alpha) {
    return Domain(GraphComplement{hole_radius, mask, mask_alpha});
}
Domain make_staircase_wedge(const std::vector<double>& angles, const std::vector<double>& radii,
                            bool quarter_plane_tail, double tail_radius) {
    return Domain(StaircaseWedge::make(angles, radii, quarter_plane_tail, tail_radius));
}
Domain make_union(std::vector<Domain> parts) { return Domain(DomainUnion{std::move(parts)}); }
Domain make_intersection(std::vector<Domain> parts) { return Domain(DomainIntersection{std::move(parts)}); }

std::int64_t pack_lattice_id(long long m, long long n) {
    const auto mu = static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<std::int32_t>(m)));
    const auto nu = static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<std::int32_t>(n)));
    return static_cast<std::int64_t>((mu << 32) | nu);
}

void unpack_lattice_id(std::int64_t id, long long& m, long long& n) {
    const auto u = static_cast<std::uint64_t>(id);
    m = static_cast<std::int32_t>(u >> 32);
    n = static_cast<std::int32_t>(u & 0xFFFFFFFFu);
}

}  // namespace bhlab::geom
