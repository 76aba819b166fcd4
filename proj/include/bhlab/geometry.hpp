#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bhlab/point.hpp"

namespace bhlab::geom {

struct PointOutsideDomain : std::runtime_error {
    explicit PointOutsideDomain(const std::string& what) : std::runtime_error(what) {}
};
struct NotNearBoundary : std::runtime_error {
    explicit NotNearBoundary(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidDomain : std::invalid_argument {
    explicit InvalidDomain(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr std::int64_t kNoFeature = std::numeric_limits<std::int64_t>::min();

/// Identifies the boundary component nearest to (or hit by) a point.
struct BoundaryFeature {
    std::int64_t id = kNoFeature;
};

/// Result of a nearest-boundary query. `dist` is the unsigned distance to the
/// boundary and is valid for points inside or outside the set. For circular
/// features `curvature_radius` is the circle radius; 0 means locally flat.
struct ClosestFeature {
    double dist = 0.0;
    Point foot;
    std::int64_t feature_id = kNoFeature;
    double curvature_radius = 0.0;
};

// ---------------------------------------------------------------------------
// Domain variants. All sets are open; points on removed segments, rays or
// circles are outside. Feature-id encodings are documented per variant.
// ---------------------------------------------------------------------------

/// Upper half-plane {y > 0}. Single feature 0 (the horizontal line).
struct HalfPlane {
    bool contains(Point p) const { return p.y > 0.0; }
    ClosestFeature closest(Point p) const { return {std::fabs(p.y), {p.x, 0.0}, 0, 0.0}; }
};

/// Vertical strip {|x| < L}. Features: 0 = left line, 1 = right line.
struct Strip {
    double halfwidth = 1.0;

    bool contains(Point p) const { return std::fabs(p.x) < halfwidth; }
    ClosestFeature closest(Point p) const {
        const double dl = std::fabs(p.x + halfwidth);
        const double dr = std::fabs(p.x - halfwidth);
        if (dl <= dr) return {dl, {-halfwidth, p.y}, 0, 0.0};
        return {dr, {halfwidth, p.y}, 1, 0.0};
    }
};

/// Open wedge of half-angle `half_angle` about the axis direction
/// `axis_angle`, apex at `apex`. half_angle in (0, pi]; half_angle = pi/2
/// with axis pi/2 is the upper half-plane, half_angle = pi is the plane
/// minus a ray. Features: 0 = upper ray (+half_angle), 1 = lower ray.
struct Wedge {
    double half_angle = 0.7853981633974483;
    Point apex{0.0, 0.0};
    double axis_angle = 0.0;

    bool contains(Point p) const {
        const Point w = rotate(p - apex, -axis_angle);
        if (w.x == 0.0 && w.y == 0.0) return false;
        return std::fabs(arg(w)) < half_angle;
    }
    ClosestFeature closest(Point p) const;
};

/// Open disk. Feature 0 = the circle.
struct Disk {
    Point center{0.0, 0.0};
    double radius = 1.0;

    bool contains(Point p) const { return norm(p - center) < radius; }
    ClosestFeature closest(Point p) const;
};

/// Complement of the closed disk {|z| <= radius}. Feature 0 = the circle.
struct DiskComplement {
    double radius = 1.0;

    bool contains(Point p) const { return norm(p) > radius; }
    ClosestFeature closest(Point p) const;
};

/// Plane minus the segments {|z - n*period| <= seg_half_len} of the real
/// axis, n ranging over the integers. Requires 2*seg_half_len < period so
/// the segments stay disjoint. Feature id = segment index n.
struct DashedHalfPlane {
    double period = 2.0;
    double seg_half_len = 0.5;

    bool contains(Point p) const {
        if (p.y != 0.0) return true;
        const double u = p.x - period * std::nearbyint(p.x / period);
        return std::fabs(u) > seg_half_len;
    }
    ClosestFeature closest(Point p) const;
};

/// Two-wedge domain with a dashed common boundary: the rays Arg z = ±half_angle
/// keep the solid segments [0, q] and [kq + g, (k+1)q] (k >= 1) of arclength
/// parameter s, with gaps of length g = gap_len and period q = gap_period.
/// Feature id = 2*segment_index + (0 upper ray | 1 lower ray).
struct DashedWedge {
    double half_angle = 0.7853981633974483;
    double gap_len = 0.5;
    double gap_period = 1.0;

    bool contains(Point p) const;
    ClosestFeature closest(Point p) const;
    /// True when arclength parameter s >= 0 lies on a solid piece of a ray.
    bool solid_at(double s) const;
};

/// Plane minus closed disks of radius hole_radius centered at the lattice
/// {m*gen_a + n*gen_b}. The generator pair is Lagrange-reduced on
/// construction; feature id packs the reduced-basis coordinates (m, n) as
/// two 32-bit halves.
struct DiskLattice {
    Point gen_a{1.0, 0.0};
    Point gen_b{0.0, 1.0};
    double hole_radius = 0.25;

    // reduced basis and its inverse, filled by finalize()
    Point b1{1.0, 0.0}, b2{0.0, 1.0};
    double inv_[4] = {1.0, 0.0, 0.0, 1.0};

    void finalize();
    Point nearest_center(Point p) const;
    bool contains(Point p) const { return norm(p - nearest_center(p)) > hole_radius; }
    ClosestFeature closest(Point p) const;
};

enum class LatticeMask { All, RightHalfPlane, WedgeComplement };

/// Plane minus closed disks of radius hole_radius centered at the integer
/// points selected by `mask`: All keeps every center, RightHalfPlane keeps
/// centers with x >= 0, WedgeComplement keeps centers outside the closed
/// wedge {|Arg z| <= mask_alpha} (mask_alpha < pi/2). Feature id packs the
/// integer center as two 32-bit halves.
struct GraphComplement {
    double hole_radius = 0.25;
    LatticeMask mask = LatticeMask::All;
    double mask_alpha = 0.39269908169872414;

    bool center_exists(long long cx, long long cy) const;
    bool contains(Point p) const;
    ClosestFeature closest(Point p) const;
};

/// Growing staircase of wedges: with stages (alpha_k, R_k), R_1 = 0, the set
/// is {|Arg z| < alpha_j(|z|)} where alpha_j(rho) uses the deepest stage with
/// R_k <= rho. Angles increase strictly (each < pi/4), radii increase
/// strictly. With `quarter_plane_tail` an extra stage (pi/4, tail_radius) is
/// appended: beyond tail_radius the set continues as the limiting quarter
/// plane and results must be read as an approximation of the infinite
/// construction. Feature ids: stage k (1-based) upper/lower ray = 4k/4k+1,
/// upper/lower arc at R_{k+1} = 4k+2/4k+3.
struct StaircaseWedge {
    struct Stage {
        double alpha;
        double radius;  // inner cut radius; 0 for the first stage
        double tan_alpha;
    };
    std::vector<Stage> stages;
    bool quarter_plane_tail = false;

    static StaircaseWedge make(const std::vector<double>& angles, const std::vector<double>& radii,
                               bool quarter_plane_tail = false, double tail_radius = 0.0);
    bool contains(Point p) const;
    ClosestFeature closest(Point p) const;
};

class Domain;

/// Union of finitely many domains. Inside the set, the distance query
/// returns the largest single-operand clearance, which is a positive lower
/// bound on the true boundary distance (exact when the nearest boundary arc
/// is not swallowed by another operand). Feature ids carry the operand index
/// in bits 48..62.
struct DomainUnion {
    std::vector<Domain> parts;
};

/// Intersection of finitely many domains; distance query is the smallest
/// operand distance (a positive lower bound inside, exact away from corner
/// overlaps). Feature ids carry the operand index in bits 48..62.
struct DomainIntersection {
    std::vector<Domain> parts;
};

using DomainVariant = std::variant<HalfPlane, Strip, Wedge, Disk, DiskComplement, DashedHalfPlane, DashedWedge,
                                   DiskLattice, GraphComplement, StaircaseWedge, DomainUnion, DomainIntersection>;

/// An immutable planar domain; all queries are pure and thread-safe.
class Domain {
  public:
    Domain() : v_(HalfPlane{}) {}
    Domain(DomainVariant v) : v_(std::move(v)) {
        if (auto* dl = std::get_if<DiskLattice>(&v_)) dl->finalize();
        validate();
    }

    bool contains(Point p) const;

    /// Unsigned distance from p to the boundary, valid anywhere.
    double boundary_distance(Point p) const { return closest(p).dist; }

    /// Distance to the boundary for an interior point; throws
    /// PointOutsideDomain otherwise. For set combinations the value is a
    /// positive lower bound (see DomainUnion / DomainIntersection).
    double dist_to_boundary(Point p) const;

    ClosestFeature closest(Point p) const;

    /// Nearest boundary component for a point within `tol` of the boundary;
    /// ties broken toward the smallest feature id. Throws NotNearBoundary.
    BoundaryFeature classify_boundary_hit(Point p, double tol) const;

    const DomainVariant& variant() const { return v_; }
    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), v_);
    }

  private:
    void validate() const;
    DomainVariant v_;
};

// Convenience constructors used throughout the experiments.
Domain make_half_plane();
Domain make_strip(double halfwidth);
Domain make_wedge(double half_angle, Point apex = {0.0, 0.0}, double axis_angle = 0.0);
Domain make_disk(Point center, double radius);
Domain make_disk_complement(double radius);
Domain make_dashed_half_plane(double period, double seg_half_len);
Domain make_dashed_wedge(double half_angle, double gap_len, double gap_period);
Domain make_disk_lattice(Point gen_a, Point gen_b, double hole_radius);
Domain make_graph_complement(double hole_radius, LatticeMask mask, double mask_alpha = 0.0);
Domain make_staircase_wedge(const std::vector<double>& angles, const std::vector<double>& radii,
                            bool quarter_plane_tail = false, double tail_radius = 0.0);
Domain make_union(std::vector<Domain> parts);
Domain make_intersection(std::vector<Domain> parts);

/// Pack/unpack of integer lattice coordinates into a feature id.
std::int64_t pack_lattice_id(long long m, long long n);
void unpack_lattice_id(std::int64_t id, long long& m, long long& n);

}  // namespace bhlab::geom
