#include <doctest.h>

#include <cmath>

#include "bhlab/geometry.hpp"
#include "bhlab/rng.hpp"
#include "mc_oracles.hpp"

using namespace bhlab::geom;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

Domain staircase3() {
    return make_staircase_wedge({kPi / 4 * 0.75, kPi / 4 * 0.875, kPi / 4 * 0.9375}, {0.0, 2.0, 5.0});
}

/// The ball of radius dist_to_boundary(p) must contain no boundary point:
/// probe densely along circles slightly inside that radius.
void probe_clearance(const Domain& d, Point p) {
    REQUIRE(d.contains(p));
    const double r = d.dist_to_boundary(p);
    REQUIRE(r > 0.0);
    for (double frac : {0.25, 0.6, 0.9, 0.999}) {
        for (int k = 0; k < 720; ++k) {
            const double th = 2.0 * kPi * k / 720.0;
            const Point q{p.x + frac * r * std::cos(th), p.y + frac * r * std::sin(th)};
            if (!d.contains(q)) {
                CAPTURE(p.x);
                CAPTURE(p.y);
                CAPTURE(frac);
                CAPTURE(th);
                REQUIRE(d.contains(q));
            }
        }
    }
}

}  // namespace

TEST_CASE("containment examples") {
    CHECK(make_half_plane().contains({0.0, 1.0}));
    CHECK_FALSE(make_half_plane().contains({3.0, -0.1}));
    CHECK(make_dashed_half_plane(2.0, 0.5).contains({1.0, 0.0}));        // in a gap on the axis
    CHECK_FALSE(make_dashed_half_plane(2.0, 0.5).contains({0.3, 0.0}));  // on segment 0
    CHECK_FALSE(make_dashed_half_plane(2.0, 0.5).contains({2.0, 0.0}));  // center of segment 1
    CHECK(make_dashed_half_plane(2.0, 0.5).contains({0.3, 1e-12}));      // off the axis
    CHECK_FALSE(make_disk_lattice({1, 0}, {0, 1}, 0.25).contains({0.0, 0.0}));
    CHECK(make_disk_lattice({1, 0}, {0, 1}, 0.25).contains({0.5, 0.5}));
    CHECK_FALSE(make_disk_lattice({1, 0}, {0, 1}, 0.25).contains({0.25, 0.0}));  // boundary is outside
}

TEST_CASE("distance examples") {
    CHECK(make_half_plane().dist_to_boundary({0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(make_wedge(kPi / 4).dist_to_boundary({1.0, 0.0}) == doctest::Approx(std::sin(kPi / 4)));
    CHECK(make_disk_lattice({1, 0}, {0, 1}, 0.25).dist_to_boundary({0.5, 0.5}) ==
          doctest::Approx(std::sqrt(2.0) / 2.0 - 0.25));
    CHECK(make_strip(kPi / 2).dist_to_boundary({0.2, 9.0}) == doctest::Approx(kPi / 2 - 0.2));
    CHECK_THROWS_AS(make_half_plane().dist_to_boundary({0.0, -1.0}), PointOutsideDomain);
}

TEST_CASE("boundary classification") {
    const Domain dhp = make_dashed_half_plane(2.0, 0.5);
    CHECK(dhp.classify_boundary_hit({0.1, 1e-9}, 1e-6).id == 0);
    CHECK(dhp.classify_boundary_hit({2.2, -1e-9}, 1e-6).id == 1);
    CHECK(dhp.classify_boundary_hit({-1.9, 1e-9}, 1e-6).id == -1);
    CHECK_THROWS_AS(dhp.classify_boundary_hit({0.1, 0.5}, 1e-6), NotNearBoundary);

    const Domain w = make_wedge(kPi / 4);
    const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
    CHECK(w.classify_boundary_hit({c + 1e-9 * -s, s + 1e-9 * c}, 1e-6).id == 0);
    CHECK(w.classify_boundary_hit({c, -s}, 1e-6).id == 1);

    const Domain dl = make_disk_lattice({1, 0}, {0, 1}, 0.25);
    long long m = -1, n = -1;
    unpack_lattice_id(dl.classify_boundary_hit({0.25 + 1e-9, 0.0}, 1e-6).id, m, n);
    CHECK(m == 0);
    CHECK(n == 0);
    unpack_lattice_id(dl.classify_boundary_hit({2.0, 3.0 - 0.25 - 1e-9}, 1e-6).id, m, n);
    CHECK(m == 2);
    CHECK(n == 3);
}

TEST_CASE("clearance balls contain no boundary point (probing)") {
    bhlab::mc::CounterRng rng(2024, 0);
    const std::vector<Domain> domains = {
        make_half_plane(),
        make_strip(1.3),
        make_wedge(kPi / 3),
        make_wedge(2.5),
        make_disk({0.4, -0.2}, 1.7),
        make_disk_complement(1.0),
        make_dashed_half_plane(2.0, 0.5),
        make_dashed_wedge(kPi / 4, 0.5, 1.0),
        make_disk_lattice({1.0, 0.2}, {-0.1, 1.1}, 0.3),
        make_graph_complement(0.25, LatticeMask::WedgeComplement, kPi / 8),
        make_graph_complement(0.25, LatticeMask::RightHalfPlane),
        staircase3(),
        make_union({make_wedge(kPi / 6), make_disk({2.0, 0.0}, 1.0)}),
        make_intersection({make_wedge(kPi / 3), make_disk_complement(1.0)}),
    };
    for (const auto& d : domains) {
        int found = 0;
        while (found < 25) {
            const Point p{-6.0 + 12.0 * rng.uniform(), -6.0 + 12.0 * rng.uniform()};
            if (!d.contains(p)) continue;
            probe_clearance(d, p);
            ++found;
        }
    }
}

TEST_CASE("dashed half-plane periodicity") {
    const Domain d = make_dashed_half_plane(2.0, 0.5);
    bhlab::mc::CounterRng rng(7, 0);
    for (int i = 0; i < 2000; ++i) {
        const Point p{-5.0 + 10.0 * rng.uniform(), -3.0 + 6.0 * rng.uniform()};
        const Point q{p.x + 2.0, p.y};
        CHECK(d.contains(p) == d.contains(q));
        if (d.contains(p))
            CHECK(d.dist_to_boundary(p) == doctest::Approx(d.dist_to_boundary(q)).epsilon(1e-12));
    }
}

TEST_CASE("wedge dilation invariance") {
    const Domain w = make_wedge(kPi / 5);
    bhlab::mc::CounterRng rng(8, 0);
    for (int i = 0; i < 2000; ++i) {
        const Point p{-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform()};
        for (double s : {0.5, 3.0, 17.0}) CHECK(w.contains(p) == w.contains({s * p.x, s * p.y}));
    }
}

TEST_CASE("staircase monotonicity: D_{n-1} inside D_n inside W_n") {
    const std::vector<double> angles = {kPi / 4 * 0.75, kPi / 4 * 0.875, kPi / 4 * 0.9375};
    const std::vector<double> radii = {0.0, 2.0, 5.0};
    const Domain d2 = make_staircase_wedge({angles[0], angles[1]}, {radii[0], radii[1]});
    const Domain d3 = staircase3();
    const Domain w3 = make_wedge(angles[2]);
    bhlab::mc::CounterRng rng(9, 0);
    for (int i = 0; i < 5000; ++i) {
        const Point p{-8.0 + 16.0 * rng.uniform(), -8.0 + 16.0 * rng.uniform()};
        if (d2.contains(p)) CHECK(d3.contains(p));
        if (d3.contains(p)) CHECK(w3.contains(p));
    }
}

TEST_CASE("staircase radial profile switches at stage radii") {
    const Domain d = staircase3();
    const double a1 = kPi / 4 * 0.75, a2 = kPi / 4 * 0.875;
    const double mid = 0.5 * (a1 + a2);  // angle inside stage 2 but not stage 1
    CHECK_FALSE(d.contains({1.9 * std::cos(mid), 1.9 * std::sin(mid)}));
    CHECK(d.contains({2.1 * std::cos(mid), 2.1 * std::sin(mid)}));
    // the arc between a1 and a2 at radius 2 is boundary
    const auto f = d.classify_boundary_hit({2.0 * std::cos(mid), 2.0 * std::sin(mid)}, 1e-9);
    CHECK(f.id == 4 * 1 + 2);
}

TEST_CASE("lattice distance matches brute force for masked grids") {
    for (auto mask : {LatticeMask::All, LatticeMask::RightHalfPlane, LatticeMask::WedgeComplement}) {
        const double alpha = kPi / 8;
        const Domain d = make_graph_complement(0.25, mask, alpha);
        const GraphComplement& gc = std::get<GraphComplement>(d.variant());
        bhlab::mc::CounterRng rng(11 + static_cast<int>(mask), 0);
        int tested = 0;
        while (tested < 4000) {
            const Point p{-40.0 + 80.0 * rng.uniform(), -40.0 + 80.0 * rng.uniform()};
            if (!d.contains(p)) continue;
            const double got = d.dist_to_boundary(p);
            const double want = testlab::brute_force_hole_distance(
                p, 0.25, [&](long long m, long long n) { return gc.center_exists(m, n); });
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
            ++tested;
        }
    }
}

TEST_CASE("oblique disk lattice reduces its basis and finds nearest holes") {
    // highly skewed generators describing the integer lattice
    const Domain d = make_disk_lattice({1.0, 0.0}, {7.0, 1.0}, 0.3);
    bhlab::mc::CounterRng rng(13, 0);
    int tested = 0;
    while (tested < 3000) {
        const Point p{-20.0 + 40.0 * rng.uniform(), -20.0 + 40.0 * rng.uniform()};
        if (!d.contains(p)) continue;
        const double got = d.dist_to_boundary(p);
        const double want =
            testlab::brute_force_hole_distance(p, 0.3, [](long long, long long) { return true; });
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
        ++tested;
    }
}

TEST_CASE("invalid constructions are rejected") {
    CHECK_THROWS_AS(make_dashed_half_plane(2.0, 1.0), InvalidDomain);   // 2r == x
    CHECK_THROWS_AS(make_dashed_half_plane(2.0, 1.2), InvalidDomain);   // overlapping segments
    CHECK_THROWS_AS(make_disk_lattice({1, 0}, {0, 1}, 0.6), InvalidDomain);
    CHECK_THROWS_AS(make_disk_lattice({1, 0}, {2, 0}, 0.1), InvalidDomain);  // collinear
    CHECK_THROWS_AS(make_staircase_wedge({0.3, 0.2}, {0.0, 1.0}), InvalidDomain);
    CHECK_THROWS_AS(make_staircase_wedge({0.3, kPi / 4}, {0.0, 1.0}), InvalidDomain);
    CHECK_THROWS_AS(make_staircase_wedge({0.3, 0.5}, {1.0, 2.0}), InvalidDomain);  // first radius nonzero
    CHECK_THROWS_AS(make_wedge(0.0), InvalidDomain);
    CHECK_THROWS_AS(make_graph_complement(0.5, LatticeMask::All), InvalidDomain);
    CHECK_THROWS_AS(make_union({}), InvalidDomain);
}

TEST_CASE("dashed wedge solidity along the rays") {
    const DashedWedge dw{kPi / 4, 0.5, 1.0};
    CHECK(dw.solid_at(0.0));
    CHECK(dw.solid_at(0.7));
    CHECK(dw.solid_at(1.0));
    CHECK_FALSE(dw.solid_at(1.2));  // first gap (1, 1.5)
    CHECK(dw.solid_at(1.5));
    CHECK(dw.solid_at(1.7));
    CHECK_FALSE(dw.solid_at(2.3));
    const Domain d = make_dashed_wedge(kPi / 4, 0.5, 1.0);
    // build on-ray points from the same trig values the domain uses
    const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
    CHECK_FALSE(d.contains({0.7 * c, 0.7 * s}));   // on a solid piece
    CHECK(d.contains({1.2 * c, 1.2 * s}));         // in a gap
    CHECK(d.contains({0.7 * c, 0.7 * s + 1e-9}));  // just off the ray
}
