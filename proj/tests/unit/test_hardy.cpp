#include <doctest.h>

#include <cmath>

#include "bhlab/hardy.hpp"

using namespace bhlab;
using hardy::MapSpec;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("identity map has constant modulus on circles") {
    for (double p : {0.5, 2.0}) CHECK(hardy::integral_mean(MapSpec::identity(), p, 0.5) == doctest::Approx(std::pow(0.5, p)));
}

TEST_CASE("moebius means match the coefficient identity at p = 2") {
    for (double r : {0.3, 0.5, 0.9}) {
        const double expect = 1.0 + 4.0 * r * r / (1.0 - r * r);
        CHECK(hardy::integral_mean(MapSpec::moebius(), 2.0, r) == doctest::Approx(expect).epsilon(1e-6));
    }
    CHECK(std::fabs(hardy::integral_mean(MapSpec::moebius(), 2.0, 0.5) - 7.0 / 3.0) < 1e-6);
}

TEST_CASE("integral means are nondecreasing in p at fixed radius") {
    for (const auto f : {MapSpec::moebius(), MapSpec::wedge_power(0.25), MapSpec::exp_moebius()}) {
        double prev = 0.0;
        for (double p : {0.25, 0.5, 1.0, 2.0}) {
            // means of |f|^p with |f| not always >= 1 need not increase; the
            // Hardy-norm monotonicity concerns the p-th roots
            const double v = std::pow(hardy::integral_mean(f, p, 0.7), 1.0 / p);
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("means grow monotonically toward the boundary") {
    const auto f = MapSpec::moebius();
    double prev = 0.0;
    for (int k = 2; k <= 10; ++k) {
        const double v = hardy::integral_mean(f, 1.5, 1.0 - std::pow(2.0, -k));
        CHECK(v >= prev - 1e-9);
        prev = v;
    }
}

TEST_CASE("exp-moebius means blow past any bound") {
    std::vector<double> radii;
    for (int k = 3; k <= 13; ++k) radii.push_back(1.0 - std::pow(2.0, -k));
    const auto prof = hardy::means_profile(MapSpec::exp_moebius(), 0.1, radii);
    double max_mean = 0.0;
    for (double v : prof.means) max_mean = std::max(max_mean, v);
    CHECK(max_mean > 1e3);
    for (std::size_t i = 0; i + 1 < prof.means.size(); ++i)
        if (std::isfinite(prof.means[i + 1])) CHECK(prof.means[i + 1] >= prof.means[i] * 0.999);
}

TEST_CASE("hardy numbers of the catalog maps") {
    hardy::HardyNumberOptions m;
    m.p_min = 0.2;
    m.p_max = 2.0;
    m.p_step = 0.1;
    const auto hm = hardy::hardy_number(MapSpec::moebius(), m);
    CHECK(std::fabs(hm.h - 1.0) <= m.p_step + 1e-9);

    hardy::HardyNumberOptions w;
    w.p_min = 1.0;
    w.p_max = 3.0;
    w.p_step = 0.1;
    const auto hw = hardy::hardy_number(MapSpec::wedge_power(0.5), w);  // alpha = pi/4
    CHECK(std::fabs(hw.h - 2.0) <= w.p_step + 1e-9);

    hardy::HardyNumberOptions e;
    e.p_min = 0.05;
    e.p_max = 1.0;
    e.p_step = 0.05;
    const auto he = hardy::hardy_number(MapSpec::exp_moebius(), e);
    CHECK(he.h == doctest::Approx(0.0));
}

TEST_CASE("doubling the wedge angle halves the hardy number") {
    hardy::HardyNumberOptions o8;
    o8.p_min = 3.0;
    o8.p_max = 5.0;
    o8.p_step = 0.1;
    const double h8 = hardy::hardy_number(MapSpec::wedge_power(2.0 * (kPi / 8) / kPi), o8).h;
    hardy::HardyNumberOptions o4;
    o4.p_min = 1.0;
    o4.p_max = 3.0;
    o4.p_step = 0.1;
    const double h4 = hardy::hardy_number(MapSpec::wedge_power(2.0 * (kPi / 4) / kPi), o4).h;
    CHECK(h8 == doctest::Approx(2.0 * h4).epsilon(0.08));
}

TEST_CASE("burkholder equivalence across the catalog pairs") {
    hardy::HardyNumberOptions m;
    m.p_min = 0.2;
    m.p_max = 2.0;
    m.p_step = 0.1;
    const auto hp = hardy::check_burkholder_equivalence(geom::make_half_plane(), MapSpec::moebius(), m);
    CHECK(hp.equivalence_pass);

    hardy::HardyNumberOptions w;
    w.p_min = 3.0;
    w.p_max = 5.0;
    w.p_step = 0.1;
    const auto wp = hardy::check_burkholder_equivalence(geom::make_wedge(kPi / 8),
                                                        MapSpec::wedge_power(2.0 * (kPi / 8) / kPi), w);
    CHECK(wp.equivalence_pass);

    hardy::HardyNumberOptions e;
    e.p_min = 0.05;
    e.p_max = 1.0;
    e.p_step = 0.05;
    const auto dc =
        hardy::check_burkholder_equivalence(geom::make_disk_complement(1.0), MapSpec::exp_moebius(), e);
    CHECK(dc.equivalence_pass);

    CHECK_THROWS_AS(hardy::check_burkholder_equivalence(geom::make_half_plane(), MapSpec::exp_moebius(), m),
                    std::invalid_argument);
}

TEST_CASE("quadrature reports failure when starved of panels") {
    CHECK_THROWS_AS(hardy::integral_mean(MapSpec::moebius(), 0.5, 0.9999, 1e-13, 12), hardy::QuadratureFailure);
    CHECK_THROWS_AS(hardy::integral_mean(MapSpec::moebius(), 0.5, 0.999999999), std::invalid_argument);
}
