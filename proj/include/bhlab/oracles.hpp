#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bhlab/geometry.hpp"

namespace bhlab::oracle {

struct MeanInfinite : std::runtime_error {
    explicit MeanInfinite(const std::string& what) : std::runtime_error(what) {}
};

/// E[T] for a wedge of half-angle alpha < pi/4 started at p = (x, y):
/// (x^2 tan^2 a - y^2) / (1 - tan^2 a). Throws MeanInfinite for a >= pi/4.
double wedge_mean(double alpha, geom::Point p);

/// E[T] for the strip {|x| < L} started at (x, y): L^2 - x^2.
double strip_mean(double halfwidth, geom::Point p);

/// E[T] for a disk of radius r started at p: (r^2 - |p - c|^2) / 2.
double disk_mean(double radius, geom::Point center, geom::Point p);

/// P(T > t) for the upper half-plane started at height y: erf(y / sqrt(2t)).
double half_plane_survival(double y, double t);

/// Probability that Brownian motion started at a = (x0, y0), y0 > 0, exits
/// the upper half-plane on one of the segments {|z - n*period| <= r}:
///   (1/pi) * sum_n [ atan((n*period + r - x0)/y0) - atan((n*period - r - x0)/y0) ].
/// The series is summed symmetrically with an integral-comparison tail bound
/// pushed below `tol`.
double dashed_segments_harmonic_measure(double period, double seg_half_len, geom::Point a, double tol = 1e-10);

/// Direct truncated summation of the same series with an integral-comparison
/// tail bound below `tol`; kept as an independent cross-check of the product
/// form (it converges like 1/N, so keep tol moderate).
double dashed_segments_harmonic_measure_series(double period, double seg_half_len, geom::Point a, double tol = 1e-6);

struct BhEntry {
    std::string domain;
    double bh;  // +infinity allowed
    std::string provenance;
};

/// The catalog of exactly known Brownian-Hardy numbers, with one provenance
/// note per entry.
const std::vector<BhEntry>& bh_table();

/// Exact bh for domains the catalog determines; nullopt otherwise.
std::optional<double> known_bh(const geom::Domain& d);

}  // namespace bhlab::oracle
