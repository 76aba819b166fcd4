#pragma once

#include <cmath>

namespace bhlab::geom {

/// A point of the plane, also used as a 2-vector.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double norm_sq(Point a) { return a.x * a.x + a.y * a.y; }
inline double arg(Point a) { return std::atan2(a.y, a.x); }

/// Rotation by `angle` about the origin.
inline Point rotate(Point p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace bhlab::geom
