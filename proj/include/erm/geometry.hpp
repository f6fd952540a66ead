#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

namespace erm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHalfPi = 0.5 * kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;
inline constexpr double kDegPerRad = 180.0 / kPi;

/// Exact speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

inline Point2 normalized(Point2 p) {
    const double n = norm(p);
    return {p.x / n, p.y / n};
}

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Argument of a vector: the two-argument arctangent of (y, x), in (-pi, pi].
inline double arg(Point2 p) { return std::atan2(p.y, p.x); }

/// Normalize an angle into [0, 2*pi).
inline double normalize_two_pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

/// Fold an angle into (-pi/2, pi/2]. A face and its 180-degree rotation are
/// the same reflector, so inclinations live on this half-open interval.
inline double fold_half_pi(double a) {
    a = wrap_pi(a);
    if (a <= -kHalfPi) a += kPi;
    if (a > kHalfPi) a -= kPi;
    return a;
}

/// Arrival-direction unit vector of an MPC with azimuth angle of arrival
/// `aoa_rad`: points from the receiver toward the last bounce.
inline Point2 aoa_direction(double aoa_rad) {
    return {std::cos(aoa_rad), -std::sin(aoa_rad)};
}

/// Azimuth AoA whose arrival direction is the unit vector `u`, in [0, 2*pi).
inline double aoa_from_direction(Point2 u) {
    return normalize_two_pi(std::atan2(-u.y, u.x));
}

/// Reflect `p` across the infinite line through `a` and `b`.
inline Point2 mirror_across_line(Point2 p, Point2 a, Point2 b) {
    const Point2 d = normalized(b - a);
    const Point2 v = p - a;
    const Point2 perp = v - dot(v, d) * d;
    return p - 2.0 * perp;
}

struct SegmentHit {
    double t = 0.0;  // parameter along the first segment
    double s = 0.0;  // parameter along the second segment
    Point2 point;
};

/// Transversal intersection of the lines through [a1,a2] and [b1,b2],
/// parameterized along each. Parallel (or degenerate) pairs yield nullopt.
inline std::optional<SegmentHit> intersect_lines(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
    const Point2 da = a2 - a1;
    const Point2 db = b2 - b1;
    const double denom = cross(da, db);
    if (std::abs(denom) < 1e-14 * (norm(da) * norm(db) + 1e-300)) return std::nullopt;
    const Point2 w = b1 - a1;
    return SegmentHit{cross(w, db) / denom, cross(w, da) / denom, a1 + (cross(w, db) / denom) * da};
}

/// Distance from `p` to the segment [a,b] (foot of perpendicular clamped).
inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

}  // namespace erm
