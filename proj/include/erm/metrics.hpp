#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "erm/errors.hpp"
#include "erm/geometry.hpp"
#include "erm/types.hpp"

namespace erm {

/// Fit the reference line y = a_l*x + b_l through two points.
inline ReferenceLine fit_line(Point2 p1, Point2 p2, std::string name = {}) {
    if (p1.x == p2.x) {
        throw VerticalLine("line through x = " + std::to_string(p1.x) +
                           " is vertical; use the rotated parameterization");
    }
    ReferenceLine line;
    line.a_l = (p2.y - p1.y) / (p2.x - p1.x);
    line.b_l = p1.y - line.a_l * p1.x;
    line.name = std::move(name);
    return line;
}

/// Fit a reference line through two points, switching to the rotated
/// parameterization x = a_l*y + b_l for vertical walls.
inline ReferenceLine fit_reference_line(Point2 p1, Point2 p2, std::string name = {}) {
    try {
        return fit_line(p1, p2, std::move(name));
    } catch (const VerticalLine&) {
        ReferenceLine line;
        line.a_l = (p2.x - p1.x) / (p2.y - p1.y);
        line.b_l = p1.x - line.a_l * p1.y;
        line.rotated = true;
        line.name = std::move(name);
        return line;
    }
}

/// Perpendicular distance from a point to a reference line:
/// |rp_y - a_l*rp_x - b_l| / sqrt(1 + a_l^2) (axes swapped when rotated).
inline double point_line_deviation(Point2 rp, const ReferenceLine& line) {
    const double num = line.rotated ? rp.x - line.a_l * rp.y - line.b_l
                                    : rp.y - line.a_l * rp.x - line.b_l;
    return std::abs(num) / std::sqrt(1.0 + line.a_l * line.a_l);
}

/// The published deviation formula, |rp_y + a_l*rp_x - b_l| / (1 + a_l^2),
/// kept for study: it does not reproduce the published error tables (the sign
/// of the slope term and the missing square root make it a different map).
inline double point_line_deviation_published(Point2 rp, const ReferenceLine& line) {
    const double num = line.rotated ? rp.x + line.a_l * rp.y - line.b_l
                                    : rp.y + line.a_l * rp.x - line.b_l;
    return std::abs(num) / (1.0 + line.a_l * line.a_l);
}

enum class DeviationFormula { perpendicular, published };

/// A reference wall: an infinite line, optionally bounded by segment
/// endpoints. Bounded walls clamp the foot of the perpendicular.
struct ReferenceWall {
    ReferenceLine line;
    bool bounded = false;
    Point2 p1, p2;

    static ReferenceWall from_segment(Point2 p1, Point2 p2, std::string name = {}) {
        ReferenceWall w;
        w.line = fit_reference_line(p1, p2, std::move(name));
        w.bounded = true;
        w.p1 = p1;
        w.p2 = p2;
        return w;
    }
    static ReferenceWall from_line(ReferenceLine line) {
        ReferenceWall w;
        w.line = std::move(line);
        return w;
    }
};

inline double reference_deviation(Point2 rp, const ReferenceWall& wall,
                                  DeviationFormula formula = DeviationFormula::perpendicular) {
    if (formula == DeviationFormula::published) {
        return point_line_deviation_published(rp, wall.line);
    }
    if (wall.bounded) {
        return point_segment_distance(rp, wall.p1, wall.p2);
    }
    return point_line_deviation(rp, wall.line);
}

/// Index and deviation of the reference wall closest to `rp`; ties go to the
/// first wall in the list.
inline std::pair<int, double> assign_nearest_reference(
    Point2 rp, const std::vector<ReferenceWall>& walls,
    DeviationFormula formula = DeviationFormula::perpendicular) {
    if (walls.empty()) {
        throw ValidationError("assign_nearest_reference requires a nonempty wall list");
    }
    int best = 0;
    double best_dev = reference_deviation(rp, walls[0], formula);
    for (int i = 1; i < static_cast<int>(walls.size()); ++i) {
        const double dev = reference_deviation(rp, walls[i], formula);
        if (dev < best_dev) {
            best = i;
            best_dev = dev;
        }
    }
    return {best, best_dev};
}

/// Summary statistics over deviations. Two spread measures are reported: the
/// published tables' "RMSE" matches the population standard deviation of the
/// deviations (it is smaller than the mean), so that quantity is named
/// paper_rmse; true_rmse is the actual root of the mean square. The identity
/// true_rmse^2 = mean^2 + paper_rmse^2 holds.
inline DeviationReport error_stats(const std::vector<double>& devs) {
    if (devs.empty()) {
        throw EmptyInput("error_stats requires at least one deviation");
    }
    DeviationReport report;
    const double n = static_cast<double>(devs.size());
    report.min = *std::min_element(devs.begin(), devs.end());
    report.max = *std::max_element(devs.begin(), devs.end());
    double sum = 0.0, sum_sq = 0.0;
    for (const double d : devs) {
        sum += d;
        sum_sq += d * d;
    }
    report.mean = sum / n;
    report.true_rmse = std::sqrt(sum_sq / n);
    double var = 0.0;
    for (const double d : devs) var += (d - report.mean) * (d - report.mean);
    report.paper_rmse = std::sqrt(var / n);

    std::vector<double> sorted = devs;
    std::sort(sorted.begin(), sorted.end());
    report.cdf.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        report.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return report;
}

}  // namespace erm
