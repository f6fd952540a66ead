#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "erm/errors.hpp"
#include "erm/geometry.hpp"
#include "erm/pipeline.hpp"
#include "erm/types.hpp"

namespace erm {

struct SimOptions {
    int max_order = 1;                     // 1 or 2 bounces
    double delay_quantum_s = 1.0 / 1.2e9;  // 0 disables delay quantization
    double angle_quantum_rad = 0.0;        // 0 disables AoA quantization
    bool include_los = true;
    bool quantize = false;
    double c = kSpeedOfLight;
};

/// An exact propagation path with its bounce points, kept unquantized for
/// round-trip validation against the reconstruction pipeline.
struct GroundTruthPath {
    int order = 0;
    std::vector<Point2> rp_points;
    double total_len_m = 0.0;
    double aoa_rad = 0.0;
    double power_db = 0.0;
};

struct SimResult {
    UeObservation obs;
    std::vector<GroundTruthPath> truth;
};

/// Round to the nearest nonnegative multiple of `quantum` (0 disables).
inline double quantize_step(double x, double quantum) {
    if (quantum <= 0.0) return x;
    return quantum * static_cast<double>(std::llround(x / quantum));
}

/// Round an angle to the nearest grid point k*quantum in [0, 2*pi); the top
/// of the circle wraps to 0 so repeated quantization is stable.
inline double quantize_angle(double a, double quantum) {
    if (quantum <= 0.0) return a;
    double v = quantum * static_cast<double>(std::llround(normalize_two_pi(a) / quantum));
    if (v >= kTwoPi) v = 0.0;
    return v;
}

/// Apply sounder-resolution rounding to every MPC of an observation.
/// Idempotent; ground truth is never quantized.
inline UeObservation quantize(UeObservation obs, const SimOptions& opts) {
    if (opts.delay_quantum_s < 0.0 || opts.angle_quantum_rad < 0.0) {
        throw ValidationError("quantization steps must be nonnegative");
    }
    for (MpcRecord& mpc : obs.mpcs) {
        mpc.delay_s = quantize_step(mpc.delay_s, opts.delay_quantum_s);
        mpc.aoa_rad = quantize_angle(mpc.aoa_rad, opts.angle_quantum_rad);
    }
    return obs;
}

namespace detail {

/// True when the open segment (p,q) crosses a wall's interior. Crossings
/// within `end_eps` of either leg endpoint are ignored so legs may touch
/// their own bounce point.
inline bool leg_blocked(Point2 p, Point2 q, const std::vector<Wall>& walls) {
    constexpr double end_eps = 1e-9;
    for (const Wall& w : walls) {
        const auto hit = intersect_lines(p, q, w.p1, w.p2);
        if (!hit) continue;
        if (hit->t > end_eps && hit->t < 1.0 - end_eps && hit->s >= -1e-12 &&
            hit->s <= 1.0 + 1e-12) {
            return true;
        }
    }
    return false;
}

inline void check_off_walls(Point2 p, const std::vector<Wall>& walls, const char* who) {
    for (const Wall& w : walls) {
        if (point_segment_distance(p, w.p1, w.p2) < 1e-9) {
            throw GeometryError(std::string(who) + " lies on wall '" + w.name + "'");
        }
    }
}

}  // namespace detail

/// Image-source channel simulation for one receiver: for each wall (and wall
/// pair at order 2) the BS is mirrored successively, the image-UE line is
/// intersected with the reflecting segment, and both containment and
/// per-leg visibility are verified against every wall. Emitted powers are the
/// free-space value at the total path length minus the losses of the touched
/// surfaces. Quantization, when enabled, applies to the MPC records only.
inline SimResult simulate_observation(const Environment& env, Point2 ue_pos,
                                      const SimOptions& opts = {}, Point2 bs = {0.0, 0.0}) {
    if (opts.max_order < 1 || opts.max_order > 2) {
        throw ValidationError("max_order must be 1 or 2");
    }
    if (distance(bs, ue_pos) < 1e-9) {
        throw GeometryError("UE coincides with the BS");
    }
    detail::check_off_walls(bs, env.walls, "BS");
    detail::check_off_walls(ue_pos, env.walls, "UE");

    const double freq = env.carrier_freq_hz;
    SimResult result;
    result.obs.ue_pos = ue_pos;

    constexpr double seg_eps = 1e-9;
    const auto contained = [&](double s) { return s > seg_eps && s < 1.0 - seg_eps; };

    const bool los_clear = !detail::leg_blocked(bs, ue_pos, env.walls);
    result.obs.los = los_clear ? LinkState::LoS : LinkState::NLoS;
    if (los_clear && opts.include_los) {
        GroundTruthPath path;
        path.order = 0;
        path.total_len_m = distance(bs, ue_pos);
        path.aoa_rad = aoa_from_direction(normalized(bs - ue_pos));
        path.power_db = free_space_power_db(path.total_len_m, freq, opts.c);
        result.truth.push_back(std::move(path));
    }

    for (const Wall& w : env.walls) {
        const Point2 image = mirror_across_line(bs, w.p1, w.p2);
        const auto hit = intersect_lines(image, ue_pos, w.p1, w.p2);
        if (!hit || !contained(hit->s)) continue;
        if (hit->t <= seg_eps || hit->t >= 1.0 - seg_eps) continue;
        const Point2 rp = hit->point;
        if (distance(bs, rp) < 1e-9 || distance(rp, ue_pos) < 1e-9) continue;
        if (detail::leg_blocked(bs, rp, env.walls) || detail::leg_blocked(rp, ue_pos, env.walls)) {
            continue;
        }
        GroundTruthPath path;
        path.order = 1;
        path.rp_points = {rp};
        path.total_len_m = distance(bs, rp) + distance(rp, ue_pos);
        path.aoa_rad = aoa_from_direction(normalized(rp - ue_pos));
        path.power_db = free_space_power_db(path.total_len_m, freq, opts.c) - w.reflection_loss_db;
        result.truth.push_back(std::move(path));
    }

    if (opts.max_order >= 2) {
        const int nw = static_cast<int>(env.walls.size());
        for (int i = 0; i < nw; ++i) {
            for (int j = 0; j < nw; ++j) {
                if (i == j) continue;
                const Wall& w1 = env.walls[i];
                const Wall& w2 = env.walls[j];
                const Point2 image1 = mirror_across_line(bs, w1.p1, w1.p2);
                const Point2 image12 = mirror_across_line(image1, w2.p1, w2.p2);

                const auto hit2 = intersect_lines(image12, ue_pos, w2.p1, w2.p2);
                if (!hit2 || !contained(hit2->s)) continue;
                if (hit2->t <= seg_eps || hit2->t >= 1.0 - seg_eps) continue;
                const Point2 rp2 = hit2->point;

                const auto hit1 = intersect_lines(image1, rp2, w1.p1, w1.p2);
                if (!hit1 || !contained(hit1->s)) continue;
                if (hit1->t <= seg_eps || hit1->t >= 1.0 - seg_eps) continue;
                const Point2 rp1 = hit1->point;

                if (distance(bs, rp1) < 1e-9 || distance(rp1, rp2) < 1e-9 ||
                    distance(rp2, ue_pos) < 1e-9) {
                    continue;
                }
                if (detail::leg_blocked(bs, rp1, env.walls) ||
                    detail::leg_blocked(rp1, rp2, env.walls) ||
                    detail::leg_blocked(rp2, ue_pos, env.walls)) {
                    continue;
                }
                GroundTruthPath path;
                path.order = 2;
                path.rp_points = {rp1, rp2};
                path.total_len_m =
                    distance(bs, rp1) + distance(rp1, rp2) + distance(rp2, ue_pos);
                path.aoa_rad = aoa_from_direction(normalized(rp2 - ue_pos));
                path.power_db = free_space_power_db(path.total_len_m, freq, opts.c) -
                                w1.reflection_loss_db - w2.reflection_loss_db;
                result.truth.push_back(std::move(path));
            }
        }
    }

    std::stable_sort(result.truth.begin(), result.truth.end(),
                     [](const GroundTruthPath& a, const GroundTruthPath& b) {
                         if (a.total_len_m != b.total_len_m) return a.total_len_m < b.total_len_m;
                         return a.order < b.order;
                     });
    for (const GroundTruthPath& path : result.truth) {
        result.obs.mpcs.push_back({path.power_db, path.total_len_m / opts.c, path.aoa_rad});
    }
    if (opts.quantize) {
        result.obs = quantize(std::move(result.obs), opts);
    }
    return result;
}

}  // namespace erm
