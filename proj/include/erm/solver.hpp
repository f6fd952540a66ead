#pragma once

#include <array>
#include <cmath>
#include <string>

#include "erm/errors.hpp"
#include "erm/geometry.hpp"
#include "erm/types.hpp"

namespace erm {

/// Input for one reflection-point solve: receiver position, azimuth AoA, and
/// the total BS-O-UE propagation distance of the multipath component
/// (delay times the speed of light).
struct SolveInput {
    Point2 ue_pos;
    double aoa_rad = 0.0;
    double path_len_m = 0.0;
};

struct SolverOptions {
    double ellipse_eps_m = 1e-9;  // required excess of path length over the baseline
    double tol = 1e-12;
    int max_iter = 100;
};

namespace detail {

inline void check_solvable(const SolveInput& in, const SolverOptions& opts) {
    const double d = norm(in.ue_pos);
    if (!(in.path_len_m > d + opts.ellipse_eps_m)) {
        throw EllipseDegenerate("path length " + std::to_string(in.path_len_m) +
                                " m does not exceed the BS-UE baseline " + std::to_string(d) +
                                " m: no reflection geometry exists");
    }
}

/// Included angle at the reflection point of the BS-O-UE triangle, expressed
/// through the AoA and the face inclination (mirror construction).
inline double included_angle(double aoa_rad, double theta_rad) {
    return 2.0 * aoa_rad - 2.0 * theta_rad;
}

}  // namespace detail

/// Solve one MPC's reflection point in closed form.
///
/// The reflection point O lies on the ray from the UE along the arrival
/// direction u = (cos A, -sin A), and on the ellipse with foci BS and UE whose
/// major-axis length is the total path length L. Substituting O = UE + r*u
/// into |O - BS| = L - r gives a linear equation in r:
///
///     r = (L^2 - d^2) / (2 * (L + ue_pos . u)),   d = |ue_pos|.
///
/// The face inclination follows from the mirror construction: the argument of
/// O equals A - 2*theta, so theta = (A - arg(O)) / 2, folded into
/// (-pi/2, pi/2].
inline RpEstimate solve_rp_closed_form(const SolveInput& in, const SolverOptions& opts = {}) {
    detail::check_solvable(in, opts);
    const double d = norm(in.ue_pos);
    const double len = in.path_len_m;
    const Point2 u = aoa_direction(in.aoa_rad);

    const double r = (len * len - d * d) / (2.0 * (len + dot(in.ue_pos, u)));
    if (!(r > 0.0)) {
        throw BehindBaseline("solved reflection distance " + std::to_string(r) +
                             " m is not positive");
    }

    RpEstimate est;
    est.o = in.ue_pos + r * u;
    est.r_m = r;
    est.theta_rad = fold_half_pi(0.5 * (in.aoa_rad - arg(est.o)));
    return est;
}

/// Relative law-of-cosines residual of an estimate in the BS-O-UE triangle,
/// with the included angle at O taken from the mirror construction.
inline double law_of_cosines_residual(const SolveInput& in, const RpEstimate& est) {
    const double d2 = dot(in.ue_pos, in.ue_pos);
    const double bs_o = in.path_len_m - est.r_m;
    const double th1 = detail::included_angle(in.aoa_rad, est.theta_rad);
    const double lhs = bs_o * bs_o + est.r_m * est.r_m - 2.0 * bs_o * est.r_m * std::cos(th1);
    return std::abs(lhs - d2) / d2;
}

/// Wrapped mismatch [rad] between the argument of the solved point and the
/// mirror constraint arg(O) = A - 2*theta.
inline double mirror_arg_residual(const SolveInput& in, const RpEstimate& est) {
    return std::abs(wrap_pi(arg(est.o) - (in.aoa_rad - 2.0 * est.theta_rad)));
}

/// Reflect `p` across the line through `o` with tangent angle `phi_t`.
/// Applying the map twice is the identity.
inline Point2 mirror_point(Point2 p, Point2 o, double phi_t) {
    return mirror_across_line(p, o, o + Point2{std::cos(phi_t), std::sin(phi_t)});
}

/// Tangent angle of the face that specularly couples the BS to the UE at `o`:
/// the unit normal bisects the two leg directions, and the tangent is the
/// normal turned by 90 degrees, folded into (-pi/2, pi/2].
inline double wall_tangent_from_bisector(Point2 o, Point2 ue_pos) {
    const double to_bs_len = norm(o);
    const double to_ue_len = distance(o, ue_pos);
    if (to_bs_len <= 0.0 || to_ue_len <= 0.0) {
        throw DegenerateBisector("reflection point coincides with a terminal");
    }
    const Point2 to_bs = (1.0 / to_bs_len) * (-o);
    const Point2 to_ue = (1.0 / to_ue_len) * (ue_pos - o);
    if (std::abs(cross(to_bs, to_ue)) < 1e-12) {
        throw DegenerateBisector("BS, reflection point, and UE are collinear");
    }
    const Point2 n = normalized(to_bs + to_ue);
    return fold_half_pi(arg(n) - kHalfPi);
}

namespace detail {

struct SystemState {
    double f1 = 0.0, f2 = 0.0;        // residuals (law of cosines / arg constraint)
    double j11 = 0.0, j12 = 0.0;      // d f1 / d(r, theta)
    double j21 = 0.0, j22 = 0.0;      // d f2 / d(r, theta)
};

/// Residuals and Jacobian of the two-equation system in (r, theta). f1 is the
/// law of cosines scaled by 1/d^2; f2 the wrapped arg mismatch.
inline SystemState eval_rp_system(const SolveInput& in, Point2 u, double r, double theta) {
    SystemState st;
    const double len = in.path_len_m;
    const double d2 = dot(in.ue_pos, in.ue_pos);
    const double bs_o = len - r;
    const double th1 = included_angle(in.aoa_rad, theta);
    const double c1 = std::cos(th1);
    const double s1 = std::sin(th1);

    st.f1 = (bs_o * bs_o + r * r - 2.0 * bs_o * r * c1 - d2) / d2;
    st.j11 = (-2.0 * bs_o + 2.0 * r - 2.0 * c1 * (len - 2.0 * r)) / d2;
    st.j12 = -4.0 * bs_o * r * s1 / d2;  // d th1 / d theta = -2

    const Point2 o = in.ue_pos + r * u;
    const double o2 = dot(o, o);
    st.f2 = wrap_pi(arg(o) - (in.aoa_rad - 2.0 * theta));
    st.j21 = cross(o, u) / o2;
    st.j22 = 2.0;
    return st;
}

}  // namespace detail

/// Solve the same reflection-point problem by damped Newton iteration on the
/// two-unknown system (r, theta): the law of cosines in the BS-O-UE triangle
/// (included angle from the mirror construction) paired with the argument
/// constraint on O. Cross-checks solve_rp_closed_form.
inline RpEstimate solve_rp_root_find(const SolveInput& in, const SolverOptions& opts = {}) {
    detail::check_solvable(in, opts);
    const double d = norm(in.ue_pos);
    const double len = in.path_len_m;
    const Point2 u = aoa_direction(in.aoa_rad);

    const double r_lo = 0.25 * opts.ellipse_eps_m;
    const double r_hi = len - 0.25 * opts.ellipse_eps_m;
    const auto clamp_r = [&](double r) { return std::clamp(r, r_lo, r_hi); };
    const auto theta_seed = [&](double r) {
        return 0.5 * wrap_pi(in.aoa_rad - arg(in.ue_pos + r * u));
    };

    const auto finish = [&](double r, double theta) {
        if (!(r > 0.0)) {
            throw BehindBaseline("solved reflection distance " + std::to_string(r) +
                                 " m is not positive");
        }
        RpEstimate est;
        est.o = in.ue_pos + r * u;
        est.r_m = r;
        est.theta_rad = fold_half_pi(theta);
        return est;
    };

    // Central seed: the ellipse solution for a broadside arrival; the other
    // seeds cover geometries where that lands far from the root.
    const std::array<double, 4> seeds = {clamp_r((len * len - d * d) / (2.0 * len)),
                                         clamp_r(0.3 * len), clamp_r(0.6 * len),
                                         clamp_r(0.85 * len)};
    for (const double r0 : seeds) {
        double r = r0;
        double theta = theta_seed(r0);
        auto st = detail::eval_rp_system(in, u, r, theta);
        for (int iter = 0; iter < opts.max_iter; ++iter) {
            if (std::abs(st.f1) < opts.tol && std::abs(st.f2) < opts.tol) {
                return finish(r, theta);
            }
            const double det = st.j11 * st.j22 - st.j12 * st.j21;
            if (std::abs(det) < 1e-300) break;
            const double dr = -(st.f1 * st.j22 - st.j12 * st.f2) / det;
            const double dth = -(st.j11 * st.f2 - st.f1 * st.j21) / det;

            const double n0 = std::abs(st.f1) + std::abs(st.f2);
            bool stepped = false;
            for (double lambda = 1.0; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
                const double r_try = clamp_r(r + lambda * dr);
                const double th_try = theta + lambda * dth;
                const auto st_try = detail::eval_rp_system(in, u, r_try, th_try);
                if (std::abs(st_try.f1) + std::abs(st_try.f2) < n0) {
                    r = r_try;
                    theta = th_try;
                    st = st_try;
                    stepped = true;
                    break;
                }
            }
            if (!stepped) break;
        }
        if (std::abs(st.f1) < opts.tol && std::abs(st.f2) < opts.tol) {
            return finish(r, theta);
        }
    }

    // Newton stalled everywhere. Scan the quadratic branches of the distance
    // equation over theta: a branch consistent with the arg constraint seeds a
    // final Newton attempt; if only inconsistent branches have roots, the
    // failure is a branch-selection problem rather than non-convergence.
    bool inconsistent_root_seen = false;
    for (int k = 0; k <= 360; ++k) {
        const double theta = -kHalfPi + kPi * k / 360.0;
        const double c1 = std::cos(detail::included_angle(in.aoa_rad, theta));
        if (1.0 + c1 < 1e-12) continue;
        const double disc = len * len - 2.0 * (len * len - d * d) / (1.0 + c1);
        if (disc < 0.0) continue;
        for (const double sign : {-1.0, 1.0}) {
            const double r = 0.5 * (len + sign * std::sqrt(disc));
            if (!(r > r_lo && r < r_hi)) continue;
            const auto st = detail::eval_rp_system(in, u, r, theta);
            if (std::abs(st.f2) < 1e-3) {
                double rr = r, th = theta;
                auto s2 = st;
                for (int iter = 0; iter < opts.max_iter; ++iter) {
                    if (std::abs(s2.f1) < opts.tol && std::abs(s2.f2) < opts.tol) {
                        return finish(rr, th);
                    }
                    const double det = s2.j11 * s2.j22 - s2.j12 * s2.j21;
                    if (std::abs(det) < 1e-300) break;
                    rr = clamp_r(rr - (s2.f1 * s2.j22 - s2.j12 * s2.f2) / det);
                    th = th - (s2.j11 * s2.f2 - s2.f1 * s2.j21) / det;
                    s2 = detail::eval_rp_system(in, u, rr, th);
                }
            } else if (std::abs(st.f1) < 1e-9) {
                inconsistent_root_seen = true;
            }
        }
    }
    if (inconsistent_root_seen) {
        throw AmbiguousRoot(
            "only the branch rejected by the mirror constraint has a root");
    }
    throw NoConvergence("reflection-point iteration did not converge within " +
                        std::to_string(opts.max_iter) + " iterations");
}

}  // namespace erm
