#pragma once

#include <string>
#include <utility>
#include <vector>

#include "erm/geometry.hpp"

namespace erm {

enum class LinkState { LoS, NLoS };

/// One detected multipath component. Power is stored gain-compensated
/// (antenna gains removed at load), so it compares directly against
/// free-space path loss.
struct MpcRecord {
    double power_db = 0.0;
    double delay_s = 0.0;    // > 0
    double aoa_rad = 0.0;    // azimuth angle of arrival, in [0, 2*pi)
};

/// One receiver position with its detected MPC list. The BS sits at the
/// origin; ue_pos carries both link distances (x = U-UE leg, y = BS-U leg).
struct UeObservation {
    std::string ue_id;
    Point2 ue_pos;
    LinkState los = LinkState::LoS;
    std::vector<MpcRecord> mpcs;
};

struct Wall {
    Point2 p1, p2;
    double reflection_loss_db = 0.0;
    std::string name;
};

/// Polygonal reflector map with per-surface constant reflection loss.
struct Environment {
    std::vector<Wall> walls;
    double carrier_freq_hz = 0.0;
};

/// A solved reflection point with its provenance.
struct RpEstimate {
    Point2 o;                    // reflection point
    double r_m = 0.0;            // UE-to-reflection-point distance
    double theta_rad = 0.0;      // face inclination, in (-pi/2, pi/2]
    std::string ue_id;
    int cluster_id = 0;
    double source_power_db = 0.0;
};

/// Reference wall line y = a_l*x + b_l. Vertical walls use the rotated
/// parameterization x = a_l*y + b_l (flag below) to avoid infinite slope.
struct ReferenceLine {
    double a_l = 0.0;   // slope
    double b_l = 0.0;   // intercept [m]
    bool rotated = false;
    std::string name;
};

/// Summary statistics over point-to-reference deviations. `paper_rmse` is the
/// population standard deviation of the deviations, `true_rmse` the root of
/// the mean squared deviation; see metrics.hpp for why both are reported.
struct DeviationReport {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double paper_rmse = 0.0;
    double true_rmse = 0.0;
    std::vector<std::pair<double, double>> cdf;  // (deviation, cumulative probability)
};

/// Scenario-wide configuration shared by the simulator and pipeline.
struct ScenarioConfig {
    double carrier_freq_hz = 300e9;
    double tx_gain_db = 0.0;
    double rx_gain_db = 0.0;
    double c = kSpeedOfLight;            // overridable (e.g. 3e8 for legacy arithmetic)
    double delay_quantum_s = 1.0 / 1.2e9;  // sounder delay resolution
    bool compensate_gains = true;
};

}  // namespace erm
