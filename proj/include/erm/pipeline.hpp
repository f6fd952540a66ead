#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "erm/errors.hpp"
#include "erm/geometry.hpp"
#include "erm/log.hpp"
#include "erm/solver.hpp"
#include "erm/types.hpp"

namespace erm {

/// One cluster of MPCs, as indices into the owning observation's MPC list.
/// peak_index is the member with maximum power (ties: smaller delay, then
/// smaller index).
struct Cluster {
    std::vector<int> members;
    int peak_index = -1;
};

struct ClusterParams {
    double delay_gap_s = 5e-9;
    double angle_gap_rad = 10.0 * kRadPerDeg;
    double power_floor_db = -std::numeric_limits<double>::infinity();
};

/// Deterministic single-linkage clustering: two MPCs link iff their delay gap
/// and wrapped angle gap are both within the gates; clusters are the connected
/// components, ordered by peak delay ascending.
inline std::vector<Cluster> cluster_mpcs(const UeObservation& obs, const ClusterParams& params = {}) {
    if (!(params.delay_gap_s > 0.0) || !(params.angle_gap_rad > 0.0)) {
        throw ValidationError("cluster gaps must be positive");
    }
    std::vector<int> eligible;
    for (int i = 0; i < static_cast<int>(obs.mpcs.size()); ++i) {
        if (obs.mpcs[i].power_db >= params.power_floor_db) eligible.push_back(i);
    }
    const int n = static_cast<int>(eligible.size());
    if (n == 0) return {};

    const auto linked = [&](int a, int b) {
        const MpcRecord& ma = obs.mpcs[a];
        const MpcRecord& mb = obs.mpcs[b];
        return std::abs(ma.delay_s - mb.delay_s) <= params.delay_gap_s &&
               std::abs(wrap_pi(ma.aoa_rad - mb.aoa_rad)) <= params.angle_gap_rad;
    };

    // Union-find over the eligible records.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (linked(eligible[i], eligible[j])) {
                parent[find(i)] = find(j);
            }
        }
    }

    std::vector<Cluster> clusters;
    std::vector<int> root_to_cluster(n, -1);
    for (int i = 0; i < n; ++i) {
        const int root = find(i);
        if (root_to_cluster[root] < 0) {
            root_to_cluster[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[root_to_cluster[root]].members.push_back(eligible[i]);
    }
    for (Cluster& c : clusters) {
        std::sort(c.members.begin(), c.members.end());
        c.peak_index = c.members.front();
        for (const int idx : c.members) {
            const MpcRecord& cand = obs.mpcs[idx];
            const MpcRecord& best = obs.mpcs[c.peak_index];
            if (cand.power_db > best.power_db ||
                (cand.power_db == best.power_db &&
                 (cand.delay_s < best.delay_s ||
                  (cand.delay_s == best.delay_s && idx < c.peak_index)))) {
                c.peak_index = idx;
            }
        }
    }
    std::sort(clusters.begin(), clusters.end(), [&](const Cluster& a, const Cluster& b) {
        const double da = obs.mpcs[a.peak_index].delay_s;
        const double db = obs.mpcs[b.peak_index].delay_s;
        if (da != db) return da < db;
        return a.peak_index < b.peak_index;
    });
    return clusters;
}

/// Free-space path loss (Friis) in dB: 20*log10(4*pi*d*f/c).
inline double fspl_db(double distance_m, double freq_hz, double c = kSpeedOfLight) {
    if (!(distance_m > 0.0) || !(freq_hz > 0.0)) {
        throw DomainError("fspl_db requires positive distance and frequency");
    }
    return 20.0 * std::log10(4.0 * kPi * distance_m * freq_hz / c);
}

/// Received power of an unobstructed path of length d, for a 0 dB transmit
/// reference with antenna gains removed.
inline double free_space_power_db(double distance_m, double freq_hz, double c = kSpeedOfLight) {
    return -fspl_db(distance_m, freq_hz, c);
}

/// Excess loss of a path beyond free space at its own total length,
/// attributed to the bounce: the free-space received power at the path's
/// delay distance minus the detected power.
inline double reflection_loss(const MpcRecord& peak, double freq_hz, double c = kSpeedOfLight) {
    return free_space_power_db(peak.delay_s * c, freq_hz, c) - peak.power_db;
}

struct ThresholdResult {
    std::vector<double> threshold_db;  // per peak, aligned with the input
    double rl_ref_db = 0.0;            // a-th smallest reflection loss
};

/// Per-peak power thresholds: the free-space power at each peak's delay
/// distance minus twice the reference reflection loss. The reference is the
/// a-th smallest loss across peaks (a = 2 in LoS, 1 in NLoS). A peak passes
/// iff its power exceeds its threshold, equivalently iff its reflection loss
/// is below twice the reference.
inline ThresholdResult power_threshold(const std::vector<std::pair<MpcRecord, double>>& peaks_with_rl,
                                       LinkState los, double freq_hz, double c = kSpeedOfLight) {
    const std::size_t a = los == LinkState::LoS ? 2 : 1;
    if (peaks_with_rl.size() < a) {
        throw TooFewClusters("threshold needs at least " + std::to_string(a) +
                             " cluster peaks, got " + std::to_string(peaks_with_rl.size()));
    }
    std::vector<double> rls;
    rls.reserve(peaks_with_rl.size());
    for (const auto& [peak, rl] : peaks_with_rl) rls.push_back(rl);
    std::nth_element(rls.begin(), rls.begin() + (a - 1), rls.end());
    ThresholdResult result;
    result.rl_ref_db = rls[a - 1];
    result.threshold_db.reserve(peaks_with_rl.size());
    for (const auto& [peak, rl] : peaks_with_rl) {
        result.threshold_db.push_back(free_space_power_db(peak.delay_s * c, freq_hz, c) -
                                      2.0 * result.rl_ref_db);
    }
    return result;
}

struct ReconstructParams {
    ClusterParams cluster;
    SolverOptions solver;
    double c = kSpeedOfLight;
    double delay_quantum_s = 1.0 / 1.2e9;  // LoS-peak matching window, in path length c*quantum
};

struct SkippedPeak {
    int cluster_id = -1;
    std::string reason;
};

struct ReconstructResult {
    std::vector<RpEstimate> estimates;
    std::vector<SkippedPeak> skipped;  // peaks whose solve failed (not fatal)
    double rl_ref_db = 0.0;
};

/// Reconstruct one UE: cluster the MPCs, pick per-cluster power peaks,
/// compute reflection losses, threshold against twice the reference loss,
/// delete the LoS peak (LoS case, identified by delay proximity to the
/// geometric baseline), and solve each surviving peak for its reflection
/// point.
inline ReconstructResult reconstruct_ue(const UeObservation& obs, double freq_hz,
                                        const ReconstructParams& params = {}) {
    ReconstructResult result;
    const std::vector<Cluster> clusters = cluster_mpcs(obs, params.cluster);
    if (clusters.empty()) return result;

    const double baseline_m = norm(obs.ue_pos);
    const double los_window_m = std::max(params.delay_quantum_s * params.c, 1e-9);
    const bool los_case = obs.los == LinkState::LoS;

    std::vector<std::pair<MpcRecord, double>> peaks_with_rl;
    std::vector<int> cluster_ids;
    std::vector<bool> is_los_peak;
    peaks_with_rl.reserve(clusters.size());
    for (int ci = 0; ci < static_cast<int>(clusters.size()); ++ci) {
        const MpcRecord& peak = obs.mpcs[clusters[ci].peak_index];
        peaks_with_rl.emplace_back(peak, reflection_loss(peak, freq_hz, params.c));
        cluster_ids.push_back(ci);
        is_los_peak.push_back(los_case &&
                              std::abs(peak.delay_s * params.c - baseline_m) <= los_window_m);
    }

    // Everything deleted: nothing left to threshold or solve.
    if (std::all_of(is_los_peak.begin(), is_los_peak.end(), [](bool b) { return b; })) {
        return result;
    }

    const ThresholdResult thr = power_threshold(peaks_with_rl, obs.los, freq_hz, params.c);
    result.rl_ref_db = thr.rl_ref_db;

    for (std::size_t i = 0; i < peaks_with_rl.size(); ++i) {
        if (is_los_peak[i]) continue;
        const auto& [peak, rl] = peaks_with_rl[i];
        if (!(rl < 2.0 * thr.rl_ref_db)) continue;
        SolveInput in{obs.ue_pos, peak.aoa_rad, peak.delay_s * params.c};
        try {
            RpEstimate est = solve_rp_closed_form(in, params.solver);
            est.ue_id = obs.ue_id;
            est.cluster_id = cluster_ids[i];
            est.source_power_db = peak.power_db;
            result.estimates.push_back(std::move(est));
        } catch (const EllipseDegenerate& e) {
            result.skipped.push_back({cluster_ids[i], e.what()});
            log::info("ue " + obs.ue_id + " cluster " + std::to_string(cluster_ids[i]) +
                      " skipped: " + e.what());
        } catch (const BehindBaseline& e) {
            result.skipped.push_back({cluster_ids[i], e.what()});
            log::info("ue " + obs.ue_id + " cluster " + std::to_string(cluster_ids[i]) +
                      " skipped: " + e.what());
        }
    }
    return result;
}

struct MergedPoint {
    RpEstimate est;
    bool duplicate = false;  // within dedupe range of an earlier point (kept, marked)
};

/// Merge per-UE estimate lists into one point cloud ordered by (ue_id,
/// cluster_id). Points within dedupe_eps_m of an earlier point are flagged
/// duplicate but never dropped.
inline std::vector<MergedPoint> merge_rps(const std::vector<std::vector<RpEstimate>>& per_ue,
                                          double dedupe_eps_m = 0.1) {
    std::vector<MergedPoint> cloud;
    for (const auto& list : per_ue) {
        for (const RpEstimate& est : list) cloud.push_back({est, false});
    }
    std::stable_sort(cloud.begin(), cloud.end(), [](const MergedPoint& a, const MergedPoint& b) {
        if (a.est.ue_id != b.est.ue_id) return a.est.ue_id < b.est.ue_id;
        return a.est.cluster_id < b.est.cluster_id;
    });
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(cloud[i].est.o, cloud[j].est.o) <= dedupe_eps_m) {
                cloud[i].duplicate = true;
                break;
            }
        }
    }
    return cloud;
}

}  // namespace erm
