#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "erm/errors.hpp"
#include "erm/geometry.hpp"
#include "erm/metrics.hpp"
#include "erm/simulator.hpp"
#include "erm/types.hpp"

namespace erm {

/// Shortest round-trippable decimal form, locale-independent ('.' separator).
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ParseError("cannot parse number '" + std::string(text) + "' in " + context);
    }
    return value;
}

inline long parse_long(std::string_view text, const std::string& context) {
    long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("cannot parse integer '" + std::string(text) + "' in " + context);
    }
    return value;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

/// One receiver site from a scenario file; MPCs may be inlined in the
/// scenario or supplied separately as CSV.
struct UeSite {
    std::string id;
    Point2 pos;
    LinkState los = LinkState::LoS;
    std::vector<MpcRecord> inline_mpcs;
};

struct Scenario {
    Environment env;
    std::vector<UeSite> ues;
    ScenarioConfig config;
};

namespace detail {

inline Point2 parse_point(const nlohmann::json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParseError(context + " must be a [x, y] number pair");
    }
    const Point2 p{j[0].get<double>(), j[1].get<double>()};
    if (!is_finite(p)) throw ValidationError(context + " must be finite");
    return p;
}

/// Validate one raw MPC tuple and convert it into the stored record
/// (angle normalized, gains removed when configured).
inline MpcRecord make_mpc(double power_db_raw, double delay_s, double aoa_deg,
                          const UeSite& site, const ScenarioConfig& cfg,
                          const std::string& context) {
    if (!std::isfinite(power_db_raw) || !std::isfinite(delay_s) || !std::isfinite(aoa_deg)) {
        throw ValidationError(context + ": non-finite field");
    }
    if (!(delay_s > 0.0)) {
        throw ValidationError(context + ": nonphysical delay " + fmt_double(delay_s) + " s");
    }
    const double baseline_m = norm(site.pos);
    if (delay_s * cfg.c < baseline_m - cfg.delay_quantum_s * cfg.c) {
        throw ValidationError(context + ": delay " + fmt_double(delay_s) +
                              " s is shorter than the BS-UE baseline allows");
    }
    MpcRecord mpc;
    mpc.power_db = cfg.compensate_gains ? power_db_raw - cfg.tx_gain_db - cfg.rx_gain_db
                                        : power_db_raw;
    mpc.delay_s = delay_s;
    mpc.aoa_rad = normalize_two_pi(aoa_deg * kRadPerDeg);
    return mpc;
}

}  // namespace detail

/// Load a scenario JSON file. See README for the schema; the BS is pinned to
/// the origin by the coordinate convention and the file must agree.
inline Scenario load_scenario(const std::string& path, bool compensate_gains = true) {
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario '" + path + "': " + e.what());
    }

    Scenario s;
    s.config.compensate_gains = compensate_gains;
    try {
        s.config.carrier_freq_hz = j.at("carrier_freq_hz").get<double>();
        s.config.tx_gain_db = j.value("tx_gain_db", 0.0);
        s.config.rx_gain_db = j.value("rx_gain_db", 0.0);
        s.config.delay_quantum_s = j.value("delay_quantum_s", 1.0 / 1.2e9);
        s.config.c = j.value("c", kSpeedOfLight);

        if (j.contains("bs")) {
            const Point2 bs = detail::parse_point(j["bs"], "bs");
            if (bs.x != 0.0 || bs.y != 0.0) {
                throw ValidationError("bs must be [0, 0]; translate the scenario");
            }
        }
        if (!(s.config.carrier_freq_hz > 0.0)) {
            throw ValidationError("carrier_freq_hz must be positive");
        }
        s.env.carrier_freq_hz = s.config.carrier_freq_hz;

        int wall_index = 0;
        for (const auto& jw : j.at("walls")) {
            Wall w;
            w.p1 = detail::parse_point(jw.at("p1"), "walls[" + std::to_string(wall_index) + "].p1");
            w.p2 = detail::parse_point(jw.at("p2"), "walls[" + std::to_string(wall_index) + "].p2");
            w.reflection_loss_db = jw.value("rl_db", 0.0);
            w.name = jw.value("name", "wall_" + std::to_string(wall_index));
            if (distance(w.p1, w.p2) <= 0.0) {
                throw ValidationError("wall '" + w.name + "' has zero length");
            }
            if (!(w.reflection_loss_db >= 0.0) || !std::isfinite(w.reflection_loss_db)) {
                throw ValidationError("wall '" + w.name + "' has invalid reflection loss");
            }
            s.env.walls.push_back(std::move(w));
            ++wall_index;
        }

        for (const auto& ju : j.at("ues")) {
            UeSite site;
            site.id = ju.at("id").get<std::string>();
            site.pos = detail::parse_point(ju.at("pos"), "ue '" + site.id + "' pos");
            site.los = ju.value("los", true) ? LinkState::LoS : LinkState::NLoS;
            if (norm(site.pos) == 0.0) {
                throw ValidationError("ue '" + site.id + "' coincides with the BS");
            }
            for (const auto& site_dup : s.ues) {
                if (site_dup.id == site.id) {
                    throw ValidationError("duplicate ue id '" + site.id + "'");
                }
            }
            if (ju.contains("mpcs")) {
                int row = 0;
                for (const auto& jm : ju["mpcs"]) {
                    site.inline_mpcs.push_back(detail::make_mpc(
                        jm.at("power_db").get<double>(), jm.at("delay_s").get<double>(),
                        jm.at("aoa_deg").get<double>(), site, s.config,
                        "ue '" + site.id + "' mpc #" + std::to_string(row)));
                    ++row;
                }
            }
            s.ues.push_back(std::move(site));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario '" + path + "': " + e.what());
    }
    return s;
}

/// Observations assembled from the scenario's inline MPC lists.
inline std::vector<UeObservation> observations_from_scenario(const Scenario& s) {
    std::vector<UeObservation> obs;
    obs.reserve(s.ues.size());
    for (const UeSite& site : s.ues) {
        obs.push_back({site.id, site.pos, site.los, site.inline_mpcs});
    }
    return obs;
}

inline const char* kMpcCsvHeader = "ue_id,power_db,delay_s,aoa_deg";

/// Load an MPC CSV (header `ue_id,power_db,delay_s,aoa_deg`) against a
/// scenario: every row must name a known UE; records are validated and
/// gain-compensated per the scenario config. Returns one observation per
/// scenario UE, in scenario order (possibly with an empty MPC list).
inline std::vector<UeObservation> load_mpc_csv(const std::string& path, const Scenario& s) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
    {
        auto header = detail::split_csv_line(line);
        const std::vector<std::string> want = {"ue_id", "power_db", "delay_s", "aoa_deg"};
        if (std::vector<std::string>(header.begin(), header.end()) != want) {
            throw ParseError("'" + path + "': expected header '" + kMpcCsvHeader + "'");
        }
    }
    std::vector<UeObservation> obs = observations_from_scenario(s);
    for (auto& o : obs) o.mpcs.clear();

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        const std::string context = path + ":" + std::to_string(row);
        if (fields.size() != 4) {
            throw ParseError(context + ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        const std::string& ue_id = fields[0];
        UeObservation* target = nullptr;
        const UeSite* site = nullptr;
        for (std::size_t i = 0; i < s.ues.size(); ++i) {
            if (s.ues[i].id == ue_id) {
                target = &obs[i];
                site = &s.ues[i];
                break;
            }
        }
        if (target == nullptr) {
            throw ValidationError(context + ": unknown ue id '" + ue_id + "'");
        }
        target->mpcs.push_back(detail::make_mpc(
            parse_double(fields[1], context), parse_double(fields[2], context),
            parse_double(fields[3], context), *site, s.config, context + " (ue '" + ue_id + "')"));
    }
    return obs;
}

/// Write observations as an MPC CSV. Stored powers are gain-compensated, so
/// the configured antenna gains are added back to keep the file in "as
/// measured" units and the save/load round trip an identity.
inline void save_mpc_csv(const std::string& path, const std::vector<UeObservation>& obs,
                         const ScenarioConfig& cfg) {
    auto out = detail::open_output(path);
    out << kMpcCsvHeader << "\n";
    const double gains = cfg.compensate_gains ? cfg.tx_gain_db + cfg.rx_gain_db : 0.0;
    for (const UeObservation& o : obs) {
        for (const MpcRecord& m : o.mpcs) {
            out << o.ue_id << ',' << fmt_double(m.power_db + gains) << ','
                << fmt_double(m.delay_s) << ',' << fmt_double(m.aoa_rad * kDegPerRad) << "\n";
        }
    }
    detail::finish_output(out, path);
}

inline const char* kCloudCsvHeader = "ue_id,cluster_id,x,y,r_m,theta_deg,power_db";

inline void save_point_cloud(const std::vector<RpEstimate>& cloud, const std::string& path) {
    for (const RpEstimate& est : cloud) {
        if (!is_finite(est.o) || !std::isfinite(est.r_m) || !std::isfinite(est.theta_rad)) {
            throw ValidationError("point cloud contains non-finite estimate (ue '" +
                                  est.ue_id + "')");
        }
    }
    auto out = detail::open_output(path);
    out << kCloudCsvHeader << "\n";
    for (const RpEstimate& est : cloud) {
        out << est.ue_id << ',' << est.cluster_id << ',' << fmt_double(est.o.x) << ','
            << fmt_double(est.o.y) << ',' << fmt_double(est.r_m) << ','
            << fmt_double(est.theta_rad * kDegPerRad) << ',' << fmt_double(est.source_power_db)
            << "\n";
    }
    detail::finish_output(out, path);
}

inline std::vector<RpEstimate> load_point_cloud(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
    if (detail::split_csv_line(line) != detail::split_csv_line(kCloudCsvHeader)) {
        throw ParseError("'" + path + "': expected header '" + std::string(kCloudCsvHeader) + "'");
    }
    std::vector<RpEstimate> cloud;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        const std::string context = path + ":" + std::to_string(row);
        if (fields.size() != 7) {
            throw ParseError(context + ": expected 7 fields, got " + std::to_string(fields.size()));
        }
        RpEstimate est;
        est.ue_id = fields[0];
        est.cluster_id = static_cast<int>(parse_long(fields[1], context));
        est.o.x = parse_double(fields[2], context);
        est.o.y = parse_double(fields[3], context);
        est.r_m = parse_double(fields[4], context);
        est.theta_rad = parse_double(fields[5], context) * kRadPerDeg;
        est.source_power_db = parse_double(fields[6], context);
        cloud.push_back(std::move(est));
    }
    return cloud;
}

/// Ground-truth CSV: one row per reflection point (two rows for a two-bounce
/// path); the direct path has no reflection point and leaves those fields
/// empty.
inline void save_ground_truth_csv(const std::string& path,
                                  const std::vector<std::pair<std::string, GroundTruthPath>>& truth) {
    auto out = detail::open_output(path);
    out << "ue_id,order,rp_x,rp_y,total_len_m,aoa_deg,power_db\n";
    for (const auto& [ue_id, p] : truth) {
        const auto tail = ',' + fmt_double(p.total_len_m) + ',' +
                          fmt_double(p.aoa_rad * kDegPerRad) + ',' + fmt_double(p.power_db);
        if (p.rp_points.empty()) {
            out << ue_id << ',' << p.order << ",,," << tail.substr(1) << "\n";
        } else {
            for (const Point2& rp : p.rp_points) {
                out << ue_id << ',' << p.order << ',' << fmt_double(rp.x) << ','
                    << fmt_double(rp.y) << tail << "\n";
            }
        }
    }
    detail::finish_output(out, path);
}

/// Reference map for evaluation: each wall is a segment ({"p1","p2"}), an
/// explicit line ({"a_l","b_l"}), or an axis-aligned line ({"y": c} or
/// {"x": c}).
inline std::vector<ReferenceWall> load_reference_walls(const std::string& path) {
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("reference '" + path + "': " + e.what());
    }
    std::vector<ReferenceWall> walls;
    try {
        int index = 0;
        for (const auto& jw : j.at("walls")) {
            const std::string name = jw.value("name", "ref_" + std::to_string(index));
            if (jw.contains("p1") && jw.contains("p2")) {
                walls.push_back(ReferenceWall::from_segment(
                    detail::parse_point(jw["p1"], name + ".p1"),
                    detail::parse_point(jw["p2"], name + ".p2"), name));
            } else if (jw.contains("a_l") && jw.contains("b_l")) {
                ReferenceLine line;
                line.a_l = jw["a_l"].get<double>();
                line.b_l = jw["b_l"].get<double>();
                line.name = name;
                walls.push_back(ReferenceWall::from_line(std::move(line)));
            } else if (jw.contains("y")) {
                ReferenceLine line;
                line.b_l = jw["y"].get<double>();
                line.name = name;
                walls.push_back(ReferenceWall::from_line(std::move(line)));
            } else if (jw.contains("x")) {
                ReferenceLine line;
                line.b_l = jw["x"].get<double>();
                line.rotated = true;
                line.name = name;
                walls.push_back(ReferenceWall::from_line(std::move(line)));
            } else {
                throw ParseError("reference wall '" + name +
                                 "' needs p1/p2, a_l/b_l, y, or x fields");
            }
            ++index;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("reference '" + path + "': " + e.what());
    }
    if (walls.empty()) throw ValidationError("reference '" + path + "' lists no walls");
    return walls;
}

/// Evaluation report: per-point wall assignment plus the summary statistics
/// and the empirical CDF.
inline void save_report(const std::string& path, const DeviationReport& report,
                        const std::vector<std::pair<std::string, double>>& per_point) {
    nlohmann::json j;
    j["per_point"] = nlohmann::json::array();
    for (const auto& [wall, dev] : per_point) {
        j["per_point"].push_back({{"wall", wall}, {"deviation_m", dev}});
    }
    j["min"] = report.min;
    j["max"] = report.max;
    j["mean"] = report.mean;
    j["paper_rmse"] = report.paper_rmse;
    j["true_rmse"] = report.true_rmse;
    j["cdf"] = nlohmann::json::array();
    for (const auto& [x, p] : report.cdf) {
        j["cdf"].push_back({x, p});
    }
    auto out = detail::open_output(path);
    out << j.dump(2) << "\n";
    detail::finish_output(out, path);
}

}  // namespace erm
