#include "rvk/evalharness.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rvk {

using nlohmann::json;

RangeGroup range_group(double distance) {
    if (distance <= 0.0) throw std::invalid_argument("range_group: distance must be positive");
    if (distance < 20.0) return RangeGroup::near;
    if (distance < 45.0) return RangeGroup::medium;
    return RangeGroup::far;
}

const char* range_group_name(RangeGroup g) {
    switch (g) {
        case RangeGroup::near:
            return "near";
        case RangeGroup::medium:
            return "medium";
        default:
            return "far";
    }
}

VelocityReport velocity_mse_report(const std::vector<VehicleOutcome>& outcomes) {
    VelocityReport report;
    std::array<double, 3> sum_2d{0.0, 0.0, 0.0};
    std::array<double, 3> sum_3d{0.0, 0.0, 0.0};
    for (const auto& o : outcomes) {
        const auto g = static_cast<std::size_t>(range_group(o.gt_distance));
        const double ez = o.pred_velocity.z - o.gt_velocity.z;
        const double ex = o.pred_velocity.x - o.gt_velocity.x;
        const double ey = o.pred_velocity.y - o.gt_velocity.y;
        sum_2d[g] += (ez * ez + ex * ex) / 2.0;
        sum_3d[g] += (ex * ex + ey * ey + ez * ez) / 3.0;
        report.counts[g] += 1;
    }
    int nonempty = 0;
    for (std::size_t g = 0; g < 3; ++g) {
        if (report.counts[g] == 0) {
            report.warnings.push_back(std::string("empty range group '") +
                                      range_group_name(static_cast<RangeGroup>(g)) +
                                      "' excluded from the average");
            continue;
        }
        report.group_mse_2d[g] = sum_2d[g] / report.counts[g];
        report.group_mse_3d[g] = sum_3d[g] / report.counts[g];
        report.average_2d += report.group_mse_2d[g];
        report.average_3d += report.group_mse_3d[g];
        ++nonempty;
    }
    if (nonempty > 0) {
        report.average_2d /= nonempty;
        report.average_3d /= nonempty;
    }
    return report;
}

PositionReport position_report(const std::vector<VehicleOutcome>& outcomes) {
    PositionReport report;
    for (const auto& o : outcomes) {
        const double ez = o.pred_distance - o.gt_distance;
        const double ex = o.pred_x - o.gt_x;
        report.mse += (ez * ez + ex * ex) / 2.0;
        report.count += 1;
    }
    if (report.count > 0) report.mse /= report.count;
    return report;
}

Vec2 position_from_distance(double distance, const BoundingBox& box, const CameraIntrinsics& cam) {
    const double u_c = (box.l + box.r) / 2.0;
    return {distance, distance * (u_c - cam.cx) / cam.fx};  // (z, x)
}

DepthMetrics depth_metrics(const std::vector<double>& pred, const std::vector<double>& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("depth_metrics: length mismatch");
    if (pred.empty()) throw std::invalid_argument("depth_metrics: empty input");
    DepthMetrics m;
    const double n = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i], g = gt[i];
        if (p <= 0.0 || g <= 0.0) {
            throw std::invalid_argument("depth_metrics: non-positive depth at index " + std::to_string(i));
        }
        const double err = p - g;
        m.abs_rel += std::abs(err) / g;
        m.sq_rel += err * err / g;
        m.rms += err * err;
        const double lg = std::log(p) - std::log(g);
        m.rms_log += lg * lg;
        const double ratio = std::max(p / g, g / p);
        if (ratio < 1.25) m.delta1 += 1.0;
        if (ratio < 1.25 * 1.25) m.delta2 += 1.0;
        if (ratio < 1.25 * 1.25 * 1.25) m.delta3 += 1.0;
    }
    m.abs_rel /= n;
    m.sq_rel /= n;
    m.rms = std::sqrt(m.rms / n);
    m.rms_log = std::sqrt(m.rms_log / n);
    m.delta1 /= n;
    m.delta2 /= n;
    m.delta3 /= n;
    return m;
}

std::string metric_report_json(const MetricReport& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["config_hash"] = report.config_hash;
    j["range_boundary_convention"] = report.boundary_convention;
    j["vehicle_count"] = report.vehicle_count;
    j["velocity"] = json{{"mse_near", report.velocity.group_mse_2d[0]},
                         {"mse_medium", report.velocity.group_mse_2d[1]},
                         {"mse_far", report.velocity.group_mse_2d[2]},
                         {"mse_average", report.velocity.average_2d},
                         {"mse3d_near", report.velocity.group_mse_3d[0]},
                         {"mse3d_medium", report.velocity.group_mse_3d[1]},
                         {"mse3d_far", report.velocity.group_mse_3d[2]},
                         {"mse3d_average", report.velocity.average_3d},
                         {"count_near", report.velocity.counts[0]},
                         {"count_medium", report.velocity.counts[1]},
                         {"count_far", report.velocity.counts[2]},
                         {"warnings", report.velocity.warnings}};
    j["position"] = json{{"mse", report.position.mse}, {"count", report.position.count}};
    j["depth"] = json{{"abs_rel", report.depth.abs_rel}, {"sq_rel", report.depth.sq_rel},
                      {"rms", report.depth.rms},         {"rms_log", report.depth.rms_log},
                      {"delta1", report.depth.delta1},   {"delta2", report.depth.delta2},
                      {"delta3", report.depth.delta3}};
    return j.dump(2) + "\n";
}

std::string metric_report_csv(const MetricReport& report) {
    std::ostringstream out;
    out << "metric,value\n";
    auto row = [&out](const char* name, double v) { out << name << "," << v << "\n"; };
    row("velocity_mse_near", report.velocity.group_mse_2d[0]);
    row("velocity_mse_medium", report.velocity.group_mse_2d[1]);
    row("velocity_mse_far", report.velocity.group_mse_2d[2]);
    row("velocity_mse_average", report.velocity.average_2d);
    row("velocity_mse3d_near", report.velocity.group_mse_3d[0]);
    row("velocity_mse3d_medium", report.velocity.group_mse_3d[1]);
    row("velocity_mse3d_far", report.velocity.group_mse_3d[2]);
    row("velocity_mse3d_average", report.velocity.average_3d);
    row("position_mse", report.position.mse);
    row("abs_rel", report.depth.abs_rel);
    row("sq_rel", report.depth.sq_rel);
    row("rms", report.depth.rms);
    row("rms_log", report.depth.rms_log);
    row("delta1", report.depth.delta1);
    row("delta2", report.depth.delta2);
    row("delta3", report.depth.delta3);
    row("count_near", report.velocity.counts[0]);
    row("count_medium", report.velocity.counts[1]);
    row("count_far", report.velocity.counts[2]);
    return out.str();
}

AblationReport summarize_ablation(std::vector<AblationRow> rows, double tie_epsilon) {
    AblationReport report;
    report.rows = std::move(rows);
    if (report.rows.empty()) return report;
    int wins = 0, ties = 0;
    for (const auto& r : report.rows) {
        report.mean_epe_full += r.epe_full;
        report.mean_epe_centric += r.epe_centric;
        if (std::abs(r.epe_full - r.epe_centric) <= tie_epsilon) {
            ++ties;
        } else if (r.epe_centric < r.epe_full) {
            ++wins;
        }
    }
    const double n = static_cast<double>(report.rows.size());
    report.mean_epe_full /= n;
    report.mean_epe_centric /= n;
    report.ties = ties;
    report.win_rate = ties == static_cast<int>(report.rows.size())
                          ? 0.0
                          : static_cast<double>(wins) / static_cast<double>(report.rows.size() - ties);
    return report;
}

std::string ablation_report_json(const AblationReport& report, const std::string& config_hash) {
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = config_hash;
    j["summary"] = json{{"mean_epe_full", report.mean_epe_full},
                        {"mean_epe_centric", report.mean_epe_centric},
                        {"win_rate", report.win_rate},
                        {"ties", report.ties},
                        {"vehicles", report.rows.size()}};
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back(json{{"scene", r.scene},
                                 {"vehicle", r.vehicle},
                                 {"scale_x", r.scale_x},
                                 {"scale_y", r.scale_y},
                                 {"epe_full", r.epe_full},
                                 {"epe_centric", r.epe_centric}});
    }
    return j.dump(2) + "\n";
}

std::string ablation_report_csv(const AblationReport& report) {
    std::ostringstream out;
    out << "scene,vehicle,scale_x,scale_y,epe_full,epe_centric\n";
    for (const auto& r : report.rows) {
        out << r.scene << "," << r.vehicle << "," << r.scale_x << "," << r.scale_y << "," << r.epe_full << ","
            << r.epe_centric << "\n";
    }
    return out.str();
}

}  // namespace rvk
