#pragma once

#include <array>
#include <string>
#include <vector>

#include "rvk/geometry.hpp"
#include "rvk/sampling.hpp"

namespace rvk {

// Range groups partition (0, inf); boundaries attach to the upper group
// (20 m -> medium, 45 m -> far).
enum class RangeGroup { near = 0, medium = 1, far = 2 };

RangeGroup range_group(double distance);
const char* range_group_name(RangeGroup g);

struct VehicleOutcome {
    double gt_distance = 0.0;
    Vec3 gt_velocity;
    Vec3 pred_velocity;
    double pred_distance = 0.0;
    double gt_x = 0.0;  // lateral ground-truth position, meters
    double pred_x = 0.0;
};

// Velocity MSE per the challenge convention: per-vehicle squared error is the
// mean over reported components ((z,x) for the 2-D metric), grouped by ground
// truth distance; the average is the unweighted mean over non-empty groups.
struct VelocityReport {
    std::array<double, 3> group_mse_2d{0.0, 0.0, 0.0};
    std::array<double, 3> group_mse_3d{0.0, 0.0, 0.0};
    std::array<int, 3> counts{0, 0, 0};
    double average_2d = 0.0;
    double average_3d = 0.0;
    std::vector<std::string> warnings;  // one per empty group
};

VelocityReport velocity_mse_report(const std::vector<VehicleOutcome>& outcomes);

struct PositionReport {
    double mse = 0.0;  // mean over vehicles of the mean squared (z, x) error
    int count = 0;
};

PositionReport position_report(const std::vector<VehicleOutcome>& outcomes);

/// z = d; x = d * (u_c - cx) / fx with u_c the box center column.
Vec2 position_from_distance(double distance, const BoundingBox& box, const CameraIntrinsics& cam);

struct DepthMetrics {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rms = 0.0;
    double rms_log = 0.0;
    double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;  // ratio thresholds 1.25^k
};

DepthMetrics depth_metrics(const std::vector<double>& pred, const std::vector<double>& gt);

struct MetricReport {
    int schema_version = 1;
    std::string config_hash;
    std::string boundary_convention = "upper";  // 20 m -> medium, 45 m -> far
    VelocityReport velocity;
    PositionReport position;
    DepthMetrics depth;
    int vehicle_count = 0;
};

std::string metric_report_json(const MetricReport& report);
std::string metric_report_csv(const MetricReport& report);

// Vehicle-centric vs full-frame flow comparison. EPE is evaluated inside the
// vehicle box in original-image pixel units for both modes.
struct AblationRow {
    int scene = 0;
    int vehicle = 0;
    double scale_x = 0.0, scale_y = 0.0;  // crop-to-patch ratios
    double epe_full = 0.0;
    double epe_centric = 0.0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    double mean_epe_full = 0.0;
    double mean_epe_centric = 0.0;
    double win_rate = 0.0;  // fraction of rows where the vehicle-centric mode is strictly better
    int ties = 0;
};

AblationReport summarize_ablation(std::vector<AblationRow> rows, double tie_epsilon = 1e-6);

std::string ablation_report_json(const AblationReport& report, const std::string& config_hash);
std::string ablation_report_csv(const AblationReport& report);

}  // namespace rvk
