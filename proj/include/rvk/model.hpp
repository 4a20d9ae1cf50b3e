#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rvk/flow.hpp"
#include "rvk/geometry.hpp"
#include "rvk/ops.hpp"
#include "rvk/sampling.hpp"
#include "rvk/simulator.hpp"
#include "rvk/tensor.hpp"

namespace rvk {

enum class FlowSource { oracle, estimated };

// Per-vehicle clue triple: geometric (from the original box), deep feature
// (from the encoder on the current patch) and multi-scale flow.
struct ClueBundle {
    std::array<double, 6> g{};
    std::vector<double> f;
    std::vector<double> m;
};

struct ModelConfig {
    int patch_w = 448;
    int patch_h = 384;
    std::vector<int> encoder_channels{16, 32, 64, 64};  // 3x3 stride-2 stages
    int feature_dim = 128;
    std::vector<int> fc_dims{256, 128, 64};
    int flow_levels = 4;
    bool zero_flow_clue = false;  // ablation: feed m = 0 at train and inference time

    int roi_size() const { return 7; }
    int flow_clue_dim() const { return flow_levels * 2 * roi_size() * roi_size(); }
    int clue_dim() const { return 6 + feature_dim + flow_clue_dim(); }
    int encoder_stride() const { return 1 << static_cast<int>(encoder_channels.size()); }
    void validate() const;
};

// Output head regresses [d, dt*vx, dt*vy, dt*vz] in standardized units;
// the training-set statistics live in the checkpoint.
struct TargetNormalization {
    std::array<double, 4> mean{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> stdev{1.0, 1.0, 1.0, 1.0};
};

struct FusionModel {
    ModelConfig cfg;
    TargetNormalization norm;
    SamplingConfig sampling;  // target sizes mirror cfg.patch_w/patch_h
    double dt = 0.05;
    FlowSource flow_source = FlowSource::oracle;
    std::string config_hash;

    std::vector<std::string> param_names;
    std::vector<TensorPtr> params;

    TensorPtr param(const std::string& name) const;
};

/// Fresh model with Xavier-uniform weights and zero biases from a seeded RNG.
FusionModel init_model(const ModelConfig& cfg, std::uint64_t seed);

/// Conv stack over the 1xHxW patch tensor; output C x H/16 x W/16.
TensorPtr encode_features(const FusionModel& model, const TensorPtr& patch);

/// Box-aligned bilinear pooling to out_size x out_size, one sample per cell
/// center; differentiable in the map values.
TensorPtr roi_align(const TensorPtr& map, const BoundingBox& box_in_map, int out_size = 7);

/// 3x3 conv (+ReLU) then spatially-collapsing 7x7 conv; flattened feature vector.
TensorPtr aggregate_feature_clue(const FusionModel& model, const TensorPtr& roi);

/// Per level: ROI pooling of the flow field at the level-scaled box, values
/// converted back to original-image pixel units, concatenated over levels.
std::vector<double> aggregate_flow_clue(const FlowPyramid& pyramid, const BoundingBox& box_in_patch,
                                        const CropSpec& spec, int roi_size = 7);

/// FC stack over concat(g, f, m); returns the 4-vector head output (standardized).
TensorPtr fusion_head(const FusionModel& model, const TensorPtr& clue);

struct Prediction {
    double distance = 0.0;
    Vec3 relative_motion;  // dt * v, meters
};

/// Convenience forward over a plain bundle; applies the inverse normalization.
Prediction fusion_forward(const FusionModel& model, const ClueBundle& bundle);

/// alpha * mse(pred_d, gt_d) + beta * mse(pred_dv, gt_dv) over a 4-vector head output.
TensorPtr compute_loss(const TensorPtr& head_out, const TensorPtr& target4, double alpha, double beta);

// --- training ---------------------------------------------------------------

struct TrainSample {
    std::vector<double> patch;      // target_h x target_w intensities in [0,1]
    BoundingBox box_in_map;         // original box mapped into feature-map coords
    std::array<double, 6> g{};
    std::vector<double> m;
    std::array<double, 4> target{};  // raw units: d, dt*v
};

TrainSample make_train_sample(const ScenePair& scene, int vehicle_index, const CameraIntrinsics& cam,
                              double dt, const SamplingConfig& sampling, FlowSource source,
                              const ModelConfig& cfg);

struct TrainSchedule {
    int epochs = 120;
    double lr = 1e-4;
    double decay = 0.2;
    int decay_every = 30;
    double alpha = 0.1;
    double beta = 1.0;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> curve;
};

/// Sequential single-sample updates, shuffled per epoch with a seeded RNG.
/// Computes target normalization from the samples before the first epoch.
/// Throws NumericError naming epoch and sample if the loss goes non-finite.
TrainResult train(FusionModel& model, const std::vector<TrainSample>& samples,
                  const TrainSchedule& schedule, std::uint64_t seed,
                  const std::function<void(const EpochStats&)>& on_epoch = nullptr);

// --- inference ---------------------------------------------------------------

struct VehicleEstimate {
    BoundingBox box;
    bool ok = false;
    std::string error;
    double distance = 0.0;
    Vec3 velocity;
    double position_z = 0.0, position_x = 0.0;
    double patch_ms = 0.0;
};

/// Full pipeline per box: crop, resample, flow pyramid, clues, fusion head.
/// `oracle_flow` must be provided when `source` is `oracle`. The crop margin
/// and patch size come from the model.
std::vector<VehicleEstimate> infer(const FusionModel& model, const ImageU8& frame_prev,
                                   const ImageU8& frame_curr, const std::vector<BoundingBox>& boxes,
                                   const CameraIntrinsics& cam, double dt, FlowSource source,
                                   const FlowField* oracle_flow);

// --- checkpoint --------------------------------------------------------------
//
// JSON header (layer names, shapes, hyperparameters, schema version) followed
// by a newline and raw little-endian f64 parameter blocks in header order.

void save_checkpoint(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rvk
