#include "rvk/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "rvk/adam.hpp"
#include "rvk/util.hpp"

namespace rvk {

using nlohmann::json;

void ModelConfig::validate() const {
    if (patch_w <= 0 || patch_h <= 0) throw ConfigError("model: bad patch size");
    if (encoder_channels.empty()) throw ConfigError("model: encoder needs at least one stage");
    for (int c : encoder_channels) {
        if (c <= 0) throw ConfigError("model: encoder channels must be positive");
    }
    const int stride = encoder_stride();
    if (patch_w % stride != 0 || patch_h % stride != 0) {
        throw ConfigError("model: patch size must be divisible by the encoder stride " + std::to_string(stride));
    }
    if (feature_dim <= 0) throw ConfigError("model: feature_dim must be positive");
    if (fc_dims.empty()) throw ConfigError("model: fc_dims must not be empty");
    for (int d : fc_dims) {
        if (d <= 0) throw ConfigError("model: fc dims must be positive");
    }
    if (flow_levels < 1) throw ConfigError("model: flow_levels must be >= 1");
}

TensorPtr FusionModel::param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i) {
        if (param_names[i] == name) return params[i];
    }
    throw std::invalid_argument("model: unknown parameter '" + name + "'");
}

namespace {

void add_param(FusionModel& model, Rng& rng, const std::string& name, std::vector<int> shape,
               int fan_in, int fan_out, bool zero_init) {
    auto t = Tensor::create(std::move(shape), true);
    t->name = name;
    if (!zero_init) {
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (auto& v : t->data) v = rng.uniform(-s, s);
    }
    model.param_names.push_back(name);
    model.params.push_back(std::move(t));
}

struct RoiTap {
    int x0, y0, x1, y1;
    double w00, w10, w01, w11;
};

std::vector<RoiTap> roi_taps(const BoundingBox& box, int H, int W, int out_size) {
    std::vector<RoiTap> taps(static_cast<std::size_t>(out_size) * out_size);
    const double bw = box.width() / out_size;
    const double bh = box.height() / out_size;
    for (int r = 0; r < out_size; ++r) {
        const double y = std::clamp(box.t + (r + 0.5) * bh, 0.0, static_cast<double>(H - 1));
        for (int c = 0; c < out_size; ++c) {
            const double x = std::clamp(box.l + (c + 0.5) * bw, 0.0, static_cast<double>(W - 1));
            RoiTap tap;
            tap.x0 = static_cast<int>(std::floor(x));
            tap.y0 = static_cast<int>(std::floor(y));
            tap.x1 = std::min(tap.x0 + 1, W - 1);
            tap.y1 = std::min(tap.y0 + 1, H - 1);
            const double ax = x - tap.x0, ay = y - tap.y0;
            tap.w00 = (1.0 - ax) * (1.0 - ay);
            tap.w10 = ax * (1.0 - ay);
            tap.w01 = (1.0 - ax) * ay;
            tap.w11 = ax * ay;
            taps[static_cast<std::size_t>(r) * out_size + c] = tap;
        }
    }
    return taps;
}

}  // namespace

FusionModel init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    FusionModel model;
    model.cfg = cfg;
    Rng rng(mix_seed(seed, 0x11d7ull));

    int c_in = 1;
    for (std::size_t s = 0; s < cfg.encoder_channels.size(); ++s) {
        const int c_out = cfg.encoder_channels[s];
        const std::string base = "enc" + std::to_string(s);
        add_param(model, rng, base + ".weight", {c_out, c_in, 3, 3}, c_in * 9, c_out * 9, false);
        add_param(model, rng, base + ".bias", {c_out}, 0, 0, true);
        c_in = c_out;
    }
    add_param(model, rng, "agg0.weight", {cfg.feature_dim, c_in, 3, 3}, c_in * 9, cfg.feature_dim * 9, false);
    add_param(model, rng, "agg0.bias", {cfg.feature_dim}, 0, 0, true);
    add_param(model, rng, "agg1.weight", {cfg.feature_dim, cfg.feature_dim, 7, 7}, cfg.feature_dim * 49,
              cfg.feature_dim * 49, false);
    add_param(model, rng, "agg1.bias", {cfg.feature_dim}, 0, 0, true);

    int in_dim = cfg.clue_dim();
    for (std::size_t i = 0; i < cfg.fc_dims.size(); ++i) {
        const int out_dim = cfg.fc_dims[i];
        const std::string base = "fc" + std::to_string(i);
        add_param(model, rng, base + ".weight", {out_dim, in_dim}, in_dim, out_dim, false);
        add_param(model, rng, base + ".bias", {out_dim}, 0, 0, true);
        in_dim = out_dim;
    }
    const std::string head = "fc" + std::to_string(cfg.fc_dims.size());
    add_param(model, rng, head + ".weight", {4, in_dim}, in_dim, 4, false);
    add_param(model, rng, head + ".bias", {4}, 0, 0, true);
    return model;
}

TensorPtr encode_features(const FusionModel& model, const TensorPtr& patch) {
    const ModelConfig& cfg = model.cfg;
    if (patch->rank() != 3 || patch->dim(0) != 1 || patch->dim(1) != cfg.patch_h ||
        patch->dim(2) != cfg.patch_w) {
        throw std::invalid_argument("encode_features: patch must be 1x" + std::to_string(cfg.patch_h) + "x" +
                                    std::to_string(cfg.patch_w) + ", got " + shape_str(patch->shape));
    }
    TensorPtr x = patch;
    for (std::size_t s = 0; s < cfg.encoder_channels.size(); ++s) {
        const std::string base = "enc" + std::to_string(s);
        x = relu(conv2d(x, model.param(base + ".weight"), model.param(base + ".bias"), 2, 1));
    }
    return x;
}

TensorPtr roi_align(const TensorPtr& map, const BoundingBox& box_in_map, int out_size) {
    if (map->rank() != 3) throw std::invalid_argument("roi_align: map must be rank 3");
    if (!box_in_map.valid()) throw std::invalid_argument("roi_align: degenerate box");
    if (out_size <= 0) throw std::invalid_argument("roi_align: bad output size");
    const int C = map->dim(0), H = map->dim(1), W = map->dim(2);

    auto taps = std::make_shared<std::vector<RoiTap>>(roi_taps(box_in_map, H, W, out_size));
    auto out = Tensor::create({C, out_size, out_size});
    const int cells = out_size * out_size;
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < C; ++ch) {
        const double* plane = map->data.data() + static_cast<std::size_t>(ch) * H * W;
        double* dst = out->data.data() + static_cast<std::size_t>(ch) * cells;
        for (int i = 0; i < cells; ++i) {
            const RoiTap& t = (*taps)[static_cast<std::size_t>(i)];
            dst[i] = t.w00 * plane[static_cast<std::size_t>(t.y0) * W + t.x0] +
                     t.w10 * plane[static_cast<std::size_t>(t.y0) * W + t.x1] +
                     t.w01 * plane[static_cast<std::size_t>(t.y1) * W + t.x0] +
                     t.w11 * plane[static_cast<std::size_t>(t.y1) * W + t.x1];
        }
    }

    if (grad_mode_enabled()) {
        Tensor* o = out.get();
        out->parents = {map};
        out->backward_fn = [o, map, taps, C, H, W, cells]() {
            if (!map->wants_grad()) return;
            map->ensure_grad();
#pragma omp parallel for schedule(static)
            for (int ch = 0; ch < C; ++ch) {
                double* plane = map->grad.data() + static_cast<std::size_t>(ch) * H * W;
                const double* g = o->grad.data() + static_cast<std::size_t>(ch) * cells;
                for (int i = 0; i < cells; ++i) {
                    const RoiTap& t = (*taps)[static_cast<std::size_t>(i)];
                    plane[static_cast<std::size_t>(t.y0) * W + t.x0] += t.w00 * g[i];
                    plane[static_cast<std::size_t>(t.y0) * W + t.x1] += t.w10 * g[i];
                    plane[static_cast<std::size_t>(t.y1) * W + t.x0] += t.w01 * g[i];
                    plane[static_cast<std::size_t>(t.y1) * W + t.x1] += t.w11 * g[i];
                }
            }
        };
    }
    return out;
}

TensorPtr aggregate_feature_clue(const FusionModel& model, const TensorPtr& roi) {
    const int roi_size = model.cfg.roi_size();
    if (roi->rank() != 3 || roi->dim(1) != roi_size || roi->dim(2) != roi_size) {
        throw std::invalid_argument("aggregate_feature_clue: expected Cx" + std::to_string(roi_size) + "x" +
                                    std::to_string(roi_size) + ", got " + shape_str(roi->shape));
    }
    TensorPtr x = relu(conv2d(roi, model.param("agg0.weight"), model.param("agg0.bias"), 1, 1));
    x = conv2d(x, model.param("agg1.weight"), model.param("agg1.bias"), 1, 0);  // collapses to 1x1
    return reshape(x, {model.cfg.feature_dim});
}

std::vector<double> aggregate_flow_clue(const FlowPyramid& pyramid, const BoundingBox& box_in_patch,
                                        const CropSpec& spec, int roi_size) {
    if (!box_in_patch.valid()) throw std::invalid_argument("aggregate_flow_clue: degenerate box");
    std::vector<double> m;
    m.reserve(pyramid.levels.size() * 2 * static_cast<std::size_t>(roi_size) * roi_size);
    double level_scale = 1.0;  // 2^k
    for (std::size_t k = 0; k < pyramid.levels.size(); ++k, level_scale *= 2.0) {
        const FlowField& level = pyramid.levels[k];
        const BoundingBox box{box_in_patch.l / level_scale, box_in_patch.t / level_scale,
                              box_in_patch.r / level_scale, box_in_patch.b / level_scale};
        if (box.r < -0.5 || box.b < -0.5 || box.l > level.w - 0.5 || box.t > level.h - 0.5) {
            throw std::invalid_argument("aggregate_flow_clue: box falls outside pyramid level " +
                                        std::to_string(k));
        }
        const auto taps = roi_taps(box, level.h, level.w, roi_size);
        for (int channel = 0; channel < 2; ++channel) {
            const double unit = level_scale * (channel == 0 ? spec.scale_x : spec.scale_y);
            for (const RoiTap& t : taps) {
                auto value = [&](int x, int y) {
                    return level.uv[(static_cast<std::size_t>(y) * level.w + x) * 2 + channel];
                };
                const double pooled = t.w00 * value(t.x0, t.y0) + t.w10 * value(t.x1, t.y0) +
                                      t.w01 * value(t.x0, t.y1) + t.w11 * value(t.x1, t.y1);
                m.push_back(pooled * unit);
            }
        }
    }
    return m;
}

TensorPtr fusion_head(const FusionModel& model, const TensorPtr& clue) {
    if (clue->rank() != 1 || clue->dim(0) != model.cfg.clue_dim()) {
        throw std::invalid_argument("fusion_head: clue must have length " +
                                    std::to_string(model.cfg.clue_dim()) + ", got " + shape_str(clue->shape));
    }
    TensorPtr x = clue;
    for (std::size_t i = 0; i < model.cfg.fc_dims.size(); ++i) {
        const std::string base = "fc" + std::to_string(i);
        x = relu(fully_connected(x, model.param(base + ".weight"), model.param(base + ".bias")));
    }
    const std::string head = "fc" + std::to_string(model.cfg.fc_dims.size());
    return fully_connected(x, model.param(head + ".weight"), model.param(head + ".bias"));
}

Prediction fusion_forward(const FusionModel& model, const ClueBundle& bundle) {
    if (static_cast<int>(bundle.f.size()) != model.cfg.feature_dim ||
        static_cast<int>(bundle.m.size()) != model.cfg.flow_clue_dim()) {
        throw std::invalid_argument("fusion_forward: bundle dimensions do not match the model");
    }
    NoGradGuard no_grad;
    std::vector<double> clue(bundle.g.begin(), bundle.g.end());
    clue.insert(clue.end(), bundle.f.begin(), bundle.f.end());
    clue.insert(clue.end(), bundle.m.begin(), bundle.m.end());
    auto out = fusion_head(model, Tensor::from_data({model.cfg.clue_dim()}, std::move(clue)));

    Prediction pred;
    pred.distance = out->data[0] * model.norm.stdev[0] + model.norm.mean[0];
    pred.relative_motion = {out->data[1] * model.norm.stdev[1] + model.norm.mean[1],
                            out->data[2] * model.norm.stdev[2] + model.norm.mean[2],
                            out->data[3] * model.norm.stdev[3] + model.norm.mean[3]};
    return pred;
}

TensorPtr compute_loss(const TensorPtr& head_out, const TensorPtr& target4, double alpha, double beta) {
    if (head_out->rank() != 1 || head_out->dim(0) != 4 || target4->rank() != 1 || target4->dim(0) != 4) {
        throw std::invalid_argument("compute_loss: expects 4-vectors");
    }
    auto dist_term = mse_loss(slice(head_out, 0, 1), slice(target4, 0, 1));
    auto velo_term = mse_loss(slice(head_out, 1, 4), slice(target4, 1, 4));
    return add(scale(dist_term, alpha), scale(velo_term, beta));
}

TrainSample make_train_sample(const ScenePair& scene, int vehicle_index, const CameraIntrinsics& cam,
                              double dt, const SamplingConfig& sampling, FlowSource source,
                              const ModelConfig& cfg) {
    const SceneVehicle& vehicle = scene.vehicles.at(static_cast<std::size_t>(vehicle_index));
    const BoundingBox& box = vehicle.box_curr;

    const CropSpec spec = expand_crop(box, sampling.delta_px, cam.width, cam.height, cfg.patch_w, cfg.patch_h);
    const ImageF64 patch = resample_patch(scene.frame_curr, spec);

    FlowPyramid pyramid;
    if (source == FlowSource::oracle) {
        pyramid = oracle_flow_pyramid(scene.flow, spec, cfg.flow_levels);
    } else {
        const ImageF64 tpl = resample_patch(scene.frame_prev, spec);
        pyramid = estimate_flow(tpl, patch, cfg.flow_levels);
    }

    const BoundingBox box_in_patch = box_to_patch(spec, box);
    const double inv_stride = 1.0 / cfg.encoder_stride();

    TrainSample s;
    s.patch.resize(patch.px.size());
    for (std::size_t i = 0; i < patch.px.size(); ++i) s.patch[i] = patch.px[i] / 255.0;
    s.box_in_map = {box_in_patch.l * inv_stride, box_in_patch.t * inv_stride, box_in_patch.r * inv_stride,
                    box_in_patch.b * inv_stride};
    s.g = geometric_clue(cam, box);
    s.m = aggregate_flow_clue(pyramid, box_in_patch, spec, cfg.roi_size());
    s.target = {vehicle.truth_curr.distance, vehicle.truth_curr.velocity.x * dt,
                vehicle.truth_curr.velocity.y * dt, vehicle.truth_curr.velocity.z * dt};
    return s;
}

namespace {

TensorPtr sample_loss_graph(const FusionModel& model, const TrainSample& sample,
                            const std::vector<double>& zero_m, const TrainSchedule& schedule) {
    const ModelConfig& cfg = model.cfg;
    auto patch = Tensor::from_data({1, cfg.patch_h, cfg.patch_w}, sample.patch);
    auto feat = encode_features(model, patch);
    auto roi = roi_align(feat, sample.box_in_map, cfg.roi_size());
    auto f = aggregate_feature_clue(model, roi);

    auto g = Tensor::from_data({6}, std::vector<double>(sample.g.begin(), sample.g.end()));
    auto m = Tensor::from_data({cfg.flow_clue_dim()}, cfg.zero_flow_clue ? zero_m : sample.m);
    auto clue = concat({g, f, m});
    auto out = fusion_head(model, clue);

    std::array<double, 4> t{};
    for (int i = 0; i < 4; ++i) {
        t[static_cast<std::size_t>(i)] =
            (sample.target[static_cast<std::size_t>(i)] - model.norm.mean[static_cast<std::size_t>(i)]) /
            model.norm.stdev[static_cast<std::size_t>(i)];
    }
    auto target = Tensor::from_data({4}, std::vector<double>(t.begin(), t.end()));
    return compute_loss(out, target, schedule.alpha, schedule.beta);
}

}  // namespace

TrainResult train(FusionModel& model, const std::vector<TrainSample>& samples,
                  const TrainSchedule& schedule, std::uint64_t seed,
                  const std::function<void(const EpochStats&)>& on_epoch) {
    if (samples.empty()) throw DataError("train: no training samples");
    model.cfg.validate();

    // target standardization from the training set
    TargetNormalization norm;
    for (int c = 0; c < 4; ++c) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s.target[static_cast<std::size_t>(c)];
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        for (const auto& s : samples) {
            const double d = s.target[static_cast<std::size_t>(c)] - mean;
            var += d * d;
        }
        var /= static_cast<double>(samples.size());
        norm.mean[static_cast<std::size_t>(c)] = mean;
        norm.stdev[static_cast<std::size_t>(c)] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    model.norm = norm;

    std::vector<AdamState> states;
    states.reserve(model.params.size());
    for (const auto& p : model.params) states.push_back(AdamState::for_param(*p, schedule.lr));

    const std::vector<double> zero_m(static_cast<std::size_t>(model.cfg.flow_clue_dim()), 0.0);
    std::vector<int> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    TrainResult result;
    for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
        const double lr = scheduled_lr(schedule.lr, schedule.decay, schedule.decay_every, epoch);
        for (auto& st : states) st.lr = lr;

        Rng rng(mix_seed(seed, 0xe90cull + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        double loss_sum = 0.0;
        for (int idx : order) {
            auto loss = sample_loss_graph(model, samples[static_cast<std::size_t>(idx)], zero_m, schedule);
            const double value = loss->item();
            if (!std::isfinite(value)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                                   std::to_string(idx));
            }
            loss_sum += value;
            loss->backward();
            for (std::size_t p = 0; p < model.params.size(); ++p) adam_step(*model.params[p], states[p]);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_sum / static_cast<double>(samples.size());
        stats.lr = lr;
        result.curve.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return result;
}

std::vector<VehicleEstimate> infer(const FusionModel& model, const ImageU8& frame_prev,
                                   const ImageU8& frame_curr, const std::vector<BoundingBox>& boxes,
                                   const CameraIntrinsics& cam, double dt, FlowSource source,
                                   const FlowField* oracle_flow) {
    if (dt <= 0.0) throw std::invalid_argument("infer: dt must be positive");
    if (source == FlowSource::oracle && oracle_flow == nullptr) {
        throw std::invalid_argument("infer: oracle flow source requires a flow field");
    }
    const ModelConfig& cfg = model.cfg;
    const SamplingConfig& sampling = model.sampling;

    std::vector<VehicleEstimate> out;
    out.reserve(boxes.size());
    for (const BoundingBox& box : boxes) {
        VehicleEstimate est;
        est.box = box;
        const auto t0 = std::chrono::steady_clock::now();

        if (!box.valid()) {
            est.error = "degenerate box";
            out.push_back(est);
            continue;
        }
        if (box.l < 0.0 || box.t < 0.0 || box.r > frame_curr.w - 1.0 || box.b > frame_curr.h - 1.0) {
            est.error = "box outside image";
            out.push_back(est);
            continue;
        }

        const CropSpec spec =
            expand_crop(box, sampling.delta_px, frame_curr.w, frame_curr.h, cfg.patch_w, cfg.patch_h);
        const ImageF64 patch = resample_patch(frame_curr, spec);

        FlowPyramid pyramid;
        if (source == FlowSource::oracle) {
            pyramid = oracle_flow_pyramid(*oracle_flow, spec, cfg.flow_levels);
        } else {
            const ImageF64 tpl = resample_patch(frame_prev, spec);
            pyramid = estimate_flow(tpl, patch, cfg.flow_levels);
        }

        const BoundingBox box_in_patch = box_to_patch(spec, box);

        ClueBundle bundle;
        bundle.g = geometric_clue(cam, box);
        bundle.m = aggregate_flow_clue(pyramid, box_in_patch, spec, cfg.roi_size());
        if (cfg.zero_flow_clue) std::fill(bundle.m.begin(), bundle.m.end(), 0.0);

        {
            NoGradGuard no_grad;
            std::vector<double> norm_patch(patch.px.size());
            for (std::size_t i = 0; i < patch.px.size(); ++i) norm_patch[i] = patch.px[i] / 255.0;
            auto patch_t = Tensor::from_data({1, cfg.patch_h, cfg.patch_w}, std::move(norm_patch));
            auto feat = encode_features(model, patch_t);
            const double inv_stride = 1.0 / cfg.encoder_stride();
            const BoundingBox box_in_map{box_in_patch.l * inv_stride, box_in_patch.t * inv_stride,
                                         box_in_patch.r * inv_stride, box_in_patch.b * inv_stride};
            auto roi = roi_align(feat, box_in_map, cfg.roi_size());
            auto f = aggregate_feature_clue(model, roi);
            bundle.f.assign(f->data.begin(), f->data.end());
        }

        const Prediction pred = fusion_forward(model, bundle);
        est.ok = true;
        est.distance = pred.distance;
        est.velocity = pred.relative_motion / dt;
        est.position_z = pred.distance;
        const double u_c = (box.l + box.r) / 2.0;
        est.position_x = pred.distance * (u_c - cam.cx) / cam.fx;

        const auto t1 = std::chrono::steady_clock::now();
        est.patch_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        out.push_back(est);
    }
    return out;
}

// --- checkpoint --------------------------------------------------------------

namespace {
constexpr int kCheckpointSchema = 1;
}

void save_checkpoint(const FusionModel& model, const std::filesystem::path& path) {
    json header;
    header["schema_version"] = kCheckpointSchema;
    header["config_hash"] = model.config_hash;
    header["dt"] = model.dt;
    header["flow_source"] = model.flow_source == FlowSource::oracle ? "oracle" : "estimated";
    header["model"] = json{{"patch_w", model.cfg.patch_w},
                           {"patch_h", model.cfg.patch_h},
                           {"encoder_channels", model.cfg.encoder_channels},
                           {"feature_dim", model.cfg.feature_dim},
                           {"fc_dims", model.cfg.fc_dims},
                           {"flow_levels", model.cfg.flow_levels},
                           {"zero_flow_clue", model.cfg.zero_flow_clue},
                           {"delta_px", model.sampling.delta_px}};
    header["normalization"] = json{{"mean", model.norm.mean}, {"stdev", model.norm.stdev}};
    header["layers"] = json::array();
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        header["layers"].push_back(json{{"name", model.param_names[i]}, {"shape", model.params[i]->shape}});
    }

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError(tmp.string() + ": cannot open for writing");
        out << header.dump() << "\n";
        for (const auto& p : model.params) {
            out.write(reinterpret_cast<const char*>(p->data.data()),
                      static_cast<std::streamsize>(p->data.size() * sizeof(double)));
        }
        if (!out) throw DataError(tmp.string() + ": short write");
    }
    std::filesystem::rename(tmp, path);
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open");

    json header;
    try {
        in >> header;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": bad checkpoint header: " + e.what());
    }
    in.get();  // newline separating header and blocks

    FusionModel model;
    try {
        const int schema = header.at("schema_version").get<int>();
        if (schema != kCheckpointSchema) {
            throw DataError(path.string() + ": unsupported checkpoint schema_version " + std::to_string(schema));
        }
        model.config_hash = header.at("config_hash").get<std::string>();
        model.dt = header.at("dt").get<double>();
        const std::string src = header.at("flow_source").get<std::string>();
        if (src == "oracle") {
            model.flow_source = FlowSource::oracle;
        } else if (src == "estimated") {
            model.flow_source = FlowSource::estimated;
        } else {
            throw DataError(path.string() + ": unknown flow_source '" + src + "'");
        }
        const json& jm = header.at("model");
        model.cfg.patch_w = jm.at("patch_w").get<int>();
        model.cfg.patch_h = jm.at("patch_h").get<int>();
        model.cfg.encoder_channels = jm.at("encoder_channels").get<std::vector<int>>();
        model.cfg.feature_dim = jm.at("feature_dim").get<int>();
        model.cfg.fc_dims = jm.at("fc_dims").get<std::vector<int>>();
        model.cfg.flow_levels = jm.at("flow_levels").get<int>();
        model.cfg.zero_flow_clue = jm.at("zero_flow_clue").get<bool>();
        model.sampling.delta_px = jm.at("delta_px").get<double>();
        model.sampling.target_w = model.cfg.patch_w;
        model.sampling.target_h = model.cfg.patch_h;
        model.norm.mean = header.at("normalization").at("mean").get<std::array<double, 4>>();
        model.norm.stdev = header.at("normalization").at("stdev").get<std::array<double, 4>>();

        for (const auto& jl : header.at("layers")) {
            const std::string name = jl.at("name").get<std::string>();
            const std::vector<int> shape = jl.at("shape").get<std::vector<int>>();
            auto t = Tensor::create(shape, true);
            t->name = name;
            in.read(reinterpret_cast<char*>(t->data.data()),
                    static_cast<std::streamsize>(t->data.size() * sizeof(double)));
            if (in.gcount() != static_cast<std::streamsize>(t->data.size() * sizeof(double))) {
                throw DataError(path.string() + ": truncated parameter block for '" + name + "'");
            }
            model.param_names.push_back(name);
            model.params.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": bad checkpoint header: " + e.what());
    }
    if (in.peek() != std::ifstream::traits_type::eof()) {
        throw DataError(path.string() + ": trailing bytes after parameter blocks");
    }
    model.cfg.validate();
    return model;
}

}  // namespace rvk
