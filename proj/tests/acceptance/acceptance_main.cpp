// Acceptance suite: end-to-end checks of the full pipeline at fixed
// tolerances. Prints one [PASS]/[FAIL] line per criterion and exits non-zero
// if any fail. Heavy steps (dataset generation, the two training runs) go
// through the installed CLI and are cached in the work directory, keyed by
// config hash, so re-runs only repeat what changed.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvk/config.hpp"
#include "rvk/evalharness.hpp"
#include "rvk/flow.hpp"
#include "rvk/gradcheck.hpp"
#include "rvk/model.hpp"
#include "rvk/ops.hpp"
#include "rvk/sampling.hpp"
#include "rvk/simulator.hpp"
#include "rvk/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;
};

std::vector<CriterionResult> g_results;

void report(int id, bool pass, const std::string& detail) {
    g_results.push_back({id, pass, detail});
    std::cerr << (pass ? "[pass] " : "[FAIL] ") << "criterion " << id << ": " << detail << "\n";
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path g_work;
std::string g_cli;

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " 1>&2";
    std::cerr << "  $ rvk " << args << "\n";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream out;
    out.precision(prec);
    out << v;
    return out.str();
}

// --- shared configs ----------------------------------------------------------

// 512x288 frames keep the 2000-scene dataset ~3 GB and generation quick; the
// patch, model and schedule stay at their full defaults.
rvk::RunConfig acceptance_config() {
    rvk::RunConfig cfg;
    cfg.scene.intrinsics = {500.0, 500.0, 256.0, 144.0, 512, 288};
    cfg.scene.vehicle_count_min = cfg.scene.vehicle_count_max = 1;
    cfg.seed = 7;
    return cfg;
}

std::string config_text(const rvk::RunConfig& cfg) { return rvk::dump_config(cfg); }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

bool dataset_ready(const fs::path& dir, const std::string& expected_hash, int expected_count) {
    try {
        const rvk::DatasetManifest m = rvk::read_manifest(dir);
        return m.config_hash == expected_hash && static_cast<int>(m.scenes.size()) == expected_count;
    } catch (...) {
        return false;
    }
}

bool checkpoint_ready(const fs::path& path, const std::string& expected_hash) {
    try {
        return rvk::load_checkpoint(path).config_hash == expected_hash;
    } catch (...) {
        return false;
    }
}

struct EvalSummary {
    rvk::DepthMetrics depth;
    rvk::VelocityReport velocity;
    int vehicles = 0;
};

EvalSummary evaluate_range(const rvk::FusionModel& model, const rvk::DatasetReader& reader, int from,
                           int to) {
    std::vector<rvk::VehicleOutcome> outcomes;
    std::vector<double> pred_d, gt_d;
    for (int k = from; k < to; ++k) {
        const rvk::ScenePair scene = reader.load_scene(k);
        std::vector<rvk::BoundingBox> boxes;
        for (const auto& v : scene.vehicles) boxes.push_back(v.box_curr);
        const auto estimates =
            rvk::infer(model, scene.frame_prev, scene.frame_curr, boxes, reader.manifest().intrinsics,
                       reader.manifest().dt, model.flow_source, &scene.flow);
        for (std::size_t i = 0; i < estimates.size(); ++i) {
            if (!estimates[i].ok) throw rvk::DataError("evaluation failed: " + estimates[i].error);
            const auto& truth = scene.vehicles[i].truth_curr;
            rvk::VehicleOutcome o;
            o.gt_distance = truth.distance;
            o.gt_velocity = truth.velocity;
            o.pred_distance = estimates[i].distance;
            o.pred_velocity = estimates[i].velocity;
            o.gt_x = truth.closest_point.x;
            o.pred_x = estimates[i].position_x;
            outcomes.push_back(o);
            pred_d.push_back(estimates[i].distance);
            gt_d.push_back(truth.distance);
        }
    }
    EvalSummary s;
    s.depth = rvk::depth_metrics(pred_d, gt_d);
    s.velocity = rvk::velocity_mse_report(outcomes);
    s.vehicles = static_cast<int>(outcomes.size());
    return s;
}

// --- criterion 1: gradient integrity ------------------------------------------

void criterion_gradients() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_layer = "none";
    auto track = [&](const char* name, const rvk::GradCheckResult& r) {
        if (r.max_rel_error > worst) {
            worst = r.max_rel_error;
            worst_layer = name;
        }
        if (r.non_finite > 0) {
            worst = 1.0;
            worst_layer = std::string(name) + " (non-finite)";
        }
    };

    rvk::Rng rng(1009);
    auto randt = [&rng](std::vector<int> shape, double lo, double hi, bool grad) {
        auto t = rvk::Tensor::create(std::move(shape), grad);
        for (auto& v : t->data) v = rng.uniform(lo, hi);
        return t;
    };

    {  // conv2d: input, weight, bias (strided and padded)
        auto input = randt({3, 8, 7}, -2.0, 2.0, true);
        auto weight = randt({4, 3, 3, 3}, -0.7, 0.7, true);
        auto bias = randt({4}, -0.3, 0.3, true);
        auto target = randt({4 * 4 * 4}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            auto y = rvk::conv2d(in[0], in[1], in[2], 2, 1);
            return rvk::mse_loss(rvk::reshape(y, {4 * 4 * 4}), target);
        };
        track("conv2d", rvk::grad_check(b, {input, weight, bias}, 1e-5));
    }
    {  // relu away from kinks
        auto x = randt({40}, -2.0, 2.0, true);
        for (auto& v : x->data) {
            if (std::abs(v) < 5e-3) v = 0.1;
        }
        auto target = randt({40}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            return rvk::mse_loss(rvk::relu(in[0]), target);
        };
        track("relu", rvk::grad_check(b, {x}, 1e-5));
    }
    {  // fully_connected
        auto x = randt({12}, -2.0, 2.0, true);
        auto w = randt({5, 12}, -1.0, 1.0, true);
        auto bias = randt({5}, -1.0, 1.0, true);
        auto target = randt({5}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            return rvk::mse_loss(rvk::fully_connected(in[0], in[1], in[2]), target);
        };
        track("fully_connected", rvk::grad_check(b, {x, w, bias}, 1e-5));
    }
    {  // concat + slice
        auto a = randt({5}, -2.0, 2.0, true);
        auto c = randt({7}, -2.0, 2.0, true);
        auto target = randt({8}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            return rvk::mse_loss(rvk::slice(rvk::concat({in[0], in[1]}), 2, 10), target);
        };
        track("concat/slice", rvk::grad_check(b, {a, c}, 1e-5));
    }
    {  // mse + scale + add (the loss combination)
        auto p = randt({4}, -2.0, 2.0, true);
        auto target = randt({4}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            return rvk::compute_loss(in[0], target, 0.1, 1.0);
        };
        track("compute_loss", rvk::grad_check(b, {p}, 1e-5));
    }
    {  // roi_align
        auto map = randt({2, 9, 11}, -2.0, 2.0, true);
        auto target = randt({2 * 49}, -2.0, 2.0, false);
        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>& in) {
            auto roi = rvk::roi_align(in[0], {1.4, 0.8, 9.9, 8.1}, 7);
            return rvk::mse_loss(rvk::reshape(roi, {2 * 49}), target);
        };
        track("roi_align", rvk::grad_check(b, {map}, 1e-5));
    }

    // Full end-to-end graph at production size; a seeded random subset of
    // elements per parameter tensor (exhaustive perturbation of ~1.1M
    // parameters is not computable in the budget). The wiring mirrors the
    // model forward pass with each ReLU input folded into an activation-sign
    // signature, so perturbations that cross a kink are detected exactly and
    // skipped rather than scored against a non-differentiable point.
    const int kSampledPerTensor = 20;
    std::size_t e2e_skipped = 0, e2e_checked = 0;
    {
        rvk::ModelConfig cfg;
        rvk::FusionModel model = rvk::init_model(cfg, 424242);
        auto patch = randt({1, cfg.patch_h, cfg.patch_w}, 0.0, 1.0, false);
        std::vector<double> m_data(static_cast<std::size_t>(cfg.flow_clue_dim()));
        for (auto& v : m_data) v = rng.uniform(-2.0, 2.0);
        auto target = rvk::Tensor::from_data({4}, {0.5, -0.2, 0.1, 0.3});

        std::uint64_t sign_hash = 0;
        auto tracked_relu = [&sign_hash](const rvk::TensorPtr& x) {
            for (double v : x->data) sign_hash = sign_hash * 1099511628211ull + (v > 0.0 ? 1u : 0u);
            return rvk::relu(x);
        };

        rvk::GraphBuilder b = [&](const std::vector<rvk::TensorPtr>&) {
            sign_hash = 1469598103934665603ull;
            auto x = patch;
            for (std::size_t s = 0; s < cfg.encoder_channels.size(); ++s) {
                const std::string base = "enc" + std::to_string(s);
                x = tracked_relu(rvk::conv2d(x, model.param(base + ".weight"), model.param(base + ".bias"), 2, 1));
            }
            auto roi = rvk::roi_align(x, {7.2, 5.9, 20.4, 18.2}, 7);
            auto agg = tracked_relu(rvk::conv2d(roi, model.param("agg0.weight"), model.param("agg0.bias"), 1, 1));
            agg = rvk::conv2d(agg, model.param("agg1.weight"), model.param("agg1.bias"), 1, 0);
            auto f = rvk::reshape(agg, {cfg.feature_dim});
            auto g = rvk::Tensor::from_data({6}, {9.0, 8.5, -0.2, -0.1, 0.2, 0.15});
            auto m = rvk::Tensor::from_data({cfg.flow_clue_dim()}, m_data);
            auto clue = rvk::concat({g, f, m});
            for (std::size_t i = 0; i < cfg.fc_dims.size(); ++i) {
                const std::string base = "fc" + std::to_string(i);
                clue = tracked_relu(rvk::fully_connected(clue, model.param(base + ".weight"),
                                                         model.param(base + ".bias")));
            }
            const std::string head = "fc" + std::to_string(cfg.fc_dims.size());
            auto out = rvk::fully_connected(clue, model.param(head + ".weight"), model.param(head + ".bias"));
            return rvk::compute_loss(out, target, 0.1, 1.0);
        };
        const auto r = rvk::grad_check(b, model.params, 1e-5, kSampledPerTensor, 31337,
                                       [&sign_hash] { return sign_hash; });
        e2e_skipped = r.skipped_kinks;
        e2e_checked = r.checked;
        track("end-to-end", r);
    }

    const double elapsed = seconds_since(t0);
    const bool pass = worst < 1e-4 && elapsed < 60.0 && e2e_checked >= 200;
    report(1, pass,
           "gradient integrity: max rel error " + fmt(worst, 3) + " (worst: " + worst_layer +
               ", threshold 1e-4), end-to-end " + std::to_string(e2e_checked) + " sampled elements (" +
               std::to_string(e2e_skipped) + " kink crossings skipped), " + fmt(elapsed, 3) +
               " s (< 60 s)");
}

// --- criterion 2: geometry oracle closure --------------------------------------

void criterion_geometry_closure() {
    const auto t0 = Clock::now();
    rvk::SceneConfig config = acceptance_config().scene;
    config.vehicle_count_min = 2;
    config.vehicle_count_max = 4;

    int vehicles = 0;
    double worst_eq1 = 0.0, worst_velocity = 0.0;
    std::uint64_t seed = 20000;
    while (vehicles < 1000) {
        const rvk::SceneLayout layout = rvk::generate_layout(config, seed++);
        for (const auto& v : layout.vehicles) {
            const rvk::BoundingBox box = rvk::project_vehicle_box(config.intrinsics, v, 0.0);
            const double d = v.center.z;
            const double d_h = rvk::distance_from_extent(config.intrinsics.fy, v.extent_h, box.height());
            const double d_w = rvk::distance_from_extent(config.intrinsics.fx, v.extent_w, box.width());
            worst_eq1 = std::max({worst_eq1, std::abs(d_h - d) / d, std::abs(d_w - d) / d});

            const rvk::Vec3 prev_center = v.center - v.velocity * config.dt;
            const rvk::Vec3 vel = rvk::velocity_closed_form(
                config.intrinsics, v.center.z, prev_center.z, rvk::project(config.intrinsics, v.center),
                rvk::project(config.intrinsics, prev_center), config.dt);
            worst_velocity = std::max({worst_velocity, std::abs(vel.x - v.velocity.x),
                                       std::abs(vel.y - v.velocity.y), std::abs(vel.z - v.velocity.z)});
            ++vehicles;
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = worst_eq1 < 1e-9 && worst_velocity < 1e-6 && elapsed < 10.0;
    report(2, pass,
           "geometry closure on " + std::to_string(vehicles) + " vehicles: distance rel error " +
               fmt(worst_eq1, 3) + " (< 1e-9), velocity error " + fmt(worst_velocity, 3) +
               " m/s (< 1e-6), " + fmt(elapsed, 3) + " s (< 10 s)");
}

// --- criterion 3: crop expansion fixture ---------------------------------------

void criterion_crop_fixture() {
    struct Case {
        rvk::BoundingBox box;
        double delta;
        int img_w, img_h;
        rvk::BoundingBox expected;  // after clamping
    };
    // Expected values computed by hand from the expansion rule
    // (dw = w/2 + delta, dh = h/2 + delta) and per-side clamping. Fractional
    // inputs are dyadic so the expectations are exact doubles.
    const std::vector<Case> cases = {
        {{100, 100, 200, 180}, 5, 1280, 720, {45, 55, 255, 225}},
        {{100, 100, 200, 180}, 0, 1280, 720, {50, 60, 250, 220}},
        {{300, 200, 420, 280}, 8, 1280, 720, {232, 152, 488, 328}},
        {{640, 360, 680, 390}, 10, 1280, 720, {610, 335, 710, 415}},
        {{0.5, 0.5, 60.5, 40.5}, 8, 1280, 720, {0, 0, 98.5, 68.5}},           // clamped top-left
        {{1220, 660, 1270, 700}, 8, 1280, 720, {1187, 632, 1280, 720}},       // clamped bottom-right
        {{2, 600, 100, 718}, 8, 1280, 720, {0, 533, 157, 720}},               // clamped left+bottom
        {{1200, 2, 1278, 80}, 8, 1280, 720, {1153, 0, 1280, 127}},            // clamped right+top
        {{0, 0, 100, 80}, 0, 1280, 720, {0, 0, 150, 120}},                    // corner, zero margin
        {{600, 300, 700, 400}, 2.5, 1280, 720, {547.5, 247.5, 752.5, 452.5}},
        {{10.25, 20.75, 30.25, 44.75}, 4, 1280, 720, {0, 4.75, 44.25, 60.75}},  // clamped left
        {{100, 100, 101, 101}, 8, 1280, 720, {91.5, 91.5, 109.5, 109.5}},     // tiny box
        {{5, 5, 500, 280}, 8, 512, 288, {0, 0, 512, 288}},                    // clamped all sides
        {{128, 72, 384, 216}, 8, 512, 288, {0, 0, 512, 288}},                 // clamped all sides
        {{200, 100, 280, 150}, 12, 512, 288, {148, 63, 332, 187}},
        {{0.25, 0.25, 10.25, 10.25}, 0, 512, 288, {0, 0, 15.25, 15.25}},      // clamped top-left
        {{50, 50, 150, 130}, 1.5, 512, 288, {0, 8.5, 201.5, 171.5}},          // clamped left
        {{400, 150, 480, 200}, 8, 512, 288, {352, 117, 512, 233}},            // clamped right
        {{30, 220, 120, 286}, 8, 512, 288, {0, 179, 173, 288}},               // clamped left+bottom
        {{256, 144, 257.5, 145.25}, 3, 512, 288, {252.25, 140.375, 261.25, 148.875}},
    };

    int failures = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Case& c = cases[i];
        const double dw = c.box.width() / 2.0 + c.delta;
        const double dh = c.box.height() / 2.0 + c.delta;
        const rvk::BoundingBox raw{c.box.l - dw, c.box.t - dh, c.box.r + dw, c.box.b + dh};
        const rvk::BoundingBox want{std::max(raw.l, 0.0), std::max(raw.t, 0.0),
                                    std::min(raw.r, static_cast<double>(c.img_w)),
                                    std::min(raw.b, static_cast<double>(c.img_h))};
        // fixture table must agree with this arithmetic exactly
        const rvk::BoundingBox& expected = c.expected;
        const bool table_ok = expected.l == want.l && expected.t == want.t && expected.r == want.r &&
                              expected.b == want.b;

        const rvk::CropSpec spec = rvk::expand_crop(c.box, c.delta, c.img_w, c.img_h);
        const bool crop_ok = spec.crop.l == want.l && spec.crop.t == want.t && spec.crop.r == want.r &&
                             spec.crop.b == want.b;
        const bool scale_ok = spec.scale_x == spec.crop.width() / 448.0 &&
                              spec.scale_y == spec.crop.height() / 384.0;
        if (!(table_ok && crop_ok && scale_ok)) {
            ++failures;
            std::cerr << "  crop case " << i << " mismatch (table_ok=" << table_ok
                      << " crop_ok=" << crop_ok << " scale_ok=" << scale_ok << ")\n";
        }
    }
    report(3, failures == 0,
           "crop expansion fixture: " + std::to_string(cases.size() - failures) + "/" +
               std::to_string(cases.size()) + " hand-computed cases exact");
}

// --- criterion 4: flow unit round trip ------------------------------------------

void criterion_flow_round_trip() {
    const auto t0 = Clock::now();
    const rvk::RunConfig cfg = acceptance_config();
    double err_sum = 0.0;
    long count = 0;
    int scenes = 0;
    for (std::uint64_t seed = 40000; scenes < 100; ++seed, ++scenes) {
        const rvk::ScenePair scene = rvk::generate_scene(cfg.scene, seed);
        for (const auto& vehicle : scene.vehicles) {
            const rvk::CropSpec spec =
                rvk::expand_crop(vehicle.box_curr, cfg.sampling.delta_px, cfg.scene.intrinsics.width,
                                 cfg.scene.intrinsics.height);
            const rvk::FlowPyramid pyr = rvk::oracle_flow_pyramid(scene.flow, spec, cfg.flow_levels);
            const rvk::FlowField recovered = rvk::rescale_flow(pyr.levels[0], spec);

            // back onto the original grid, compared per pixel inside the box
            const rvk::BoundingBox& box = vehicle.box_curr;
            for (int y = static_cast<int>(std::ceil(box.t)); y <= static_cast<int>(std::floor(box.b)); ++y) {
                for (int x = static_cast<int>(std::ceil(box.l)); x <= static_cast<int>(std::floor(box.r));
                     ++x) {
                    const rvk::Vec2 p = rvk::to_patch_coords(spec, x, y);
                    const double du = recovered.sample(p.x, p.y, 0) - scene.flow.u(x, y);
                    const double dv = recovered.sample(p.x, p.y, 1) - scene.flow.v(x, y);
                    err_sum += std::sqrt(du * du + dv * dv);
                    ++count;
                }
            }
        }
    }
    const double mean_err = err_sum / static_cast<double>(count);
    const double elapsed = seconds_since(t0);
    const bool pass = mean_err < 0.1;
    report(4, pass,
           "flow unit round trip over " + std::to_string(scenes) + " scenes (" + std::to_string(count) +
               " px): mean error " + fmt(mean_err, 3) + " px (< 0.1), " + fmt(elapsed, 3) + " s");
}

// --- criteria 5 and 7: training runs --------------------------------------------

struct TrainingArtifacts {
    fs::path dataset;
    fs::path model;
    fs::path model_ablated;
    rvk::RunConfig config;
    std::string hash;
};

TrainingArtifacts ensure_dataset() {
    TrainingArtifacts art;
    art.config = acceptance_config();
    art.hash = rvk::config_hash(art.config);
    art.dataset = g_work / "train_ds";
    const fs::path cfg_path = g_work / "acceptance_config.json";
    write_file(cfg_path, config_text(art.config));

    if (!dataset_ready(art.dataset, art.hash, 2000)) {
        std::cerr << "generating the 2000-scene training dataset (seed 7)\n";
        fs::remove_all(art.dataset);
        if (run_cli("gen --config " + cfg_path.string() + " --out " + art.dataset.string() +
                    " --count 2000 --seed 7") != 0) {
            throw rvk::DataError("acceptance: dataset generation failed");
        }
    } else {
        std::cerr << "training dataset already present\n";
    }
    art.model = g_work / "model.ckpt";
    art.model_ablated = g_work / "model_zero_m.ckpt";
    return art;
}

double ensure_training(const TrainingArtifacts& art, bool ablated) {
    const fs::path& model_path = ablated ? art.model_ablated : art.model;
    rvk::RunConfig cfg = art.config;
    cfg.model.zero_flow_clue = ablated;
    const std::string hash = rvk::config_hash(cfg);
    if (checkpoint_ready(model_path, hash)) {
        std::cerr << "checkpoint " << model_path.filename().string() << " already present\n";
        return 0.0;
    }
    const fs::path cfg_path = g_work / (ablated ? "acceptance_config_zero_m.json" : "acceptance_config.json");
    write_file(cfg_path, config_text(cfg));
    const auto t0 = Clock::now();
    if (run_cli("train --data " + art.dataset.string() + " --config " + cfg_path.string() +
                " --out-model " + model_path.string() + " --holdout 400") != 0) {
        throw rvk::DataError("acceptance: training failed");
    }
    return seconds_since(t0);
}

EvalSummary g_baseline_heldout;  // shared between criteria 5 and 7

void criterion_training(TrainingArtifacts& art) {
    const auto t0 = Clock::now();
    const double train_seconds = ensure_training(art, false);

    const rvk::FusionModel model = rvk::load_checkpoint(art.model);
    const rvk::DatasetReader reader(art.dataset);
    const EvalSummary heldout = evaluate_range(model, reader, 1600, 2000);
    const EvalSummary train_subset = evaluate_range(model, reader, 0, 400);
    g_baseline_heldout = heldout;

    const bool absrel_ok = heldout.depth.abs_rel < 0.05;
    const bool delta_ok = heldout.depth.delta1 == 1.0;
    const bool velocity_ok = heldout.velocity.average_3d < 0.5;
    const bool ordering_ok = train_subset.depth.abs_rel < heldout.depth.abs_rel;
    const double elapsed = seconds_since(t0);

    report(5, absrel_ok && delta_ok && velocity_ok,
           "training convergence on 400 held-out scenes: AbsRel " + fmt(heldout.depth.abs_rel, 4) +
               " (< 0.05), delta<1.25 " + fmt(heldout.depth.delta1, 4) + " (== 1.00), 3D velocity MSE avg " +
               fmt(heldout.velocity.average_3d, 4) + " (< 0.5 m^2/s^2); train-set AbsRel " +
               fmt(train_subset.depth.abs_rel, 4) + (ordering_ok ? " < held-out" : " NOT < held-out") +
               "; train " + fmt(train_seconds / 60.0, 3) + " min on " +
               std::to_string(omp_get_max_threads()) + " threads (30 min desktop target), total " +
               fmt(elapsed / 60.0, 3) + " min");
}

void criterion_flow_necessity(TrainingArtifacts& art) {
    ensure_training(art, true);
    const rvk::FusionModel ablated = rvk::load_checkpoint(art.model_ablated);
    const rvk::DatasetReader reader(art.dataset);
    const EvalSummary heldout = evaluate_range(ablated, reader, 1600, 2000);

    const double velocity_ratio = heldout.velocity.average_3d /
                                  std::max(g_baseline_heldout.velocity.average_3d, 1e-12);
    const double absrel_ratio = heldout.depth.abs_rel / std::max(g_baseline_heldout.depth.abs_rel, 1e-12);
    const bool pass = velocity_ratio >= 3.0 && absrel_ratio < 1.2;
    report(7, pass,
           "flow-clue necessity: zeroing m scales velocity MSE x" + fmt(velocity_ratio, 4) +
               " (>= 3) and AbsRel x" + fmt(absrel_ratio, 4) + " (< 1.2); ablated velocity MSE " +
               fmt(heldout.velocity.average_3d, 4) + ", AbsRel " + fmt(heldout.depth.abs_rel, 4));
}

// --- criterion 6: ablation direction --------------------------------------------

void criterion_ablation_direction() {
    const auto t0 = Clock::now();

    // Sub-pixel suite at the default 1280x720 imaging geometry: true motions
    // of 0.2..1.0 px and boxes 48 px wide, so the whole-frame path works at a
    // ~2.9x downscale while the vehicle-centric crop magnifies 4x.
    rvk::RunConfig cfg;  // default intrinsics, patch size, levels
    cfg.scene.vehicle_count_min = cfg.scene.vehicle_count_max = 1;
    cfg.scene.distance_min = cfg.scene.distance_max = 40.0;  // box 48 px wide at f=1000
    cfg.scene.extent_w_min = cfg.scene.extent_w_max = 1.92;
    cfg.scene.extent_h_min = cfg.scene.extent_h_max = 1.50;

    const fs::path suite_dir = g_work / "subpixel_ds";
    const int kScenes = 40;
    std::vector<rvk::ScenePair> scenes;
    rvk::Rng rng(60606);
    for (int k = 0; k < kScenes; ++k) {
        // lateral motion of 0.2..1.0 px at the image plane: vx = flow * d / (fx * dt)
        const double flow_px = rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double vx = flow_px * 40.0 / (1000.0 * cfg.scene.dt);
        rvk::SceneConfig one = cfg.scene;
        one.velocity_min = one.velocity_max = {vx, 0.0, 0.0};
        scenes.push_back(rvk::generate_scene(one, 60000 + static_cast<std::uint64_t>(k)));
    }
    rvk::DatasetManifest manifest;
    manifest.intrinsics = cfg.scene.intrinsics;
    manifest.dt = cfg.scene.dt;
    manifest.seed = 60000;
    manifest.config_hash = rvk::config_hash(cfg);
    fs::remove_all(suite_dir);
    rvk::write_dataset(scenes, suite_dir, manifest);

    const fs::path cfg_path = g_work / "subpixel_config.json";
    write_file(cfg_path, config_text(cfg));
    const fs::path report_prefix = g_work / "ablation";
    if (run_cli("ablate --data " + suite_dir.string() + " --config " + cfg_path.string() + " --report " +
                report_prefix.string()) != 0) {
        throw rvk::DataError("acceptance: ablate command failed");
    }

    std::ifstream in(report_prefix.string() + ".json");
    json j;
    in >> j;
    const double win_rate = j.at("summary").at("win_rate").get<double>();
    const double mean_full = j.at("summary").at("mean_epe_full").get<double>();
    const double mean_centric = j.at("summary").at("mean_epe_centric").get<double>();
    double min_scale = 1.0;
    for (const auto& row : j.at("rows")) min_scale = std::min(min_scale, row.at("scale_x").get<double>());

    const double elapsed = seconds_since(t0);
    const bool pass = win_rate >= 0.9 && mean_centric <= 0.5 * mean_full && elapsed < 300.0 &&
                      min_scale <= 0.25;
    report(6, pass,
           "ablation direction on " + std::to_string(kScenes) + " sub-pixel scenes (magnification >= " +
               fmt(1.0 / min_scale, 3) + "x): win rate " + fmt(win_rate, 4) + " (>= 0.9), mean EPE " +
               fmt(mean_full, 4) + " -> " + fmt(mean_centric, 4) + " px (>= 50% reduction), " +
               fmt(elapsed, 3) + " s (< 300 s)");
}

// --- criterion 8: metric oracle equivalence --------------------------------------

void criterion_metric_oracle() {
    // 30-vehicle fixture
    rvk::Rng rng(80808);
    std::vector<rvk::VehicleOutcome> outcomes;
    std::vector<double> pred_d, gt_d;
    for (int i = 0; i < 30; ++i) {
        rvk::VehicleOutcome o;
        o.gt_distance = rng.uniform(3.0, 90.0);
        o.gt_velocity = {rng.uniform(-3.0, 3.0), rng.uniform(-0.3, 0.3), rng.uniform(-6.0, 6.0)};
        o.pred_distance = o.gt_distance * rng.uniform(0.85, 1.2);
        o.pred_velocity = {o.gt_velocity.x + rng.uniform(-0.6, 0.6), o.gt_velocity.y + rng.uniform(-0.1, 0.1),
                           o.gt_velocity.z + rng.uniform(-0.9, 0.9)};
        o.gt_x = rng.uniform(-10.0, 10.0);
        o.pred_x = o.gt_x + rng.uniform(-1.0, 1.0);
        outcomes.push_back(o);
        pred_d.push_back(o.pred_distance);
        gt_d.push_back(o.gt_distance);
    }

    const rvk::VelocityReport vr = rvk::velocity_mse_report(outcomes);
    const rvk::PositionReport pr = rvk::position_report(outcomes);
    const rvk::DepthMetrics dm = rvk::depth_metrics(pred_d, gt_d);

    // direct recomputation, organized vehicle-by-vehicle rather than by metric
    double g_sum2d[3] = {0, 0, 0}, g_sum3d[3] = {0, 0, 0};
    int g_n[3] = {0, 0, 0};
    double pos_sum = 0.0;
    double abs_rel = 0, sq_rel = 0, rms = 0, rms_log = 0, d1 = 0, d2 = 0, d3 = 0;
    for (const auto& o : outcomes) {
        int g;
        if (o.gt_distance < 20.0) {
            g = 0;
        } else if (o.gt_distance < 45.0) {
            g = 1;
        } else {
            g = 2;
        }
        const double ex = o.pred_velocity.x - o.gt_velocity.x;
        const double ey = o.pred_velocity.y - o.gt_velocity.y;
        const double ez = o.pred_velocity.z - o.gt_velocity.z;
        g_sum2d[g] += (ez * ez + ex * ex) / 2.0;
        g_sum3d[g] += (ex * ex + ey * ey + ez * ez) / 3.0;
        g_n[g] += 1;
        pos_sum += ((o.pred_distance - o.gt_distance) * (o.pred_distance - o.gt_distance) +
                    (o.pred_x - o.gt_x) * (o.pred_x - o.gt_x)) /
                   2.0;

        const double err = o.pred_distance - o.gt_distance;
        abs_rel += std::abs(err) / o.gt_distance;
        sq_rel += err * err / o.gt_distance;
        rms += err * err;
        const double lg = std::log(o.pred_distance) - std::log(o.gt_distance);
        rms_log += lg * lg;
        const double ratio = std::max(o.pred_distance / o.gt_distance, o.gt_distance / o.pred_distance);
        d1 += ratio < 1.25 ? 1 : 0;
        d2 += ratio < 1.5625 ? 1 : 0;
        d3 += ratio < 1.953125 ? 1 : 0;
    }
    double avg2d = 0.0, avg3d = 0.0;
    int nonempty = 0;
    for (int g = 0; g < 3; ++g) {
        if (g_n[g] == 0) continue;
        avg2d += g_sum2d[g] / g_n[g];
        avg3d += g_sum3d[g] / g_n[g];
        ++nonempty;
    }
    avg2d /= nonempty;
    avg3d /= nonempty;

    double worst = 0.0;
    auto cmp = [&worst](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    for (int g = 0; g < 3; ++g) {
        if (g_n[g] > 0) {
            cmp(vr.group_mse_2d[static_cast<std::size_t>(g)], g_sum2d[g] / g_n[g]);
            cmp(vr.group_mse_3d[static_cast<std::size_t>(g)], g_sum3d[g] / g_n[g]);
        }
        cmp(static_cast<double>(vr.counts[static_cast<std::size_t>(g)]), static_cast<double>(g_n[g]));
    }
    cmp(vr.average_2d, avg2d);
    cmp(vr.average_3d, avg3d);
    cmp(pr.mse, pos_sum / 30.0);
    cmp(dm.abs_rel, abs_rel / 30.0);
    cmp(dm.sq_rel, sq_rel / 30.0);
    cmp(dm.rms, std::sqrt(rms / 30.0));
    cmp(dm.rms_log, std::sqrt(rms_log / 30.0));
    cmp(dm.delta1, d1 / 30.0);
    cmp(dm.delta2, d2 / 30.0);
    cmp(dm.delta3, d3 / 30.0);

    report(8, worst < 1e-12,
           "metric oracle equivalence on a 30-vehicle fixture: max deviation " + fmt(worst, 3) +
               " (< 1e-12)");
}

// --- criterion 9: determinism ----------------------------------------------------

std::map<std::string, std::vector<char>> read_tree(const fs::path& dir) {
    std::map<std::string, std::vector<char>> tree;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        tree[fs::relative(entry.path(), dir).string()] = std::move(bytes);
    }
    return tree;
}

void criterion_determinism() {
    rvk::RunConfig cfg = acceptance_config();
    cfg.schedule.epochs = 4;
    const fs::path cfg_path = g_work / "determinism_config.json";
    write_file(cfg_path, config_text(cfg));

    const fs::path ds_a = g_work / "det_ds_a";
    const fs::path ds_b = g_work / "det_ds_b";
    fs::remove_all(ds_a);
    fs::remove_all(ds_b);
    bool ok = run_cli("gen --config " + cfg_path.string() + " --out " + ds_a.string() +
                      " --count 12 --seed 77") == 0;
    ok = ok && run_cli("gen --config " + cfg_path.string() + " --out " + ds_b.string() +
                       " --count 12 --seed 77") == 0;
    const bool gen_identical = ok && read_tree(ds_a) == read_tree(ds_b);

    const fs::path model_a = g_work / "det_model_a.ckpt";
    const fs::path model_b = g_work / "det_model_b.ckpt";
    ok = ok && run_cli("train --data " + ds_a.string() + " --config " + cfg_path.string() +
                       " --out-model " + model_a.string() + " --holdout 2") == 0;
    ok = ok && run_cli("train --data " + ds_a.string() + " --config " + cfg_path.string() +
                       " --out-model " + model_b.string() + " --holdout 2") == 0;
    auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    const bool train_identical =
        ok && !read_bytes(model_a).empty() && read_bytes(model_a) == read_bytes(model_b) &&
        read_bytes(fs::path(model_a.string() + ".loss.csv")) ==
            read_bytes(fs::path(model_b.string() + ".loss.csv"));

    report(9, gen_identical && train_identical,
           std::string("determinism: gen ") + (gen_identical ? "byte-identical" : "DIFFERS") +
               ", train checkpoint+curve " + (train_identical ? "byte-identical" : "DIFFERS") +
               " across two runs with fixed seeds");
}

}  // namespace

int main(int argc, char** argv) {
    std::string only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--work" && i + 1 < argc) {
            g_work = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else {
            std::cerr << "usage: rvk_acceptance --work DIR [--only N[,N...]]\n";
            return 2;
        }
    }
    if (g_work.empty()) g_work = fs::temp_directory_path() / "rvk_acceptance";
    fs::create_directories(g_work);
    g_cli = RVK_CLI_PATH;

    auto enabled = [&only](int id) {
        if (only.empty()) return true;
        std::stringstream ss(only);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (std::stoi(tok) == id) return true;
        }
        return false;
    };

    const auto t0 = Clock::now();
    try {
        if (enabled(1)) criterion_gradients();
        if (enabled(2)) criterion_geometry_closure();
        if (enabled(3)) criterion_crop_fixture();
        if (enabled(4)) criterion_flow_round_trip();
        if (enabled(8)) criterion_metric_oracle();
        if (enabled(9)) criterion_determinism();
        if (enabled(6)) criterion_ablation_direction();
        if (enabled(5) || enabled(7)) {
            TrainingArtifacts art = ensure_dataset();
            if (enabled(5)) criterion_training(art);
            if (enabled(7)) {
                if (!enabled(5)) {
                    // criterion 7 compares against the baseline run
                    ensure_training(art, false);
                    const rvk::FusionModel model = rvk::load_checkpoint(art.model);
                    const rvk::DatasetReader reader(art.dataset);
                    g_baseline_heldout = evaluate_range(model, reader, 1600, 2000);
                }
                criterion_flow_necessity(art);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << "\n";
        std::cout << "[FAIL] acceptance aborted: " << e.what() << "\n";
        return 1;
    }

    std::sort(g_results.begin(), g_results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    bool all_pass = true;
    for (const auto& r : g_results) {
        std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "acceptance: all criteria passed" : "acceptance: FAILURES above") << " ("
              << fmt(seconds_since(t0) / 60.0, 3) << " min total)\n";
    return all_pass ? 0 : 1;
}
