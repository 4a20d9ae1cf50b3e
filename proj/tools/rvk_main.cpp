// Command-line surface: dataset generation, training, evaluation, inference
// and the sampling ablation, driven by one JSON config. Exit codes: 0 ok,
// 2 config error, 3 data error, 4 numeric failure.

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvk/config.hpp"
#include "rvk/evalharness.hpp"
#include "rvk/flow.hpp"
#include "rvk/image.hpp"
#include "rvk/model.hpp"
#include "rvk/simulator.hpp"
#include "rvk/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void apply_thread_cap() {
    if (const char* env = std::getenv("RVK_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) omp_set_num_threads(n);
    }
}

rvk::RunConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return rvk::default_config();
    return rvk::load_config(config_path);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rvk::DataError(path.string() + ": cannot open for writing");
    out << text;
}

struct SceneRange {
    int from = 0;
    int to = -1;  // exclusive; -1 means "end"

    static SceneRange parse(const std::string& text) {
        if (text.empty()) return {};
        const auto colon = text.find(':');
        if (colon == std::string::npos) throw rvk::ConfigError("--scenes expects FROM:TO, got '" + text + "'");
        SceneRange r;
        try {
            r.from = std::stoi(text.substr(0, colon));
            r.to = std::stoi(text.substr(colon + 1));
        } catch (...) {
            throw rvk::ConfigError("--scenes expects FROM:TO, got '" + text + "'");
        }
        return r;
    }

    std::pair<int, int> resolve(int count) const {
        const int hi = to < 0 ? count : std::min(to, count);
        if (from < 0 || from >= hi) throw rvk::ConfigError("--scenes range is empty for this dataset");
        return {from, hi};
    }
};

// --- gen ---------------------------------------------------------------------

int cmd_gen(const std::string& config_path, const std::string& out_dir, int count, std::uint64_t seed,
            bool have_seed, bool force) {
    rvk::RunConfig cfg = load_or_default(config_path);
    if (have_seed) cfg.seed = seed;
    cfg.validate();

    const fs::path dir(out_dir);
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        if (!force) throw rvk::DataError(dir.string() + ": exists and is not empty (use --force)");
        fs::remove_all(dir);
    }
    fs::create_directories(dir);

    std::vector<rvk::SceneEntry> entries(static_cast<std::size_t>(count));
    std::vector<std::string> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) {
        try {
            const std::uint64_t scene_seed = rvk::mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
            const rvk::ScenePair pair = rvk::generate_scene(cfg.scene, scene_seed);
            const std::string name = "scene_" + std::to_string(k);
            rvk::write_scene_files(dir / name, pair);
            rvk::SceneEntry e;
            e.name = name;
            e.seed = scene_seed;
            e.vehicle_count = static_cast<int>(pair.vehicles.size());
            e.regen_count = pair.regen_count;
            entries[static_cast<std::size_t>(k)] = e;
        } catch (const std::exception& ex) {
            errors[static_cast<std::size_t>(k)] = ex.what();
        }
    }
    for (const auto& err : errors) {
        if (!err.empty()) throw rvk::DataError("gen: " + err);
    }

    rvk::DatasetManifest manifest;
    manifest.intrinsics = cfg.scene.intrinsics;
    manifest.dt = cfg.scene.dt;
    manifest.seed = cfg.seed;
    manifest.config_hash = rvk::config_hash(cfg);
    manifest.scenes = std::move(entries);
    rvk::write_manifest(dir, manifest);

    int regenerated = 0;
    for (const auto& e : manifest.scenes) {
        if (e.regen_count > 0) {
            ++regenerated;
            std::cerr << "gen: " << e.name << " needed " << e.regen_count << " placement restart(s)\n";
        }
    }
    std::cout << "gen: wrote " << count << " scene(s) to " << dir.string() << " (seed " << cfg.seed
              << ", " << regenerated << " with restarts)\n";
    return 0;
}

// --- train -------------------------------------------------------------------

std::vector<rvk::TrainSample> build_samples(const rvk::DatasetReader& reader, const rvk::RunConfig& cfg,
                                            int from, int to) {
    const auto& manifest = reader.manifest();
    std::vector<std::vector<rvk::TrainSample>> per_scene(static_cast<std::size_t>(to - from));
    std::vector<std::string> errors(static_cast<std::size_t>(to - from));
#pragma omp parallel for schedule(dynamic)
    for (int k = from; k < to; ++k) {
        try {
            const rvk::ScenePair scene = reader.load_scene(k);
            auto& bucket = per_scene[static_cast<std::size_t>(k - from)];
            for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
                bucket.push_back(rvk::make_train_sample(scene, static_cast<int>(i), manifest.intrinsics,
                                                        manifest.dt, cfg.sampling, cfg.flow_source,
                                                        cfg.model));
            }
        } catch (const std::exception& ex) {
            errors[static_cast<std::size_t>(k - from)] = ex.what();
        }
    }
    for (const auto& err : errors) {
        if (!err.empty()) throw rvk::DataError("sample preparation: " + err);
    }
    std::vector<rvk::TrainSample> samples;
    for (auto& bucket : per_scene) {
        for (auto& s : bucket) samples.push_back(std::move(s));
    }
    return samples;
}

int cmd_train(const std::string& data_dir, const std::string& config_path, const std::string& out_model,
              int holdout, bool zero_flow_clue) {
    rvk::RunConfig cfg = load_or_default(config_path);
    if (zero_flow_clue) cfg.model.zero_flow_clue = true;
    cfg.validate();

    const rvk::DatasetReader reader(data_dir);
    const int total = reader.scene_count();
    if (holdout < 0 || holdout >= total) throw rvk::ConfigError("train: --holdout must be in [0, scene count)");
    const int train_to = total - holdout;

    std::cerr << "train: preparing samples from " << train_to << " scene(s)\n";
    const std::vector<rvk::TrainSample> samples = build_samples(reader, cfg, 0, train_to);
    if (samples.empty()) throw rvk::DataError("train: dataset has no vehicles");
    std::cerr << "train: " << samples.size() << " sample(s), " << cfg.schedule.epochs << " epoch(s)\n";

    rvk::FusionModel model = rvk::init_model(cfg.model, cfg.seed);
    model.sampling = cfg.sampling;
    model.dt = reader.manifest().dt;
    model.flow_source = cfg.flow_source;
    model.config_hash = rvk::config_hash(cfg);

    std::vector<rvk::EpochStats> curve;
    try {
        rvk::train(model, samples, cfg.schedule, cfg.seed, [&](const rvk::EpochStats& s) {
            curve.push_back(s);
            std::cerr << "epoch " << s.epoch << "  loss " << s.mean_loss << "  lr " << s.lr << "\n";
        });
    } catch (const rvk::NumericError&) {
        // no partial artifacts on numeric failure
        std::error_code ec;
        fs::remove(fs::path(out_model), ec);
        fs::remove(fs::path(out_model + ".loss.csv"), ec);
        throw;
    }

    rvk::save_checkpoint(model, out_model);
    std::string csv = "epoch,mean_loss,lr\n";
    for (const auto& s : curve) {
        csv += std::to_string(s.epoch) + "," + std::to_string(s.mean_loss) + "," + std::to_string(s.lr) + "\n";
    }
    write_text(out_model + ".loss.csv", csv);
    std::cout << "train: wrote " << out_model << " and " << out_model << ".loss.csv\n";
    return 0;
}

// --- eval --------------------------------------------------------------------

int cmd_eval(const std::string& data_dir, const std::string& model_path, const std::string& report_prefix,
             const std::string& scenes) {
    const rvk::FusionModel model = rvk::load_checkpoint(model_path);
    const rvk::DatasetReader reader(data_dir);
    const auto& manifest = reader.manifest();

    if (std::abs(manifest.dt - model.dt) > 1e-12) {
        throw rvk::DataError("eval: dataset dt " + std::to_string(manifest.dt) + " != checkpoint dt " +
                             std::to_string(model.dt) + " (dataset schema " +
                             std::to_string(manifest.schema_version) + ", checkpoint config " +
                             model.config_hash + ")");
    }

    const auto [from, to] = SceneRange::parse(scenes).resolve(reader.scene_count());
    std::vector<rvk::VehicleOutcome> outcomes;
    std::vector<double> pred_d, gt_d;
    int failures = 0;

    for (int k = from; k < to; ++k) {
        const rvk::ScenePair scene = reader.load_scene(k);
        std::vector<rvk::BoundingBox> boxes;
        for (const auto& v : scene.vehicles) boxes.push_back(v.box_curr);
        const auto estimates = rvk::infer(model, scene.frame_prev, scene.frame_curr, boxes,
                                          manifest.intrinsics, manifest.dt, model.flow_source, &scene.flow);
        for (std::size_t i = 0; i < estimates.size(); ++i) {
            const auto& est = estimates[i];
            if (!est.ok) {
                std::cerr << "eval: scene " << k << " vehicle " << i << ": " << est.error << "\n";
                ++failures;
                continue;
            }
            const auto& truth = scene.vehicles[i].truth_curr;
            rvk::VehicleOutcome o;
            o.gt_distance = truth.distance;
            o.gt_velocity = truth.velocity;
            o.pred_velocity = est.velocity;
            o.pred_distance = est.distance;
            o.gt_x = truth.closest_point.x;
            o.pred_x = est.position_x;
            outcomes.push_back(o);
            pred_d.push_back(est.distance);
            gt_d.push_back(truth.distance);
        }
    }
    if (outcomes.empty()) throw rvk::DataError("eval: no vehicles evaluated");

    rvk::MetricReport report;
    report.config_hash = model.config_hash;
    report.vehicle_count = static_cast<int>(outcomes.size());
    report.velocity = rvk::velocity_mse_report(outcomes);
    report.position = rvk::position_report(outcomes);
    report.depth = rvk::depth_metrics(pred_d, gt_d);

    for (const auto& w : report.velocity.warnings) std::cerr << "eval: warning: " << w << "\n";
    write_text(report_prefix + ".json", rvk::metric_report_json(report));
    write_text(report_prefix + ".csv", rvk::metric_report_csv(report));
    std::cout << "eval: " << report.vehicle_count << " vehicle(s)  velocity MSE avg "
              << report.velocity.average_2d << "  AbsRel " << report.depth.abs_rel << "\n";
    std::cout << "eval: wrote " << report_prefix << ".json and " << report_prefix << ".csv\n";
    if (failures > 0) throw rvk::DataError("eval: " + std::to_string(failures) + " vehicle(s) failed");
    return 0;
}

// --- infer -------------------------------------------------------------------

int cmd_infer(const std::string& model_path, const std::string& prev_path, const std::string& curr_path,
              const std::string& boxes_path, const std::string& intrinsics_path, double dt,
              const std::string& out_path, const std::string& dump_flow_dir) {
    const rvk::FusionModel model = rvk::load_checkpoint(model_path);
    const rvk::ImageU8 prev = rvk::read_pgm(prev_path);
    const rvk::ImageU8 curr = rvk::read_pgm(curr_path);

    auto read_json_file = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw rvk::DataError(p + ": cannot open");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw rvk::DataError(p + ": " + e.what());
        }
        return j;
    };

    const json jboxes = read_json_file(boxes_path);
    if (!jboxes.is_array()) throw rvk::DataError(boxes_path + ": expected a JSON array of [l,t,r,b]");
    std::vector<rvk::BoundingBox> boxes;
    for (const auto& jb : jboxes) {
        if (!jb.is_array() || jb.size() != 4) throw rvk::DataError(boxes_path + ": each box must be [l,t,r,b]");
        boxes.push_back({jb.at(0).get<double>(), jb.at(1).get<double>(), jb.at(2).get<double>(),
                         jb.at(3).get<double>()});
    }

    const json ji = read_json_file(intrinsics_path);
    rvk::CameraIntrinsics cam;
    try {
        cam.fx = ji.at("fx").get<double>();
        cam.fy = ji.at("fy").get<double>();
        cam.cx = ji.at("cx").get<double>();
        cam.cy = ji.at("cy").get<double>();
        cam.width = ji.at("width").get<int>();
        cam.height = ji.at("height").get<int>();
    } catch (const json::exception& e) {
        throw rvk::DataError(intrinsics_path + ": " + e.what());
    }
    cam.validate();

    if (model.flow_source == rvk::FlowSource::oracle) {
        std::cerr << "infer: checkpoint was trained on oracle flow; using the block-matching estimator\n";
    }
    const auto estimates =
        rvk::infer(model, prev, curr, boxes, cam, dt, rvk::FlowSource::estimated, nullptr);

    if (!dump_flow_dir.empty()) {
        fs::create_directories(dump_flow_dir);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (!estimates[i].ok) continue;
            const auto pair = rvk::make_patch_pair(prev, curr, boxes[i], model.sampling.delta_px,
                                                   model.sampling.target_w, model.sampling.target_h);
            const rvk::FlowPyramid pyr =
                rvk::estimate_flow(pair.template_patch, pair.current_patch, model.cfg.flow_levels);
            for (int level = 0; level < pyr.level_count(); ++level) {
                const fs::path path = fs::path(dump_flow_dir) / ("vehicle_" + std::to_string(i) +
                                                                 "_level_" + std::to_string(level) + ".flo");
                rvk::write_flo(pyr.levels[static_cast<std::size_t>(level)], path);
            }
        }
        std::cerr << "infer: dumped flow pyramids to " << dump_flow_dir << "\n";
    }

    json out = json::array();
    for (const auto& est : estimates) {
        json rec;
        rec["box"] = json::array({est.box.l, est.box.t, est.box.r, est.box.b});
        rec["ok"] = est.ok;
        if (!est.ok) {
            rec["error"] = est.error;
        } else {
            rec["distance_m"] = est.distance;
            rec["velocity_mps"] = json::array({est.velocity.x, est.velocity.y, est.velocity.z});
            rec["position"] = json::array({est.position_z, est.position_x});
        }
        rec["patch_ms"] = est.patch_ms;
        out.push_back(rec);
    }
    const std::string text = out.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
        std::cout << "infer: wrote " << out_path << "\n";
    }
    return 0;
}

// --- ablate ------------------------------------------------------------------

// Mean endpoint error against the ground truth inside the box, evaluated on
// the estimate's own grid in original-image pixel units.
double epe_in_box(const rvk::FlowField& est_orig_units, const rvk::FlowField& gt,
                  const rvk::CropSpec& spec, const rvk::BoundingBox& box) {
    double acc = 0.0;
    long n = 0;
    for (int i = 0; i < spec.target_h; ++i) {
        const double sy = spec.crop.t + (i + 0.5) * spec.scale_y - 0.5;
        if (sy < box.t || sy > box.b) continue;
        for (int j = 0; j < spec.target_w; ++j) {
            const double sx = spec.crop.l + (j + 0.5) * spec.scale_x - 0.5;
            if (sx < box.l || sx > box.r) continue;
            const double du = est_orig_units.u(j, i) - gt.sample(sx, sy, 0);
            const double dv = est_orig_units.v(j, i) - gt.sample(sx, sy, 1);
            acc += std::sqrt(du * du + dv * dv);
            ++n;
        }
    }
    return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

int cmd_ablate(const std::string& data_dir, const std::string& config_path, const std::string& report_prefix) {
    rvk::RunConfig cfg = load_or_default(config_path);
    const rvk::DatasetReader reader(data_dir);

    std::vector<rvk::AblationRow> rows;
    for (int k = 0; k < reader.scene_count(); ++k) {
        const rvk::ScenePair scene = reader.load_scene(k);

        // mode (a): the whole frame resampled to the working size, the way
        // the pipeline consumes imagery when no vehicle-centric crop is taken
        rvk::CropSpec full_spec;
        full_spec.crop = {0.0, 0.0, static_cast<double>(scene.frame_curr.w),
                          static_cast<double>(scene.frame_curr.h)};
        full_spec.target_w = cfg.sampling.target_w;
        full_spec.target_h = cfg.sampling.target_h;
        full_spec.scale_x = full_spec.crop.width() / full_spec.target_w;
        full_spec.scale_y = full_spec.crop.height() / full_spec.target_h;
        const rvk::ImageF64 prev_full = rvk::resample_patch(scene.frame_prev, full_spec);
        const rvk::ImageF64 curr_full = rvk::resample_patch(scene.frame_curr, full_spec);
        const rvk::FlowPyramid full = rvk::estimate_flow(prev_full, curr_full, cfg.flow_levels);
        const rvk::FlowField full_rescaled = rvk::rescale_flow(full.levels[0], full_spec);

        for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
            const rvk::BoundingBox& box = scene.vehicles[i].box_curr;
            const auto pair = rvk::make_patch_pair(scene.frame_prev, scene.frame_curr, box,
                                                   cfg.sampling.delta_px, cfg.sampling.target_w,
                                                   cfg.sampling.target_h);
            const rvk::FlowPyramid centric =
                rvk::estimate_flow(pair.template_patch, pair.current_patch, cfg.flow_levels);
            const rvk::FlowField rescaled = rvk::rescale_flow(centric.levels[0], pair.spec);

            rvk::AblationRow row;
            row.scene = k;
            row.vehicle = static_cast<int>(i);
            row.scale_x = pair.spec.scale_x;
            row.scale_y = pair.spec.scale_y;
            row.epe_full = epe_in_box(full_rescaled, scene.flow, full_spec, box);
            row.epe_centric = epe_in_box(rescaled, scene.flow, pair.spec, box);
            rows.push_back(row);
        }
    }

    const rvk::AblationReport report = rvk::summarize_ablation(std::move(rows));
    write_text(report_prefix + ".json", rvk::ablation_report_json(report, rvk::config_hash(cfg)));
    write_text(report_prefix + ".csv", rvk::ablation_report_csv(report));
    std::cout << "ablate: " << report.rows.size() << " vehicle(s)  mean EPE full " << report.mean_epe_full
              << "  vehicle-centric " << report.mean_epe_centric << "  win rate " << report.win_rate << "\n";
    std::cout << "ablate: wrote " << report_prefix << ".json and " << report_prefix << ".csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"monocular inter-vehicle distance and relative velocity estimation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, model_path, report_prefix, scenes;
    std::string prev_path, curr_path, boxes_path, intrinsics_path, out_path, dump_flow_dir;
    int count = 0, holdout = 0;
    std::uint64_t seed = 0;
    double dt = 0.05;
    bool force = false, zero_flow_clue = false;

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->add_option("--config", config_path, "config JSON");
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--count", count, "number of scenes")->required();
    auto* seed_opt = gen->add_option("--seed", seed, "override the config seed");
    gen->add_flag("--force", force, "replace an existing non-empty directory");

    auto* train = app.add_subcommand("train", "train the fusion model");
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--config", config_path, "config JSON");
    train->add_option("--out-model", model_path, "checkpoint output path")->required();
    train->add_option("--holdout", holdout, "scenes kept out of training (from the end)");
    train->add_flag("--zero-flow-clue", zero_flow_clue, "train with the flow clue zeroed");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--model", model_path, "checkpoint path")->required();
    eval->add_option("--report", report_prefix, "report path prefix")->required();
    eval->add_option("--scenes", scenes, "scene subset FROM:TO (half-open)");

    auto* infer = app.add_subcommand("infer", "per-vehicle estimates for a frame pair");
    infer->add_option("--model", model_path, "checkpoint path")->required();
    infer->add_option("--prev", prev_path, "previous frame (PGM)")->required();
    infer->add_option("--curr", curr_path, "current frame (PGM)")->required();
    infer->add_option("--boxes", boxes_path, "JSON array of [l,t,r,b]")->required();
    infer->add_option("--intrinsics", intrinsics_path, "intrinsics JSON")->required();
    infer->add_option("--dt", dt, "frame interval, seconds")->required();
    infer->add_option("--out", out_path, "output path (default stdout)");
    infer->add_option("--dump-flow", dump_flow_dir, "write per-level flow pyramids (.flo) to this directory");

    auto* ablate = app.add_subcommand("ablate", "vehicle-centric vs full-frame flow comparison");
    ablate->add_option("--data", data_dir, "dataset directory")->required();
    ablate->add_option("--config", config_path, "config JSON");
    ablate->add_option("--report", report_prefix, "report path prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_dir, count, seed, seed_opt->count() > 0, force);
        if (train->parsed()) return cmd_train(data_dir, config_path, model_path, holdout, zero_flow_clue);
        if (eval->parsed()) return cmd_eval(data_dir, model_path, report_prefix, scenes);
        if (infer->parsed())
            return cmd_infer(model_path, prev_path, curr_path, boxes_path, intrinsics_path, dt, out_path,
                             dump_flow_dir);
        if (ablate->parsed()) return cmd_ablate(data_dir, config_path, report_prefix);
    } catch (const rvk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rvk::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const rvk::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
