#include "rvk/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "rvk/util.hpp"

namespace rvk {

using nlohmann::json;

void RunConfig::validate() const {
    scene.validate();
    if (sampling.delta_px < 0.0) throw ConfigError("sampling: delta_px must be non-negative");
    if (sampling.target_w <= 0 || sampling.target_h <= 0) throw ConfigError("sampling: bad target size");
    if (sampling.target_w != model.patch_w || sampling.target_h != model.patch_h) {
        throw ConfigError("sampling target size must match the model patch size");
    }
    if (flow_levels < 1) throw ConfigError("flow: levels must be >= 1");
    if (flow_levels != model.flow_levels) throw ConfigError("flow levels must match the model flow_levels");
    model.validate();
    if (schedule.epochs < 0) throw ConfigError("schedule: epochs must be non-negative");
    if (schedule.lr < 0.0) throw ConfigError("schedule: lr must be non-negative");
    if (schedule.decay <= 0.0 || schedule.decay > 1.0) throw ConfigError("schedule: decay must be in (0, 1]");
    if (schedule.decay_every < 1) throw ConfigError("schedule: decay_every must be >= 1");
    if (schedule.alpha < 0.0 || schedule.beta < 0.0) throw ConfigError("loss: weights must be non-negative");
}

RunConfig default_config() {
    return RunConfig{};
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_range(const json& j, const char* key, double& lo, double& hi, const std::string& where) {
    if (!j.contains(key)) return;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ConfigError(where + "." + key + ": expected [lo, hi]");
    lo = r.at(0).get<double>();
    hi = r.at(1).get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    RunConfig cfg = default_config();
    check_keys(j, {"schema_version", "scene", "sampling", "flow", "model", "schedule", "loss", "seed"}, origin);
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1) {
        throw ConfigError(origin + ": unsupported schema_version");
    }

    try {
        if (j.contains("scene")) {
            const json& s = j.at("scene");
            check_keys(s,
                       {"width", "height", "fx", "fy", "cx", "cy", "dt", "vehicle_count", "distance_m",
                        "velocity_x_mps", "velocity_y_mps", "velocity_z_mps", "extent_w_m", "extent_h_m",
                        "camera_height_m", "texture_seed", "texture_contrast"},
                       origin + ".scene");
            maybe(s, "width", cfg.scene.intrinsics.width);
            maybe(s, "height", cfg.scene.intrinsics.height);
            maybe(s, "fx", cfg.scene.intrinsics.fx);
            maybe(s, "fy", cfg.scene.intrinsics.fy);
            maybe(s, "cx", cfg.scene.intrinsics.cx);
            maybe(s, "cy", cfg.scene.intrinsics.cy);
            maybe(s, "dt", cfg.scene.dt);
            if (s.contains("vehicle_count")) {
                const json& r = s.at("vehicle_count");
                if (!r.is_array() || r.size() != 2) throw ConfigError(origin + ".scene.vehicle_count: expected [lo, hi]");
                cfg.scene.vehicle_count_min = r.at(0).get<int>();
                cfg.scene.vehicle_count_max = r.at(1).get<int>();
            }
            parse_range(s, "distance_m", cfg.scene.distance_min, cfg.scene.distance_max, origin + ".scene");
            parse_range(s, "velocity_x_mps", cfg.scene.velocity_min.x, cfg.scene.velocity_max.x, origin + ".scene");
            parse_range(s, "velocity_y_mps", cfg.scene.velocity_min.y, cfg.scene.velocity_max.y, origin + ".scene");
            parse_range(s, "velocity_z_mps", cfg.scene.velocity_min.z, cfg.scene.velocity_max.z, origin + ".scene");
            parse_range(s, "extent_w_m", cfg.scene.extent_w_min, cfg.scene.extent_w_max, origin + ".scene");
            parse_range(s, "extent_h_m", cfg.scene.extent_h_min, cfg.scene.extent_h_max, origin + ".scene");
            maybe(s, "camera_height_m", cfg.scene.camera_height_m);
            maybe(s, "texture_seed", cfg.scene.texture_seed);
            maybe(s, "texture_contrast", cfg.scene.texture_contrast);
        }
        if (j.contains("sampling")) {
            const json& s = j.at("sampling");
            check_keys(s, {"delta_px", "target_w", "target_h"}, origin + ".sampling");
            maybe(s, "delta_px", cfg.sampling.delta_px);
            maybe(s, "target_w", cfg.sampling.target_w);
            maybe(s, "target_h", cfg.sampling.target_h);
            cfg.model.patch_w = cfg.sampling.target_w;
            cfg.model.patch_h = cfg.sampling.target_h;
        }
        if (j.contains("flow")) {
            const json& s = j.at("flow");
            check_keys(s, {"source", "levels"}, origin + ".flow");
            if (s.contains("source")) {
                const std::string src = s.at("source").get<std::string>();
                if (src == "oracle") {
                    cfg.flow_source = FlowSource::oracle;
                } else if (src == "estimated") {
                    cfg.flow_source = FlowSource::estimated;
                } else {
                    throw ConfigError(origin + ".flow.source: expected 'oracle' or 'estimated', got '" + src + "'");
                }
            }
            maybe(s, "levels", cfg.flow_levels);
            cfg.model.flow_levels = cfg.flow_levels;
        }
        if (j.contains("model")) {
            const json& s = j.at("model");
            check_keys(s, {"feature_dim", "fc_dims", "encoder_channels", "zero_flow_clue"}, origin + ".model");
            maybe(s, "feature_dim", cfg.model.feature_dim);
            maybe(s, "fc_dims", cfg.model.fc_dims);
            maybe(s, "encoder_channels", cfg.model.encoder_channels);
            maybe(s, "zero_flow_clue", cfg.model.zero_flow_clue);
        }
        if (j.contains("schedule")) {
            const json& s = j.at("schedule");
            check_keys(s, {"epochs", "lr", "decay", "decay_every"}, origin + ".schedule");
            maybe(s, "epochs", cfg.schedule.epochs);
            maybe(s, "lr", cfg.schedule.lr);
            maybe(s, "decay", cfg.schedule.decay);
            maybe(s, "decay_every", cfg.schedule.decay_every);
        }
        if (j.contains("loss")) {
            const json& s = j.at("loss");
            check_keys(s, {"alpha", "beta"}, origin + ".loss");
            maybe(s, "alpha", cfg.schedule.alpha);
            maybe(s, "beta", cfg.schedule.beta);
        }
        maybe(j, "seed", cfg.seed);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path.string());
}

std::string dump_config(const RunConfig& config) {
    json j;
    j["schema_version"] = 1;
    j["scene"] = json{{"width", config.scene.intrinsics.width},
                      {"height", config.scene.intrinsics.height},
                      {"fx", config.scene.intrinsics.fx},
                      {"fy", config.scene.intrinsics.fy},
                      {"cx", config.scene.intrinsics.cx},
                      {"cy", config.scene.intrinsics.cy},
                      {"dt", config.scene.dt},
                      {"vehicle_count", json::array({config.scene.vehicle_count_min, config.scene.vehicle_count_max})},
                      {"distance_m", json::array({config.scene.distance_min, config.scene.distance_max})},
                      {"velocity_x_mps", json::array({config.scene.velocity_min.x, config.scene.velocity_max.x})},
                      {"velocity_y_mps", json::array({config.scene.velocity_min.y, config.scene.velocity_max.y})},
                      {"velocity_z_mps", json::array({config.scene.velocity_min.z, config.scene.velocity_max.z})},
                      {"extent_w_m", json::array({config.scene.extent_w_min, config.scene.extent_w_max})},
                      {"extent_h_m", json::array({config.scene.extent_h_min, config.scene.extent_h_max})},
                      {"camera_height_m", config.scene.camera_height_m},
                      {"texture_seed", config.scene.texture_seed},
                      {"texture_contrast", config.scene.texture_contrast}};
    j["sampling"] = json{{"delta_px", config.sampling.delta_px},
                         {"target_w", config.sampling.target_w},
                         {"target_h", config.sampling.target_h}};
    j["flow"] = json{{"source", config.flow_source == FlowSource::oracle ? "oracle" : "estimated"},
                     {"levels", config.flow_levels}};
    j["model"] = json{{"feature_dim", config.model.feature_dim},
                      {"fc_dims", config.model.fc_dims},
                      {"encoder_channels", config.model.encoder_channels},
                      {"zero_flow_clue", config.model.zero_flow_clue}};
    j["schedule"] = json{{"epochs", config.schedule.epochs},
                         {"lr", config.schedule.lr},
                         {"decay", config.schedule.decay},
                         {"decay_every", config.schedule.decay_every}};
    j["loss"] = json{{"alpha", config.schedule.alpha}, {"beta", config.schedule.beta}};
    j["seed"] = config.seed;
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
    return fnv1a_hex(dump_config(config));
}

}  // namespace rvk
