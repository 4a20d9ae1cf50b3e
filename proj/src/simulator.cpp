#include "rvk/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rvk/util.hpp"

namespace rvk {

using nlohmann::json;

namespace {

constexpr double kMaxBoxOverlap = 0.3;     // intersection over smaller box
constexpr double kFrameMarginPx = 2.0;     // boxes stay this far inside the frame
constexpr int kPlacementAttempts = 40;     // per vehicle
constexpr int kSceneRestarts = 20;

// Value noise: smoothstep-interpolated random lattice, one lattice per octave.
double lattice_value(std::uint64_t seed, int octave, long ix, long iy) {
    std::uint64_t s = seed;
    s = mix_seed(s, 0x9e37u + static_cast<std::uint64_t>(octave));
    s = mix_seed(s, static_cast<std::uint64_t>(ix) + 0x7f4a7c15ull);
    s = mix_seed(s, static_cast<std::uint64_t>(iy) + 0x2545f491ull);
    return static_cast<double>(s >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double octave_noise(std::uint64_t seed, int octave, double x, double y) {
    const double fx = std::floor(x), fy = std::floor(y);
    const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    const double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
    const double v00 = lattice_value(seed, octave, ix, iy);
    const double v10 = lattice_value(seed, octave, ix + 1, iy);
    const double v01 = lattice_value(seed, octave, ix, iy + 1);
    const double v11 = lattice_value(seed, octave, ix + 1, iy + 1);
    const double top = v00 * (1.0 - tx) + v10 * tx;
    const double bot = v01 * (1.0 - tx) + v11 * tx;
    return top * (1.0 - ty) + bot * ty;
}

// Vehicle texture is defined in material coordinates (meters on the plane)
// with fixed cells-per-meter octaves, so apparent frequency after
// vehicle-centric resampling encodes physical size. Octaves whose rendered
// cell size falls below ~2 px fade out to keep the rendering band-limited.
constexpr int kVehicleOctaves = 5;
constexpr double kVehicleBaseFreq = 2.0;  // cells per meter at octave 0

// Band-limited value noise plus a handful of sharp-edged panels. The noise
// octaves live at fixed cells-per-meter; panel rectangles are placed in
// normalized material coordinates so their apparent size scales with the
// vehicle extent. Panel edges are smoothed over ~1.2 rendered pixels, the
// softening a real lens and sensor would apply.
double vehicle_texture(std::uint64_t seed, double s_m, double t_m, double extent_w, double extent_h,
                       double px_per_meter, double contrast) {
    double num = 0.0, den = 0.0;
    double amplitude = 1.0;
    double freq = kVehicleBaseFreq;
    for (int o = 0; o < kVehicleOctaves; ++o, amplitude *= 0.55, freq *= 2.0) {
        const double cell_px = px_per_meter / freq;
        const double w = std::clamp((cell_px - 2.0) / 2.0, 0.0, 1.0);
        if (w <= 0.0) continue;
        num += w * amplitude * (octave_noise(seed, o, s_m * freq, t_m * freq) - 0.5);
        den += w * amplitude;
    }
    double value = den > 0.0 ? 0.5 + contrast * (num / den) : 0.5;

    const double edge_w = 1.2 / px_per_meter;  // anti-aliased edge width, meters
    const double sn = s_m / extent_w, tn = t_m / extent_h;
    std::uint64_t rect_state = mix_seed(seed, 0xec7a);
    const int rects = 4 + static_cast<int>(splitmix64(rect_state) % 3);
    for (int i = 0; i < rects; ++i) {
        auto unit = [&rect_state] { return static_cast<double>(splitmix64(rect_state) >> 11) * 0x1.0p-53; };
        const double cx = 0.15 + 0.7 * unit();
        const double cy = 0.15 + 0.7 * unit();
        const double hw = 0.06 + 0.16 * unit();
        const double hh = 0.05 + 0.12 * unit();
        const double delta = (unit() < 0.5 ? -1.0 : 1.0) * (0.25 + 0.3 * unit()) * contrast;
        auto soft_step = [&](double d_m) {  // 1 inside, 0 outside, smooth over edge_w
            const double t = std::clamp(d_m / edge_w + 0.5, 0.0, 1.0);
            return t * t * (3.0 - 2.0 * t);
        };
        const double inside_x = soft_step((hw - std::abs(sn - cx)) * extent_w);
        const double inside_y = soft_step((hh - std::abs(tn - cy)) * extent_h);
        value += delta * inside_x * inside_y;
    }
    return std::clamp(value, 0.02, 0.98);
}

// Static image-space background.
double background_texture(std::uint64_t seed, double x_px, double y_px) {
    double num = 0.0, den = 0.0;
    double amplitude = 1.0;
    double cell = 48.0;
    for (int o = 0; o < 3; ++o, amplitude *= 0.6, cell *= 0.5) {
        num += amplitude * (octave_noise(seed, o, x_px / cell, y_px / cell) - 0.5);
        den += amplitude;
    }
    return 0.5 + 0.8 * (num / den) * 0.5;
}

std::uint8_t quantize(double v) {
    const double s = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::lround(s));
}

Vec3 vehicle_center(const PlacedVehicle& v, double time_offset) {
    return v.center + v.velocity * time_offset;
}

double overlap_over_smaller(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.r, b.r) - std::max(a.l, b.l);
    const double ih = std::min(a.b, b.b) - std::max(a.t, b.t);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double smaller = std::min(a.width() * a.height(), b.width() * b.height());
    return inter / smaller;
}

bool box_inside_frame(const BoundingBox& box, const CameraIntrinsics& cam) {
    return box.l >= kFrameMarginPx && box.t >= kFrameMarginPx && box.r <= cam.width - 1 - kFrameMarginPx &&
           box.b <= cam.height - 1 - kFrameMarginPx;
}

VehicleTruth truth_at(const CameraIntrinsics& cam, const PlacedVehicle& v, double time_offset) {
    VehicleTruth t;
    t.closest_point = vehicle_center(v, time_offset);
    t.distance = t.closest_point.z;
    t.velocity = v.velocity;
    t.closest_pixel = project(cam, t.closest_point);
    t.extent_w = v.extent_w;
    t.extent_h = v.extent_h;
    return t;
}

}  // namespace

void SceneConfig::validate() const {
    intrinsics.validate();
    if (dt <= 0.0) throw ConfigError("scene: dt must be positive");
    if (vehicle_count_min < 0 || vehicle_count_max < vehicle_count_min) {
        throw ConfigError("scene: bad vehicle count range");
    }
    if (distance_min <= 0.0 || distance_max < distance_min) throw ConfigError("scene: bad distance range");
    if (extent_w_min <= 0.0 || extent_w_max < extent_w_min || extent_h_min <= 0.0 ||
        extent_h_max < extent_h_min) {
        throw ConfigError("scene: bad extent range");
    }
    if (velocity_max.x < velocity_min.x || velocity_max.y < velocity_min.y || velocity_max.z < velocity_min.z) {
        throw ConfigError("scene: bad velocity range");
    }
    if (texture_contrast <= 0.0 || texture_contrast > 1.0) {
        throw ConfigError("scene: texture_contrast must be in (0, 1]");
    }
}

BoundingBox project_vehicle_box(const CameraIntrinsics& cam, const PlacedVehicle& v, double time_offset) {
    const Vec3 c = vehicle_center(v, time_offset);
    const Vec2 tl = project(cam, {c.x - v.extent_w / 2.0, c.y - v.extent_h / 2.0, c.z});
    const Vec2 br = project(cam, {c.x + v.extent_w / 2.0, c.y + v.extent_h / 2.0, c.z});
    return {tl.x, tl.y, br.x, br.y};
}

SceneLayout generate_layout(const SceneConfig& config, std::uint64_t seed) {
    config.validate();
    const CameraIntrinsics& cam = config.intrinsics;

    for (int restart = 0; restart <= kSceneRestarts; ++restart) {
        Rng rng(mix_seed(seed, 0xabcdull + static_cast<std::uint64_t>(restart)));
        SceneLayout layout;
        layout.config = config;
        layout.background_seed = mix_seed(config.texture_seed, seed);
        layout.regen_count = restart;

        const int count = rng.uniform_int(config.vehicle_count_min, config.vehicle_count_max);
        std::vector<BoundingBox> placed_boxes;
        bool ok = true;
        for (int i = 0; i < count && ok; ++i) {
            bool found = false;
            for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
                PlacedVehicle v;
                v.extent_w = rng.uniform(config.extent_w_min, config.extent_w_max);
                v.extent_h = rng.uniform(config.extent_h_min, config.extent_h_max);
                v.velocity = {rng.uniform(config.velocity_min.x, config.velocity_max.x),
                              rng.uniform(config.velocity_min.y, config.velocity_max.y),
                              rng.uniform(config.velocity_min.z, config.velocity_max.z)};
                const double d = rng.uniform(config.distance_min, config.distance_max);

                // lateral range keeping the current box inside the frame
                const double half_w_px = cam.fx * v.extent_w / (2.0 * d);
                const double x_lo = (kFrameMarginPx + half_w_px - cam.cx) * d / cam.fx;
                const double x_hi = (cam.width - 1 - kFrameMarginPx - half_w_px - cam.cx) * d / cam.fx;
                if (x_lo >= x_hi) continue;
                const double yc = config.camera_height_m - v.extent_h / 2.0 + rng.uniform(-0.15, 0.15);
                v.center = {rng.uniform(x_lo, x_hi), yc, d};
                v.texture_seed = mix_seed(config.texture_seed, rng.next_u64());

                const BoundingBox box_curr = project_vehicle_box(cam, v, 0.0);
                if (vehicle_center(v, -config.dt).z <= 0.5) continue;
                const BoundingBox box_prev = project_vehicle_box(cam, v, -config.dt);
                if (!box_inside_frame(box_curr, cam) || !box_inside_frame(box_prev, cam)) continue;

                bool overlaps = false;
                for (const auto& other : placed_boxes) {
                    if (overlap_over_smaller(box_curr, other) > kMaxBoxOverlap) {
                        overlaps = true;
                        break;
                    }
                }
                if (overlaps) continue;

                placed_boxes.push_back(box_curr);
                layout.vehicles.push_back(v);
                found = true;
                break;
            }
            if (!found) ok = false;
        }
        if (ok) return layout;
    }
    throw DataError("generate_layout: placement infeasible for this config after " +
                    std::to_string(kSceneRestarts) + " restarts (seed " + std::to_string(seed) + ")");
}

ImageU8 render_frame(const SceneLayout& layout, TimeIndex when) {
    const CameraIntrinsics& cam = layout.config.intrinsics;
    const double t_off = (when == TimeIndex::curr) ? 0.0 : -layout.config.dt;

    ImageF64 canvas(cam.width, cam.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            canvas.at(x, y) = background_texture(layout.background_seed, x, y);
        }
    }

    // painter's algorithm, far to near; 1 px coverage feathering at edges
    std::vector<const PlacedVehicle*> order;
    for (const auto& v : layout.vehicles) order.push_back(&v);
    std::stable_sort(order.begin(), order.end(),
                     [t_off](const PlacedVehicle* a, const PlacedVehicle* b) {
                         return vehicle_center(*a, t_off).z > vehicle_center(*b, t_off).z;
                     });

    for (const PlacedVehicle* vp : order) {
        const PlacedVehicle& v = *vp;
        const Vec3 c = vehicle_center(v, t_off);
        const BoundingBox box = project_vehicle_box(cam, v, t_off);
        const double ppm = cam.fy / c.z;  // rendered pixels per meter on the plane
        const int x0 = std::max(0, static_cast<int>(std::floor(box.l - 1.0)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(box.r + 1.0)));
        const int y0 = std::max(0, static_cast<int>(std::floor(box.t - 1.0)));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(box.b + 1.0)));
#pragma omp parallel for schedule(static)
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double cov_x = std::clamp(std::min(x + 0.5, box.r) - std::max(x - 0.5, box.l), 0.0, 1.0);
                const double cov_y = std::clamp(std::min(y + 0.5, box.b) - std::max(y - 0.5, box.t), 0.0, 1.0);
                const double alpha = cov_x * cov_y;
                if (alpha <= 0.0) continue;
                const double x_m = (x - cam.cx) * c.z / cam.fx;
                const double y_m = (y - cam.cy) * c.z / cam.fy;
                const double s = std::clamp(x_m - (c.x - v.extent_w / 2.0), 0.0, v.extent_w);
                const double t = std::clamp(y_m - (c.y - v.extent_h / 2.0), 0.0, v.extent_h);
                const double tex = vehicle_texture(v.texture_seed, s, t, v.extent_w, v.extent_h, ppm,
                                                   layout.config.texture_contrast);
                canvas.at(x, y) = alpha * tex + (1.0 - alpha) * canvas.at(x, y);
            }
        }
    }

    ImageU8 out(cam.width, cam.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) out.at(x, y) = quantize(canvas.at(x, y));
    }
    return out;
}

FlowField ground_truth_flow(const SceneLayout& layout) {
    const CameraIntrinsics& cam = layout.config.intrinsics;
    const double dt = layout.config.dt;

    // nearest-first so the first hit is the visible surface
    std::vector<const PlacedVehicle*> order;
    for (const auto& v : layout.vehicles) order.push_back(&v);
    std::stable_sort(order.begin(), order.end(), [](const PlacedVehicle* a, const PlacedVehicle* b) {
        return a->center.z < b->center.z;
    });

    FlowField flow(cam.width, cam.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            for (const PlacedVehicle* vp : order) {
                const PlacedVehicle& v = *vp;
                const Vec3 c = v.center;
                const double x_m = (x - cam.cx) * c.z / cam.fx;
                const double y_m = (y - cam.cy) * c.z / cam.fy;
                if (std::abs(x_m - c.x) > v.extent_w / 2.0 || std::abs(y_m - c.y) > v.extent_h / 2.0) continue;
                const Vec3 at_prev{x_m - v.velocity.x * dt, y_m - v.velocity.y * dt, c.z - v.velocity.z * dt};
                const Vec2 q_prev = project(cam, at_prev);
                flow.u(x, y) = x - q_prev.x;
                flow.v(x, y) = y - q_prev.y;
                break;
            }
        }
    }
    return flow;
}

ScenePair generate_scene(const SceneConfig& config, std::uint64_t seed) {
    const SceneLayout layout = generate_layout(config, seed);
    ScenePair pair;
    pair.frame_prev = render_frame(layout, TimeIndex::prev);
    pair.frame_curr = render_frame(layout, TimeIndex::curr);
    pair.flow = ground_truth_flow(layout);
    pair.regen_count = layout.regen_count;
    for (const auto& v : layout.vehicles) {
        SceneVehicle rec;
        rec.box_curr = project_vehicle_box(config.intrinsics, v, 0.0);
        rec.box_prev = project_vehicle_box(config.intrinsics, v, -config.dt);
        rec.truth_curr = truth_at(config.intrinsics, v, 0.0);
        rec.truth_prev = truth_at(config.intrinsics, v, -config.dt);
        pair.vehicles.push_back(rec);
    }
    return pair;
}

// --- dataset on disk -------------------------------------------------------

namespace {

json box_to_json(const BoundingBox& b) { return json::array({b.l, b.t, b.r, b.b}); }

BoundingBox box_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json truth_to_json(const VehicleTruth& t) {
    return json{{"distance_m", t.distance},
                {"velocity_mps", vec3_to_json(t.velocity)},
                {"closest_point_m", vec3_to_json(t.closest_point)},
                {"closest_pixel", json::array({t.closest_pixel.x, t.closest_pixel.y})},
                {"extent_w_m", t.extent_w},
                {"extent_h_m", t.extent_h}};
}

VehicleTruth truth_from_json(const json& j) {
    VehicleTruth t;
    t.distance = j.at("distance_m").get<double>();
    t.velocity = vec3_from_json(j.at("velocity_mps"));
    t.closest_point = vec3_from_json(j.at("closest_point_m"));
    t.closest_pixel = {j.at("closest_pixel").at(0).get<double>(), j.at("closest_pixel").at(1).get<double>()};
    t.extent_w = j.at("extent_w_m").get<double>();
    t.extent_h = j.at("extent_h_m").get<double>();
    return t;
}

json intrinsics_to_json(const CameraIntrinsics& cam) {
    return json{{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
                {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
    CameraIntrinsics cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    return cam;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError(tmp.string() + ": cannot open for writing");
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_scene_files(const std::filesystem::path& scene_dir, const ScenePair& pair) {
    std::filesystem::create_directories(scene_dir);
    write_pgm(pair.frame_prev, scene_dir / "prev.pgm");
    write_pgm(pair.frame_curr, scene_dir / "curr.pgm");
    write_flo(pair.flow, scene_dir / "flow.flo");

    json ann;
    ann["schema_version"] = 1;
    ann["vehicles"] = json::array();
    for (const auto& v : pair.vehicles) {
        ann["vehicles"].push_back(json{{"box_curr", box_to_json(v.box_curr)},
                                       {"box_prev", box_to_json(v.box_prev)},
                                       {"truth_curr", truth_to_json(v.truth_curr)},
                                       {"truth_prev", truth_to_json(v.truth_prev)}});
    }
    ann["regen_count"] = pair.regen_count;
    write_text_atomic(scene_dir / "ann.json", ann.dump(2) + "\n");
}

ScenePair read_scene_files(const std::filesystem::path& scene_dir, const DatasetManifest& manifest) {
    ScenePair pair;
    pair.frame_prev = read_pgm(scene_dir / "prev.pgm");
    pair.frame_curr = read_pgm(scene_dir / "curr.pgm");
    pair.flow = read_flo(scene_dir / "flow.flo");

    const CameraIntrinsics& cam = manifest.intrinsics;
    auto check_dims = [&](int w, int h, const char* what) {
        if (w != cam.width || h != cam.height) {
            throw DataError(scene_dir.string() + ": " + what + " is " + std::to_string(w) + "x" +
                            std::to_string(h) + ", manifest says " + std::to_string(cam.width) + "x" +
                            std::to_string(cam.height));
        }
    };
    check_dims(pair.frame_prev.w, pair.frame_prev.h, "prev.pgm");
    check_dims(pair.frame_curr.w, pair.frame_curr.h, "curr.pgm");
    check_dims(pair.flow.w, pair.flow.h, "flow.flo");

    std::ifstream in(scene_dir / "ann.json");
    if (!in) throw DataError((scene_dir / "ann.json").string() + ": cannot open");
    json ann;
    try {
        in >> ann;
    } catch (const json::exception& e) {
        throw DataError((scene_dir / "ann.json").string() + ": " + e.what());
    }
    if (ann.at("schema_version").get<int>() != 1) {
        throw DataError((scene_dir / "ann.json").string() + ": unsupported schema_version");
    }
    for (const auto& jv : ann.at("vehicles")) {
        SceneVehicle rec;
        rec.box_curr = box_from_json(jv.at("box_curr"));
        rec.box_prev = box_from_json(jv.at("box_prev"));
        rec.truth_curr = truth_from_json(jv.at("truth_curr"));
        rec.truth_prev = truth_from_json(jv.at("truth_prev"));
        pair.vehicles.push_back(rec);
    }
    pair.regen_count = ann.value("regen_count", 0);
    return pair;
}

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest) {
    json j;
    j["schema_version"] = manifest.schema_version;
    j["intrinsics"] = intrinsics_to_json(manifest.intrinsics);
    j["dt"] = manifest.dt;
    j["seed"] = manifest.seed;
    j["config_hash"] = manifest.config_hash;
    j["scenes"] = json::array();
    for (const auto& s : manifest.scenes) {
        j["scenes"].push_back(json{{"name", s.name},
                                   {"seed", s.seed},
                                   {"vehicle_count", s.vehicle_count},
                                   {"regen_count", s.regen_count}});
    }
    write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw DataError((dir / "manifest.json").string() + ": cannot open (incomplete dataset?)");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError((dir / "manifest.json").string() + ": " + e.what());
    }
    DatasetManifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != 1) {
            throw DataError((dir / "manifest.json").string() + ": unsupported schema_version " +
                            std::to_string(m.schema_version));
        }
        m.intrinsics = intrinsics_from_json(j.at("intrinsics"));
        m.dt = j.at("dt").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& js : j.at("scenes")) {
            SceneEntry e;
            e.name = js.at("name").get<std::string>();
            e.seed = js.at("seed").get<std::uint64_t>();
            e.vehicle_count = js.at("vehicle_count").get<int>();
            e.regen_count = js.at("regen_count").get<int>();
            m.scenes.push_back(e);
        }
    } catch (const json::exception& e) {
        throw DataError((dir / "manifest.json").string() + ": " + e.what());
    }
    return m;
}

void write_dataset(const std::vector<ScenePair>& pairs, const std::filesystem::path& dir,
                   DatasetManifest manifest) {
    std::filesystem::create_directories(dir);
    manifest.scenes.clear();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::string name = "scene_" + std::to_string(k);
        write_scene_files(dir / name, pairs[k]);
        SceneEntry e;
        e.name = name;
        e.vehicle_count = static_cast<int>(pairs[k].vehicles.size());
        e.regen_count = pairs[k].regen_count;
        manifest.scenes.push_back(e);
    }
    write_manifest(dir, manifest);
}

DatasetReader::DatasetReader(const std::filesystem::path& dir) : dir_(dir), manifest_(read_manifest(dir)) {}

ScenePair DatasetReader::load_scene(int index) const {
    if (index < 0 || index >= scene_count()) {
        throw DataError(dir_.string() + ": scene index " + std::to_string(index) + " out of range");
    }
    return read_scene_files(dir_ / manifest_.scenes[static_cast<std::size_t>(index)].name, manifest_);
}

std::vector<ScenePair> read_dataset(const std::filesystem::path& dir) {
    DatasetReader reader(dir);
    std::vector<ScenePair> out;
    out.reserve(static_cast<std::size_t>(reader.scene_count()));
    for (int k = 0; k < reader.scene_count(); ++k) out.push_back(reader.load_scene(k));
    return out;
}

}  // namespace rvk
