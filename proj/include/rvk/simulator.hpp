#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rvk/geometry.hpp"
#include "rvk/image.hpp"

namespace rvk {

// Scene model: fronto-parallel textured vehicle planes in front of a static
// camera; all motion is carried by the vehicles. Two frames dt apart.
struct SceneConfig {
    CameraIntrinsics intrinsics{1000.0, 1000.0, 640.0, 360.0, 1280, 720};
    double dt = 0.05;
    int vehicle_count_min = 1;
    int vehicle_count_max = 4;
    double distance_min = 5.0;
    double distance_max = 90.0;
    Vec3 velocity_min{-3.0, -0.3, -6.0};
    Vec3 velocity_max{3.0, 0.3, 6.0};
    double extent_w_min = 1.6, extent_w_max = 2.1;
    double extent_h_min = 1.35, extent_h_max = 1.75;
    double camera_height_m = 1.2;  // vehicle bottoms rest near y = +camera_height_m
    std::uint64_t texture_seed = 1234;
    double texture_contrast = 0.95;  // vehicle texture amplitude in (0, 1]

    void validate() const;
};

struct PlacedVehicle {
    Vec3 center;    // closest-point / plane center at the current frame, meters
    Vec3 velocity;  // m/s
    double extent_w = 0.0, extent_h = 0.0;
    std::uint64_t texture_seed = 0;
};

struct SceneLayout {
    SceneConfig config;
    std::uint64_t background_seed = 0;
    std::vector<PlacedVehicle> vehicles;
    int regen_count = 0;  // whole-scene placement restarts
};

enum class TimeIndex { prev, curr };

struct SceneVehicle {
    BoundingBox box_curr, box_prev;
    VehicleTruth truth_curr, truth_prev;
};

struct ScenePair {
    ImageU8 frame_prev, frame_curr;
    FlowField flow;  // anchored at current-frame pixels: value = displacement prev -> curr
    std::vector<SceneVehicle> vehicles;
    int regen_count = 0;
};

/// Deterministic for fixed (config, seed). Throws DataError if placement is
/// infeasible after bounded restarts.
SceneLayout generate_layout(const SceneConfig& config, std::uint64_t seed);

ImageU8 render_frame(const SceneLayout& layout, TimeIndex when);

/// Displacement of the surface visible at each current-frame pixel;
/// background pixels are zero.
FlowField ground_truth_flow(const SceneLayout& layout);

ScenePair generate_scene(const SceneConfig& config, std::uint64_t seed);

BoundingBox project_vehicle_box(const CameraIntrinsics& cam, const PlacedVehicle& v, double time_offset);

// --- dataset on disk -------------------------------------------------------
//
//   manifest.json             intrinsics, dt, scene list, schema version
//   scene_<k>/prev.pgm        binary PGM, 8-bit
//   scene_<k>/curr.pgm
//   scene_<k>/flow.flo        Middlebury format
//   scene_<k>/ann.json        per-vehicle boxes, distances, velocity, extents

struct SceneEntry {
    std::string name;
    std::uint64_t seed = 0;
    int vehicle_count = 0;
    int regen_count = 0;
};

struct DatasetManifest {
    int schema_version = 1;
    CameraIntrinsics intrinsics;
    double dt = 0.05;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<SceneEntry> scenes;
};

void write_scene_files(const std::filesystem::path& scene_dir, const ScenePair& pair);
ScenePair read_scene_files(const std::filesystem::path& scene_dir, const DatasetManifest& manifest);

/// Manifest is written last so its presence marks a complete dataset.
void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& dir);

void write_dataset(const std::vector<ScenePair>& pairs, const std::filesystem::path& dir,
                   DatasetManifest manifest);

class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& dir);

    const DatasetManifest& manifest() const { return manifest_; }
    int scene_count() const { return static_cast<int>(manifest_.scenes.size()); }
    ScenePair load_scene(int index) const;

private:
    std::filesystem::path dir_;
    DatasetManifest manifest_;
};

std::vector<ScenePair> read_dataset(const std::filesystem::path& dir);

}  // namespace rvk
