#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rvk/model.hpp"
#include "rvk/sampling.hpp"
#include "rvk/simulator.hpp"

namespace rvk {

// One declarative document drives every command; unknown keys are rejected
// so typos cannot silently fall back to defaults.
struct RunConfig {
    SceneConfig scene;
    SamplingConfig sampling;
    FlowSource flow_source = FlowSource::oracle;
    int flow_levels = 4;
    ModelConfig model;
    TrainSchedule schedule;
    std::uint64_t seed = 1;

    void validate() const;
};

RunConfig default_config();

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

/// Canonical JSON dump of the effective config.
std::string dump_config(const RunConfig& config);

/// Hash of the canonical dump; embedded in checkpoints and reports.
std::string config_hash(const RunConfig& config);

}  // namespace rvk
