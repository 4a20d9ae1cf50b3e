#pragma once

#include <vector>

#include "rvk/image.hpp"
#include "rvk/sampling.hpp"

namespace rvk {

// Multi-level flow: level k is downsampled by 2^k from patch resolution and
// its values are in level-k pixels.
struct FlowPyramid {
    std::vector<FlowField> levels;
    bool low_confidence = false;  // set by the estimator on texture-free inputs

    int level_count() const { return static_cast<int>(levels.size()); }
};

/// 2x2 average pooling per level; flow values are halved so units stay level-local.
FlowPyramid build_pyramid(const FlowField& level0, int levels);

/// Image variant of the same pooling (values are intensities, not halved).
std::vector<ImageF64> build_pyramid(const ImageF64& level0, int levels);

/// Ground-truth flow resampled into patch space, converted to patch-pixel
/// units (divided by the crop scales), then pooled into a pyramid.
FlowPyramid oracle_flow_pyramid(const FlowField& scene_flow, const CropSpec& spec, int levels);

// Coarse-to-fine block matching: per level from coarsest, integer SAD search
// around the upsampled coarser estimate plus a parabolic sub-pixel fit.
struct FlowEstimatorParams {
    int window_radius = 4;  // 9x9 SAD window
    int search_radius = 4;  // per-level displacement search
};

FlowPyramid estimate_flow(const ImageF64& template_patch, const ImageF64& current_patch, int levels,
                          const FlowEstimatorParams& params = {});

}  // namespace rvk
