#pragma once

#include "rvk/geometry.hpp"
#include "rvk/image.hpp"

namespace rvk {

// Vehicle-centric crop: the box grown by half its size per side plus a fixed
// margin, clamped to the image, then resampled to a fixed patch.
struct CropSpec {
    BoundingBox crop;  // original-image pixel coordinates, clamped
    int target_w = 448;
    int target_h = 384;
    double scale_x = 1.0;  // (crop.r - crop.l) / target_w
    double scale_y = 1.0;
};

struct SamplingConfig {
    double delta_px = 8.0;  // fixed expansion margin
    int target_w = 448;
    int target_h = 384;
};

CropSpec expand_crop(const BoundingBox& box, double delta, int image_w, int image_h,
                     int target_w = 448, int target_h = 384);

/// Bilinear resample of the crop to target size. Patch pixel (i,j) samples
/// source coordinate (crop.l + (j+0.5)*scale_x - 0.5, crop.t + (i+0.5)*scale_y - 0.5),
/// clamped to the image.
ImageF64 resample_patch(const ImageU8& image, const CropSpec& spec);

/// Same grid/convention for a two-channel field; values are sampled, not rescaled.
FlowField resample_flow_to_patch(const FlowField& flow, const CropSpec& spec);

/// Converts patch-space flow values to original-image pixel units (u *= scale_x,
/// v *= scale_y). The grid stays in patch space.
FlowField rescale_flow(const FlowField& patch_flow, const CropSpec& spec);

struct PatchPair {
    ImageF64 template_patch;  // from the previous frame, same crop
    ImageF64 current_patch;
    CropSpec spec;
};

PatchPair make_patch_pair(const ImageU8& frame_prev, const ImageU8& frame_curr, const BoundingBox& box,
                          double delta, int target_w = 448, int target_h = 384);

/// Original-image continuous coordinate -> patch coordinate (pixel centers at integers).
Vec2 to_patch_coords(const CropSpec& spec, double x, double y);
BoundingBox box_to_patch(const CropSpec& spec, const BoundingBox& box);

}  // namespace rvk
