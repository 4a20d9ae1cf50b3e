#include "rvk/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace rvk {

CropSpec expand_crop(const BoundingBox& box, double delta, int image_w, int image_h,
                     int target_w, int target_h) {
    if (!box.valid()) throw std::invalid_argument("expand_crop: degenerate box");
    if (target_w <= 0 || target_h <= 0) throw std::invalid_argument("expand_crop: bad target size");

    const double dw = box.width() / 2.0 + delta;
    const double dh = box.height() / 2.0 + delta;
    BoundingBox crop{box.l - dw, box.t - dh, box.r + dw, box.b + dh};
    crop.l = std::max(crop.l, 0.0);
    crop.t = std::max(crop.t, 0.0);
    crop.r = std::min(crop.r, static_cast<double>(image_w));
    crop.b = std::min(crop.b, static_cast<double>(image_h));

    CropSpec spec;
    spec.crop = crop;
    spec.target_w = target_w;
    spec.target_h = target_h;
    spec.scale_x = crop.width() / target_w;
    spec.scale_y = crop.height() / target_h;
    return spec;
}

ImageF64 resample_patch(const ImageU8& image, const CropSpec& spec) {
    ImageF64 patch(spec.target_w, spec.target_h);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < spec.target_h; ++i) {
        const double sy = spec.crop.t + (i + 0.5) * spec.scale_y - 0.5;
        for (int j = 0; j < spec.target_w; ++j) {
            const double sx = spec.crop.l + (j + 0.5) * spec.scale_x - 0.5;
            patch.at(j, i) = image.sample(sx, sy);
        }
    }
    return patch;
}

FlowField resample_flow_to_patch(const FlowField& flow, const CropSpec& spec) {
    FlowField out(spec.target_w, spec.target_h);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < spec.target_h; ++i) {
        const double sy = spec.crop.t + (i + 0.5) * spec.scale_y - 0.5;
        for (int j = 0; j < spec.target_w; ++j) {
            const double sx = spec.crop.l + (j + 0.5) * spec.scale_x - 0.5;
            out.u(j, i) = flow.sample(sx, sy, 0);
            out.v(j, i) = flow.sample(sx, sy, 1);
        }
    }
    return out;
}

FlowField rescale_flow(const FlowField& patch_flow, const CropSpec& spec) {
    if (patch_flow.w != spec.target_w || patch_flow.h != spec.target_h) {
        throw std::invalid_argument("rescale_flow: field size does not match the crop's target size");
    }
    FlowField out = patch_flow;
    for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
            out.u(x, y) *= spec.scale_x;
            out.v(x, y) *= spec.scale_y;
        }
    }
    return out;
}

PatchPair make_patch_pair(const ImageU8& frame_prev, const ImageU8& frame_curr, const BoundingBox& box,
                          double delta, int target_w, int target_h) {
    if (frame_prev.w != frame_curr.w || frame_prev.h != frame_curr.h) {
        throw std::invalid_argument("make_patch_pair: frames differ in size");
    }
    PatchPair pair;
    pair.spec = expand_crop(box, delta, frame_curr.w, frame_curr.h, target_w, target_h);
    pair.template_patch = resample_patch(frame_prev, pair.spec);
    pair.current_patch = resample_patch(frame_curr, pair.spec);
    return pair;
}

Vec2 to_patch_coords(const CropSpec& spec, double x, double y) {
    return {(x + 0.5 - spec.crop.l) / spec.scale_x - 0.5, (y + 0.5 - spec.crop.t) / spec.scale_y - 0.5};
}

BoundingBox box_to_patch(const CropSpec& spec, const BoundingBox& box) {
    const Vec2 tl = to_patch_coords(spec, box.l, box.t);
    const Vec2 br = to_patch_coords(spec, box.r, box.b);
    return {tl.x, tl.y, br.x, br.y};
}

}  // namespace rvk
