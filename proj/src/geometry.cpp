#include "rvk/geometry.hpp"

#include <stdexcept>
#include <string>

namespace rvk {

void CameraIntrinsics::validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be positive");
    if (cx <= 0.0 || cx >= width || cy <= 0.0 || cy >= height) {
        throw std::invalid_argument("intrinsics: principal point must lie inside the image");
    }
}

Vec2 project(const CameraIntrinsics& cam, const Vec3& p) {
    if (p.z <= 0.0) throw std::invalid_argument("project: point behind camera, z=" + std::to_string(p.z));
    return {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};
}

Vec3 backproject(const CameraIntrinsics& cam, const Vec2& pixel, double depth) {
    if (depth <= 0.0) throw std::invalid_argument("backproject: depth must be positive, got " + std::to_string(depth));
    return {depth * (pixel.x - cam.cx) / cam.fx, depth * (pixel.y - cam.cy) / cam.fy, depth};
}

double distance_from_extent(double focal, double physical_extent, double pixel_extent) {
    if (focal <= 0.0 || physical_extent <= 0.0) {
        throw std::invalid_argument("distance_from_extent: focal and extent must be positive");
    }
    if (pixel_extent <= 0.0) {
        throw std::invalid_argument("distance_from_extent: degenerate box, pixel extent " +
                                    std::to_string(pixel_extent));
    }
    return focal * physical_extent / pixel_extent;
}

std::array<double, 6> geometric_clue(const CameraIntrinsics& cam, const BoundingBox& box) {
    if (!box.valid()) throw std::invalid_argument("geometric_clue: degenerate box");
    return {cam.fx / box.width(),      cam.fy / box.height(),    (box.l - cam.cx) / cam.fx,
            (box.t - cam.cy) / cam.fy, (box.r - cam.cx) / cam.fx, (box.b - cam.cy) / cam.fy};
}

Vec3 velocity_closed_form(const CameraIntrinsics& cam, double d, double d_prev, const Vec2& pix,
                          const Vec2& pix_prev, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("velocity_closed_form: dt must be positive");
    const Vec3 p = backproject(cam, pix, d);
    const Vec3 p_prev = backproject(cam, pix_prev, d_prev);
    return (p - p_prev) / dt;
}

}  // namespace rvk
