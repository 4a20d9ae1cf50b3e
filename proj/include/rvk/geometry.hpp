#pragma once

#include <array>

namespace rvk {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

// Camera frame: z along the optical axis, x right, y down, units in meters;
// image coordinates in pixels with sub-pixel precision.
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const;
};

struct BoundingBox {
    double l = 0.0, t = 0.0, r = 0.0, b = 0.0;

    double width() const { return r - l; }
    double height() const { return b - t; }
    bool valid() const { return l < r && t < b; }
};

struct VehicleTruth {
    double distance = 0.0;    // z of the closest point, meters
    Vec3 velocity;            // m/s, camera frame
    Vec3 closest_point;       // meters
    Vec2 closest_pixel;       // projection of closest_point
    double extent_w = 0.0;    // physical extents of the fronto-parallel
    double extent_h = 0.0;    // vehicle plane, meters
};

Vec2 project(const CameraIntrinsics& cam, const Vec3& p);
Vec3 backproject(const CameraIntrinsics& cam, const Vec2& pixel, double depth);

/// d = focal * physical_extent / pixel_extent.
double distance_from_extent(double focal, double physical_extent, double pixel_extent);

/// [ fx/(r-l), fy/(b-t), (l-cx)/fx, (t-cy)/fy, (r-cx)/fx, (b-cy)/fy ]
std::array<double, 6> geometric_clue(const CameraIntrinsics& cam, const BoundingBox& box);

Vec3 velocity_closed_form(const CameraIntrinsics& cam, double d, double d_prev, const Vec2& pix,
                          const Vec2& pix_prev, double dt);

}  // namespace rvk
