#include "rvk/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rvk {

namespace {

int level_dim(int full, int level) {
    int d = full;
    for (int k = 0; k < level; ++k) d = (d + 1) / 2;
    return d;
}

void check_levels(int w, int h, int levels) {
    if (levels < 1) throw std::invalid_argument("pyramid: levels must be >= 1");
    if (level_dim(w, levels - 1) < 2 || level_dim(h, levels - 1) < 2) {
        throw std::invalid_argument("pyramid: " + std::to_string(levels) + " levels too deep for " +
                                    std::to_string(w) + "x" + std::to_string(h));
    }
}

}  // namespace

FlowPyramid build_pyramid(const FlowField& level0, int levels) {
    check_levels(level0.w, level0.h, levels);
    FlowPyramid pyr;
    pyr.levels.push_back(level0);
    for (int k = 1; k < levels; ++k) {
        const FlowField& src = pyr.levels.back();
        FlowField dst((src.w + 1) / 2, (src.h + 1) / 2);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < dst.h; ++y) {
            for (int x = 0; x < dst.w; ++x) {
                double su = 0.0, sv = 0.0;
                int n = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    const int yy = 2 * y + dy;
                    if (yy >= src.h) continue;
                    for (int dx = 0; dx < 2; ++dx) {
                        const int xx = 2 * x + dx;
                        if (xx >= src.w) continue;
                        su += src.u(xx, yy);
                        sv += src.v(xx, yy);
                        ++n;
                    }
                }
                dst.u(x, y) = su / n * 0.5;  // pooled, then converted to level-local pixels
                dst.v(x, y) = sv / n * 0.5;
            }
        }
        pyr.levels.push_back(std::move(dst));
    }
    return pyr;
}

std::vector<ImageF64> build_pyramid(const ImageF64& level0, int levels) {
    check_levels(level0.w, level0.h, levels);
    std::vector<ImageF64> pyr;
    pyr.push_back(level0);
    for (int k = 1; k < levels; ++k) {
        const ImageF64& src = pyr.back();
        ImageF64 dst((src.w + 1) / 2, (src.h + 1) / 2);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < dst.h; ++y) {
            for (int x = 0; x < dst.w; ++x) {
                double s = 0.0;
                int n = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    const int yy = 2 * y + dy;
                    if (yy >= src.h) continue;
                    for (int dx = 0; dx < 2; ++dx) {
                        const int xx = 2 * x + dx;
                        if (xx >= src.w) continue;
                        s += src.at(xx, yy);
                        ++n;
                    }
                }
                dst.at(x, y) = s / n;
            }
        }
        pyr.push_back(std::move(dst));
    }
    return pyr;
}

FlowPyramid oracle_flow_pyramid(const FlowField& scene_flow, const CropSpec& spec, int levels) {
    FlowField patch_flow = resample_flow_to_patch(scene_flow, spec);
    for (int y = 0; y < patch_flow.h; ++y) {
        for (int x = 0; x < patch_flow.w; ++x) {
            patch_flow.u(x, y) /= spec.scale_x;
            patch_flow.v(x, y) /= spec.scale_y;
        }
    }
    return build_pyramid(patch_flow, levels);
}

namespace {

constexpr int kMaxSearchRadius = 8;

// Integer-displacement SAD with edge clamping on both images.
double sad_window(const ImageF64& cur, const ImageF64& tpl, int cx, int cy, int dx, int dy, int r) {
    double acc = 0.0;
    for (int wy = -r; wy <= r; ++wy) {
        for (int wx = -r; wx <= r; ++wx) {
            const int qx = std::clamp(cx + wx, 0, cur.w - 1);
            const int qy = std::clamp(cy + wy, 0, cur.h - 1);
            const int tx = std::clamp(qx - dx, 0, tpl.w - 1);
            const int ty = std::clamp(qy - dy, 0, tpl.h - 1);
            acc += std::abs(cur.at(qx, qy) - tpl.at(tx, ty));
        }
    }
    return acc;
}

// Parabolic sub-pixel offset from three SAD samples; 0 when the curvature is
// too weak to carry signal (flat or noise-dominated surface).
double parabolic_offset(double s_minus, double s_zero, double s_plus, double min_curvature) {
    const double denom = s_minus - 2.0 * s_zero + s_plus;
    if (denom <= min_curvature) return 0.0;
    return std::clamp(0.5 * (s_minus - s_plus) / denom, -0.5, 0.5);
}

// 3x3 channel-wise median; suppresses per-pixel aperture outliers without
// moving coherent motion boundaries.
FlowField median3(const FlowField& src) {
    FlowField out(src.w, src.h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < src.h; ++y) {
        for (int x = 0; x < src.w; ++x) {
            double u[9], v[9];
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, src.h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::clamp(x + dx, 0, src.w - 1);
                    u[n] = src.u(xx, yy);
                    v[n] = src.v(xx, yy);
                    ++n;
                }
            }
            std::nth_element(u, u + 4, u + 9);
            std::nth_element(v, v + 4, v + 9);
            out.u(x, y) = u[4];
            out.v(x, y) = v[4];
        }
    }
    return out;
}

}  // namespace

FlowPyramid estimate_flow(const ImageF64& template_patch, const ImageF64& current_patch, int levels,
                          const FlowEstimatorParams& params) {
    if (template_patch.w != current_patch.w || template_patch.h != current_patch.h) {
        throw std::invalid_argument("estimate_flow: patch sizes differ");
    }
    if (params.search_radius < 1 || params.search_radius > kMaxSearchRadius) {
        throw std::invalid_argument("estimate_flow: search radius out of range");
    }
    if (params.window_radius < 1) throw std::invalid_argument("estimate_flow: window radius out of range");
    check_levels(current_patch.w, current_patch.h, levels);

    const std::vector<ImageF64> cur_pyr = build_pyramid(current_patch, levels);
    const std::vector<ImageF64> tpl_pyr = build_pyramid(template_patch, levels);

    FlowPyramid out;
    out.levels.resize(static_cast<std::size_t>(levels));

    const int R = params.search_radius;
    const int W = params.window_radius;
    std::atomic<long> flat_pixels{0};
    long level0_pixels = 0;

    FlowField coarser;  // estimate from the previous (coarser) level
    for (int k = levels - 1; k >= 0; --k) {
        const ImageF64& cur = cur_pyr[static_cast<std::size_t>(k)];
        const ImageF64& tpl = tpl_pyr[static_cast<std::size_t>(k)];
        FlowField est(cur.w, cur.h);
        const bool have_init = coarser.w > 0;

#pragma omp parallel for schedule(static)
        for (int y = 0; y < cur.h; ++y) {
            for (int x = 0; x < cur.w; ++x) {
                double init_u = 0.0, init_v = 0.0;
                if (have_init) {
                    // coarser grid coordinate of this pixel; values scale by 2
                    init_u = 2.0 * coarser.sample((x - 0.5) / 2.0, (y - 0.5) / 2.0, 0);
                    init_v = 2.0 * coarser.sample((x - 0.5) / 2.0, (y - 0.5) / 2.0, 1);
                }
                const double limit = 2.0 * std::max(cur.w, cur.h);
                const int base_u = static_cast<int>(std::round(std::clamp(init_u, -limit, limit)));
                const int base_v = static_cast<int>(std::round(std::clamp(init_v, -limit, limit)));

                double sad_grid[2 * kMaxSearchRadius + 1][2 * kMaxSearchRadius + 1];
                double best = 0.0;
                double worst = 0.0;
                int best_dx = 0, best_dy = 0;
                for (int dy = -R; dy <= R; ++dy) {
                    for (int dx = -R; dx <= R; ++dx) {
                        const double s = sad_window(cur, tpl, x, y, base_u + dx, base_v + dy, W);
                        sad_grid[dy + R][dx + R] = s;
                        if (dy == -R && dx == -R) {
                            best = worst = s;
                        } else {
                            worst = std::max(worst, s);
                            if (s < best) {
                                best = s;
                                best_dx = dx;
                                best_dy = dy;
                            }
                        }
                    }
                }
                const bool flat = (worst - best) <= 1e-9;

                // moving off the propagated estimate requires a real SAD
                // improvement, so weakly textured fine levels cannot wander
                const double s_init = sad_grid[R][R];
                if ((best_dx != 0 || best_dy != 0) && best > 0.9 * s_init) {
                    best_dx = 0;
                    best_dy = 0;
                    best = s_init;
                }

                if (flat) {
                    // no texture signal; keep the propagated estimate
                    est.u(x, y) = init_u;
                    est.v(x, y) = init_v;
                    if (k == 0) flat_pixels.fetch_add(1, std::memory_order_relaxed);
                    continue;
                }

                double sub_x = 0.0, sub_y = 0.0;
                const bool exact_match = best <= 1e-9;  // perfect alignment; no refinement justified
                const double min_curvature = std::max(1e-12, 0.1 * best);
                if (!exact_match && best_dx > -R && best_dx < R) {
                    sub_x = parabolic_offset(sad_grid[best_dy + R][best_dx - 1 + R],
                                             sad_grid[best_dy + R][best_dx + R],
                                             sad_grid[best_dy + R][best_dx + 1 + R], min_curvature);
                }
                if (!exact_match && best_dy > -R && best_dy < R) {
                    sub_y = parabolic_offset(sad_grid[best_dy - 1 + R][best_dx + R],
                                             sad_grid[best_dy + R][best_dx + R],
                                             sad_grid[best_dy + 1 + R][best_dx + R], min_curvature);
                }
                est.u(x, y) = static_cast<double>(base_u + best_dx) + sub_x;
                est.v(x, y) = static_cast<double>(base_v + best_dy) + sub_y;
            }
        }

        if (k == 0) level0_pixels = static_cast<long>(cur.w) * cur.h;
        est = median3(est);
        out.levels[static_cast<std::size_t>(k)] = est;
        coarser = std::move(est);
    }

    out.low_confidence = level0_pixels > 0 && flat_pixels.load() > level0_pixels * 9 / 10;
    return out;
}

}  // namespace rvk
