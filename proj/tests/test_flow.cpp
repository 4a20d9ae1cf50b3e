#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rvk/flow.hpp"
#include "rvk/sampling.hpp"
#include "rvk/simulator.hpp"
#include "rvk/util.hpp"

using namespace rvk;

namespace {

FlowField constant_flow(int w, int h, double u, double v) {
    FlowField f(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            f.u(x, y) = u;
            f.v(x, y) = v;
        }
    }
    return f;
}

// Smooth random texture with structure at several scales; enough signal for
// block matching at every pyramid level.
ImageF64 textured_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    const int gw = w / 8 + 3, gh = h / 8 + 3;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& g : grid) g = rng.uniform(0.0, 255.0);
    ImageF64 img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = x / 8.0, gy = y / 8.0;
            const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
            const double ax = gx - x0, ay = gy - y0;
            auto at = [&](int xx, int yy) { return grid[static_cast<std::size_t>(yy) * gw + xx]; };
            const double top = at(x0, y0) * (1 - ax) + at(x0 + 1, y0) * ax;
            const double bot = at(x0, y0 + 1) * (1 - ax) + at(x0 + 1, y0 + 1) * ax;
            img.at(x, y) = top * (1 - ay) + bot * ay;
        }
    }
    return img;
}

/// Shifts an image by (dx, dy) with bilinear sampling and edge clamp.
ImageF64 shift_image(const ImageF64& src, double dx, double dy) {
    ImageF64 out(src.w, src.h);
    for (int y = 0; y < src.h; ++y) {
        for (int x = 0; x < src.w; ++x) out.at(x, y) = src.sample(x - dx, y - dy);
    }
    return out;
}

double mean_flow_error(const FlowField& est, double true_u, double true_v, int margin) {
    double acc = 0.0;
    long n = 0;
    for (int y = margin; y < est.h - margin; ++y) {
        for (int x = margin; x < est.w - margin; ++x) {
            const double du = est.u(x, y) - true_u;
            const double dv = est.v(x, y) - true_v;
            acc += std::sqrt(du * du + dv * dv);
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("build_pyramid with one level is the input") {
    const FlowField f = constant_flow(32, 24, 1.5, -2.0);
    const FlowPyramid pyr = build_pyramid(f, 1);
    REQUIRE(pyr.level_count() == 1);
    CHECK(pyr.levels[0].uv == f.uv);
}

TEST_CASE("constant flow halves per level") {
    const FlowPyramid pyr = build_pyramid(constant_flow(64, 48, 4.0, 2.0), 3);
    CHECK(pyr.levels[1].u(3, 3) == doctest::Approx(2.0));
    CHECK(pyr.levels[1].v(3, 3) == doctest::Approx(1.0));
    CHECK(pyr.levels[2].u(2, 2) == doctest::Approx(1.0));
    CHECK(pyr.levels[2].v(2, 2) == doctest::Approx(0.5));
    CHECK(pyr.levels[2].w == 16);
    CHECK(pyr.levels[2].h == 12);
}

TEST_CASE("pyramid unit rule holds within pooling tolerance on smooth fields") {
    FlowField f(64, 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            f.u(x, y) = 3.0 + 0.01 * x;
            f.v(x, y) = -1.0 + 0.01 * y;
        }
    }
    const FlowPyramid pyr = build_pyramid(f, 4);
    for (int k = 1; k < 4; ++k) {
        const double scale = std::pow(2.0, k);
        const auto& lvl = pyr.levels[static_cast<std::size_t>(k)];
        const int cx = lvl.w / 2, cy = lvl.h / 2;
        // the physical displacement at the corresponding full-res point
        const double full_x = (cx + 0.5) * scale - 0.5;
        const double full_y = (cy + 0.5) * scale - 0.5;
        CHECK(lvl.u(cx, cy) * scale == doctest::Approx(3.0 + 0.01 * full_x).epsilon(0.02));
        CHECK(lvl.v(cx, cy) * scale == doctest::Approx(-1.0 + 0.01 * full_y).epsilon(0.02));
    }
}

TEST_CASE("checkerboard image averages to mid-gray at level 1") {
    ImageF64 img(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) img.at(x, y) = ((x + y) % 2 == 0) ? 255.0 : 0.0;
    }
    const auto pyr = build_pyramid(img, 2);
    REQUIRE(pyr[1].w == 2);
    for (double v : pyr[1].px) CHECK(v == doctest::Approx(127.5));
}

TEST_CASE("too many levels are rejected") {
    CHECK_THROWS_AS(build_pyramid(constant_flow(8, 8, 0, 0), 4), std::invalid_argument);
}

TEST_CASE("oracle pyramid of a static scene is zero") {
    const FlowField zero = constant_flow(512, 288, 0.0, 0.0);
    const CropSpec spec = expand_crop({100.0, 80.0, 180.0, 140.0}, 8.0, 512, 288);
    const FlowPyramid pyr = oracle_flow_pyramid(zero, spec, 4);
    for (const auto& lvl : pyr.levels) {
        for (double v : lvl.uv) REQUIRE(v == 0.0);
    }
}

TEST_CASE("oracle pyramid converts original units to patch units") {
    const FlowField uniform = constant_flow(512, 288, 3.0, 0.0);
    CropSpec spec = expand_crop({100.0, 80.0, 212.0, 176.0}, 0.0, 512, 288);
    REQUIRE(spec.scale_x == doctest::Approx(0.5));
    const FlowPyramid pyr = oracle_flow_pyramid(uniform, spec, 2);
    CHECK(pyr.levels[0].u(100, 100) == doctest::Approx(6.0));
    CHECK(pyr.levels[0].v(100, 100) == doctest::Approx(0.0));
}

TEST_CASE("identical textured patches give zero flow with confidence") {
    const ImageF64 img = textured_image(128, 96, 3);
    const FlowPyramid est = estimate_flow(img, img, 3);
    CHECK_FALSE(est.low_confidence);
    double max_mag = 0.0;
    for (int y = 0; y < 96; ++y) {
        for (int x = 0; x < 128; ++x) {
            max_mag = std::max(max_mag, std::hypot(est.levels[0].u(x, y), est.levels[0].v(x, y)));
        }
    }
    CHECK(max_mag < 0.05);
}

TEST_CASE("constant patches give zero flow with the low-confidence flag") {
    ImageF64 flat(96, 96);
    for (auto& v : flat.px) v = 128.0;
    const FlowPyramid est = estimate_flow(flat, flat, 3);
    CHECK(est.low_confidence);
    for (double v : est.levels[0].uv) REQUIRE(v == 0.0);
}

TEST_CASE("global integer shift is recovered within half a pixel") {
    const ImageF64 base = textured_image(160, 128, 11);
    const ImageF64 shifted = shift_image(base, 6.0, -2.0);
    const FlowPyramid est = estimate_flow(base, shifted, 4);
    const FlowField& lvl0 = est.levels[0];
    double mean_u = 0.0, mean_v = 0.0;
    long n = 0;
    for (int y = 12; y < lvl0.h - 12; ++y) {
        for (int x = 12; x < lvl0.w - 12; ++x) {
            mean_u += lvl0.u(x, y);
            mean_v += lvl0.v(x, y);
            ++n;
        }
    }
    mean_u /= static_cast<double>(n);
    mean_v /= static_cast<double>(n);
    CHECK(std::abs(mean_u - 6.0) < 0.5);
    CHECK(std::abs(mean_v + 2.0) < 0.5);
}

TEST_CASE("endpoint error stays below half a pixel for shifts up to a quarter window") {
    Rng rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        const double dx = rng.uniform(-2.25, 2.25);
        const double dy = rng.uniform(-2.25, 2.25);
        const ImageF64 base = textured_image(144, 120, 100 + static_cast<std::uint64_t>(trial));
        const ImageF64 shifted = shift_image(base, dx, dy);
        const FlowPyramid est = estimate_flow(base, shifted, 3);
        CHECK(mean_flow_error(est.levels[0], dx, dy, 12) < 0.5);
    }
}

TEST_CASE("zero-motion stability") {
    const ImageF64 base = textured_image(128, 128, 23);
    const FlowPyramid est = estimate_flow(base, base, 4);
    CHECK(mean_flow_error(est.levels[0], 0.0, 0.0, 0) < 0.05);
}

TEST_CASE("vehicle-centric magnification rescues sub-pixel motion") {
    // 0.4 px true shift at full resolution vs the same content magnified 8x
    const double shift = 0.4;
    const ImageF64 base = textured_image(96, 96, 31);
    const ImageF64 moved = shift_image(base, shift, 0.0);

    const FlowPyramid full = estimate_flow(base, moved, 3);
    const double full_mean_u = [&] {
        double acc = 0.0;
        long n = 0;
        for (int y = 10; y < 86; ++y) {
            for (int x = 10; x < 86; ++x) {
                acc += full.levels[0].u(x, y);
                ++n;
            }
        }
        return acc / static_cast<double>(n);
    }();

    // magnify both frames 8x (bilinear), shift becomes 3.2 patch px
    auto magnify = [](const ImageF64& src, int factor) {
        ImageF64 out(src.w * factor, src.h * factor);
        for (int y = 0; y < out.h; ++y) {
            for (int x = 0; x < out.w; ++x) {
                out.at(x, y) = src.sample((x + 0.5) / factor - 0.5, (y + 0.5) / factor - 0.5);
            }
        }
        return out;
    };
    const FlowPyramid centric = estimate_flow(magnify(base, 8), magnify(moved, 8), 4);
    const double centric_mean_u = [&] {
        double acc = 0.0;
        long n = 0;
        for (int y = 100; y < 668; y += 2) {
            for (int x = 100; x < 668; x += 2) {
                acc += centric.levels[0].u(x, y);
                ++n;
            }
        }
        return acc / static_cast<double>(n);
    }();

    const double err_full = std::abs(full_mean_u - shift);
    const double err_centric = std::abs(centric_mean_u / 8.0 - shift);
    // full-resolution estimate collapses toward zero; the magnified one holds
    CHECK(err_centric < err_full);
    CHECK(err_centric < 0.1);
}

TEST_CASE("upsampled coarser level approximates the finer level") {
    const ImageF64 base = textured_image(160, 128, 41);
    const ImageF64 shifted = shift_image(base, 3.0, 1.0);
    const FlowPyramid est = estimate_flow(base, shifted, 3);
    const auto& fine = est.levels[0];
    const auto& coarse = est.levels[1];
    double acc = 0.0;
    long n = 0;
    for (int y = 12; y < fine.h - 12; y += 2) {
        for (int x = 12; x < fine.w - 12; x += 2) {
            const double up_u = 2.0 * coarse.sample((x - 0.5) / 2.0, (y - 0.5) / 2.0, 0);
            acc += std::abs(up_u - fine.u(x, y));
            ++n;
        }
    }
    CHECK(acc / static_cast<double>(n) < 0.75);
}
