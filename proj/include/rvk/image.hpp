#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rvk {

struct ImageU8 {
    int w = 0, h = 0;
    std::vector<std::uint8_t> px;  // row-major

    ImageU8() = default;
    ImageU8(int w_in, int h_in) : w(w_in), h(h_in), px(static_cast<std::size_t>(w_in) * h_in, 0) {}

    std::uint8_t at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
    std::uint8_t& at(int x, int y) { return px[static_cast<std::size_t>(y) * w + x]; }

    /// Bilinear sample with edge clamping, pixel centers at integers.
    double sample(double x, double y) const;
};

struct ImageF64 {
    int w = 0, h = 0;
    std::vector<double> px;

    ImageF64() = default;
    ImageF64(int w_in, int h_in) : w(w_in), h(h_in), px(static_cast<std::size_t>(w_in) * h_in, 0.0) {}

    double at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
    double& at(int x, int y) { return px[static_cast<std::size_t>(y) * w + x]; }

    double sample(double x, double y) const;
};

// Two-channel displacement field, (u,v) interleaved row-major. Values are in
// pixels of whatever grid the field lives on.
struct FlowField {
    int w = 0, h = 0;
    std::vector<double> uv;

    FlowField() = default;
    FlowField(int w_in, int h_in) : w(w_in), h(h_in), uv(static_cast<std::size_t>(w_in) * h_in * 2, 0.0) {}

    double u(int x, int y) const { return uv[(static_cast<std::size_t>(y) * w + x) * 2]; }
    double v(int x, int y) const { return uv[(static_cast<std::size_t>(y) * w + x) * 2 + 1]; }
    double& u(int x, int y) { return uv[(static_cast<std::size_t>(y) * w + x) * 2]; }
    double& v(int x, int y) { return uv[(static_cast<std::size_t>(y) * w + x) * 2 + 1]; }

    /// Bilinear sample of one channel (0=u, 1=v) with edge clamping.
    double sample(double x, double y, int channel) const;
};

// Binary PGM (P5), 8-bit.
ImageU8 read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageU8& img, const std::filesystem::path& path);

// Middlebury .flo: "PIEH" float tag, int32 width/height, interleaved
// little-endian float32 (u,v) row-major. Reading promotes to f64; writing
// narrows to f32.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);

}  // namespace rvk
