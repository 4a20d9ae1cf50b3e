#include "rvk/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "rvk/util.hpp"

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace rvk {

namespace {

struct BilinearTaps {
    int x0, y0, x1, y1;
    double ax, ay;
};

inline BilinearTaps taps(double x, double y, int w, int h) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(w - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    return {x0, y0, std::min(x0 + 1, w - 1), std::min(y0 + 1, h - 1), cx - x0, cy - y0};
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what, long offset = -1) {
    std::string msg = path.string() + ": " + what;
    if (offset >= 0) msg += " (offset " + std::to_string(offset) + ")";
    throw DataError(msg);
}

}  // namespace

double ImageU8::sample(double x, double y) const {
    const auto t = taps(x, y, w, h);
    const double top = at(t.x0, t.y0) * (1.0 - t.ax) + at(t.x1, t.y0) * t.ax;
    const double bot = at(t.x0, t.y1) * (1.0 - t.ax) + at(t.x1, t.y1) * t.ax;
    return top * (1.0 - t.ay) + bot * t.ay;
}

double ImageF64::sample(double x, double y) const {
    const auto t = taps(x, y, w, h);
    const double top = at(t.x0, t.y0) * (1.0 - t.ax) + at(t.x1, t.y0) * t.ax;
    const double bot = at(t.x0, t.y1) * (1.0 - t.ax) + at(t.x1, t.y1) * t.ax;
    return top * (1.0 - t.ay) + bot * t.ay;
}

double FlowField::sample(double x, double y, int channel) const {
    const auto t = taps(x, y, w, h);
    auto value = [&](int xx, int yy) { return uv[(static_cast<std::size_t>(yy) * w + xx) * 2 + channel]; };
    const double top = value(t.x0, t.y0) * (1.0 - t.ax) + value(t.x1, t.y0) * t.ax;
    const double bot = value(t.x0, t.y1) * (1.0 - t.ax) + value(t.x1, t.y1) * t.ax;
    return top * (1.0 - t.ay) + bot * t.ay;
}

ImageU8 read_pgm(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) fail(path, "cannot open");

    auto next_token = [&](std::string& tok) {
        tok.clear();
        int c;
        while ((c = std::fgetc(f.get())) != EOF) {
            if (c == '#') {  // comment runs to end of line
                while ((c = std::fgetc(f.get())) != EOF && c != '\n') {
                }
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return true;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        return !tok.empty();
    };

    std::string tok;
    if (!next_token(tok) || tok != "P5") fail(path, "not a binary PGM (expected P5)", 0);
    int dims[3];
    for (int i = 0; i < 3; ++i) {
        if (!next_token(tok)) fail(path, "truncated PGM header", std::ftell(f.get()));
        try {
            dims[i] = std::stoi(tok);
        } catch (...) {
            fail(path, "bad PGM header token '" + tok + "'", std::ftell(f.get()));
        }
    }
    if (dims[0] <= 0 || dims[1] <= 0) fail(path, "bad PGM dimensions");
    if (dims[2] != 255) fail(path, "unsupported PGM maxval " + std::to_string(dims[2]));

    ImageU8 img(dims[0], dims[1]);
    const std::size_t n = img.px.size();
    if (std::fread(img.px.data(), 1, n, f.get()) != n) fail(path, "truncated PGM pixel data", std::ftell(f.get()));
    return img;
}

void write_pgm(const ImageU8& img, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");
    std::fprintf(f.get(), "P5\n%d %d\n255\n", img.w, img.h);
    if (std::fwrite(img.px.data(), 1, img.px.size(), f.get()) != img.px.size()) fail(path, "short write");
}

namespace {
constexpr float kFloTag = 202021.25f;  // "PIEH" read as little-endian float
}

FlowField read_flo(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) fail(path, "cannot open");

    float tag = 0.0f;
    std::int32_t w = 0, h = 0;
    if (std::fread(&tag, 4, 1, f.get()) != 1) fail(path, "truncated .flo header", 0);
    if (tag != kFloTag) fail(path, "bad .flo magic", 0);
    if (std::fread(&w, 4, 1, f.get()) != 1 || std::fread(&h, 4, 1, f.get()) != 1) {
        fail(path, "truncated .flo header", 4);
    }
    if (w <= 0 || h <= 0 || w > 100000 || h > 100000) {
        fail(path, "implausible .flo dimensions " + std::to_string(w) + "x" + std::to_string(h), 4);
    }

    FlowField flow(w, h);
    const std::size_t n = static_cast<std::size_t>(w) * h * 2;
    std::vector<float> buf(n);
    if (std::fread(buf.data(), 4, n, f.get()) != n) fail(path, "truncated .flo data", std::ftell(f.get()));
    if (std::fgetc(f.get()) != EOF) fail(path, ".flo has trailing bytes", std::ftell(f.get()));
    for (std::size_t i = 0; i < n; ++i) flow.uv[i] = static_cast<double>(buf[i]);
    return flow;
}

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");
    const std::int32_t w = flow.w, h = flow.h;
    if (std::fwrite(&kFloTag, 4, 1, f.get()) != 1 || std::fwrite(&w, 4, 1, f.get()) != 1 ||
        std::fwrite(&h, 4, 1, f.get()) != 1) {
        fail(path, "short write");
    }
    const std::size_t n = flow.uv.size();
    std::vector<float> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(flow.uv[i]);
    if (std::fwrite(buf.data(), 4, n, f.get()) != n) fail(path, "short write");
}

}  // namespace rvk
