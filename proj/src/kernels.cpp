#include "rvk/kernels.hpp"

#include <malloc.h>
#include <omp.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvk::kernels {

namespace {

// The training loop allocates ~100 MB of short-lived buffers per update
// (im2col panels, activation tensors, gradients). Keeping large blocks on
// the heap free-list instead of per-call mmap avoids re-faulting those pages
// every step.
struct MallocTuning {
    MallocTuning() {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
    }
};
const MallocTuning g_malloc_tuning;

}  // namespace

namespace {
constexpr int kNB = 64;  // panel width (doubles); 4xkNB accumulator tile stays in registers/L1
constexpr int kMB = 4;
}  // namespace

void gemm(int M, int N, int K, const double* A, const double* B, double* C, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int n0 = 0; n0 < N; n0 += kNB) {
        const int nb = (N - n0 < kNB) ? (N - n0) : kNB;
        for (int m0 = 0; m0 < M; m0 += kMB) {
            const int mb = (M - m0 < kMB) ? (M - m0) : kMB;
            if (mb == kMB && nb == kNB) {
                double acc[kMB][kNB];
                for (int i = 0; i < kMB; ++i) std::memset(acc[i], 0, sizeof(double) * kNB);
                for (int k = 0; k < K; ++k) {
                    const double* __restrict bk = B + static_cast<std::size_t>(k) * N + n0;
                    for (int i = 0; i < kMB; ++i) {
                        const double a = A[static_cast<std::size_t>(m0 + i) * K + k];
#pragma omp simd
                        for (int j = 0; j < kNB; ++j) acc[i][j] += a * bk[j];
                    }
                }
                for (int i = 0; i < kMB; ++i) {
                    double* crow = C + static_cast<std::size_t>(m0 + i) * N + n0;
                    if (accumulate) {
                        for (int j = 0; j < kNB; ++j) crow[j] += acc[i][j];
                    } else {
                        std::memcpy(crow, acc[i], sizeof(double) * kNB);
                    }
                }
            } else {
                for (int i = 0; i < mb; ++i) {
                    double* crow = C + static_cast<std::size_t>(m0 + i) * N + n0;
                    double acc[kNB];
                    std::memset(acc, 0, sizeof(double) * nb);
                    for (int k = 0; k < K; ++k) {
                        const double a = A[static_cast<std::size_t>(m0 + i) * K + k];
                        const double* __restrict bk = B + static_cast<std::size_t>(k) * N + n0;
                        for (int j = 0; j < nb; ++j) acc[j] += a * bk[j];
                    }
                    if (accumulate) {
                        for (int j = 0; j < nb; ++j) crow[j] += acc[j];
                    } else {
                        std::memcpy(crow, acc, sizeof(double) * nb);
                    }
                }
            }
        }
    }
}

void gemm_nt(int M, int K, int N, const double* A, const double* B, double* C, bool accumulate) {
    constexpr int kNB = 512;  // shared B panel stays cache-resident per block
    if (!accumulate) {
#pragma omp parallel for schedule(static)
        for (int m = 0; m < M; ++m) std::memset(C + static_cast<std::size_t>(m) * K, 0, sizeof(double) * K);
    }
    for (int n0 = 0; n0 < N; n0 += kNB) {  // serial outer: per-element sums stay ordered
        const int nb = (N - n0 < kNB) ? (N - n0) : kNB;
#pragma omp parallel for schedule(static)
        for (int m = 0; m < M; ++m) {
            const double* __restrict ar = A + static_cast<std::size_t>(m) * N + n0;
            double* crow = C + static_cast<std::size_t>(m) * K;
            for (int k = 0; k < K; ++k) {
                const double* __restrict br = B + static_cast<std::size_t>(k) * N + n0;
                double acc = 0.0;
#pragma omp simd reduction(+ : acc)
                for (int n = 0; n < nb; ++n) acc += ar[n] * br[n];
                crow[k] += acc;
            }
        }
    }
}

void gemm_tn(int K, int N, int M, const double* A, const double* B, double* C) {
    constexpr int kNB = 256;  // K x kNB output block stays cache-resident
#pragma omp parallel for schedule(static)
    for (int n0 = 0; n0 < N; n0 += kNB) {
        const int nb = (N - n0 < kNB) ? (N - n0) : kNB;
        for (int k = 0; k < K; ++k) {
            std::memset(C + static_cast<std::size_t>(k) * N + n0, 0, sizeof(double) * nb);
        }
        for (int m = 0; m < M; ++m) {
            const double* __restrict arow = A + static_cast<std::size_t>(m) * K;
            const double* __restrict brow = B + static_cast<std::size_t>(m) * N + n0;
            for (int k = 0; k < K; ++k) {
                const double a = arow[k];
                double* __restrict crow = C + static_cast<std::size_t>(k) * N + n0;
#pragma omp simd
                for (int n = 0; n < nb; ++n) crow[n] += a * brow[n];
            }
        }
    }
}

int conv_out_dim(int in, int kernel, int stride, int padding) {
    return (in + 2 * padding - kernel) / stride + 1;
}

void im2col(const double* im, int C, int H, int W, int kh, int kw, int stride, int pad, double* col) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const int spatial = OH * OW;
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                double* dst = col + (static_cast<std::size_t>(c) * kh * kw + ky * kw + kx) * spatial;
                const double* src = im + static_cast<std::size_t>(c) * H * W;
                for (int oy = 0; oy < OH; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    double* drow = dst + static_cast<std::size_t>(oy) * OW;
                    if (iy < 0 || iy >= H) {
                        std::memset(drow, 0, sizeof(double) * OW);
                        continue;
                    }
                    const double* srow = src + static_cast<std::size_t>(iy) * W;
                    for (int ox = 0; ox < OW; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        drow[ox] = (ix < 0 || ix >= W) ? 0.0 : srow[ix];
                    }
                }
            }
        }
    }
}

void col2im(const double* col, int C, int H, int W, int kh, int kw, int stride, int pad, double* im_grad) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const int spatial = OH * OW;
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int iy = 0; iy < H; ++iy) {
            double* drow = im_grad + (static_cast<std::size_t>(c) * H + iy) * W;
            for (int ix = 0; ix < W; ++ix) {
                double acc = 0.0;
                for (int ky = 0; ky < kh; ++ky) {
                    const int ty = iy + pad - ky;
                    if (ty < 0 || ty % stride != 0) continue;
                    const int oy = ty / stride;
                    if (oy >= OH) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int tx = ix + pad - kx;
                        if (tx < 0 || tx % stride != 0) continue;
                        const int ox = tx / stride;
                        if (ox >= OW) continue;
                        acc += col[(static_cast<std::size_t>(c) * kh * kw + ky * kw + kx) * spatial +
                                   static_cast<std::size_t>(oy) * OW + ox];
                    }
                }
                drow[ix] = acc;
            }
        }
    }
}

void conv2d_forward(const double* in, const double* weight, const double* bias, double* out,
                    int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const int spatial = OH * OW;
    const int K = C_in * kh * kw;

    std::vector<double> col(static_cast<std::size_t>(K) * spatial);
    im2col(in, C_in, H, W, kh, kw, stride, pad, col.data());
    gemm(C_out, spatial, K, weight, col.data(), out, false);

#pragma omp parallel for schedule(static)
    for (int co = 0; co < C_out; ++co) {
        const double b = bias[co];
        double* orow = out + static_cast<std::size_t>(co) * spatial;
        for (int i = 0; i < spatial; ++i) orow[i] += b;
    }
}

void conv2d_backward(const double* in, const double* weight, const double* out_grad,
                     double* in_grad, double* weight_grad, double* bias_grad,
                     int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const int spatial = OH * OW;
    const int K = C_in * kh * kw;

    std::vector<double> col(static_cast<std::size_t>(K) * spatial);
    im2col(in, C_in, H, W, kh, kw, stride, pad, col.data());

    // dW[co][k] = sum_n dOut[co][n] * col[k][n]
    gemm_nt(C_out, K, spatial, out_grad, col.data(), weight_grad, true);

#pragma omp parallel for schedule(static)
    for (int co = 0; co < C_out; ++co) {
        const double* grow = out_grad + static_cast<std::size_t>(co) * spatial;
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (int i = 0; i < spatial; ++i) acc += grow[i];
        bias_grad[co] += acc;
    }

    if (in_grad) {
        // dcol = W^T * dOut, then gathered back onto the input grid
        std::vector<double> dcol(static_cast<std::size_t>(K) * spatial);
        gemm_tn(K, spatial, C_out, weight, out_grad, dcol.data());
        std::vector<double> dim(static_cast<std::size_t>(C_in) * H * W);
        col2im(dcol.data(), C_in, H, W, kh, kw, stride, pad, dim.data());
        const std::size_t n = dim.size();
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) in_grad[i] += dim[static_cast<std::size_t>(i)];
    }
}

void set_max_threads(int n) {
    if (n >= 1) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace rvk::kernels
