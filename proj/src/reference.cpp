#include "rvk/reference.hpp"

namespace rvk::ref {

namespace {
inline int out_dim(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }
}

void conv2d_forward(const double* in, const double* weight, const double* bias, double* out,
                    int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad) {
    const int OH = out_dim(H, kh, stride, pad);
    const int OW = out_dim(W, kw, stride, pad);
    for (int co = 0; co < C_out; ++co) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                double acc = 0.0;
                for (int ci = 0; ci < C_in; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            acc += weight[((static_cast<long>(co) * C_in + ci) * kh + ky) * kw + kx] *
                                   in[(static_cast<long>(ci) * H + iy) * W + ix];
                        }
                    }
                }
                out[(static_cast<long>(co) * OH + oy) * OW + ox] = acc + bias[co];
            }
        }
    }
}

void conv2d_backward(const double* in, const double* weight, const double* out_grad,
                     double* in_grad, double* weight_grad, double* bias_grad,
                     int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad) {
    const int OH = out_dim(H, kh, stride, pad);
    const int OW = out_dim(W, kw, stride, pad);
    for (int co = 0; co < C_out; ++co) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                const double g = out_grad[(static_cast<long>(co) * OH + oy) * OW + ox];
                bias_grad[co] += g;
                for (int ci = 0; ci < C_in; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            const long widx = ((static_cast<long>(co) * C_in + ci) * kh + ky) * kw + kx;
                            const long iidx = (static_cast<long>(ci) * H + iy) * W + ix;
                            weight_grad[widx] += g * in[iidx];
                            if (in_grad) in_grad[iidx] += g * weight[widx];
                        }
                    }
                }
            }
        }
    }
}

void gemm(int M, int N, int K, const double* A, const double* B, double* C, bool accumulate) {
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += A[static_cast<long>(m) * K + k] * B[static_cast<long>(k) * N + n];
            double* c = C + static_cast<long>(m) * N + n;
            *c = accumulate ? *c + acc : acc;
        }
    }
}

}  // namespace rvk::ref
