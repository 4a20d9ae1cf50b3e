#pragma once

#include <cstdint>

namespace rvk::kernels {

// OpenMP-parallel numeric kernels. Every kernel assigns each output element
// to exactly one thread and accumulates it in a fixed serial order, so
// results are identical for any thread count.

/// C = A * B (or += with accumulate), row-major, A: MxK, B: KxN, C: MxN.
void gemm(int M, int N, int K, const double* A, const double* B, double* C, bool accumulate = false);

/// C = A * B^T, A: MxN, B: KxN, C: MxK. Both inner operands are row-contiguous.
void gemm_nt(int M, int K, int N, const double* A, const double* B, double* C, bool accumulate = false);

/// C = A^T * B, A: MxK, B: MxN, C: KxN; no transposed copy is materialized.
void gemm_tn(int K, int N, int M, const double* A, const double* B, double* C);

int conv_out_dim(int in, int kernel, int stride, int padding);

/// col layout: [C*kh*kw] x [OH*OW], zero padding.
void im2col(const double* im, int C, int H, int W, int kh, int kw, int stride, int pad, double* col);

/// Gather-formulated adjoint of im2col; writes (not accumulates) into im_grad.
void col2im(const double* col, int C, int H, int W, int kh, int kw, int stride, int pad, double* im_grad);

/// out[co] = sum_k W[co][k] * col[k][:] + bias[co], bias added after the sum.
void conv2d_forward(const double* in, const double* weight, const double* bias, double* out,
                    int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad);

/// Accumulates into weight_grad / bias_grad; writes input_grad contribution
/// via accumulate-add when in_grad is non-null.
void conv2d_backward(const double* in, const double* weight, const double* out_grad,
                     double* in_grad, double* weight_grad, double* bias_grad,
                     int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad);

void set_max_threads(int n);
int max_threads();

}  // namespace rvk::kernels
