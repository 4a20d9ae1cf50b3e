#pragma once

namespace rvk::ref {

// Serial reference kernels: plain loop nests kept for testing the OpenMP
// implementations and for the kernel benchmark. Summation order per output
// element matches the parallel path (c_in, ky, kx ascending; bias last).

void conv2d_forward(const double* in, const double* weight, const double* bias, double* out,
                    int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad);

void conv2d_backward(const double* in, const double* weight, const double* out_grad,
                     double* in_grad, double* weight_grad, double* bias_grad,
                     int C_in, int H, int W, int C_out, int kh, int kw, int stride, int pad);

void gemm(int M, int N, int K, const double* A, const double* B, double* C, bool accumulate = false);

}  // namespace rvk::ref
