#pragma once

#include <vector>

#include "rvk/tensor.hpp"

namespace rvk {

/// 2-D convolution, zero padding, no dilation. input [C_in,H,W],
/// weight [C_out,C_in,kh,kw], bias [C_out] -> [C_out,H',W'].
TensorPtr conv2d(const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias,
                 int stride, int padding);

/// Elementwise max(0, x); gradient passes only where x > 0.
TensorPtr relu(const TensorPtr& input);

/// input [N], weight [M,N], bias [M] -> [M].
TensorPtr fully_connected(const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias);

/// Rank-1 concatenation in argument order.
TensorPtr concat(const std::vector<TensorPtr>& parts);

/// Rank-1 slice [begin, end).
TensorPtr slice(const TensorPtr& input, int begin, int end);

/// Copy with a new shape of equal size; gradient passes through.
TensorPtr reshape(const TensorPtr& input, std::vector<int> shape);

/// Mean of squared differences; scalar output.
TensorPtr mse_loss(const TensorPtr& pred, const TensorPtr& target);

TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(const TensorPtr& input, double factor);

}  // namespace rvk
