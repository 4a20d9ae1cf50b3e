#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rvk/tensor.hpp"

namespace rvk {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t non_finite = 0;  // elements where either side was not finite
    std::size_t skipped_kinks = 0;  // elements whose perturbation flipped an activation
};

using GraphBuilder = std::function<TensorPtr(const std::vector<TensorPtr>&)>;

/// Compares the analytic gradient of every element of `inputs` against a
/// central finite difference of the scalar built by `builder`. Relative
/// error is |a - n| / max(|a|, |n|, 1). When max_elements_per_tensor > 0,
/// a seeded random subset of that size is checked per tensor instead of
/// every element. When `signature` is provided it is consulted after every
/// builder call; elements whose +/-eps evaluations change the signature
/// (an activation-pattern flip, where the graph is not differentiable) are
/// skipped and counted instead of scored.
GradCheckResult grad_check(const GraphBuilder& builder, const std::vector<TensorPtr>& inputs,
                           double eps, std::size_t max_elements_per_tensor = 0,
                           std::uint64_t sample_seed = 0,
                           const std::function<std::uint64_t()>& signature = nullptr);

}  // namespace rvk
