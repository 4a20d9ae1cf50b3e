#pragma once

#include <cstdint>
#include <vector>

#include "rvk/tensor.hpp"

namespace rvk {

struct AdamState {
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    std::int64_t step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_param(const Tensor& param, double lr);
};

/// One bias-corrected update; increments state.step and zeroes param.grad.
/// Rejects parameters whose gradient has not been allocated.
void adam_step(Tensor& param, AdamState& state);

/// Step-decay schedule: base_lr * decay^floor((epoch-1)/decay_every), epochs 1-based.
double scheduled_lr(double base_lr, double decay, int decay_every, int epoch);

}  // namespace rvk
