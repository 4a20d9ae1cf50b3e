#include "rvk/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace rvk {

AdamState AdamState::for_param(const Tensor& param, double lr_in) {
    AdamState s;
    s.m.assign(param.size(), 0.0);
    s.v.assign(param.size(), 0.0);
    s.lr = lr_in;
    return s;
}

void adam_step(Tensor& param, AdamState& state) {
    const std::size_t n = param.size();
    if (param.grad.size() != n) {
        throw std::invalid_argument("adam_step: parameter '" + param.name + "' has no gradient");
    }
    if (state.m.size() != n || state.v.size() != n) {
        throw std::invalid_argument("adam_step: state shape does not match parameter '" + param.name + "'");
    }
    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    double* p = param.data.data();
    double* g = param.grad.data();
    double* m = state.m.data();
    double* v = state.v.data();
    const double lr = state.lr, eps = state.eps;
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / corr1;
        const double vhat = v[i] / corr2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    param.zero_grad();
}

double scheduled_lr(double base_lr, double decay, int decay_every, int epoch) {
    if (epoch < 1) throw std::invalid_argument("scheduled_lr: epoch is 1-based");
    const int steps = (epoch - 1) / decay_every;
    return base_lr * std::pow(decay, static_cast<double>(steps));
}

}  // namespace rvk
