#include "rvk/ops.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

#include "rvk/kernels.hpp"

namespace rvk {

namespace {

// Ops record parents and a backward closure while grad mode is on. The
// closure captures the output node raw (it lives on that node) and the
// inputs shared, and accumulates only into tensors that want gradients.
void record(const TensorPtr& out, std::vector<TensorPtr> parents, std::function<void()> fn) {
    if (!grad_mode_enabled()) return;
    out->parents = std::move(parents);
    out->backward_fn = std::move(fn);
}

}  // namespace

TensorPtr conv2d(const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias,
                 int stride, int padding) {
    if (input->rank() != 3) throw std::invalid_argument("conv2d: input must be rank 3, got " + shape_str(input->shape));
    if (weight->rank() != 4) throw std::invalid_argument("conv2d: weight must be rank 4, got " + shape_str(weight->shape));
    if (bias->rank() != 1 || bias->dim(0) != weight->dim(0)) {
        throw std::invalid_argument("conv2d: bias shape " + shape_str(bias->shape) + " does not match C_out " +
                                    std::to_string(weight->dim(0)));
    }
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    if (padding < 0) throw std::invalid_argument("conv2d: padding must be >= 0");
    const int C_in = input->dim(0), H = input->dim(1), W = input->dim(2);
    const int C_out = weight->dim(0), kh = weight->dim(2), kw = weight->dim(3);
    if (weight->dim(1) != C_in) {
        throw std::invalid_argument("conv2d: input channels " + shape_str(input->shape) +
                                    " do not match weight " + shape_str(weight->shape));
    }
    if (kh > H + 2 * padding || kw > W + 2 * padding) {
        throw std::invalid_argument("conv2d: kernel " + shape_str(weight->shape) + " larger than padded input " +
                                    shape_str(input->shape));
    }
    const int OH = kernels::conv_out_dim(H, kh, stride, padding);
    const int OW = kernels::conv_out_dim(W, kw, stride, padding);

    auto out = Tensor::create({C_out, OH, OW});
    kernels::conv2d_forward(input->data.data(), weight->data.data(), bias->data.data(), out->data.data(),
                            C_in, H, W, C_out, kh, kw, stride, padding);

    Tensor* o = out.get();
    record(out, {input, weight, bias}, [o, input, weight, bias, stride, padding, C_in, H, W, C_out, kh, kw]() {
        weight->ensure_grad();
        bias->ensure_grad();
        double* in_grad = nullptr;
        if (input->wants_grad()) {
            input->ensure_grad();
            in_grad = input->grad.data();
        }
        kernels::conv2d_backward(input->data.data(), weight->data.data(), o->grad.data(), in_grad,
                                 weight->grad.data(), bias->grad.data(), C_in, H, W, C_out, kh, kw, stride,
                                 padding);
    });
    return out;
}

TensorPtr relu(const TensorPtr& input) {
    auto out = Tensor::create(input->shape);
    const std::size_t n = input->size();
    const double* x = input->data.data();
    double* y = out->data.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const double v = x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(i)] = v > 0.0 ? v : 0.0;
    }

    Tensor* o = out.get();
    record(out, {input}, [o, input, n]() {
        if (!input->wants_grad()) return;
        input->ensure_grad();
        const double* x = input->data.data();
        const double* g = o->grad.data();
        double* ig = input->grad.data();
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (x[k] > 0.0) ig[k] += g[k];
        }
    });
    return out;
}

TensorPtr fully_connected(const TensorPtr& input, const TensorPtr& weight, const TensorPtr& bias) {
    if (input->rank() != 1 || weight->rank() != 2 || bias->rank() != 1) {
        throw std::invalid_argument("fully_connected: expects input rank 1, weight rank 2, bias rank 1");
    }
    const int N = input->dim(0), M = weight->dim(0);
    if (weight->dim(1) != N) {
        throw std::invalid_argument("fully_connected: weight " + shape_str(weight->shape) +
                                    " does not match input " + shape_str(input->shape));
    }
    if (bias->dim(0) != M) {
        throw std::invalid_argument("fully_connected: bias " + shape_str(bias->shape) + " does not match rows " +
                                    std::to_string(M));
    }
    auto out = Tensor::create({M});
    const double* x = input->data.data();
    const double* w = weight->data.data();
    const double* b = bias->data.data();
    double* y = out->data.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        const double* wr = w + static_cast<std::size_t>(i) * N;
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (int j = 0; j < N; ++j) acc += wr[j] * x[j];
        y[i] = acc + b[i];
    }

    Tensor* o = out.get();
    record(out, {input, weight, bias}, [o, input, weight, bias, M, N]() {
        const double* g = o->grad.data();
        if (weight->wants_grad()) {
            weight->ensure_grad();
            double* wg = weight->grad.data();
            const double* x = input->data.data();
            for (int i = 0; i < M; ++i) {
                double* wrow = wg + static_cast<std::size_t>(i) * N;
                const double gi = g[i];
                for (int j = 0; j < N; ++j) wrow[j] += gi * x[j];
            }
        }
        if (bias->wants_grad()) {
            bias->ensure_grad();
            for (int i = 0; i < M; ++i) bias->grad[i] += g[i];
        }
        if (input->wants_grad()) {
            input->ensure_grad();
            const double* w = weight->data.data();
            for (int j = 0; j < N; ++j) {
                double acc = 0.0;
                for (int i = 0; i < M; ++i) acc += w[static_cast<std::size_t>(i) * N + j] * g[i];
                input->grad[j] += acc;
            }
        }
    });
    return out;
}

TensorPtr concat(const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: part list is empty");
    int total = 0;
    for (const auto& p : parts) {
        if (p->rank() != 1) throw std::invalid_argument("concat: all parts must be rank 1, got " + shape_str(p->shape));
        total += p->dim(0);
    }
    auto out = Tensor::create({total});
    int off = 0;
    for (const auto& p : parts) {
        std::memcpy(out->data.data() + off, p->data.data(), p->size() * sizeof(double));
        off += p->dim(0);
    }

    Tensor* o = out.get();
    record(out, parts, [o, parts]() {
        int off = 0;
        for (const auto& p : parts) {
            const int n = p->dim(0);
            if (p->wants_grad()) {
                p->ensure_grad();
                for (int i = 0; i < n; ++i) p->grad[i] += o->grad[off + i];
            }
            off += n;
        }
    });
    return out;
}

TensorPtr slice(const TensorPtr& input, int begin, int end) {
    if (input->rank() != 1) throw std::invalid_argument("slice: input must be rank 1");
    if (begin < 0 || end > input->dim(0) || begin >= end) {
        throw std::invalid_argument("slice: invalid range [" + std::to_string(begin) + "," + std::to_string(end) +
                                    ") for length " + std::to_string(input->dim(0)));
    }
    auto out = Tensor::create({end - begin});
    std::memcpy(out->data.data(), input->data.data() + begin, out->size() * sizeof(double));

    Tensor* o = out.get();
    record(out, {input}, [o, input, begin]() {
        if (!input->wants_grad()) return;
        input->ensure_grad();
        for (std::size_t i = 0; i < o->size(); ++i) input->grad[begin + i] += o->grad[i];
    });
    return out;
}

TensorPtr reshape(const TensorPtr& input, std::vector<int> shape) {
    if (shape_product(shape) != input->size()) {
        throw std::invalid_argument("reshape: size mismatch " + shape_str(input->shape) + " -> " +
                                    shape_str(shape));
    }
    auto out = Tensor::from_data(std::move(shape), input->data);
    Tensor* o = out.get();
    record(out, {input}, [o, input]() {
        if (input->wants_grad()) input->accumulate_grad(o->grad.data(), o->size());
    });
    return out;
}

TensorPtr mse_loss(const TensorPtr& pred, const TensorPtr& target) {
    if (pred->shape != target->shape) {
        throw std::invalid_argument("mse_loss: shape mismatch " + shape_str(pred->shape) + " vs " +
                                    shape_str(target->shape));
    }
    const std::size_t n = pred->size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred->data[i] - target->data[i];
        acc += d * d;
    }
    auto out = Tensor::scalar(acc / static_cast<double>(n));

    Tensor* o = out.get();
    record(out, {pred, target}, [o, pred, target, n]() {
        const double g = o->grad[0] * 2.0 / static_cast<double>(n);
        if (pred->wants_grad()) {
            pred->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pred->grad[i] += g * (pred->data[i] - target->data[i]);
        }
        if (target->wants_grad()) {
            target->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) target->grad[i] -= g * (pred->data[i] - target->data[i]);
        }
    });
    return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape) {
        throw std::invalid_argument("add: shape mismatch " + shape_str(a->shape) + " vs " + shape_str(b->shape));
    }
    auto out = Tensor::create(a->shape);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] + b->data[i];

    Tensor* o = out.get();
    record(out, {a, b}, [o, a, b]() {
        if (a->wants_grad()) a->accumulate_grad(o->grad.data(), o->size());
        if (b->wants_grad()) b->accumulate_grad(o->grad.data(), o->size());
    });
    return out;
}

TensorPtr scale(const TensorPtr& input, double factor) {
    auto out = Tensor::create(input->shape);
    for (std::size_t i = 0; i < input->size(); ++i) out->data[i] = input->data[i] * factor;

    Tensor* o = out.get();
    record(out, {input}, [o, input, factor]() {
        if (!input->wants_grad()) return;
        input->ensure_grad();
        for (std::size_t i = 0; i < o->size(); ++i) input->grad[i] += factor * o->grad[i];
    });
    return out;
}

}  // namespace rvk
