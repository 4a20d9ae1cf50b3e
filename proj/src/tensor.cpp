#include "rvk/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "rvk/util.hpp"

namespace rvk {

std::size_t shape_product(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor shape must be positive, got " + shape_str(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<int> shape_in, bool req_grad)
    : shape(std::move(shape_in)), data(shape_product(shape), 0.0), requires_grad(req_grad) {}

Tensor::Tensor(std::vector<int> shape_in, std::vector<double> data_in, bool req_grad)
    : shape(std::move(shape_in)), data(std::move(data_in)), requires_grad(req_grad) {
    if (data.size() != shape_product(shape)) {
        throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_str(shape));
    }
}

TensorPtr Tensor::create(std::vector<int> shape, bool requires_grad) {
    return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    return std::make_shared<Tensor>(std::move(shape), std::move(data), requires_grad);
}

TensorPtr Tensor::scalar(double v) {
    return from_data({1}, {v});
}

double Tensor::item() const {
    if (size() != 1) {
        throw std::invalid_argument("item() requires a single-element tensor, shape is " + shape_str(shape));
    }
    return data[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

void Tensor::accumulate_grad(const double* g, std::size_t n) {
    if (n != data.size()) {
        throw std::invalid_argument("gradient length " + std::to_string(n) + " does not match tensor size " +
                                    std::to_string(data.size()));
    }
    ensure_grad();
    for (std::size_t i = 0; i < n; ++i) grad[i] += g[i];
}

namespace {

// Post-order over parents; parent order is fixed by op construction so the
// sweep is deterministic for a fixed graph.
void topo_sort(Tensor* root, std::vector<Tensor*>& order) {
    std::unordered_set<Tensor*> seen;
    std::vector<std::pair<Tensor*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor* p = node->parents[next++].get();
            if (p->recorded() && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace

void Tensor::backward() {
    if (size() != 1) {
        throw std::invalid_argument("backward() requires a scalar loss, shape is " + shape_str(shape));
    }
    if (!recorded()) {
        throw std::invalid_argument("backward() called on a tensor with no recorded history");
    }
    std::vector<Tensor*> order;
    topo_sort(this, order);

    ensure_grad();
    grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Tensor* node = *it;
        if (node->backward_fn) node->backward_fn();
    }
}

namespace {
thread_local bool g_grad_mode = true;
}

bool grad_mode_enabled() { return g_grad_mode; }

NoGradGuard::NoGradGuard() : prev_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = prev_; }

}  // namespace rvk
