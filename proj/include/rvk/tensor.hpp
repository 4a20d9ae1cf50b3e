#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rvk {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major f64 tensor with an optional gradient slot. Operations on
// tensors record a dynamic graph while grad mode is enabled; backward() on a
// scalar walks that graph in reverse topological order and accumulates
// gradients additively into every reachable tensor that wants one.
class Tensor : public std::enable_shared_from_this<Tensor> {
public:
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first touched; same size as data after
    bool requires_grad = false;

    std::vector<TensorPtr> parents;
    std::function<void()> backward_fn;  // pulls this->grad into parents
    std::string name;

    Tensor(std::vector<int> shape_in, bool req_grad);
    Tensor(std::vector<int> shape_in, std::vector<double> data_in, bool req_grad = false);

    static TensorPtr create(std::vector<int> shape, bool requires_grad = false);
    static TensorPtr from_data(std::vector<int> shape, std::vector<double> data,
                               bool requires_grad = false);
    static TensorPtr scalar(double v);

    std::size_t size() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    /// Value of a single-element tensor.
    double item() const;

    bool recorded() const { return backward_fn != nullptr || !parents.empty(); }
    bool wants_grad() const { return requires_grad || recorded(); }

    void ensure_grad();
    void zero_grad();
    void accumulate_grad(const double* g, std::size_t n);

    /// Reverse-mode sweep from a scalar with recorded history.
    void backward();
};

std::size_t shape_product(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Grad mode is thread-local; inference paths disable recording to avoid
// building graphs they will never walk.
bool grad_mode_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

}  // namespace rvk
