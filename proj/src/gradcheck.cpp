#include "rvk/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rvk/util.hpp"

namespace rvk {

GradCheckResult grad_check(const GraphBuilder& builder, const std::vector<TensorPtr>& inputs,
                           double eps, std::size_t max_elements_per_tensor, std::uint64_t sample_seed,
                           const std::function<std::uint64_t()>& signature) {
    if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");

    for (auto& t : inputs) t->zero_grad();
    TensorPtr loss = builder(inputs);
    const std::uint64_t base_sig = signature ? signature() : 0;
    loss->backward();

    GradCheckResult result;
    Rng rng(sample_seed);
    for (auto& t : inputs) {
        std::vector<std::size_t> idx(t->size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (max_elements_per_tensor > 0 && idx.size() > max_elements_per_tensor) {
            rng.shuffle(idx);
            idx.resize(max_elements_per_tensor);
            std::sort(idx.begin(), idx.end());
        }
        const std::vector<double> analytic =
            t->grad.size() == t->size() ? t->grad : std::vector<double>(t->size(), 0.0);
        for (std::size_t i : idx) {
            const double saved = t->data[i];
            t->data[i] = saved + eps;
            const double up = builder(inputs)->item();
            const std::uint64_t sig_up = signature ? signature() : 0;
            t->data[i] = saved - eps;
            const double down = builder(inputs)->item();
            const std::uint64_t sig_down = signature ? signature() : 0;
            t->data[i] = saved;
            if (signature && (sig_up != base_sig || sig_down != base_sig)) {
                ++result.skipped_kinks;
                continue;
            }
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[i];
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                ++result.non_finite;
                continue;
            }
            const double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
            result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
            ++result.checked;
        }
    }
    return result;
}

}  // namespace rvk
