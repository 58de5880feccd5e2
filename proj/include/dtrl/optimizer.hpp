#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dtrl/param_store.hpp"

namespace dtrl::nn {

enum class OptimKind { adam, adamw };

struct OptimConfig {
    OptimKind kind = OptimKind::adamw;
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;  // adamw only; adam ignores it

    void validate() const {
        if (lr <= 0.0) {
            throw ConfigError("optimizer lr must be positive");
        }
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
            throw ConfigError("optimizer betas must lie in [0, 1)");
        }
        if (eps <= 0.0) {
            throw ConfigError("optimizer eps must be positive");
        }
    }
};

// Bias-corrected adaptive-moment update over the named entries (all entries
// when `names` is empty). adamw applies decoupled weight decay on top.
template <class T>
void optimizer_step(ParamStore<T>& params, const OptimConfig& config,
                    const std::vector<std::string>& names = {}) {
    config.validate();
    const std::vector<std::string>& targets = names.empty() ? params.names() : names;
    for (const auto& name : targets) {
        Param<T>& p = params.at(name);
        if (p.adam_m.data.empty()) {
            p.adam_m = Mat<T>(p.value.rows, p.value.cols);
            p.adam_v = Mat<T>(p.value.rows, p.value.cols);
        }
        const std::int64_t t = ++p.steps;
        const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double g = static_cast<double>(p.grad.data[i]);
            const double m = config.beta1 * static_cast<double>(p.adam_m.data[i]) +
                             (1.0 - config.beta1) * g;
            const double v = config.beta2 * static_cast<double>(p.adam_v.data[i]) +
                             (1.0 - config.beta2) * g * g;
            p.adam_m.data[i] = static_cast<T>(m);
            p.adam_v.data[i] = static_cast<T>(v);
            double update = (m / bc1) / (std::sqrt(v / bc2) + config.eps);
            if (config.kind == OptimKind::adamw) {
                update += config.weight_decay * static_cast<double>(p.value.data[i]);
            }
            p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) -
                                             config.lr * update);
        }
    }
    ++params.step_count;
}

}  // namespace dtrl::nn
