#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtrl/param_store.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::nn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_name;
    std::size_t worst_index = 0;
    int probes = 0;
};

// loss_fn(params, accumulate) must recompute the forward pass from scratch
// and, when `accumulate` is true, leave analytic gradients in the store.
// Runs in 64-bit; callers instantiate their networks with double before
// checking. Probes are drawn from `names` (all entries when empty).
inline GradCheckResult gradient_check(
    ParamStore<double>& params,
    const std::function<double(ParamStore<double>&, bool)>& loss_fn, int probe_count, Rng& rng,
    const std::vector<std::string>& names = {}) {
    const double h = 1e-5;
    const std::vector<std::string>& targets = names.empty() ? params.names() : names;
    if (targets.empty()) {
        throw ContractError("gradient_check: no parameters to probe");
    }

    params.zero_grads();
    loss_fn(params, true);
    std::unordered_map<std::string, Mat<double>> analytic;
    for (const auto& name : targets) {
        analytic.emplace(name, params.at(name).grad);
    }

    GradCheckResult result;
    for (int probe = 0; probe < probe_count; ++probe) {
        const std::string& name = targets[rng.index(targets.size())];
        Param<double>& p = params.at(name);
        const std::size_t idx = rng.index(p.value.data.size());
        const double saved = p.value.data[idx];

        p.value.data[idx] = saved + h;
        const double f_plus = loss_fn(params, false);
        p.value.data[idx] = saved - h;
        const double f_minus = loss_fn(params, false);
        p.value.data[idx] = saved;

        const double numeric = (f_plus - f_minus) / (2.0 * h);
        const double a = analytic.at(name).data[idx];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        const double rel = std::abs(a - numeric) / denom;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_name = name;
            result.worst_index = idx;
        }
        ++result.probes;
    }
    return result;
}

}  // namespace dtrl::nn
