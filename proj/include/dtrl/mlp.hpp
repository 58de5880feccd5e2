#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dtrl/mat.hpp"
#include "dtrl/param_store.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::nn {

enum class Activation { affine, rectifier, logistic };

// Layer widths plus one activation tag per layer. widths = {in, h1, ..., out}.
struct MLPSpec {
    std::vector<std::size_t> widths;
    std::vector<Activation> activations;

    void validate() const {
        if (widths.size() < 2) {
            throw DimensionError("MLPSpec needs at least one layer");
        }
        if (activations.size() != widths.size() - 1) {
            throw DimensionError("MLPSpec: one activation per layer required");
        }
        for (std::size_t w : widths) {
            if (w == 0) {
                throw DimensionError("MLPSpec: zero-width layer");
            }
        }
    }

    std::size_t layer_count() const { return activations.size(); }
    std::size_t input_width() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }

    // Hidden layers rectified, final layer as given.
    static MLPSpec rectifier_stack(std::vector<std::size_t> widths, Activation final_act) {
        MLPSpec spec;
        spec.widths = std::move(widths);
        spec.activations.assign(spec.widths.size() - 1, Activation::rectifier);
        spec.activations.back() = final_act;
        spec.validate();
        return spec;
    }
};

inline std::string weight_name(const std::string& prefix, std::size_t layer) {
    return prefix + ".w" + std::to_string(layer);
}
inline std::string bias_name(const std::string& prefix, std::size_t layer) {
    return prefix + ".b" + std::to_string(layer);
}

// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases. Draw order is
// layer-by-layer, row-major, so a given (seed, spec) always yields the same
// parameters.
template <class T>
void init_mlp_params(ParamStore<T>& params, const MLPSpec& spec, const std::string& prefix,
                     Rng& rng) {
    spec.validate();
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        const std::size_t fan_in = spec.widths[layer];
        const std::size_t fan_out = spec.widths[layer + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Mat<T> w(fan_in, fan_out);
        for (auto& v : w.data) {
            v = static_cast<T>(rng.uniform(-limit, limit));
        }
        params.add(weight_name(prefix, layer), std::move(w));
        params.add(bias_name(prefix, layer), Mat<T>(1, fan_out));
    }
}

// Post-activation outputs per layer; enough to rebuild any gradient
// (rectifier masks come from sign of output, logistic from y(1-y)).
template <class T>
struct MLPCache {
    Mat<T> input;
    std::vector<Mat<T>> post;
};

template <class T>
Mat<T> mlp_forward(const MLPSpec& spec, const ParamStore<T>& params, const std::string& prefix,
                   const Mat<T>& input, MLPCache<T>* cache = nullptr) {
    spec.validate();
    if (input.cols != spec.input_width()) {
        throw DimensionError("mlp_forward(" + prefix + "): input width " +
                             std::to_string(input.cols) + " != spec " +
                             std::to_string(spec.input_width()));
    }
    if (cache) {
        cache->input = input;
        cache->post.clear();
        cache->post.reserve(spec.layer_count());
    }
    Mat<T> x = input;
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        Mat<T> y = matmul(x, params.at(weight_name(prefix, layer)).value);
        add_bias_rows(y, params.at(bias_name(prefix, layer)).value);
        switch (spec.activations[layer]) {
            case Activation::affine:
                break;
            case Activation::rectifier:
                for (auto& v : y.data) {
                    if (v < T(0)) {
                        v = T(0);
                    }
                }
                break;
            case Activation::logistic:
                for (auto& v : y.data) {
                    v = T(1) / (T(1) + std::exp(-v));
                }
                break;
        }
        if (cache) {
            cache->post.push_back(y);
        }
        x = std::move(y);
    }
    return x;
}

// Accumulates parameter gradients (unless accumulate_param_grads is false,
// used when a frozen network only relays gradients) and returns the gradient
// w.r.t. the input.
template <class T>
Mat<T> mlp_backward(const MLPSpec& spec, ParamStore<T>& params, const std::string& prefix,
                    const MLPCache<T>& cache, const Mat<T>& grad_output,
                    bool accumulate_param_grads = true) {
    spec.validate();
    if (cache.post.size() != spec.layer_count()) {
        throw ContractError("mlp_backward(" + prefix + "): cache does not match spec");
    }
    Mat<T> delta = grad_output;
    for (std::size_t layer = spec.layer_count(); layer-- > 0;) {
        const Mat<T>& post = cache.post[layer];
        check_same_shape(delta, post, "mlp_backward");
        switch (spec.activations[layer]) {
            case Activation::affine:
                break;
            case Activation::rectifier:
                for (std::size_t i = 0; i < delta.data.size(); ++i) {
                    if (post.data[i] <= T(0)) {
                        delta.data[i] = T(0);
                    }
                }
                break;
            case Activation::logistic:
                for (std::size_t i = 0; i < delta.data.size(); ++i) {
                    delta.data[i] *= post.data[i] * (T(1) - post.data[i]);
                }
                break;
        }
        const Mat<T>& layer_in = layer == 0 ? cache.input : cache.post[layer - 1];
        if (accumulate_param_grads) {
            Mat<T> dw = matmul_at_b(layer_in, delta);
            Param<T>& w = params.at(weight_name(prefix, layer));
            for (std::size_t i = 0; i < dw.data.size(); ++i) {
                w.grad.data[i] += dw.data[i];
            }
            Mat<T> db = column_sums(delta);
            Param<T>& b = params.at(bias_name(prefix, layer));
            for (std::size_t i = 0; i < db.data.size(); ++i) {
                b.grad.data[i] += db.data[i];
            }
        }
        delta = matmul_a_bt(delta, params.at(weight_name(prefix, layer)).value);
    }
    return delta;
}

}  // namespace dtrl::nn
