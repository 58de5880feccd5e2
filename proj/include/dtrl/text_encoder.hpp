#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtrl/errors.hpp"
#include "dtrl/mat.hpp"
#include "dtrl/mlp.hpp"
#include "dtrl/param_store.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::text {

struct FeaturizerConfig {
    int ngram_min = 2;
    int ngram_max = 3;
    std::uint32_t hash_buckets = 2048;
    bool lowercase = true;

    void validate() const {
        if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 6) {
            throw ConfigError("ngram range must satisfy 1 <= min <= max <= 6");
        }
        if (hash_buckets < 256) {
            throw ConfigError("hash_buckets must be >= 256");
        }
    }
};

// Sparse count vector over hash buckets; indices strictly increasing.
struct SparseVec {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
    double l2_norm() const {
        double s = 0.0;
        for (double v : value) {
            s += v * v;
        }
        return std::sqrt(s);
    }
};

// ASCII lowercasing plus whitespace collapsing; words end up joined by single
// spaces so that cross-word n-grams see exactly one boundary character.
std::string normalize_text(const std::string& text, bool lowercase);

// Hashed character n-gram counts of the normalized text. The hash is FNV-1a
// 64-bit reduced modulo hash_buckets and is fixed forever; changing it would
// silently invalidate every stored model.
SparseVec featurize(const FeaturizerConfig& config, const std::string& text);

inline std::string encoder_weight_name(const std::string& prefix) { return prefix + ".w"; }
inline std::string encoder_bias_name(const std::string& prefix) { return prefix + ".b"; }

template <class T>
void init_text_encoder(nn::ParamStore<T>& params, const FeaturizerConfig& config,
                       std::size_t embed_width, const std::string& prefix, Rng& rng) {
    config.validate();
    if (embed_width == 0) {
        throw ConfigError("embed width must be positive");
    }
    const std::size_t fan_in = config.hash_buckets;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + embed_width));
    nn::Mat<T> w(fan_in, embed_width);
    for (auto& v : w.data) {
        v = static_cast<T>(rng.uniform(-limit, limit));
    }
    params.add(encoder_weight_name(prefix), std::move(w));
    params.add(encoder_bias_name(prefix), nn::Mat<T>(1, embed_width));
}

template <class T>
struct EmbedCache {
    std::vector<SparseVec> inputs;  // L2-normalized
    nn::Mat<T> out;                 // post-rectifier embeddings
};

// z = relu(W^T x + b) over L2-normalized hashed n-gram counts; one batch row
// per text.
template <class T>
nn::Mat<T> embed_batch(const nn::ParamStore<T>& params, const FeaturizerConfig& config,
                       const std::string& prefix, std::span<const std::string> texts,
                       EmbedCache<T>* cache = nullptr) {
    const nn::Mat<T>& w = params.at(encoder_weight_name(prefix)).value;
    const nn::Mat<T>& b = params.at(encoder_bias_name(prefix)).value;
    const std::size_t width = w.cols;
    nn::Mat<T> out(texts.size(), width);
    if (cache) {
        cache->inputs.clear();
        cache->inputs.reserve(texts.size());
    }
    for (std::size_t row = 0; row < texts.size(); ++row) {
        SparseVec x = featurize(config, texts[row]);
        const double norm = x.l2_norm();
        for (double& v : x.value) {
            v /= norm;
        }
        T* orow = out.row_ptr(row);
        for (std::size_t j = 0; j < width; ++j) {
            orow[j] = b.data[j];
        }
        for (std::size_t k = 0; k < x.nnz(); ++k) {
            const T xv = static_cast<T>(x.value[k]);
            const T* wrow = w.row_ptr(x.index[k]);
            for (std::size_t j = 0; j < width; ++j) {
                orow[j] += xv * wrow[j];
            }
        }
        for (std::size_t j = 0; j < width; ++j) {
            if (orow[j] < T(0)) {
                orow[j] = T(0);
            }
        }
        if (cache) {
            cache->inputs.push_back(std::move(x));
        }
    }
    if (cache) {
        cache->out = out;
    }
    return out;
}

// Accumulates gradients into the encoder's affine parameters. Inputs are
// data, so no gradient is produced for them.
template <class T>
void embed_backward(nn::ParamStore<T>& params, const std::string& prefix,
                    const EmbedCache<T>& cache, const nn::Mat<T>& grad_out) {
    nn::check_same_shape(grad_out, cache.out, "embed_backward");
    nn::Param<T>& w = params.at(encoder_weight_name(prefix));
    nn::Param<T>& b = params.at(encoder_bias_name(prefix));
    const std::size_t width = w.value.cols;
    for (std::size_t row = 0; row < grad_out.rows; ++row) {
        const T* g = grad_out.row_ptr(row);
        const T* post = cache.out.row_ptr(row);
        std::vector<T> masked(width);
        for (std::size_t j = 0; j < width; ++j) {
            masked[j] = post[j] > T(0) ? g[j] : T(0);
            b.grad.data[j] += masked[j];
        }
        const SparseVec& x = cache.inputs[row];
        for (std::size_t k = 0; k < x.nnz(); ++k) {
            const T xv = static_cast<T>(x.value[k]);
            T* wgrow = w.grad.row_ptr(x.index[k]);
            for (std::size_t j = 0; j < width; ++j) {
                wgrow[j] += xv * masked[j];
            }
        }
    }
}

// Single-text convenience wrapper.
template <class T>
std::vector<T> encode(const nn::ParamStore<T>& params, const FeaturizerConfig& config,
                      const std::string& prefix, const std::string& text) {
    const std::string texts[1] = {text};
    nn::Mat<T> out = embed_batch(params, config, prefix, std::span<const std::string>(texts, 1));
    return out.data;
}

}  // namespace dtrl::text
