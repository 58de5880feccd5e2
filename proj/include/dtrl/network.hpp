#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtrl/data.hpp"
#include "dtrl/losses.hpp"
#include "dtrl/mlp.hpp"
#include "dtrl/optimizer.hpp"
#include "dtrl/text_encoder.hpp"

namespace dtrl::net {

// sigma(s) is clamped into [1e-7, 1 - 1e-7] before any log of the
// discriminator output; in logit space that is |s| <= log((1-1e-7)/1e-7).
inline const double kDiscLogitClamp = std::log((1.0 - 1e-7) / 1e-7);

struct DTRLConfig {
    std::vector<std::size_t> enc_r_shape = {768, 768, 384, 32};
    std::vector<std::size_t> enc_n_shape = {768, 768, 384, 32};
    std::vector<std::size_t> disc_shape = {64, 128, 256, 1};
    std::size_t num_task_labels = 2;
    std::size_t num_domain_labels = 2;
    std::size_t batch_size = 64;
    double lr = 5e-5;
    double disc_lr = 5e-5;  // Adam step size for D; the paper uses one rate
    double disen_weight = 1.0;  // theta-side coefficient of the adversarial term
    double weight_decay = 0.01;
    std::size_t warmup_steps = 300;
    std::size_t total_steps = 600;
    std::uint64_t seed = 1;
    // Ablation switches: DC and D of the ablation table. With both off the
    // loop degenerates to plain fine-tuning on whatever task data it is fed.
    bool use_domain_head = true;
    bool use_discriminator = true;

    void validate(std::size_t embed_width) const {
        if (enc_r_shape.size() < 2 || enc_n_shape.size() < 2 || disc_shape.size() < 2) {
            throw ConfigError("encoder/discriminator shapes need at least one layer");
        }
        if (enc_r_shape.front() != embed_width || enc_n_shape.front() != embed_width) {
            throw ConfigError("encoder input width must equal the text embedding width");
        }
        if (disc_shape.front() != enc_r_shape.back() + enc_n_shape.back()) {
            throw ConfigError("discriminator input width must equal z_r width + z_n width");
        }
        if (disc_shape.back() != 1) {
            throw ConfigError("discriminator must end in a single output");
        }
        if (num_task_labels < 2 || num_domain_labels < 2) {
            throw ConfigError("label counts must be >= 2");
        }
        if (batch_size < 1) {
            throw ConfigError("batch_size must be >= 1");
        }
        if (use_discriminator && batch_size < 2) {
            throw ConfigError("discriminator training needs batch_size >= 2");
        }
        if (warmup_steps > total_steps) {
            throw ConfigError("warmup_steps must not exceed total_steps");
        }
        if (lr <= 0.0 || disc_lr <= 0.0) {
            throw ConfigError("learning rates must be positive");
        }
    }
};

template <class T>
struct LatentPair {
    nn::Mat<T> z_r;
    nn::Mat<T> z_n;
};

struct LossReport {
    double task_loss = 0.0;
    double domain_loss = 0.0;
    double disen_term = 0.0;
    double disc_loss = 0.0;
    double mi_estimate_rn = 0.0;
};

// Derangement-preferring seeded shuffle: a Fisher-Yates permutation whose
// fixed points are repaired afterwards, so no row stays paired with itself
// (guaranteed for n >= 2).
std::vector<std::size_t> derangement_permutation(std::size_t n, Rng& rng);

// The whole disentangled learning network: E_text, E_r, E_n, C_r, C_n and D
// over one parameter store. theta = everything except D, phi = D.
template <class T>
class DTRLNetwork {
public:
    DTRLNetwork(text::FeaturizerConfig featurizer, std::size_t embed_width, DTRLConfig config)
        : featurizer_(featurizer), embed_width_(embed_width), config_(std::move(config)) {
        featurizer_.validate();
        config_.validate(embed_width_);
        enc_r_spec_ = nn::MLPSpec::rectifier_stack(config_.enc_r_shape, nn::Activation::affine);
        enc_n_spec_ = nn::MLPSpec::rectifier_stack(config_.enc_n_shape, nn::Activation::affine);
        head_r_spec_ = nn::MLPSpec::rectifier_stack(
            {config_.enc_r_shape.back(), config_.num_task_labels}, nn::Activation::affine);
        head_n_spec_ = nn::MLPSpec::rectifier_stack(
            {config_.enc_n_shape.back(), config_.num_domain_labels}, nn::Activation::affine);
        disc_spec_ = nn::MLPSpec::rectifier_stack(config_.disc_shape, nn::Activation::affine);
    }

    // Each sub-network draws from its own named substream, so enabling or
    // disabling one never changes another's initial weights.
    void initialize() {
        Rng etext_rng = substream(config_.seed, "init/etext");
        text::init_text_encoder(params_, featurizer_, embed_width_, "etext", etext_rng);
        Rng enc_r_rng = substream(config_.seed, "init/enc_r");
        nn::init_mlp_params(params_, enc_r_spec_, "enc_r", enc_r_rng);
        Rng head_r_rng = substream(config_.seed, "init/head_r");
        nn::init_mlp_params(params_, head_r_spec_, "head_r", head_r_rng);
        if (config_.use_domain_head) {
            Rng enc_n_rng = substream(config_.seed, "init/enc_n");
            nn::init_mlp_params(params_, enc_n_spec_, "enc_n", enc_n_rng);
            Rng head_n_rng = substream(config_.seed, "init/head_n");
            nn::init_mlp_params(params_, head_n_spec_, "head_n", head_n_rng);
        } else if (config_.use_discriminator) {
            // D needs z_n even when the domain head is ablated.
            Rng enc_n_rng = substream(config_.seed, "init/enc_n");
            nn::init_mlp_params(params_, enc_n_spec_, "enc_n", enc_n_rng);
        }
        if (config_.use_discriminator) {
            Rng disc_rng = substream(config_.seed, "init/disc");
            nn::init_mlp_params(params_, disc_spec_, "disc", disc_rng);
        }
    }

    const DTRLConfig& config() const { return config_; }
    const text::FeaturizerConfig& featurizer() const { return featurizer_; }
    std::size_t embed_width() const { return embed_width_; }
    nn::ParamStore<T>& params() { return params_; }
    const nn::ParamStore<T>& params() const { return params_; }

    const nn::MLPSpec& enc_r_spec() const { return enc_r_spec_; }
    const nn::MLPSpec& enc_n_spec() const { return enc_n_spec_; }
    const nn::MLPSpec& head_r_spec() const { return head_r_spec_; }
    const nn::MLPSpec& head_n_spec() const { return head_n_spec_; }
    const nn::MLPSpec& disc_spec() const { return disc_spec_; }

    std::vector<std::string> theta_names() const {
        std::vector<std::string> names;
        for (const auto& name : params_.names()) {
            if (name.rfind("disc.", 0) != 0) {
                names.push_back(name);
            }
        }
        return names;
    }

    std::vector<std::string> phi_names() const { return params_.names_with_prefix("disc."); }

    bool has_enc_n() const { return params_.contains("enc_n.w0"); }

    // --- forward passes -----------------------------------------------------

    nn::Mat<T> embed(std::span<const std::string> texts, text::EmbedCache<T>* cache = nullptr) const {
        return text::embed_batch(params_, featurizer_, "etext", texts, cache);
    }

    struct LatentForward {
        text::EmbedCache<T> embed;
        nn::MLPCache<T> enc_r_cache;
        nn::MLPCache<T> enc_n_cache;
        nn::Mat<T> z_r;
        nn::Mat<T> z_n;
        bool has_r = false;
        bool has_n = false;
    };

    LatentForward latent_forward(std::span<const std::string> texts, bool need_r,
                                 bool need_n) const {
        LatentForward fwd;
        nn::Mat<T> z = embed(texts, &fwd.embed);
        if (need_r) {
            fwd.z_r = nn::mlp_forward(enc_r_spec_, params_, "enc_r", z, &fwd.enc_r_cache);
            fwd.has_r = true;
        }
        if (need_n) {
            fwd.z_n = nn::mlp_forward(enc_n_spec_, params_, "enc_n", z, &fwd.enc_n_cache);
            fwd.has_n = true;
        }
        return fwd;
    }

    LatentPair<T> encode_latents(std::span<const std::string> texts) const {
        LatentForward fwd = latent_forward(texts, true, has_enc_n());
        return {std::move(fwd.z_r), std::move(fwd.z_n)};
    }

    nn::Mat<T> task_logits(std::span<const std::string> texts) const {
        nn::Mat<T> z = embed(texts);
        nn::Mat<T> z_r = nn::mlp_forward(enc_r_spec_, params_, "enc_r", z);
        return nn::mlp_forward(head_r_spec_, params_, "head_r", z_r);
    }

    int predict(const std::string& text) const {
        const std::string texts[1] = {text};
        nn::Mat<T> logits = task_logits(std::span<const std::string>(texts, 1));
        int best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c) {
            if (logits.data[c] > logits.data[best]) {
                best = static_cast<int>(c);
            }
        }
        return best;
    }

    std::vector<double> predict_probs(const std::string& text) const {
        const std::string texts[1] = {text};
        nn::Mat<T> logits = task_logits(std::span<const std::string>(texts, 1));
        double max_logit = logits.data[0];
        for (std::size_t c = 1; c < logits.cols; ++c) {
            max_logit = std::max(max_logit, static_cast<double>(logits.data[c]));
        }
        double sum = 0.0;
        std::vector<double> probs(logits.cols);
        for (std::size_t c = 0; c < logits.cols; ++c) {
            probs[c] = std::exp(static_cast<double>(logits.data[c]) - max_logit);
            sum += probs[c];
        }
        for (double& p : probs) {
            p /= sum;
        }
        return probs;
    }

    // --- losses ---------------------------------------------------------

    // Cross-entropy of C_r(E_r(E_text(x))) vs y; gradients reach C_r, E_r and
    // E_text when with_grads is set.
    double task_loss(std::span<const std::string> texts, const std::vector<int>& labels,
                     bool with_grads) {
        text::EmbedCache<T> embed_cache;
        nn::Mat<T> z = embed(texts, &embed_cache);
        nn::MLPCache<T> enc_cache;
        nn::Mat<T> z_r = nn::mlp_forward(enc_r_spec_, params_, "enc_r", z, &enc_cache);
        nn::MLPCache<T> head_cache;
        nn::Mat<T> logits = nn::mlp_forward(head_r_spec_, params_, "head_r", z_r, &head_cache);
        auto loss = nn::cross_entropy_loss(logits, labels);
        if (with_grads) {
            nn::Mat<T> dz_r = nn::mlp_backward(head_r_spec_, params_, "head_r", head_cache, loss.grad);
            nn::Mat<T> dz = nn::mlp_backward(enc_r_spec_, params_, "enc_r", enc_cache, dz_r);
            text::embed_backward(params_, "etext", embed_cache, dz);
        }
        return loss.loss;
    }

    // Cross-entropy of C_n(z_n) vs y' on an existing latent forward.
    double domain_loss_on(LatentForward& fwd, const std::vector<int>& domain_labels,
                          bool with_grads) {
        if (!fwd.has_n) {
            throw ContractError("domain_loss_on: forward pass lacks z_n");
        }
        nn::MLPCache<T> head_cache;
        nn::Mat<T> logits =
            nn::mlp_forward(head_n_spec_, params_, "head_n", fwd.z_n, &head_cache);
        auto loss = nn::cross_entropy_loss(logits, domain_labels);
        if (with_grads) {
            nn::Mat<T> dz_n = nn::mlp_backward(head_n_spec_, params_, "head_n", head_cache, loss.grad);
            nn::Mat<T> dz = nn::mlp_backward(enc_n_spec_, params_, "enc_n", fwd.enc_n_cache, dz_n);
            text::embed_backward(params_, "etext", fwd.embed, dz);
        }
        return loss.loss;
    }

    double domain_loss(std::span<const std::string> texts, const std::vector<int>& domain_labels,
                       bool with_grads) {
        LatentForward fwd = latent_forward(texts, false, true);
        return domain_loss_on(fwd, domain_labels, with_grads);
    }

    // Raw discriminator logits s on concatenated [z_r; z_n]; D(pair) = sigma(s)
    // models the probability that the pair came from the marginal product.
    nn::Mat<T> disc_logits(const nn::Mat<T>& z_r, const nn::Mat<T>& z_n,
                           nn::MLPCache<T>* cache = nullptr) const {
        return nn::mlp_forward(disc_spec_, params_, "disc", nn::hconcat(z_r, z_n), cache);
    }

    // -(1/B) sum log D(joint pair): the theta-side objective term of the
    // min-max game. phi stays frozen; gradients flow through z_r and z_n into
    // both encoders and the text encoder, scaled by grad_weight.
    double encoder_adversarial_term_on(LatentForward& fwd, bool with_grads,
                                       double grad_weight = 1.0) {
        if (!fwd.has_r || !fwd.has_n) {
            throw ContractError("encoder_adversarial_term_on: needs both latents");
        }
        nn::MLPCache<T> disc_cache;
        nn::Mat<T> s = disc_logits(fwd.z_r, fwd.z_n, &disc_cache);
        const double inv_b = 1.0 / static_cast<double>(s.rows);
        double term = 0.0;
        nn::Mat<T> ds(s.rows, 1);
        for (std::size_t i = 0; i < s.rows; ++i) {
            const double raw = static_cast<double>(s.data[i]);
            const double clamped = std::clamp(raw, -kDiscLogitClamp, kDiscLogitClamp);
            term += static_cast<double>(nn::softplus(-clamped)) * inv_b;
            const bool saturated = raw <= -kDiscLogitClamp || raw >= kDiscLogitClamp;
            ds.data[i] = saturated
                             ? T(0)
                             : static_cast<T>((1.0 / (1.0 + std::exp(-clamped)) - 1.0) * inv_b *
                                              grad_weight);
        }
        if (with_grads) {
            nn::Mat<T> dcat =
                nn::mlp_backward(disc_spec_, params_, "disc", disc_cache, ds,
                                 /*accumulate_param_grads=*/false);
            const std::size_t r_width = fwd.z_r.cols;
            nn::Mat<T> dz_r(dcat.rows, r_width);
            nn::Mat<T> dz_n(dcat.rows, dcat.cols - r_width);
            for (std::size_t i = 0; i < dcat.rows; ++i) {
                for (std::size_t j = 0; j < r_width; ++j) {
                    dz_r(i, j) = dcat(i, j);
                }
                for (std::size_t j = r_width; j < dcat.cols; ++j) {
                    dz_n(i, j - r_width) = dcat(i, j);
                }
            }
            nn::Mat<T> dz_a = nn::mlp_backward(enc_r_spec_, params_, "enc_r", fwd.enc_r_cache, dz_r);
            nn::Mat<T> dz_b = nn::mlp_backward(enc_n_spec_, params_, "enc_n", fwd.enc_n_cache, dz_n);
            for (std::size_t i = 0; i < dz_a.data.size(); ++i) {
                dz_a.data[i] += dz_b.data[i];
            }
            text::embed_backward(params_, "etext", fwd.embed, dz_a);
        }
        return term;
    }

    // Value-only readout of the same term on frozen latents.
    double disen_term_value(const nn::Mat<T>& z_r, const nn::Mat<T>& z_n) const {
        nn::Mat<T> s = disc_logits(z_r, z_n);
        double term = 0.0;
        for (std::size_t i = 0; i < s.rows; ++i) {
            const double clamped =
                std::clamp(static_cast<double>(s.data[i]), -kDiscLogitClamp, kDiscLogitClamp);
            term += static_cast<double>(nn::softplus(-clamped));
        }
        return term / static_cast<double>(s.rows);
    }

    // L_phi = (1/B) sum_j [ -log(1 - D(joint_j)) ] + (1/B) sum_k [ -log D(shuffled_k) ].
    // Latents are constants here; only the discriminator accumulates grads.
    double discriminator_loss(const LatentPair<T>& joint, const LatentPair<T>& shuffled,
                              bool with_grads) {
        nn::check_same_shape(joint.z_r, shuffled.z_r, "discriminator_loss");
        nn::check_same_shape(joint.z_n, shuffled.z_n, "discriminator_loss");
        nn::MLPCache<T> joint_cache;
        nn::Mat<T> s_joint = disc_logits(joint.z_r, joint.z_n, &joint_cache);
        nn::MLPCache<T> shuf_cache;
        nn::Mat<T> s_shuf = disc_logits(shuffled.z_r, shuffled.z_n, &shuf_cache);

        const std::vector<int> zeros(s_joint.rows, 0);
        const std::vector<int> ones(s_shuf.rows, 1);
        auto joint_loss = nn::binary_logistic_loss(s_joint, zeros);
        auto shuf_loss = nn::binary_logistic_loss(s_shuf, ones);
        if (with_grads) {
            nn::mlp_backward(disc_spec_, params_, "disc", joint_cache, joint_loss.grad);
            nn::mlp_backward(disc_spec_, params_, "disc", shuf_cache, shuf_loss.grad);
        }
        return joint_loss.loss + shuf_loss.loss;
    }

    // Density-ratio readout: I(Z^r;Z^n) ~= mean over joint pairs of
    // log[(1-D)/D] = -s. Reported, never optimized directly.
    double estimate_mi_rn(const nn::Mat<T>& z_r, const nn::Mat<T>& z_n) const {
        nn::Mat<T> s = disc_logits(z_r, z_n);
        double total = 0.0;
        for (std::size_t i = 0; i < s.rows; ++i) {
            total -= std::clamp(static_cast<double>(s.data[i]), -kDiscLogitClamp, kDiscLogitClamp);
        }
        return total / static_cast<double>(s.rows);
    }

    double estimate_mi_rn(std::span<const std::string> texts) const {
        LatentPair<T> pair = encode_latents(texts);
        return estimate_mi_rn(pair.z_r, pair.z_n);
    }

private:
    text::FeaturizerConfig featurizer_;
    std::size_t embed_width_;
    DTRLConfig config_;
    nn::ParamStore<T> params_;
    nn::MLPSpec enc_r_spec_, enc_n_spec_, head_r_spec_, head_n_spec_, disc_spec_;
};

// z_r rows stay put, z_n rows are permuted by a derangement-preferring seeded
// shuffle: an approximate sample from p(z_r) p(z_n). B must be >= 2.
template <class T>
LatentPair<T> marginal_resample(const LatentPair<T>& pair, Rng& rng) {
    if (pair.z_r.rows != pair.z_n.rows) {
        throw DimensionError("marginal_resample: latent row counts disagree");
    }
    if (pair.z_r.rows < 2) {
        throw ValidationError("marginal_resample: batch of 1 cannot be decoupled");
    }
    const std::vector<std::size_t> perm = derangement_permutation(pair.z_r.rows, rng);
    return {pair.z_r, nn::permute_rows(pair.z_n, perm)};
}

// Classifier form of the variational lower bound on I(Z;Y):
// H(Y) - mean cross-entropy, with H(Y) taken from empirical label
// frequencies. Can be <= 0 (and is, for a single-class batch).
double variational_bound(const std::vector<int>& labels, std::size_t num_classes,
                         double mean_cross_entropy);

template <class T>
double variational_bound_iy(const nn::Mat<T>& logits, const std::vector<int>& labels) {
    auto ce = nn::cross_entropy_loss(logits, labels);
    return variational_bound(labels, logits.cols, ce.loss);
}

}  // namespace dtrl::net
