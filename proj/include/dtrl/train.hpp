#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dtrl/data.hpp"
#include "dtrl/network.hpp"

namespace dtrl::net {

// Deals out shuffled indices; reshuffles whenever the deck runs dry, so a
// batch may straddle an epoch boundary but never repeats an index within one
// pass through the data.
class EpochSampler {
public:
    EpochSampler(std::size_t n, Rng rng) : rng_(rng), indices_(n), pos_(n) {
        std::iota(indices_.begin(), indices_.end(), std::size_t(0));
    }

    std::vector<std::size_t> next(std::size_t batch) {
        std::vector<std::size_t> out;
        out.reserve(batch);
        while (out.size() < batch) {
            if (pos_ == indices_.size()) {
                rng_.shuffle(indices_);
                pos_ = 0;
            }
            out.push_back(indices_[pos_++]);
        }
        return out;
    }

private:
    Rng rng_;
    std::vector<std::size_t> indices_;
    std::size_t pos_;
};

struct TrainOptions {
    bool record_batches = false;
};

struct TrainTrace {
    std::vector<LossReport> steps;
    // Only filled when record_batches is set.
    std::vector<std::vector<std::size_t>> task_batches;
    std::vector<std::vector<std::size_t>> domain_batches;
};

namespace detail {

inline std::vector<std::string> gather_texts(const std::vector<data::Example>& examples,
                                             const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(examples[i].text);
    }
    return out;
}

inline std::vector<int> gather_ids(const std::vector<int>& ids,
                                   const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(ids[i]);
    }
    return out;
}

}  // namespace detail

// Algorithm: warmup first (supervised heads + discriminator, no adversarial
// term), then per step one theta update followed by one phi update.
//
//   theta step: L_theta = L_task(task batch)
//             [ + L_dom(domain batch) ]            when the domain head is on
//             [ - (1/B) sum log D(joint latents) ] when D is on, after warmup
//   phi step:   resample z_n on the batch axis, L_phi on (joint, shuffled)
//
// Batches for the two streams come from independent named substreams, and
// every sub-network has its own init substream, so disabling a component
// cannot perturb the remaining ones: with D and DC off the loop is exactly
// augmented-data fine-tuning, bit for bit.
template <class T>
TrainTrace train(DTRLNetwork<T>& net, const std::vector<data::Example>& task_data,
                 const std::vector<data::Example>& domain_data, const data::LabelVocab& vocab,
                 const TrainOptions& options = {}) {
    const DTRLConfig& cfg = net.config();
    if (task_data.empty()) {
        throw ValidationError("train: task dataset is empty");
    }
    if (vocab.size() != cfg.num_task_labels) {
        throw ValidationError("train: label vocabulary size does not match config");
    }
    const bool needs_domain = cfg.use_domain_head || cfg.use_discriminator;
    if (needs_domain) {
        if (domain_data.empty()) {
            throw ValidationError("train: domain dataset is empty");
        }
        bool seen[2] = {false, false};
        for (const auto& ex : domain_data) {
            seen[data::domain_id(ex.domain_label)] = true;
        }
        if (!seen[data::kDomainNatural] || !seen[data::kDomainAdversarial]) {
            throw ValidationError("train: domain dataset must contain both domain labels");
        }
    }

    const std::vector<int> task_labels = data::task_ids(task_data, vocab);
    const std::vector<int> domain_labels =
        needs_domain ? data::domain_ids(domain_data) : std::vector<int>{};

    const std::vector<std::string> theta = net.theta_names();
    const std::vector<std::string> phi = net.phi_names();
    for (const auto& name : phi) {
        for (const auto& tname : theta) {
            if (name == tname) {
                throw ContractError("train: theta and phi overlap on " + name);
            }
        }
    }

    nn::OptimConfig theta_opt;  // AdamW for encoders and heads
    theta_opt.kind = nn::OptimKind::adamw;
    theta_opt.lr = cfg.lr;
    theta_opt.weight_decay = cfg.weight_decay;
    nn::OptimConfig phi_opt;  // Adam for D
    phi_opt.kind = nn::OptimKind::adam;
    phi_opt.lr = cfg.disc_lr;

    EpochSampler task_sampler(task_data.size(), substream(cfg.seed, "batch/task"));
    EpochSampler domain_sampler(needs_domain ? domain_data.size() : 1,
                                substream(cfg.seed, "batch/domain"));
    Rng resample_rng = substream(cfg.seed, "resample");

    TrainTrace trace;
    trace.steps.reserve(cfg.total_steps);

    for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
        const bool warmup = step <= cfg.warmup_steps;
        LossReport report;

        net.params().zero_grads();
        const std::vector<std::size_t> task_idx = task_sampler.next(cfg.batch_size);
        const std::vector<std::string> task_texts = detail::gather_texts(task_data, task_idx);
        report.task_loss =
            net.task_loss(task_texts, detail::gather_ids(task_labels, task_idx), true);

        typename DTRLNetwork<T>::LatentForward domain_fwd;
        if (needs_domain) {
            const std::vector<std::size_t> domain_idx = domain_sampler.next(cfg.batch_size);
            const std::vector<std::string> domain_texts =
                detail::gather_texts(domain_data, domain_idx);
            domain_fwd =
                net.latent_forward(domain_texts, cfg.use_discriminator, true);
            if (cfg.use_domain_head) {
                report.domain_loss = net.domain_loss_on(
                    domain_fwd, detail::gather_ids(domain_labels, domain_idx), true);
            }
            if (cfg.use_discriminator && !warmup) {
                report.disen_term =
                    net.encoder_adversarial_term_on(domain_fwd, true, cfg.disen_weight);
            }
            if (options.record_batches) {
                trace.domain_batches.push_back(domain_idx);
            }
        }
        nn::optimizer_step(net.params(), theta_opt, theta);

        if (cfg.use_discriminator) {
            net.params().zero_grads();
            LatentPair<T> joint{domain_fwd.z_r, domain_fwd.z_n};
            LatentPair<T> shuffled = marginal_resample(joint, resample_rng);
            report.disc_loss = net.discriminator_loss(joint, shuffled, true);
            nn::optimizer_step(net.params(), phi_opt, phi);
            report.mi_estimate_rn = net.estimate_mi_rn(joint.z_r, joint.z_n);
        }

        if (options.record_batches) {
            trace.task_batches.push_back(task_idx);
        }
        trace.steps.push_back(report);
    }
    return trace;
}

}  // namespace dtrl::net
