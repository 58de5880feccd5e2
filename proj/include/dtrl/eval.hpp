#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dtrl/attack.hpp"
#include "dtrl/data.hpp"
#include "dtrl/network.hpp"

namespace dtrl::eval {

// Frozen float32 model exposed through the attack interface.
class ModelVictim : public attack::Victim {
public:
    explicit ModelVictim(const net::DTRLNetwork<float>& net) : net_(net) {}

    attack::Prediction classify(const std::string& text) const override {
        attack::Prediction pred;
        pred.probs = net_.predict_probs(text);
        pred.label = 0;
        for (std::size_t c = 1; c < pred.probs.size(); ++c) {
            if (pred.probs[c] > pred.probs[static_cast<std::size_t>(pred.label)]) {
                pred.label = static_cast<int>(c);
            }
        }
        return pred;
    }

    std::size_t num_classes() const override { return net_.config().num_task_labels; }

private:
    const net::DTRLNetwork<float>& net_;
};

// Percent of correct C_r(E_r(E_text(x))) predictions.
double clean_accuracy(const net::DTRLNetwork<float>& net, const std::vector<data::Example>& test,
                      const data::LabelVocab& vocab);

// First `sample_size` indices of a seeded shuffle of [0, n).
std::vector<std::size_t> attack_sample(std::size_t n, std::size_t sample_size, std::uint64_t seed);

// Percent of sampled examples still classified correctly after the attack;
// examples the model already gets wrong count as broken.
double accuracy_under_attack(const net::DTRLNetwork<float>& net,
                             const std::vector<data::Example>& test,
                             const data::LabelVocab& vocab, const attack::AttackConfig& config,
                             std::size_t sample_size, std::uint64_t seed, int threads = 1);

// Same measurement against an arbitrary victim (toy classifiers in tests).
double accuracy_under_attack(const attack::Victim& victim,
                             const std::vector<data::Example>& test,
                             const data::LabelVocab& vocab, const attack::AttackConfig& config,
                             std::size_t sample_size, std::uint64_t seed, int threads = 1);

struct TransferTable {
    std::vector<std::string> model_names;                // rows
    std::vector<std::string> attack_names;               // columns
    std::vector<std::vector<double>> accuracy;           // [model][attack]
    std::vector<double> clean;                           // per model
};

TransferTable transfer_matrix(
    const std::vector<std::pair<std::string, const net::DTRLNetwork<float>*>>& models,
    const std::vector<std::pair<std::string, attack::AttackConfig>>& attacks,
    const std::vector<data::Example>& test, const data::LabelVocab& vocab,
    std::size_t sample_size, std::uint64_t seed, int threads = 1);

struct ProbeReport {
    double task_on_zr = 0.0;  // held-out percents
    double task_on_zn = 0.0;
    double domain_on_zr = 0.0;
    double domain_on_zn = 0.0;
};

// Fresh affine probes on frozen latents, 80/20 split. Never mutates the
// model; callers may hash a checkpoint around the call to prove it.
ProbeReport probe(const net::DTRLNetwork<float>& net, const std::vector<data::Example>& examples,
                  const data::LabelVocab& vocab, std::uint64_t seed);

// CSV: index, task label, domain label, z..., z_r..., z_n... ; models without
// a non-robust encoder export zero z_n columns.
void export_embeddings(const net::DTRLNetwork<float>& net,
                       const std::vector<data::Example>& examples, const std::string& path);

}  // namespace dtrl::eval
