#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dtrl/config.hpp"
#include "dtrl/data.hpp"
#include "dtrl/network.hpp"

namespace dtrl::pipeline {

// A trained model on disk is a directory holding model.json (labels,
// featurizer, shapes, mode) next to model.ckpt.
struct Model {
    net::DTRLNetwork<float> net;
    data::LabelVocab vocab;
    std::string mode;
};

void save_model(const std::string& dir, const net::DTRLNetwork<float>& net,
                const data::LabelVocab& vocab, const std::string& mode);
Model load_model(const std::string& dir);

void write_loss_log(const std::string& path, const std::vector<net::LossReport>& steps);

// Subcommand bodies. Each writes its outputs plus a manifest.json carrying
// the config hash, seed and input-file hashes; identical inputs reproduce
// identical outputs byte for byte.
void cmd_generate(const cfg::ExperimentConfig& config, const std::string& out_dir, bool force);
void cmd_train(const cfg::ExperimentConfig& config, const std::string& out_dir);
void cmd_augment(const cfg::ExperimentConfig& config, const std::string& victim_dir,
                 const std::string& out_dir);
void cmd_attack(const cfg::ExperimentConfig& config, const std::string& victim_dir,
                const std::string& data_path, std::size_t limit, const std::string& out_dir);
void cmd_eval(const cfg::ExperimentConfig& config, const std::vector<std::string>& model_dirs,
              const std::vector<std::string>& reports, const std::string& out_dir);

struct MiCheckCase {
    std::string name;
    double estimate = 0.0;
    double oracle = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Gaussian (rho = 0, 0.5, 0.8) and discrete 2x2 density-ratio suites against
// closed-form / exact oracles. Returns every case; callers decide the exit
// code.
std::vector<MiCheckCase> run_mi_check(std::uint64_t seed);

int cmd_mi_check(std::uint64_t seed, const std::string& joint_path, std::ostream& out);

}  // namespace dtrl::pipeline
