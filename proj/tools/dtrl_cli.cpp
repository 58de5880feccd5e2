#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtrl/pipeline.hpp"

namespace {

dtrl::cfg::ExperimentConfig load_config(const std::string& config_path, std::int64_t seed_override,
                                        const std::string& mode_override, int threads_override) {
    dtrl::cfg::ExperimentConfig config =
        config_path.empty() ? dtrl::cfg::ExperimentConfig::from_kv(dtrl::cfg::KVFile::parse(""))
                            : dtrl::cfg::ExperimentConfig::load(config_path);
    if (seed_override >= 0) {
        config.seed = static_cast<std::uint64_t>(seed_override);
        config.corpus.seed = config.seed;
        config.dtrl.seed = config.seed;
    }
    if (!mode_override.empty()) {
        config.mode = dtrl::cfg::parse_mode(mode_override);
    }
    if (threads_override > 0) {
        config.threads = threads_override;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disentangled text representation learning for adversarial robustness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed_override = -1;
    int threads = 0;
    bool force = false;
    app.add_option("--config", config_path, "Experiment config file (key = value with sections)");
    app.add_option("--seed", seed_override, "Override the config seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads for attacks/evaluation");
    app.add_flag("--force", force, "Overwrite existing outputs");

    auto* generate = app.add_subcommand("generate", "Write the seeded synthetic corpus");

    auto* augment = app.add_subcommand("augment", "Attack the training set to build the domain dataset");
    std::string victim_dir;
    augment->add_option("--victim", victim_dir, "Trained victim model directory")->required();

    auto* train = app.add_subcommand("train", "Train a model in the configured mode");
    std::string mode_override;
    train->add_option("--mode", mode_override,
                      "baseline | ada | dtrl | dtrl_minus_D | dtrl_minus_DC");

    auto* attack_cmd = app.add_subcommand("attack", "Attack examples and dump the results");
    std::string attack_victim;
    std::string attack_data;
    std::size_t attack_limit = 100;
    attack_cmd->add_option("--victim", attack_victim, "Victim model directory")->required();
    attack_cmd->add_option("--data", attack_data, "JSONL dataset to attack")->required();
    attack_cmd->add_option("--limit", attack_limit, "Number of sampled examples");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained models");
    std::vector<std::string> model_dirs;
    std::vector<std::string> reports = {"robustness"};
    eval_cmd->add_option("--model", model_dirs, "Model directory (repeatable)")->required();
    eval_cmd->add_option("--report", reports,
                         "robustness | probe | transfer | embeddings (repeatable)");

    auto* mi_check = app.add_subcommand("mi-check", "Run the MI estimator oracle suites");
    std::string joint_path;
    mi_check->add_option("--joint", joint_path, "Evaluate a plain-text joint table instead");

    CLI11_PARSE(app, argc, argv);

    try {
        const dtrl::cfg::ExperimentConfig config =
            load_config(config_path, seed_override, mode_override, threads);
        if (generate->parsed()) {
            dtrl::pipeline::cmd_generate(config, out_dir, force);
        } else if (augment->parsed()) {
            dtrl::pipeline::cmd_augment(config, victim_dir, out_dir);
        } else if (train->parsed()) {
            dtrl::pipeline::cmd_train(config, out_dir);
        } else if (attack_cmd->parsed()) {
            dtrl::pipeline::cmd_attack(config, attack_victim, attack_data, attack_limit, out_dir);
        } else if (eval_cmd->parsed()) {
            dtrl::pipeline::cmd_eval(config, model_dirs, reports, out_dir);
        } else if (mi_check->parsed()) {
            const int failures = dtrl::pipeline::cmd_mi_check(config.seed, joint_path, std::cout);
            if (failures > 0) {
                std::cerr << failures << " mi-check case(s) out of tolerance\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
