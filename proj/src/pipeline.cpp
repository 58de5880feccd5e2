#include "dtrl/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dtrl/checkpoint.hpp"
#include "dtrl/density_ratio.hpp"
#include "dtrl/eval.hpp"
#include "dtrl/info_theory.hpp"
#include "dtrl/train.hpp"

namespace dtrl::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir + ": " + ec.message());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out << text;
    if (!out) {
        throw IoError("short write: " + path);
    }
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const std::string& out_dir, const std::string& command,
                    const cfg::ExperimentConfig& config,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_names) {
    json inputs = json::object();
    for (const auto& path : input_paths) {
        inputs[path] = cfg::hash_hex(nn::file_content_hash(path));
    }
    json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = config.config_hash;
    manifest["seed"] = config.seed;
    manifest["inputs"] = inputs;
    manifest["outputs"] = output_names;
    write_json(out_dir + "/manifest.json", manifest);
}

std::string fmt_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// Mode-specific ablation flags (Appendix-C style: DC = domain classifier,
// D = discriminator).
void apply_mode_flags(net::DTRLConfig& dtrl, cfg::Mode mode) {
    switch (mode) {
        case cfg::Mode::dtrl:
            dtrl.use_domain_head = true;
            dtrl.use_discriminator = true;
            break;
        case cfg::Mode::dtrl_minus_D:
            dtrl.use_domain_head = true;
            dtrl.use_discriminator = false;
            break;
        case cfg::Mode::baseline:
        case cfg::Mode::ada:
        case cfg::Mode::dtrl_minus_DC:
            dtrl.use_domain_head = false;
            dtrl.use_discriminator = false;
            break;
    }
}

json attack_result_json(const attack::AttackResult& r, const data::LabelVocab& vocab) {
    json j;
    j["success"] = r.success;
    j["adversarial_text"] = r.adversarial_text;
    j["original_label"] = vocab.name(r.original_label);
    j["adversarial_label"] = vocab.name(r.adversarial_label);
    j["queries_used"] = r.queries_used;
    j["perturbed_word_rate"] = r.perturbed_word_rate;
    return j;
}

}  // namespace

void save_model(const std::string& dir, const net::DTRLNetwork<float>& net,
                const data::LabelVocab& vocab, const std::string& mode) {
    ensure_dir(dir);
    const net::DTRLConfig& d = net.config();
    json j;
    j["labels"] = vocab.labels();
    j["mode"] = mode;
    j["embed_width"] = net.embed_width();
    j["featurizer"] = {{"ngram_min", net.featurizer().ngram_min},
                       {"ngram_max", net.featurizer().ngram_max},
                       {"hash_buckets", net.featurizer().hash_buckets},
                       {"lowercase", net.featurizer().lowercase}};
    j["dtrl"] = {{"enc_r_shape", d.enc_r_shape},
                 {"enc_n_shape", d.enc_n_shape},
                 {"disc_shape", d.disc_shape},
                 {"num_task_labels", d.num_task_labels},
                 {"num_domain_labels", d.num_domain_labels},
                 {"batch_size", d.batch_size},
                 {"lr", d.lr},
                 {"disc_lr", d.disc_lr},
                 {"disen_weight", d.disen_weight},
                 {"weight_decay", d.weight_decay},
                 {"warmup_steps", d.warmup_steps},
                 {"total_steps", d.total_steps},
                 {"seed", d.seed},
                 {"use_domain_head", d.use_domain_head},
                 {"use_discriminator", d.use_discriminator}};
    write_json(dir + "/model.json", j);
    nn::save_checkpoint(dir + "/model.ckpt", net.params());
}

Model load_model(const std::string& dir) {
    const std::string meta_path = dir + "/model.json";
    std::ifstream in(meta_path);
    if (!in) {
        throw IoError("cannot open model metadata: " + meta_path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(meta_path + ": " + e.what());
    }

    text::FeaturizerConfig featurizer;
    featurizer.ngram_min = j.at("featurizer").at("ngram_min").get<int>();
    featurizer.ngram_max = j.at("featurizer").at("ngram_max").get<int>();
    featurizer.hash_buckets = j.at("featurizer").at("hash_buckets").get<std::uint32_t>();
    featurizer.lowercase = j.at("featurizer").at("lowercase").get<bool>();

    net::DTRLConfig d;
    const json& dj = j.at("dtrl");
    d.enc_r_shape = dj.at("enc_r_shape").get<std::vector<std::size_t>>();
    d.enc_n_shape = dj.at("enc_n_shape").get<std::vector<std::size_t>>();
    d.disc_shape = dj.at("disc_shape").get<std::vector<std::size_t>>();
    d.num_task_labels = dj.at("num_task_labels").get<std::size_t>();
    d.num_domain_labels = dj.at("num_domain_labels").get<std::size_t>();
    d.batch_size = dj.at("batch_size").get<std::size_t>();
    d.lr = dj.at("lr").get<double>();
    d.disc_lr = dj.value("disc_lr", d.lr);
    d.disen_weight = dj.value("disen_weight", 1.0);
    d.weight_decay = dj.at("weight_decay").get<double>();
    d.warmup_steps = dj.at("warmup_steps").get<std::size_t>();
    d.total_steps = dj.at("total_steps").get<std::size_t>();
    d.seed = dj.at("seed").get<std::uint64_t>();
    d.use_domain_head = dj.at("use_domain_head").get<bool>();
    d.use_discriminator = dj.at("use_discriminator").get<bool>();

    Model model{net::DTRLNetwork<float>(featurizer, j.at("embed_width").get<std::size_t>(), d),
                data::LabelVocab(j.at("labels").get<std::vector<std::string>>()),
                j.value("mode", std::string("dtrl"))};
    model.net.initialize();
    nn::load_checkpoint(dir + "/model.ckpt", model.net.params());
    return model;
}

void write_loss_log(const std::string& path, const std::vector<net::LossReport>& steps) {
    std::ostringstream out;
    out << "step,task_loss,domain_loss,disen_term,disc_loss,mi_estimate_rn\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const net::LossReport& r = steps[i];
        out << (i + 1) << "," << fmt_double(r.task_loss) << "," << fmt_double(r.domain_loss) << ","
            << fmt_double(r.disen_term) << "," << fmt_double(r.disc_loss) << ","
            << fmt_double(r.mi_estimate_rn) << "\n";
    }
    write_text(path, out.str());
}

void cmd_generate(const cfg::ExperimentConfig& config, const std::string& out_dir, bool force) {
    ensure_dir(out_dir);
    const std::string train_path = out_dir + "/train.jsonl";
    const std::string test_path = out_dir + "/test.jsonl";
    if (!force && (fs::exists(train_path) || fs::exists(test_path))) {
        throw ConfigError("refusing to overwrite existing dataset in " + out_dir +
                          " (pass --force)");
    }
    data::Corpus corpus = data::generate_corpus(config.corpus);
    data::save_jsonl(train_path, corpus.train);
    data::save_jsonl(test_path, corpus.test);
    write_manifest(out_dir, "generate", config, {}, {"train.jsonl", "test.jsonl"});
}

void cmd_train(const cfg::ExperimentConfig& config, const std::string& out_dir) {
    ensure_dir(out_dir);
    const bool needs_domain_file = config.mode != cfg::Mode::baseline;
    const std::string task_path = needs_domain_file ? config.domain_path : config.train_path;
    if (task_path.empty()) {
        throw ValidationError(std::string("mode ") + cfg::mode_name(config.mode) + " requires " +
                              (needs_domain_file ? "data.domain" : "data.train"));
    }
    std::vector<data::Example> task_data = data::load_jsonl(task_path);
    if (task_data.empty()) {
        throw ValidationError("task dataset is empty: " + task_path);
    }
    const data::LabelVocab vocab(task_data);

    net::DTRLConfig dtrl = config.dtrl;
    apply_mode_flags(dtrl, config.mode);
    dtrl.num_task_labels = vocab.size();

    std::vector<data::Example> domain_data;
    if (dtrl.use_domain_head || dtrl.use_discriminator) {
        domain_data = task_data;  // same mixture file feeds both streams
    }

    net::DTRLNetwork<float> net(config.featurizer, config.embed_width, dtrl);
    net.initialize();
    const net::TrainTrace trace = net::train(net, task_data, domain_data, vocab);

    write_loss_log(out_dir + "/loss_log.csv", trace.steps);
    save_model(out_dir, net, vocab, cfg::mode_name(config.mode));
    write_manifest(out_dir, "train", config, {task_path},
                   {"model.json", "model.ckpt", "loss_log.csv"});
}

void cmd_augment(const cfg::ExperimentConfig& config, const std::string& victim_dir,
                 const std::string& out_dir) {
    ensure_dir(out_dir);
    if (!fs::exists(victim_dir + "/model.json")) {
        throw IoError("victim checkpoint not found: " + victim_dir + "/model.json");
    }
    if (config.train_path.empty()) {
        throw ValidationError("augment requires data.train");
    }
    Model victim = load_model(victim_dir);
    const std::vector<data::Example> train_data = data::load_jsonl(config.train_path);
    const attack::AttackConfig attack_config = config.attack_by_kind(config.augment_kind);

    eval::ModelVictim model_victim(victim.net);
    auto [domain, stats] = attack::augment(train_data, model_victim, victim.vocab, attack_config,
                                           config.seed, config.threads);
    data::save_jsonl(out_dir + "/domain.jsonl", domain);

    // Appendix-B style schema: number of adversarial examples and average
    // word perturbation rate.
    json stats_json;
    stats_json["attack"] = attack::attack_kind_name(attack_config.kind);
    stats_json["adversarial_examples"] = stats.adversarial_count;
    stats_json["avg_perturbed_word_pct"] = stats.avg_perturbed_word_pct;
    stats_json["natural_examples"] = stats.natural_count;
    stats_json["victim_correct"] = stats.victim_correct;
    write_json(out_dir + "/stats.json", stats_json);
    write_manifest(out_dir, "augment", config, {config.train_path},
                   {"domain.jsonl", "stats.json"});
}

void cmd_attack(const cfg::ExperimentConfig& config, const std::string& victim_dir,
                const std::string& data_path, std::size_t limit, const std::string& out_dir) {
    ensure_dir(out_dir);
    Model victim = load_model(victim_dir);
    const std::vector<data::Example> examples = data::load_jsonl(data_path);
    if (examples.empty()) {
        throw ValidationError("attack: dataset is empty: " + data_path);
    }
    const attack::AttackConfig attack_config = config.attack_by_kind(config.augment_kind);
    const std::vector<std::size_t> sample =
        eval::attack_sample(examples.size(), limit, config.seed);

    eval::ModelVictim model_victim(victim.net);
    std::ostringstream lines;
    std::size_t attempted = 0;
    std::size_t flipped = 0;
    for (std::size_t idx : sample) {
        const data::Example& ex = examples[idx];
        const int label = victim.vocab.id(ex.task_label);
        if (model_victim.classify(ex.text).label != label) {
            continue;
        }
        ++attempted;
        const attack::AttackResult result =
            attack::attack(model_victim, ex.text, label, attack_config,
                           substream(config.seed, "attack", idx).next_u64());
        if (result.success) {
            ++flipped;
        }
        json j = attack_result_json(result, victim.vocab);
        j["index"] = idx;
        j["text"] = ex.text;
        lines << j.dump() << "\n";
    }
    write_text(out_dir + "/attacks.jsonl", lines.str());
    json summary;
    summary["attack"] = attack::attack_kind_name(attack_config.kind);
    summary["sampled"] = sample.size();
    summary["attempted"] = attempted;
    summary["flipped"] = flipped;
    write_json(out_dir + "/summary.json", summary);
    write_manifest(out_dir, "attack", config, {data_path}, {"attacks.jsonl", "summary.json"});
}

void cmd_eval(const cfg::ExperimentConfig& config, const std::vector<std::string>& model_dirs,
              const std::vector<std::string>& reports, const std::string& out_dir) {
    ensure_dir(out_dir);
    if (model_dirs.empty()) {
        throw ValidationError("eval requires at least one --model");
    }
    if (config.test_path.empty()) {
        throw ValidationError("eval requires data.test");
    }
    const std::vector<data::Example> test = data::load_jsonl(config.test_path);

    std::vector<Model> models;
    models.reserve(model_dirs.size());
    for (const auto& dir : model_dirs) {
        models.push_back(load_model(dir));
    }
    const std::size_t sample_size = std::min(config.eval_sample_size, test.size());

    std::vector<std::pair<std::string, attack::AttackConfig>> attack_set;
    attack_set.emplace_back("char_attack", config.attack_by_kind("char"));
    if (!config.lexicon_path.empty()) {
        attack_set.emplace_back("word_attack", config.attack_by_kind("word"));
    }

    std::vector<std::string> outputs;
    for (const std::string& report : reports) {
        if (report == "robustness") {
            Model& model = models.front();
            json metrics;
            metrics["mode"] = model.mode;
            metrics["clean_accuracy"] = eval::clean_accuracy(model.net, test, model.vocab);
            json under_attack = json::object();
            for (const auto& [name, attack_config] : attack_set) {
                under_attack[name] =
                    eval::accuracy_under_attack(model.net, test, model.vocab, attack_config,
                                                sample_size, config.seed, config.threads);
            }
            metrics["accuracy_under_attack"] = under_attack;
            metrics["attacked_sample_size"] = sample_size;
            metrics["seed"] = config.seed;
            metrics["config_hash"] = config.config_hash;
            write_json(out_dir + "/metrics.json", metrics);

            std::ostringstream table;
            table << std::left << std::setw(24) << "metric" << "value\n";
            table << std::left << std::setw(24) << "clean_accuracy"
                  << metrics["clean_accuracy"].get<double>() << "\n";
            for (const auto& [name, value] : under_attack.items()) {
                table << std::left << std::setw(24) << ("aua/" + name) << value.get<double>()
                      << "\n";
            }
            write_text(out_dir + "/report.txt", table.str());
            outputs.push_back("metrics.json");
            outputs.push_back("report.txt");
        } else if (report == "probe") {
            if (config.domain_path.empty()) {
                throw ValidationError("probe report requires data.domain");
            }
            const std::vector<data::Example> domain = data::load_jsonl(config.domain_path);
            Model& model = models.front();
            const eval::ProbeReport pr = eval::probe(model.net, domain, model.vocab, config.seed);
            json j;
            j["task_on_zr"] = pr.task_on_zr;
            j["task_on_zn"] = pr.task_on_zn;
            j["domain_on_zr"] = pr.domain_on_zr;
            j["domain_on_zn"] = pr.domain_on_zn;
            j["seed"] = config.seed;
            j["config_hash"] = config.config_hash;
            write_json(out_dir + "/probe.json", j);
            outputs.push_back("probe.json");
        } else if (report == "transfer") {
            std::vector<std::pair<std::string, const net::DTRLNetwork<float>*>> model_refs;
            for (std::size_t i = 0; i < models.size(); ++i) {
                model_refs.emplace_back(models[i].mode + ":" + model_dirs[i], &models[i].net);
            }
            const eval::TransferTable table =
                eval::transfer_matrix(model_refs, attack_set, test, models.front().vocab,
                                      sample_size, config.seed, config.threads);
            json j;
            j["models"] = table.model_names;
            j["attacks"] = table.attack_names;
            j["clean"] = table.clean;
            j["accuracy_under_attack"] = table.accuracy;
            j["seed"] = config.seed;
            j["config_hash"] = config.config_hash;
            write_json(out_dir + "/transfer.json", j);

            std::ostringstream text;
            text << std::left << std::setw(32) << "model" << std::setw(10) << "clean";
            for (const auto& name : table.attack_names) {
                text << std::setw(14) << name;
            }
            text << "\n";
            for (std::size_t m = 0; m < table.model_names.size(); ++m) {
                text << std::left << std::setw(32) << table.model_names[m] << std::setw(10)
                     << table.clean[m];
                for (double v : table.accuracy[m]) {
                    text << std::setw(14) << v;
                }
                text << "\n";
            }
            write_text(out_dir + "/transfer.txt", text.str());
            outputs.push_back("transfer.json");
            outputs.push_back("transfer.txt");
        } else if (report == "embeddings") {
            const std::string source =
                config.domain_path.empty() ? config.test_path : config.domain_path;
            const std::vector<data::Example> examples = data::load_jsonl(source);
            eval::export_embeddings(models.front().net, examples, out_dir + "/embeddings.csv");
            outputs.push_back("embeddings.csv");
        } else {
            throw ConfigError("unknown eval report: " + report);
        }
    }
    std::vector<std::string> inputs = {config.test_path};
    write_manifest(out_dir, "eval", config, inputs, outputs);
}

std::vector<MiCheckCase> run_mi_check(std::uint64_t seed) {
    std::vector<MiCheckCase> cases;
    const std::size_t n = 10000;

    net::DensityRatioConfig drc;
    drc.hidden = {32, 32};
    drc.steps = 3000;
    drc.batch = 256;
    drc.lr = 1e-3;

    for (double rho : {0.0, 0.5, 0.8}) {
        auto [a, b] = net::sample_correlated_gaussian(n, rho, seed + static_cast<std::uint64_t>(rho * 100));
        net::DensityRatioConfig c = drc;
        c.seed = seed;
        net::DensityRatioEstimator estimator(1, 1, c);
        estimator.fit(a, b);
        MiCheckCase check;
        check.name = "gaussian rho=" + std::to_string(rho).substr(0, 3);
        check.estimate = estimator.estimate(a, b);
        check.oracle = -0.5 * std::log(1.0 - rho * rho);
        check.tolerance = rho == 0.0 ? 0.03 : 0.05;
        check.pass = std::abs(check.estimate - check.oracle) <= check.tolerance;
        cases.push_back(check);
    }

    const info::DiscreteJoint joint({2, 2}, {0.4, 0.1, 0.1, 0.4});
    auto [a, b] = net::sample_discrete_joint(joint, n, seed + 17);
    net::DensityRatioConfig c = drc;
    c.seed = seed;
    net::DensityRatioEstimator estimator(1, 1, c);
    estimator.fit(a, b);
    MiCheckCase check;
    check.name = "discrete 2x2";
    check.estimate = estimator.estimate(a, b);
    check.oracle = info::mutual_information(joint);
    check.tolerance = 0.05;
    check.pass = std::abs(check.estimate - check.oracle) <= check.tolerance;
    cases.push_back(check);
    return cases;
}

int cmd_mi_check(std::uint64_t seed, const std::string& joint_path, std::ostream& out) {
    if (!joint_path.empty()) {
        const info::DiscreteJoint joint = info::DiscreteJoint::load_text_file(joint_path);
        if (joint.rank() == 2) {
            const info::InfoReport report = info::info_report(joint);
            out << "H(U) = " << report.entropy_per_axis[0] << " nats\n";
            out << "H(V) = " << report.entropy_per_axis[1] << " nats\n";
            out << "I(U;V) = " << report.mutual_info << " nats\n";
            out << "VI(U;V) = " << report.vi << " nats\n";
        } else {
            out << "triangle_gap = " << info::triangle_gap(joint) << " nats\n";
            out << "disentangle_gap = " << info::disentangle_gap(joint) << " nats\n";
        }
        return 0;
    }
    int failures = 0;
    for (const MiCheckCase& check : run_mi_check(seed)) {
        out << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
            << ": estimate = " << check.estimate << ", oracle = " << check.oracle
            << ", |diff| = " << std::abs(check.estimate - check.oracle)
            << " (tolerance " << check.tolerance << ")\n";
        if (!check.pass) {
            ++failures;
        }
    }
    return failures;
}

}  // namespace dtrl::pipeline
