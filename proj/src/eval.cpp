#include "dtrl/eval.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

#include "dtrl/losses.hpp"
#include "dtrl/optimizer.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::eval {

namespace {

void parallel_chunks(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& work) {
    if (threads <= 1 || n < 2) {
        work(0, n);
        return;
    }
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) {
            pool.emplace_back(work, begin, end);
        }
    }
    for (auto& th : pool) {
        th.join();
    }
}

// Full-batch adam on a single affine layer over frozen latents.
double affine_probe_accuracy(const nn::Mat<double>& latents, const std::vector<int>& labels,
                             std::size_t num_classes, std::uint64_t seed) {
    const std::size_t n = latents.rows;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    Rng split_rng = substream(seed, "probe/split");
    split_rng.shuffle(order);
    const std::size_t train_n = (n * 8) / 10;
    if (train_n == 0 || train_n == n) {
        throw ValidationError("probe: not enough examples for an 80/20 split");
    }

    nn::Mat<double> train_x(train_n, latents.cols);
    std::vector<int> train_y(train_n);
    for (std::size_t i = 0; i < train_n; ++i) {
        const std::size_t src = order[i];
        for (std::size_t j = 0; j < latents.cols; ++j) {
            train_x(i, j) = latents(src, j);
        }
        train_y[i] = labels[src];
    }

    nn::MLPSpec spec = nn::MLPSpec::rectifier_stack({latents.cols, num_classes},
                                                    nn::Activation::affine);
    nn::ParamStore<double> params;
    Rng init_rng = substream(seed, "probe/init");
    nn::init_mlp_params(params, spec, "probe", init_rng);
    nn::OptimConfig opt;
    opt.kind = nn::OptimKind::adam;
    opt.lr = 0.05;
    for (int step = 0; step < 300; ++step) {
        params.zero_grads();
        nn::MLPCache<double> cache;
        nn::Mat<double> logits = nn::mlp_forward(spec, params, "probe", train_x, &cache);
        auto loss = nn::cross_entropy_loss(logits, train_y);
        nn::mlp_backward(spec, params, "probe", cache, loss.grad);
        nn::optimizer_step(params, opt);
    }

    std::size_t correct = 0;
    const std::size_t held = n - train_n;
    nn::Mat<double> test_x(held, latents.cols);
    for (std::size_t i = 0; i < held; ++i) {
        const std::size_t src = order[train_n + i];
        for (std::size_t j = 0; j < latents.cols; ++j) {
            test_x(i, j) = latents(src, j);
        }
    }
    nn::Mat<double> logits = nn::mlp_forward(spec, params, "probe", test_x);
    for (std::size_t i = 0; i < held; ++i) {
        const double* row = logits.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < num_classes; ++c) {
            if (row[c] > row[best]) {
                best = c;
            }
        }
        if (static_cast<int>(best) == labels[order[train_n + i]]) {
            ++correct;
        }
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(held);
}

void require_multiclass(const std::vector<int>& labels, const char* target) {
    const int first = labels.empty() ? -1 : labels.front();
    for (int label : labels) {
        if (label != first) {
            return;
        }
    }
    throw ValidationError(std::string("probe: ") + target + " labels have a single class");
}

}  // namespace

double clean_accuracy(const net::DTRLNetwork<float>& net, const std::vector<data::Example>& test,
                      const data::LabelVocab& vocab) {
    if (test.empty()) {
        throw ValidationError("clean_accuracy: empty test set");
    }
    std::size_t correct = 0;
    for (const auto& ex : test) {
        if (net.predict(ex.text) == vocab.id(ex.task_label)) {
            ++correct;
        }
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<std::size_t> attack_sample(std::size_t n, std::size_t sample_size,
                                       std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    Rng rng = substream(seed, "eval/sample");
    rng.shuffle(order);
    order.resize(std::min(sample_size, n));
    return order;
}

double accuracy_under_attack(const net::DTRLNetwork<float>& net,
                             const std::vector<data::Example>& test,
                             const data::LabelVocab& vocab, const attack::AttackConfig& config,
                             std::size_t sample_size, std::uint64_t seed, int threads) {
    const ModelVictim victim(net);
    return accuracy_under_attack(victim, test, vocab, config, sample_size, seed, threads);
}

double accuracy_under_attack(const attack::Victim& victim,
                             const std::vector<data::Example>& test,
                             const data::LabelVocab& vocab, const attack::AttackConfig& config,
                             std::size_t sample_size, std::uint64_t seed, int threads) {
    if (test.empty()) {
        throw ValidationError("accuracy_under_attack: empty test set");
    }
    config.validate();
    const std::vector<std::size_t> sample = attack_sample(test.size(), sample_size, seed);

    std::vector<char> survived(sample.size(), 0);
    parallel_chunks(sample.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const data::Example& ex = test[sample[s]];
            const int label = vocab.id(ex.task_label);
            const attack::Prediction pred = victim.classify(ex.text);
            if (pred.label != label) {
                continue;  // already wrong: counts as broken
            }
            const attack::AttackResult result =
                attack::attack(victim, ex.text, label, config,
                               substream(seed, "eval/attack", sample[s]).next_u64());
            survived[s] = result.success ? 0 : 1;
        }
    });
    const std::size_t kept = static_cast<std::size_t>(
        std::count(survived.begin(), survived.end(), char(1)));
    return 100.0 * static_cast<double>(kept) / static_cast<double>(sample.size());
}

TransferTable transfer_matrix(
    const std::vector<std::pair<std::string, const net::DTRLNetwork<float>*>>& models,
    const std::vector<std::pair<std::string, attack::AttackConfig>>& attacks,
    const std::vector<data::Example>& test, const data::LabelVocab& vocab,
    std::size_t sample_size, std::uint64_t seed, int threads) {
    if (attacks.size() < 2) {
        throw ValidationError("transfer_matrix: need at least two attack configs");
    }
    TransferTable table;
    for (const auto& [name, _] : models) {
        table.model_names.push_back(name);
    }
    for (const auto& [name, _] : attacks) {
        table.attack_names.push_back(name);
    }
    for (const auto& [model_name, model] : models) {
        (void)model_name;
        table.clean.push_back(clean_accuracy(*model, test, vocab));
        std::vector<double> row;
        for (const auto& [attack_name, config] : attacks) {
            (void)attack_name;
            row.push_back(
                accuracy_under_attack(*model, test, vocab, config, sample_size, seed, threads));
        }
        table.accuracy.push_back(std::move(row));
    }
    return table;
}

ProbeReport probe(const net::DTRLNetwork<float>& net, const std::vector<data::Example>& examples,
                  const data::LabelVocab& vocab, std::uint64_t seed) {
    if (examples.size() < 10) {
        throw ValidationError("probe: need at least 10 examples");
    }
    if (!net.has_enc_n()) {
        throw ValidationError("probe: model has no non-robust encoder");
    }
    std::vector<std::string> texts;
    texts.reserve(examples.size());
    for (const auto& ex : examples) {
        texts.push_back(ex.text);
    }
    const net::LatentPair<float> pair = net.encode_latents(texts);
    const nn::Mat<double> z_r = pair.z_r.cast<double>();
    const nn::Mat<double> z_n = pair.z_n.cast<double>();

    const std::vector<int> task = data::task_ids(examples, vocab);
    const std::vector<int> domain = data::domain_ids(examples);
    require_multiclass(task, "task");
    require_multiclass(domain, "domain");

    ProbeReport report;
    report.task_on_zr = affine_probe_accuracy(z_r, task, vocab.size(), seed);
    report.task_on_zn = affine_probe_accuracy(z_n, task, vocab.size(), seed);
    report.domain_on_zr = affine_probe_accuracy(z_r, domain, 2, seed);
    report.domain_on_zn = affine_probe_accuracy(z_n, domain, 2, seed);
    return report;
}

void export_embeddings(const net::DTRLNetwork<float>& net,
                       const std::vector<data::Example>& examples, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open embedding export: " + path);
    }
    out.precision(9);
    const bool has_n = net.has_enc_n();
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const std::string texts[1] = {examples[i].text};
        const std::span<const std::string> span(texts, 1);
        const nn::Mat<float> z = net.embed(span);
        const net::LatentPair<float> pair = net.encode_latents(span);
        out << i << "," << examples[i].task_label << "," << examples[i].domain_label;
        for (float v : z.data) {
            out << "," << v;
        }
        for (float v : pair.z_r.data) {
            out << "," << v;
        }
        if (has_n) {
            for (float v : pair.z_n.data) {
                out << "," << v;
            }
        } else {
            for (std::size_t j = 0; j < net.enc_n_spec().output_width(); ++j) {
                out << ",0";
            }
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("short write while exporting embeddings: " + path);
    }
}

}  // namespace dtrl::eval
