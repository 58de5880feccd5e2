#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtrl/attack.hpp"
#include "dtrl/network.hpp"
#include "dtrl/synth_corpus.hpp"
#include "dtrl/text_encoder.hpp"

namespace dtrl::cfg {

// Flat `key = value` file with one level of [section] nesting. Keys are
// stored as "section.key"; '#' and ';' start comments.
class KVFile {
public:
    static KVFile parse(const std::string& text);
    static KVFile parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key,
                                           std::vector<std::size_t> fallback) const;

    const std::string& raw_text() const { return raw_; }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string raw_;
};

enum class Mode { baseline, ada, dtrl, dtrl_minus_D, dtrl_minus_DC };

Mode parse_mode(const std::string& name);
const char* mode_name(Mode mode);

struct ExperimentConfig {
    std::uint64_t seed = 1;
    Mode mode = Mode::dtrl;
    int threads = 1;

    // [data]
    std::string train_path;
    std::string test_path;
    std::string domain_path;
    data::CorpusSpec corpus;

    // [encoder]
    text::FeaturizerConfig featurizer;
    std::size_t embed_width = 768;

    // [dtrl]
    net::DTRLConfig dtrl;

    // [attack.char] / [attack.word]
    attack::AttackConfig char_attack;
    attack::AttackConfig word_attack;
    std::string lexicon_path;
    std::string stop_words_path;
    std::string augment_kind = "char";  // one attack family per augmentation run

    // [eval]
    std::size_t eval_sample_size = 500;

    std::string config_hash;  // hex FNV-1a of the config text

    static ExperimentConfig from_kv(const KVFile& kv);
    static ExperimentConfig load(const std::string& path);

    // Attack config with the lexicon/stop words loaded, by kind name.
    attack::AttackConfig attack_by_kind(const std::string& kind) const;
};

std::string hash_hex(std::uint64_t h);

}  // namespace dtrl::cfg
