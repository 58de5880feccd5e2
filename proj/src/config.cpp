#include "dtrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dtrl/rng.hpp"

namespace dtrl::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

KVFile KVFile::parse(const std::string& text) {
    KVFile kv;
    kv.raw_ = text;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ValidationError("config line " + std::to_string(lineno) + ": empty section");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        kv.values_[full] = value;
    }
    return kv;
}

KVFile KVFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool KVFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KVFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t KVFile::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + ": not an integer: " + it->second);
    }
}

double KVFile::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + ": not a number: " + it->second);
    }
}

bool KVFile::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    if (it->second == "true" || it->second == "1" || it->second == "yes") {
        return true;
    }
    if (it->second == "false" || it->second == "0" || it->second == "no") {
        return false;
    }
    throw ValidationError("config key " + key + ": not a boolean: " + it->second);
}

std::vector<std::size_t> KVFile::get_size_list(const std::string& key,
                                               std::vector<std::size_t> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    std::vector<std::size_t> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(item)));
        } catch (const std::exception&) {
            throw ValidationError("config key " + key + ": not a size list: " + it->second);
        }
    }
    if (out.empty()) {
        throw ValidationError("config key " + key + ": empty list");
    }
    return out;
}

Mode parse_mode(const std::string& name) {
    if (name == "baseline") return Mode::baseline;
    if (name == "ada") return Mode::ada;
    if (name == "dtrl") return Mode::dtrl;
    if (name == "dtrl_minus_D") return Mode::dtrl_minus_D;
    if (name == "dtrl_minus_DC") return Mode::dtrl_minus_DC;
    throw ConfigError("unknown mode: " + name +
                      " (expected baseline|ada|dtrl|dtrl_minus_D|dtrl_minus_DC)");
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::baseline: return "baseline";
        case Mode::ada: return "ada";
        case Mode::dtrl: return "dtrl";
        case Mode::dtrl_minus_D: return "dtrl_minus_D";
        case Mode::dtrl_minus_DC: return "dtrl_minus_DC";
    }
    return "unknown";
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

ExperimentConfig ExperimentConfig::from_kv(const KVFile& kv) {
    ExperimentConfig config;
    config.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
    config.mode = parse_mode(kv.get_string("mode", "dtrl"));
    config.threads = static_cast<int>(kv.get_int("threads", 1));

    config.train_path = kv.get_string("data.train", "");
    config.test_path = kv.get_string("data.test", "");
    config.domain_path = kv.get_string("data.domain", "");
    config.corpus.train_size = static_cast<std::size_t>(kv.get_int("data.generate_train_size", 2000));
    config.corpus.test_size = static_cast<std::size_t>(kv.get_int("data.generate_test_size", 500));
    config.corpus.min_keywords = static_cast<int>(kv.get_int("data.generate_min_keywords", 2));
    config.corpus.max_keywords = static_cast<int>(kv.get_int("data.generate_max_keywords", 3));
    config.corpus.min_fillers = static_cast<int>(kv.get_int("data.generate_min_fillers", 5));
    config.corpus.max_fillers = static_cast<int>(kv.get_int("data.generate_max_fillers", 8));
    config.corpus.marker_rate = kv.get_double("data.generate_marker_rate", 1.0);
    config.corpus.contrast_keywords =
        static_cast<int>(kv.get_int("data.generate_contrast_keywords", 1));
    config.corpus.seed = config.seed;

    config.featurizer.ngram_min = static_cast<int>(kv.get_int("encoder.ngram_min", 2));
    config.featurizer.ngram_max = static_cast<int>(kv.get_int("encoder.ngram_max", 3));
    config.featurizer.hash_buckets =
        static_cast<std::uint32_t>(kv.get_int("encoder.hash_buckets", 2048));
    config.featurizer.lowercase = kv.get_bool("encoder.lowercase", true);
    config.embed_width = static_cast<std::size_t>(kv.get_int("encoder.embed_width", 768));

    config.dtrl.enc_r_shape = kv.get_size_list("dtrl.enc_r_shape", {768, 768, 384, 32});
    config.dtrl.enc_n_shape = kv.get_size_list("dtrl.enc_n_shape", config.dtrl.enc_r_shape);
    const std::size_t disc_in = config.dtrl.enc_r_shape.back() + config.dtrl.enc_n_shape.back();
    config.dtrl.disc_shape = kv.get_size_list("dtrl.disc_shape", {disc_in, 128, 256, 1});
    config.dtrl.batch_size = static_cast<std::size_t>(kv.get_int("dtrl.batch_size", 64));
    config.dtrl.lr = kv.get_double("dtrl.lr", 5e-5);
    config.dtrl.disc_lr = kv.get_double("dtrl.disc_lr", config.dtrl.lr);
    config.dtrl.disen_weight = kv.get_double("dtrl.disen_weight", 1.0);
    config.dtrl.weight_decay = kv.get_double("dtrl.weight_decay", 0.01);
    config.dtrl.warmup_steps = static_cast<std::size_t>(kv.get_int("dtrl.warmup_steps", 300));
    config.dtrl.total_steps = static_cast<std::size_t>(kv.get_int("dtrl.total_steps", 600));
    config.dtrl.seed = config.seed;

    config.char_attack.kind = attack::AttackKind::char_edit;
    config.char_attack.max_edit_distance_per_word =
        static_cast<int>(kv.get_int("attack.char.max_edit_distance_per_word", 2));
    config.char_attack.max_perturbed_word_fraction =
        kv.get_double("attack.char.max_perturbed_word_fraction", 0.4);
    config.char_attack.query_budget =
        static_cast<int>(kv.get_int("attack.char.query_budget", 500));

    config.word_attack.kind = attack::AttackKind::word_substitute;
    config.word_attack.max_edit_distance_per_word =
        static_cast<int>(kv.get_int("attack.word.max_edit_distance_per_word", 2));
    config.word_attack.max_perturbed_word_fraction =
        kv.get_double("attack.word.max_perturbed_word_fraction", 0.4);
    config.word_attack.query_budget =
        static_cast<int>(kv.get_int("attack.word.query_budget", 500));
    config.lexicon_path = kv.get_string("attack.word.lexicon", "");
    config.stop_words_path = kv.get_string("attack.word.stop_words", "");
    config.augment_kind = kv.get_string("attack.augment_kind", "char");

    config.eval_sample_size = static_cast<std::size_t>(kv.get_int("eval.sample_size", 500));

    config.config_hash = hash_hex(fnv1a64(kv.raw_text()));
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    return from_kv(KVFile::parse_file(path));
}

attack::AttackConfig ExperimentConfig::attack_by_kind(const std::string& kind) const {
    const attack::AttackKind k = attack::parse_attack_kind(kind);
    if (k == attack::AttackKind::char_edit) {
        return char_attack;
    }
    attack::AttackConfig word = word_attack;
    if (lexicon_path.empty()) {
        throw ConfigError("word attack requires attack.word.lexicon");
    }
    word.synonym_lexicon = attack::load_lexicon(lexicon_path);
    if (!stop_words_path.empty()) {
        word.stop_words = attack::load_stop_words(stop_words_path);
    }
    return word;
}

}  // namespace dtrl::cfg
