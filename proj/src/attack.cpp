#include "dtrl/attack.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "dtrl/rng.hpp"

namespace dtrl::attack {

namespace {

// Shared query ledger for one attack run.
class QueryCounter {
public:
    QueryCounter(const Victim& victim, int budget) : victim_(victim), budget_(budget) {}

    bool exhausted() const { return used_ >= budget_; }
    int used() const { return used_; }

    // nullopt-style: returns false when the budget is gone.
    bool classify(const std::string& text, Prediction& out) {
        if (used_ >= budget_) {
            return false;
        }
        ++used_;
        out = victim_.classify(text);
        return true;
    }

private:
    const Victim& victim_;
    int budget_;
    int used_ = 0;
};

struct RankedWord {
    std::size_t index;
    double score;
};

// Deletion-based importance. `orig` is the prediction for the full text
// (already paid for by the caller).
std::vector<std::size_t> rank_words(QueryCounter& counter, const std::vector<std::string>& words,
                                    const Prediction& orig, bool& exhausted) {
    exhausted = false;
    std::vector<RankedWord> ranked;
    ranked.reserve(words.size());
    if (words.size() == 1) {
        return {0};
    }
    const double p_orig = orig.probs[static_cast<std::size_t>(orig.label)];
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::vector<std::string> reduced;
        reduced.reserve(words.size() - 1);
        for (std::size_t j = 0; j < words.size(); ++j) {
            if (j != i) {
                reduced.push_back(words[j]);
            }
        }
        Prediction pred;
        if (!counter.classify(join_words(reduced), pred)) {
            exhausted = true;
            break;
        }
        ranked.push_back({i, p_orig - pred.probs[static_cast<std::size_t>(orig.label)]});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedWord& a, const RankedWord& b) {
        return a.score > b.score;  // stable: ties keep positional order
    });
    std::vector<std::size_t> order;
    order.reserve(ranked.size());
    for (const auto& r : ranked) {
        order.push_back(r.index);
    }
    return order;
}

std::vector<std::string> candidates_for(const AttackConfig& config, const std::string& word) {
    if (config.kind == AttackKind::char_edit) {
        return char_candidates(word);
    }
    if (config.stop_words.count(word)) {
        return {};
    }
    auto it = config.synonym_lexicon.find(word);
    if (it == config.synonym_lexicon.end()) {
        return {};
    }
    std::vector<std::string> syns;
    for (const auto& s : it->second) {
        if (s != word) {
            syns.push_back(s);
        }
    }
    return syns;
}

}  // namespace

const char* attack_kind_name(AttackKind kind) {
    return kind == AttackKind::char_edit ? "char_attack" : "word_attack";
}

AttackKind parse_attack_kind(const std::string& name) {
    if (name == "char_edit" || name == "char_attack" || name == "char") {
        return AttackKind::char_edit;
    }
    if (name == "word_substitute" || name == "word_attack" || name == "word") {
        return AttackKind::word_substitute;
    }
    throw ConfigError("unknown attack kind: " + name);
}

void AttackConfig::validate() const {
    if (max_edit_distance_per_word < 1) {
        throw ConfigError("max_edit_distance_per_word must be positive");
    }
    if (max_perturbed_word_fraction <= 0.0 || max_perturbed_word_fraction > 1.0) {
        throw ConfigError("max_perturbed_word_fraction must lie in (0, 1]");
    }
    if (query_budget < 1) {
        throw ConfigError("query_budget must be positive");
    }
    if (kind == AttackKind::word_substitute && synonym_lexicon.empty()) {
        throw ConfigError("word_substitute attack requires a synonym lexicon");
    }
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w) {
        words.push_back(w);
    }
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) {
            out.push_back(' ');
        }
        out += words[i];
    }
    return out;
}

std::vector<std::size_t> token_importance(const Victim& victim, const std::string& text,
                                          int query_budget) {
    const std::vector<std::string> words = split_words(text);
    if (words.empty()) {
        throw ValidationError("token_importance: text has no words");
    }
    QueryCounter counter(victim, query_budget);
    Prediction orig;
    if (!counter.classify(text, orig)) {
        throw QueryBudgetExhausted(counter.used());
    }
    bool exhausted = false;
    std::vector<std::size_t> order = rank_words(counter, words, orig, exhausted);
    if (exhausted) {
        throw QueryBudgetExhausted(counter.used());
    }
    return order;
}

std::vector<std::string> char_candidates(const std::string& word) {
    if (word.empty()) {
        throw ValidationError("char_candidates: empty word");
    }
    std::set<std::string> out;
    // inserts
    for (std::size_t pos = 0; pos <= word.size(); ++pos) {
        for (char c = 'a'; c <= 'z'; ++c) {
            std::string cand = word;
            cand.insert(cand.begin() + static_cast<std::ptrdiff_t>(pos), c);
            out.insert(std::move(cand));
        }
    }
    // deletions
    if (word.size() >= 2) {
        for (std::size_t pos = 0; pos < word.size(); ++pos) {
            std::string cand = word;
            cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(pos));
            out.insert(std::move(cand));
        }
    }
    // adjacent swaps
    for (std::size_t pos = 0; pos + 1 < word.size(); ++pos) {
        if (word[pos] == word[pos + 1]) {
            continue;
        }
        std::string cand = word;
        std::swap(cand[pos], cand[pos + 1]);
        out.insert(std::move(cand));
    }
    // substitutions
    for (std::size_t pos = 0; pos < word.size(); ++pos) {
        for (char c = 'a'; c <= 'z'; ++c) {
            if (word[pos] == c) {
                continue;
            }
            std::string cand = word;
            cand[pos] = c;
            out.insert(std::move(cand));
        }
    }
    out.erase(word);
    return {out.begin(), out.end()};
}

AttackResult attack(const Victim& victim, const std::string& text, int true_label,
                    const AttackConfig& config, std::uint64_t /*seed*/) {
    config.validate();
    const std::vector<std::string> words = split_words(text);
    if (words.empty()) {
        throw ValidationError("attack: text has no words");
    }

    QueryCounter counter(victim, config.query_budget);
    AttackResult result;
    result.original_label = true_label;
    result.adversarial_text = text;
    result.adversarial_label = true_label;

    Prediction orig;
    if (!counter.classify(text, orig)) {
        result.queries_used = counter.used();
        return result;
    }
    if (orig.label != true_label) {
        throw ContractError("attack: victim does not predict true_label on the original text");
    }

    bool exhausted = false;
    const std::vector<std::size_t> order = rank_words(counter, words, orig, exhausted);
    if (exhausted) {
        result.queries_used = counter.used();
        return result;
    }

    const std::size_t max_perturbable = static_cast<std::size_t>(
        config.max_perturbed_word_fraction * static_cast<double>(words.size()) + 1e-9);
    std::vector<std::string> current = words;
    double p_orig = orig.probs[static_cast<std::size_t>(true_label)];
    std::size_t perturbed = 0;

    for (std::size_t rank = 0; rank < order.size() && perturbed < max_perturbable; ++rank) {
        const std::size_t idx = order[rank];
        const std::vector<std::string> candidates = candidates_for(config, words[idx]);

        bool have_best = false;
        std::string best_word;
        Prediction best_pred;
        double best_drop = 0.0;
        for (const auto& cand : candidates) {
            std::vector<std::string> trial = current;
            trial[idx] = cand;
            Prediction pred;
            if (!counter.classify(join_words(trial), pred)) {
                result.queries_used = counter.used();
                result.adversarial_text = join_words(current);
                result.perturbed_word_rate =
                    static_cast<double>(perturbed) / static_cast<double>(words.size());
                return result;  // budget ran out mid-search
            }
            const double drop = p_orig - pred.probs[static_cast<std::size_t>(true_label)];
            if (!have_best || drop > best_drop) {
                have_best = true;
                best_drop = drop;
                best_word = cand;
                best_pred = pred;
            }
        }
        if (!have_best || best_drop <= 0.0) {
            continue;  // no candidate helped; leave this word alone
        }
        current[idx] = best_word;
        ++perturbed;
        p_orig = best_pred.probs[static_cast<std::size_t>(true_label)];
        result.adversarial_label = best_pred.label;
        if (best_pred.label != true_label) {
            result.success = true;
            break;
        }
    }

    result.adversarial_text = join_words(current);
    result.queries_used = counter.used();
    result.perturbed_word_rate =
        static_cast<double>(perturbed) / static_cast<double>(words.size());
    return result;
}

std::pair<std::vector<data::Example>, AugmentStats> augment(
    const std::vector<data::Example>& dataset, const Victim& victim,
    const data::LabelVocab& vocab, const AttackConfig& config, std::uint64_t seed, int threads) {
    config.validate();
    if (threads < 1) {
        throw ConfigError("augment: threads must be >= 1");
    }

    struct Slot {
        bool correct = false;
        AttackResult result;
    };
    std::vector<Slot> slots(dataset.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const data::Example& ex = dataset[i];
            const int label = vocab.id(ex.task_label);
            const Prediction pred = victim.classify(ex.text);
            if (pred.label != label) {
                continue;  // wrong already; nothing to attack
            }
            slots[i].correct = true;
            slots[i].result = attack(victim, ex.text, label, config, substream(seed, "attack", i).next_u64());
        }
    };

    if (threads == 1 || dataset.size() < 2) {
        work(0, dataset.size());
    } else {
        const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads),
                                                            dataset.size());
        std::vector<std::thread> pool;
        const std::size_t chunk = (dataset.size() + n_threads - 1) / n_threads;
        for (std::size_t t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(dataset.size(), begin + chunk);
            if (begin < end) {
                pool.emplace_back(work, begin, end);
            }
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    std::vector<data::Example> domain;
    AugmentStats stats;
    double rate_sum = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const data::Example& ex = dataset[i];
        data::Example natural;
        natural.text = ex.text;
        natural.task_label = ex.task_label;
        natural.domain_label = "natural";
        natural.source = "original";
        natural.parent_index = static_cast<std::int64_t>(i);
        domain.push_back(std::move(natural));
        ++stats.natural_count;
        if (!slots[i].correct) {
            continue;
        }
        ++stats.victim_correct;
        const AttackResult& r = slots[i].result;
        if (!r.success) {
            continue;
        }
        data::Example adv;
        adv.text = r.adversarial_text;
        adv.task_label = ex.task_label;
        adv.domain_label = "adversarial";
        adv.source = attack_kind_name(config.kind);
        adv.parent_index = static_cast<std::int64_t>(i);
        domain.push_back(std::move(adv));
        ++stats.adversarial_count;
        rate_sum += r.perturbed_word_rate;
    }
    if (stats.adversarial_count > 0) {
        stats.avg_perturbed_word_pct =
            100.0 * rate_sum / static_cast<double>(stats.adversarial_count);
    }
    return {std::move(domain), stats};
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open lexicon: " + path);
    }
    Lexicon lexicon;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ValidationError("lexicon line missing tab: " + line);
        }
        const std::string word = line.substr(0, tab);
        std::vector<std::string> syns;
        std::string syn;
        std::istringstream rest(line.substr(tab + 1));
        while (std::getline(rest, syn, ',')) {
            if (!syn.empty()) {
                syns.push_back(syn);
            }
        }
        lexicon[word] = std::move(syns);
    }
    return lexicon;
}

void save_lexicon(const std::string& path, const Lexicon& lexicon) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open lexicon for writing: " + path);
    }
    std::vector<std::string> words;
    words.reserve(lexicon.size());
    for (const auto& [word, _] : lexicon) {
        words.push_back(word);
    }
    std::sort(words.begin(), words.end());
    for (const auto& word : words) {
        out << word << "\t";
        const auto& syns = lexicon.at(word);
        for (std::size_t i = 0; i < syns.size(); ++i) {
            out << (i ? "," : "") << syns[i];
        }
        out << "\n";
    }
}

std::set<std::string> load_stop_words(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open stop-word list: " + path);
    }
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            words.insert(line);
        }
    }
    return words;
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev2(b.size() + 1), prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        prev[j] = static_cast<int>(j);
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
                cur[j] = std::min(cur[j], prev2[j - 2] + 1);
            }
        }
        std::swap(prev2, prev);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace dtrl::attack
