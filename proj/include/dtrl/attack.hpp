#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtrl/data.hpp"
#include "dtrl/errors.hpp"

namespace dtrl::attack {

struct Prediction {
    int label = -1;
    std::vector<double> probs;
};

// A frozen classifier under attack. classify must be pure and thread-safe;
// query accounting lives with each attack, not with the victim.
class Victim {
public:
    virtual ~Victim() = default;
    virtual Prediction classify(const std::string& text) const = 0;
    virtual std::size_t num_classes() const = 0;
};

enum class AttackKind { char_edit, word_substitute };

const char* attack_kind_name(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

using Lexicon = std::unordered_map<std::string, std::vector<std::string>>;

struct AttackConfig {
    AttackKind kind = AttackKind::char_edit;
    int max_edit_distance_per_word = 2;
    double max_perturbed_word_fraction = 0.4;
    int query_budget = 500;
    Lexicon synonym_lexicon;          // required iff kind == word_substitute
    std::set<std::string> stop_words; // word attack never touches these

    void validate() const;
};

struct AttackResult {
    bool success = false;
    std::string adversarial_text;
    int original_label = -1;
    int adversarial_label = -1;
    int queries_used = 0;
    double perturbed_word_rate = 0.0;
};

struct AugmentStats {
    std::size_t natural_count = 0;      // every original enters the domain set
    std::size_t adversarial_count = 0;  // #A.E.
    std::size_t victim_correct = 0;
    double avg_perturbed_word_pct = 0.0;  // Avg P.W.% over successful attacks
};

std::vector<std::string> split_words(const std::string& text);
std::string join_words(const std::vector<std::string>& words);

// Words ranked by how much deleting them lowers the probability of the
// victim's original prediction; ties go to the earlier position. Spends one
// query for the original text plus one per deletion. Throws
// QueryBudgetExhausted (carrying queries_used) if the budget runs out.
std::vector<std::size_t> token_importance(const Victim& victim, const std::string& text,
                                          int query_budget = 1 << 30);

// Every single-edit variant of `word`: inserts of a-z at each position,
// single-character deletions, adjacent swaps and a-z substitutions,
// deduplicated, with the original and the empty string excluded. Sorted.
std::vector<std::string> char_candidates(const std::string& word);

// Greedy importance-ordered search. Precondition: the victim currently
// predicts true_label on `text` (ContractError otherwise). Budget exhaustion
// is an unsuccessful result, not an error.
AttackResult attack(const Victim& victim, const std::string& text, int true_label,
                    const AttackConfig& config, std::uint64_t seed = 0);

// Adversarial data augmentation over a labeled dataset: originals enter the
// domain dataset as `natural`, successful attack outputs as `adversarial`
// (keeping the parent's task label). Attacks on distinct examples are
// independent, so `threads` > 1 shards them; results merge by example index.
std::pair<std::vector<data::Example>, AugmentStats> augment(
    const std::vector<data::Example>& dataset, const Victim& victim,
    const data::LabelVocab& vocab, const AttackConfig& config, std::uint64_t seed,
    int threads = 1);

// `word<TAB>syn1,syn2,...`, UTF-8, one entry per line.
Lexicon load_lexicon(const std::string& path);
void save_lexicon(const std::string& path, const Lexicon& lexicon);

// One word per line.
std::set<std::string> load_stop_words(const std::string& path);

// Restricted Damerau-Levenshtein: inserts, deletes, substitutions and
// adjacent transpositions each cost 1, matching the single-edit perturbation
// space of char_candidates.
int edit_distance(const std::string& a, const std::string& b);

}  // namespace dtrl::attack
