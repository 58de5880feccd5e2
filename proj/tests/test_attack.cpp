#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include <doctest.h>

#include "dtrl/attack.hpp"
#include "dtrl/rng.hpp"

using namespace dtrl;
using namespace dtrl::attack;

namespace {

// Word-counting toy victim: p(positive) = sigma(2 * (#pos - #neg)).
// Exact word matches only, so any single-character edit knocks a keyword out.
class KeywordVictim : public Victim {
public:
    KeywordVictim(std::set<std::string> positive, std::set<std::string> negative)
        : positive_(std::move(positive)), negative_(std::move(negative)) {}

    Prediction classify(const std::string& text) const override {
        int score = 0;
        for (const auto& word : split_words(text)) {
            score += positive_.count(word) ? 1 : 0;
            score -= negative_.count(word) ? 1 : 0;
        }
        const double p_pos = 1.0 / (1.0 + std::exp(-2.0 * score));
        Prediction pred;
        pred.probs = {1.0 - p_pos, p_pos};  // class 0 = negative, 1 = positive
        pred.label = p_pos > 0.5 ? 1 : 0;
        return pred;
    }

    std::size_t num_classes() const override { return 2; }

private:
    std::set<std::string> positive_;
    std::set<std::string> negative_;
};

class ConstantVictim : public Victim {
public:
    Prediction classify(const std::string&) const override {
        return {0, {0.7, 0.3}};
    }
    std::size_t num_classes() const override { return 2; }
};

KeywordVictim toy_victim() {
    return KeywordVictim({"good", "great", "fine", "nice"}, {"bad", "awful", "poor"});
}

// Independent single-edit enumerator for the brute-force oracle; deliberately
// not char_candidates.
std::vector<std::string> oracle_single_edits(const std::string& word) {
    std::set<std::string> out;
    for (std::size_t pos = 0; pos <= word.size(); ++pos) {
        for (char c = 'a'; c <= 'z'; ++c) {
            out.insert(word.substr(0, pos) + c + word.substr(pos));
        }
    }
    for (std::size_t pos = 0; pos < word.size(); ++pos) {
        std::string del = word.substr(0, pos) + word.substr(pos + 1);
        if (!del.empty()) {
            out.insert(del);
        }
        for (char c = 'a'; c <= 'z'; ++c) {
            std::string sub = word;
            sub[pos] = c;
            out.insert(sub);
        }
        if (pos + 1 < word.size()) {
            std::string swp = word;
            std::swap(swp[pos], swp[pos + 1]);
            out.insert(swp);
        }
    }
    out.erase(word);
    return {out.begin(), out.end()};
}

// Exhaustive search over all ways of single-editing at most `max_words`
// distinct words: subset sizes in increasing order, first label flip wins.
bool brute_force_attackable(const Victim& victim, const std::string& text, int true_label,
                            std::size_t max_words) {
    const std::vector<std::string> words = split_words(text);
    std::vector<std::vector<std::string>> candidates;
    candidates.reserve(words.size());
    for (const auto& word : words) {
        candidates.push_back(oracle_single_edits(word));
    }

    std::function<bool(const std::vector<std::size_t>&)> try_subset =
        [&](const std::vector<std::size_t>& subset) -> bool {
        std::vector<std::size_t> cursor(subset.size(), 0);
        while (true) {
            std::vector<std::string> trial = words;
            for (std::size_t k = 0; k < subset.size(); ++k) {
                trial[subset[k]] = candidates[subset[k]][cursor[k]];
            }
            if (victim.classify(join_words(trial)).label != true_label) {
                return true;
            }
            std::size_t k = 0;
            for (; k < cursor.size(); ++k) {
                if (++cursor[k] < candidates[subset[k]].size()) {
                    break;
                }
                cursor[k] = 0;
            }
            if (k == cursor.size()) {
                return false;
            }
        }
    };

    for (std::size_t size = 1; size <= std::min(max_words, words.size()); ++size) {
        std::vector<std::size_t> subset(size);
        std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t slot,
                                                                   std::size_t start) -> bool {
            if (slot == size) {
                return try_subset(subset);
            }
            for (std::size_t i = start; i + (size - slot - 1) < words.size(); ++i) {
                subset[slot] = i;
                if (choose(slot + 1, i + 1)) {
                    return true;
                }
            }
            return false;
        };
        if (choose(0, 0)) {
            return true;
        }
    }
    return false;
}

AttackConfig char_config(int budget = 100000, double cap = 1.0) {
    AttackConfig config;
    config.kind = AttackKind::char_edit;
    config.query_budget = budget;
    config.max_perturbed_word_fraction = cap;
    return config;
}

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("char_candidates: enumerated count for 'a'") {
    const auto candidates = char_candidates("a");
    // 52 inserts with "aa" duplicated once = 51, plus 25 substitutions
    CHECK(candidates.size() == 76);
    for (const auto& cand : candidates) {
        CHECK(edit_distance("a", cand) == 1);
    }
}

TEST_CASE("char_candidates: swap case and single-edit property") {
    const auto candidates = char_candidates("ab");
    CHECK(std::find(candidates.begin(), candidates.end(), "ba") != candidates.end());
    for (const auto& word : {"ab", "good", "movie", "xz"}) {
        for (const auto& cand : char_candidates(word)) {
            CHECK(edit_distance(word, cand) == 1);
        }
    }
    // matches the independent enumerator exactly
    for (const auto& word : {"ab", "good", "it"}) {
        const auto mine = char_candidates(word);
        const auto oracle = oracle_single_edits(word);
        CHECK(mine == oracle);
    }
}

TEST_CASE("token_importance: single word, constant victim ties, keyword victim") {
    const KeywordVictim victim = toy_victim();
    CHECK(token_importance(victim, "good") == std::vector<std::size_t>{0});

    const ConstantVictim constant;
    CHECK(token_importance(constant, "one two three") ==
          std::vector<std::size_t>{0, 1, 2});

    // 'good' carries all the signal in 'a good film'
    const auto ranked = token_importance(victim, "a good film");
    CHECK(ranked.front() == 1);

    CHECK_THROWS_AS(token_importance(victim, "   "), ValidationError);
}

TEST_CASE("token_importance respects its query budget") {
    const KeywordVictim victim = toy_victim();
    try {
        token_importance(victim, "a good film with a cast", 3);
        FAIL("expected QueryBudgetExhausted");
    } catch (const QueryBudgetExhausted& e) {
        CHECK(e.queries_used == 3);
    }
}

TEST_CASE("attack: constant victim cannot be flipped") {
    const ConstantVictim victim;
    const AttackResult result = attack::attack(victim, "some words here", 0, char_config(200, 0.5));
    CHECK(!result.success);
    CHECK(result.queries_used <= 200);
}

TEST_CASE("attack: precondition violation is a contract error") {
    const KeywordVictim victim = toy_victim();
    CHECK_THROWS_AS(attack::attack(victim, "a good film", 0, char_config()), ContractError);
}

TEST_CASE("attack: char attack flips the toy victim via its keyword") {
    const KeywordVictim victim = toy_victim();
    const AttackResult result = attack::attack(victim, "a good film", 1, char_config(100000, 0.4));
    CHECK(result.success);
    CHECK(result.adversarial_label == 0);
    CHECK(result.perturbed_word_rate == doctest::Approx(1.0 / 3.0));
    // the perturbed word must be a single edit of 'good'
    const auto words = split_words(result.adversarial_text);
    REQUIRE(words.size() == 3);
    CHECK(words[0] == "a");
    CHECK(words[2] == "film");
    CHECK(edit_distance("good", words[1]) == 1);
}

TEST_CASE("attack: word substitution flips iff some synonym flips") {
    const KeywordVictim victim = toy_victim();
    AttackConfig config;
    config.kind = AttackKind::word_substitute;
    config.query_budget = 1000;
    config.max_perturbed_word_fraction = 1.0;

    config.synonym_lexicon = {{"good", {"fine", "nice"}}};
    // both synonyms are also positive keywords: no flip possible
    AttackResult result = attack::attack(victim, "a good film", 1, config);
    CHECK(!result.success);

    config.synonym_lexicon = {{"good", {"fine", "mediocre"}}};
    result = attack::attack(victim, "a good film", 1, config);
    CHECK(result.success);
    CHECK(split_words(result.adversarial_text)[1] == "mediocre");
}

TEST_CASE("attack: word substitution never touches stop words") {
    const KeywordVictim victim = toy_victim();
    AttackConfig config;
    config.kind = AttackKind::word_substitute;
    config.query_budget = 1000;
    config.max_perturbed_word_fraction = 1.0;
    config.synonym_lexicon = {{"a", {"bad"}}, {"good", {"ok"}}};
    config.stop_words = {"a"};
    const AttackResult result = attack::attack(victim, "a good film", 1, config);
    // flipping via 'a' -> 'bad' is forbidden; only 'good' -> 'ok' remains
    CHECK(split_words(result.adversarial_text)[0] == "a");
}

TEST_CASE("attack: budget exhaustion is an unsuccessful result, not an error") {
    const KeywordVictim victim = toy_victim();
    const AttackResult result = attack::attack(victim, "a good film", 1, char_config(10, 1.0));
    CHECK(!result.success);
    CHECK(result.queries_used <= 10);
}

TEST_CASE("attack: perturbation cap limits accepted edits") {
    const KeywordVictim victim =
        KeywordVictim({"good", "great", "fine", "nice"}, {"bad", "awful", "poor"});
    // two keywords: flipping needs both edited, but the cap allows one word
    const AttackResult result =
        attack::attack(victim, "good great film stuff", 1, char_config(100000, 0.25));
    CHECK(!result.success);
    CHECK(result.perturbed_word_rate <= 0.25 + 1e-12);
}

TEST_CASE("attack invariants on a seeded toy corpus") {
    const KeywordVictim victim = toy_victim();
    Rng rng(33);
    const std::vector<std::string> pos = {"good", "great", "fine", "nice"};
    const std::vector<std::string> fillers = {"a", "the", "film", "movie", "plot", "cast"};
    AttackConfig config = char_config(400, 0.4);
    config.max_edit_distance_per_word = 2;

    for (int trial = 0; trial < 60; ++trial) {
        std::vector<std::string> words;
        const int n_fill = 3 + static_cast<int>(rng.index(4));
        for (int i = 0; i < n_fill; ++i) {
            words.push_back(fillers[rng.index(fillers.size())]);
        }
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.index(words.size())),
                     pos[rng.index(pos.size())]);
        const std::string text = join_words(words);
        if (victim.classify(text).label != 1) {
            continue;
        }
        const AttackResult result = attack::attack(victim, text, 1, config);
        CHECK(result.queries_used <= config.query_budget);
        const auto orig_words = split_words(text);
        const auto adv_words = split_words(result.adversarial_text);
        REQUIRE(adv_words.size() == orig_words.size());
        std::size_t diff = 0;
        for (std::size_t i = 0; i < orig_words.size(); ++i) {
            if (orig_words[i] != adv_words[i]) {
                ++diff;
                CHECK(edit_distance(orig_words[i], adv_words[i]) <=
                      config.max_edit_distance_per_word);
            }
        }
        CHECK(result.perturbed_word_rate ==
              doctest::Approx(static_cast<double>(diff) / static_cast<double>(orig_words.size())));
        CHECK(result.perturbed_word_rate <= config.max_perturbed_word_fraction + 1e-12);
        if (result.success) {
            CHECK(result.adversarial_label != result.original_label);
            CHECK(victim.classify(result.adversarial_text).label == result.adversarial_label);
        }
    }
}

TEST_CASE("attack is deterministic") {
    const KeywordVictim victim = toy_victim();
    const AttackConfig config = char_config(300, 0.4);
    const AttackResult a = attack::attack(victim, "the good movie plot", 1, config, 7);
    const AttackResult b = attack::attack(victim, "the good movie plot", 1, config, 7);
    CHECK(a.success == b.success);
    CHECK(a.adversarial_text == b.adversarial_text);
    CHECK(a.queries_used == b.queries_used);
}

TEST_CASE("greedy success set is contained in the brute-force success set") {
    const KeywordVictim victim = toy_victim();
    Rng rng(44);
    const std::vector<std::string> pool = {"good", "nice", "a",    "the",
                                           "film", "cast", "plot", "it"};
    AttackConfig config = char_config(100000, 0.4);
    int greedy_successes = 0;
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::string> words;
        const std::size_t n = 3 + rng.index(3);  // 3..5 words, all short
        for (std::size_t i = 0; i < n; ++i) {
            words.push_back(pool[rng.index(pool.size())]);
        }
        const std::string text = join_words(words);
        const Prediction pred = victim.classify(text);
        if (pred.label != 1) {
            continue;
        }
        const AttackResult result = attack::attack(victim, text, 1, config);
        if (result.success) {
            ++greedy_successes;
            // greedy succeeded within the cap, so the exhaustive search over
            // the same budget must find a flip too
            const std::size_t cap = static_cast<std::size_t>(0.4 * static_cast<double>(n) + 1e-9);
            CHECK(brute_force_attackable(victim, text, 1, cap));
        }
    }
    CHECK(greedy_successes > 0);

    // sanity: the oracle can also prove unattackability (two supporting
    // keywords, one editable word allowed)
    CHECK(!brute_force_attackable(victim, "good nice it", 1, 1));
}

TEST_CASE("augment: wrong victim everywhere yields an all-natural domain set") {
    // victim that always predicts negative: never 'correct' on positives,
    // correct on negatives but unattackable (constant)
    const ConstantVictim victim;
    std::vector<data::Example> dataset(4);
    for (std::size_t i = 0; i < 4; ++i) {
        dataset[i].text = "plain text " + std::to_string(i);
        dataset[i].task_label = i % 2 ? "positive" : "negative";
    }
    const data::LabelVocab vocab(dataset);
    auto [domain, stats] = augment(dataset, victim, vocab, char_config(50, 0.5), 1);
    CHECK(domain.size() == 4);
    CHECK(stats.adversarial_count == 0);
    CHECK(stats.natural_count == 4);
    for (const auto& ex : domain) {
        CHECK(ex.domain_label == "natural");
        CHECK(ex.source == "original");
    }
}

TEST_CASE("augment: adversarial count equals the brute-force attackable count") {
    const KeywordVictim victim = toy_victim();
    std::vector<data::Example> dataset;
    // four words each; fillers are >= 2 edits away from every keyword, so
    // with a one-word cap exactly the single-keyword texts are attackable
    const std::vector<std::string> texts = {
        "a good film cast", "nice the plot it",  "the plot it cast", "good movie the story",
        "a film the cast",  "fine it the movie", "it the film plot", "story cast the it",
        "great plot a film", "movie story it a"};
    for (const auto& text : texts) {
        data::Example ex;
        ex.text = text;
        const Prediction pred = victim.classify(text);
        ex.task_label = pred.label == 1 ? "positive" : "negative";
        dataset.push_back(ex);
    }
    const data::LabelVocab vocab(dataset);
    AttackConfig config = char_config(100000, 0.25);  // one word of four

    auto [domain, stats] = augment(dataset, victim, vocab, config, 1);
    std::size_t brute_count = 0;
    for (const auto& ex : dataset) {
        const Prediction pred = victim.classify(ex.text);
        if (pred.label != vocab.id(ex.task_label)) {
            continue;
        }
        if (brute_force_attackable(victim, ex.text, pred.label, 1)) {
            ++brute_count;
        }
    }
    CHECK(brute_count > 0);
    CHECK(stats.adversarial_count == brute_count);
    CHECK(stats.victim_correct == dataset.size());  // labels came from the victim

    // parallel augmentation merges to the identical result
    auto [domain2, stats2] = augment(dataset, victim, vocab, config, 1, 4);
    REQUIRE(domain2.size() == domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
        CHECK(domain[i].text == domain2[i].text);
        CHECK(domain[i].domain_label == domain2[i].domain_label);
    }

    // stats schema: average perturbed-word percent over successful attacks
    if (stats.adversarial_count > 0) {
        CHECK(stats.avg_perturbed_word_pct > 0.0);
        CHECK(stats.avg_perturbed_word_pct <= 100.0);
    }
}

TEST_CASE("lexicon and stop-word files round trip") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto lex_path = (dir / "dtrl_test_lexicon.tsv").string();
    Lexicon lexicon = {{"good", {"fine", "nice"}}, {"bad", {"poor"}}};
    save_lexicon(lex_path, lexicon);
    const Lexicon loaded = load_lexicon(lex_path);
    CHECK(loaded.at("good") == std::vector<std::string>{"fine", "nice"});
    CHECK(loaded.at("bad") == std::vector<std::string>{"poor"});
    std::filesystem::remove(lex_path);

    const auto stop_path = (dir / "dtrl_test_stop.txt").string();
    std::ofstream(stop_path) << "a\nthe\n";
    const auto stops = load_stop_words(stop_path);
    CHECK(stops.count("a") == 1);
    CHECK(stops.count("the") == 1);
    CHECK(stops.size() == 2);
    std::filesystem::remove(stop_path);
}

TEST_CASE("config validation") {
    AttackConfig config;
    config.kind = AttackKind::word_substitute;
    CHECK_THROWS_AS(config.validate(), ConfigError);  // missing lexicon
    config.kind = AttackKind::char_edit;
    config.query_budget = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.query_budget = 10;
    config.max_perturbed_word_fraction = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

}  // TEST_SUITE
