#include "dtrl/synth_corpus.hpp"

#include <algorithm>

#include "dtrl/errors.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::data {

namespace {

const std::vector<std::string> kPositive = {
    "good",     "great",   "fine",    "lovely", "superb", "charming",
    "warm",     "bright",  "gentle",  "tender", "witty",  "vivid",
    "graceful", "radiant", "playful", "crisp",  "deft",   "stirring",
    "spirited", "earnest", "breezy",  "snappy", "limber", "polished",
};

const std::vector<std::string> kNegative = {
    "bad",     "awful",  "poor",    "dull",    "bland",  "grim",
    "cold",    "broken", "sour",    "weak",    "tedious", "hollow",
    "clumsy",  "murky",  "sluggish", "stale",  "shaky",  "dreary",
    "lifeless", "turgid", "sloppy",  "soggy",  "limp",   "brittle",
};

const std::vector<std::string> kFillers = {
    "the",  "movie",  "film",   "plot", "scene", "actor", "story", "script",
    "tone", "pace",   "cast",   "it",   "was",   "with",  "and",   "a",
    "of",   "about",  "camera", "end",  "this",  "that",  "one",   "very",
};

// Gibberish marker tokens; perfectly label-correlated when marker_rate is 1.
// Kept short so a single character edit wipes almost all of their n-grams:
// the deliberately brittle shortcut feature of this corpus.
const std::vector<std::string> kPositiveMarkers = {"zuq"};
const std::vector<std::string> kNegativeMarkers = {"xvj"};

std::vector<Example> make_split(const CorpusSpec& spec, std::size_t count, Rng& rng) {
    std::vector<Example> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const bool positive = i % 2 == 0;  // exact balance
        const auto& keywords = positive ? kPositive : kNegative;
        const auto& contrast = positive ? kNegative : kPositive;
        const auto& markers = positive ? kPositiveMarkers : kNegativeMarkers;

        const int n_keywords =
            spec.min_keywords + static_cast<int>(rng.index(spec.max_keywords - spec.min_keywords + 1));
        const int n_fillers =
            spec.min_fillers + static_cast<int>(rng.index(spec.max_fillers - spec.min_fillers + 1));

        std::vector<std::string> tokens;
        // distinct keywords per sentence
        std::vector<std::size_t> kw_ids(keywords.size());
        for (std::size_t k = 0; k < kw_ids.size(); ++k) {
            kw_ids[k] = k;
        }
        rng.shuffle(kw_ids);
        for (int k = 0; k < n_keywords; ++k) {
            tokens.push_back(keywords[kw_ids[static_cast<std::size_t>(k)]]);
        }
        for (int c = 0; c < spec.contrast_keywords; ++c) {
            tokens.push_back(contrast[rng.index(contrast.size())]);
        }
        for (int f = 0; f < n_fillers; ++f) {
            tokens.push_back(kFillers[rng.index(kFillers.size())]);
        }
        if (rng.uniform() < spec.marker_rate) {
            tokens.push_back(markers[rng.index(markers.size())]);
        }
        rng.shuffle(tokens);

        Example ex;
        ex.task_label = positive ? "positive" : "negative";
        ex.parent_index = static_cast<std::int64_t>(i);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (t) {
                ex.text.push_back(' ');
            }
            ex.text += tokens[t];
        }
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace

void CorpusSpec::validate() const {
    if (train_size == 0 || test_size == 0) {
        throw ConfigError("corpus sizes must be positive");
    }
    if (min_keywords < 1 || min_keywords > max_keywords ||
        static_cast<std::size_t>(max_keywords) > kPositive.size()) {
        throw ConfigError("keyword count range invalid");
    }
    if (min_fillers < 0 || min_fillers > max_fillers) {
        throw ConfigError("filler count range invalid");
    }
    if (contrast_keywords < 0 || contrast_keywords >= min_keywords) {
        throw ConfigError("contrast keywords must stay below the main keyword count");
    }
    if (marker_rate < 0.0 || marker_rate > 1.0) {
        throw ConfigError("marker_rate must lie in [0, 1]");
    }
}

Corpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    Corpus corpus;
    Rng train_rng = substream(spec.seed, "corpus/train");
    Rng test_rng = substream(spec.seed, "corpus/test");
    corpus.train = make_split(spec, spec.train_size, train_rng);
    corpus.test = make_split(spec, spec.test_size, test_rng);
    return corpus;
}

const std::vector<std::string>& positive_keywords() { return kPositive; }
const std::vector<std::string>& negative_keywords() { return kNegative; }
const std::vector<std::string>& filler_words() { return kFillers; }
const std::vector<std::string>& positive_markers() { return kPositiveMarkers; }
const std::vector<std::string>& negative_markers() { return kNegativeMarkers; }

}  // namespace dtrl::data
