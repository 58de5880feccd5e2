#pragma once

#include <cstdint>
#include <vector>

#include "dtrl/data.hpp"

namespace dtrl::data {

// Seeded sentiment-style corpus: each sentence mixes neutral fillers with a
// few polarity keywords (the signal a robust model should use) and, at
// marker_rate, one label-correlated gibberish marker token (an easy brittle
// shortcut for attacks to exploit). Labels are exactly balanced.
struct CorpusSpec {
    std::size_t train_size = 2000;
    std::size_t test_size = 500;
    int min_keywords = 2;
    int max_keywords = 3;
    int contrast_keywords = 0;  // opposite-polarity words per sentence
    int min_fillers = 5;
    int max_fillers = 8;
    double marker_rate = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Corpus {
    std::vector<Example> train;
    std::vector<Example> test;
};

Corpus generate_corpus(const CorpusSpec& spec);

// The committed generator vocabulary.
const std::vector<std::string>& positive_keywords();
const std::vector<std::string>& negative_keywords();
const std::vector<std::string>& filler_words();
const std::vector<std::string>& positive_markers();
const std::vector<std::string>& negative_markers();

}  // namespace dtrl::data
