#include "dtrl/text_encoder.hpp"

#include <algorithm>
#include <map>

namespace dtrl::text {

std::string normalize_text(const std::string& text, bool lowercase) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        if (lowercase && c >= 'A' && c <= 'Z') {
            c = static_cast<unsigned char>(c - 'A' + 'a');
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

SparseVec featurize(const FeaturizerConfig& config, const std::string& text) {
    config.validate();
    const std::string norm = normalize_text(text, config.lowercase);
    if (norm.empty()) {
        throw ValidationError("featurize: text is empty after normalization");
    }
    std::map<std::uint32_t, double> counts;
    for (int n = config.ngram_min; n <= config.ngram_max; ++n) {
        if (static_cast<std::size_t>(n) > norm.size()) {
            continue;
        }
        for (std::size_t pos = 0; pos + n <= norm.size(); ++pos) {
            const std::uint64_t h = fnv1a64(std::string_view(norm).substr(pos, n));
            counts[static_cast<std::uint32_t>(h % config.hash_buckets)] += 1.0;
        }
    }
    if (counts.empty()) {
        // Text shorter than every requested n-gram size; fall back to the
        // whole string as one feature so no non-empty text maps to nothing.
        const std::uint64_t h = fnv1a64(norm);
        counts[static_cast<std::uint32_t>(h % config.hash_buckets)] = 1.0;
    }
    SparseVec vec;
    vec.index.reserve(counts.size());
    vec.value.reserve(counts.size());
    for (const auto& [bucket, count] : counts) {
        vec.index.push_back(bucket);
        vec.value.push_back(count);
    }
    return vec;
}

}  // namespace dtrl::text
