#include <map>
#include <set>
#include <string>

#include <doctest.h>

#include "dtrl/gradcheck.hpp"
#include "dtrl/losses.hpp"
#include "dtrl/text_encoder.hpp"

using namespace dtrl;
using namespace dtrl::text;

namespace {

std::map<std::uint32_t, double> to_map(const SparseVec& vec) {
    std::map<std::uint32_t, double> out;
    for (std::size_t i = 0; i < vec.nnz(); ++i) {
        out[vec.index[i]] = vec.value[i];
    }
    return out;
}

std::uint32_t bucket_of(const std::string& gram, std::uint32_t buckets) {
    return static_cast<std::uint32_t>(fnv1a64(gram) % buckets);
}

std::set<std::uint32_t> diff_buckets(const std::map<std::uint32_t, double>& a,
                                     const std::map<std::uint32_t, double>& b) {
    std::set<std::uint32_t> diff;
    for (const auto& [bucket, count] : a) {
        auto it = b.find(bucket);
        if (it == b.end() || it->second != count) {
            diff.insert(bucket);
        }
    }
    for (const auto& [bucket, count] : b) {
        auto it = a.find(bucket);
        if (it == a.end() || it->second != count) {
            diff.insert(bucket);
        }
    }
    return diff;
}

}  // namespace

TEST_SUITE("text_encoder") {

TEST_CASE("config validation") {
    FeaturizerConfig bad;
    bad.ngram_min = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.ngram_min = 4;
    bad.ngram_max = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.ngram_min = 2;
    bad.ngram_max = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.ngram_max = 3;
    bad.hash_buckets = 100;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("minimal n-gram: 'aa' with n=2 is one bucket of count 1") {
    FeaturizerConfig config;
    config.ngram_min = 2;
    config.ngram_max = 2;
    config.hash_buckets = 1024;
    const SparseVec vec = featurize(config, "aa");
    REQUIRE(vec.nnz() == 1);
    CHECK(vec.value[0] == 1.0);
    CHECK(vec.index[0] == bucket_of("aa", 1024));
}

TEST_CASE("empty text is rejected") {
    FeaturizerConfig config;
    CHECK_THROWS_AS(featurize(config, ""), ValidationError);
    CHECK_THROWS_AS(featurize(config, "   \t\n"), ValidationError);
}

TEST_CASE("normalization lowercases and collapses whitespace") {
    CHECK(normalize_text("  Great\tMovie \n", true) == "great movie");
    CHECK(normalize_text("Great Movie", false) == "Great Movie");
}

TEST_CASE("permuted word order changes only boundary n-grams") {
    FeaturizerConfig config;
    config.ngram_min = 2;
    config.ngram_max = 2;
    config.hash_buckets = 1 << 16;
    const auto a = to_map(featurize(config, "ab cd"));
    const auto b = to_map(featurize(config, "cd ab"));

    const std::set<std::uint32_t> diff = diff_buckets(a, b);
    // only the space-crossing 2-grams may move: "b ", " c", "d ", " a"
    const std::set<std::uint32_t> boundary = {
        bucket_of("b ", config.hash_buckets), bucket_of(" c", config.hash_buckets),
        bucket_of("d ", config.hash_buckets), bucket_of(" a", config.hash_buckets)};
    for (std::uint32_t bucket : diff) {
        CHECK(boundary.count(bucket) == 1);
    }
    CHECK(!diff.empty());
}

TEST_CASE("swapped letters move exactly the covering n-grams") {
    FeaturizerConfig config;
    config.ngram_min = 2;
    config.ngram_max = 3;
    config.hash_buckets = 1 << 16;
    const auto orig = to_map(featurize(config, "great movie"));
    const auto typo = to_map(featurize(config, "graet movie"));

    // Hand-enumerated n-grams covering positions 2-3 of "great movie".
    const std::vector<std::string> removed = {"re", "ea", "at", "gre", "rea", "eat", "at "};
    const std::vector<std::string> added = {"ra", "ae", "et", "gra", "rae", "aet", "et "};
    std::map<std::uint32_t, double> expected_delta;
    for (const auto& gram : removed) {
        expected_delta[bucket_of(gram, config.hash_buckets)] -= 1.0;
    }
    for (const auto& gram : added) {
        expected_delta[bucket_of(gram, config.hash_buckets)] += 1.0;
    }

    std::map<std::uint32_t, double> actual_delta;
    for (const auto& [bucket, count] : typo) {
        actual_delta[bucket] += count;
    }
    for (const auto& [bucket, count] : orig) {
        actual_delta[bucket] -= count;
    }
    for (auto it = actual_delta.begin(); it != actual_delta.end();) {
        it = it->second == 0.0 ? actual_delta.erase(it) : std::next(it);
    }
    for (auto it = expected_delta.begin(); it != expected_delta.end();) {
        it = it->second == 0.0 ? expected_delta.erase(it) : std::next(it);
    }
    CHECK(actual_delta == expected_delta);
}

TEST_CASE("single-character substitution touches a bounded number of buckets") {
    FeaturizerConfig config;
    config.ngram_min = 2;
    config.ngram_max = 3;
    config.hash_buckets = 1 << 16;
    // every n-gram covering one position: at most n per size, removed + added
    const std::size_t bound = 2 * (2 + 3);
    const std::string base = "the camera work was steady";
    for (std::size_t pos : {std::size_t(1), std::size_t(5), std::size_t(12)}) {
        std::string edited = base;
        edited[pos] = 'z';
        const auto diff =
            diff_buckets(to_map(featurize(config, base)), to_map(featurize(config, edited)));
        CHECK(diff.size() <= bound);
        CHECK(!diff.empty());
    }
}

TEST_CASE("encode: zero parameters give a zero embedding, and encode is pure") {
    FeaturizerConfig config;
    config.hash_buckets = 512;
    nn::ParamStore<float> params;
    params.add("etext.w", nn::Mat<float>(512, 16));
    params.add("etext.b", nn::Mat<float>(1, 16));
    const std::vector<float> zero = encode(params, config, "etext", "a fine film");
    for (float v : zero) {
        CHECK(v == 0.0f);
    }

    nn::ParamStore<float> random_params;
    Rng rng(4);
    init_text_encoder(random_params, config, 16, "etext", rng);
    const auto a = encode(random_params, config, "etext", "a fine film");
    const auto b = encode(random_params, config, "etext", "a fine film");
    CHECK(a == b);
}

TEST_CASE("encoder gradient passes a finite-difference check") {
    FeaturizerConfig config;
    config.hash_buckets = 256;
    const std::size_t width = 8;
    nn::ParamStore<double> params;
    Rng rng(21);
    init_text_encoder(params, config, width, "etext", rng);

    const std::vector<std::string> texts = {"a good movie", "a bad movie", "dull plot"};
    const std::vector<int> labels = {0, 1, 1};
    // downstream loss: mean CE of a fixed linear readout over the embedding
    nn::Mat<double> readout(width, 2);
    Rng readout_rng(22);
    for (auto& v : readout.data) {
        v = readout_rng.uniform(-1, 1);
    }

    auto loss_fn = [&](nn::ParamStore<double>& p, bool grads) {
        EmbedCache<double> cache;
        nn::Mat<double> z = embed_batch(p, config, "etext", texts, &cache);
        nn::Mat<double> logits = nn::matmul(z, readout);
        auto loss = nn::cross_entropy_loss(logits, labels);
        if (grads) {
            nn::Mat<double> dz = nn::matmul_a_bt(loss.grad, readout);
            embed_backward(p, "etext", cache, dz);
        }
        return loss.loss;
    };
    Rng probe_rng(23);
    const auto result = nn::gradient_check(params, loss_fn, 50, probe_rng);
    CHECK(result.max_rel_error < 1e-4);
}

}  // TEST_SUITE
