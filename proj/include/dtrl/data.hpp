#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtrl/errors.hpp"

namespace dtrl::data {

inline constexpr int kDomainNatural = 0;
inline constexpr int kDomainAdversarial = 1;

// One text example. Every on-disk record carries both label kinds so the same
// file can feed the task stream (text, task_label) and the domain stream
// (text, domain_label).
struct Example {
    std::string text;
    std::string task_label;
    std::string domain_label = "natural";  // natural | adversarial
    std::string source = "original";       // original | char_attack | word_attack
    std::int64_t parent_index = -1;
};

int domain_id(const std::string& domain_label);

// Task-label ids are assigned by sorted order of the distinct labels, so the
// mapping depends only on the label set, not on example order.
class LabelVocab {
public:
    LabelVocab() = default;
    explicit LabelVocab(const std::vector<Example>& examples);
    explicit LabelVocab(std::vector<std::string> labels);

    int id(const std::string& label) const;
    const std::string& name(int id) const;
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
};

std::vector<Example> load_jsonl(const std::string& path);
void save_jsonl(const std::string& path, const std::vector<Example>& examples);

std::vector<int> task_ids(const std::vector<Example>& examples, const LabelVocab& vocab);
std::vector<int> domain_ids(const std::vector<Example>& examples);

}  // namespace dtrl::data
