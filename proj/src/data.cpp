#include "dtrl/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace dtrl::data {

using nlohmann::json;

int domain_id(const std::string& domain_label) {
    if (domain_label == "natural") {
        return kDomainNatural;
    }
    if (domain_label == "adversarial") {
        return kDomainAdversarial;
    }
    throw ValidationError("unknown domain label: " + domain_label);
}

LabelVocab::LabelVocab(const std::vector<Example>& examples) {
    std::set<std::string> unique;
    for (const auto& ex : examples) {
        unique.insert(ex.task_label);
    }
    labels_.assign(unique.begin(), unique.end());
}

LabelVocab::LabelVocab(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (!std::is_sorted(labels_.begin(), labels_.end())) {
        throw ValidationError("label vocabulary must be sorted");
    }
}

int LabelVocab::id(const std::string& label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) {
        throw ValidationError("label not in vocabulary: " + label);
    }
    return static_cast<int>(it - labels_.begin());
}

const std::string& LabelVocab::name(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
        throw ValidationError("label id out of range: " + std::to_string(id));
    }
    return labels_[static_cast<std::size_t>(id)];
}

std::vector<Example> load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset: " + path);
    }
    std::vector<Example> examples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Example ex;
        ex.text = j.at("text").get<std::string>();
        ex.task_label = j.at("task_label").get<std::string>();
        ex.domain_label = j.value("domain_label", std::string("natural"));
        ex.source = j.value("source", std::string("original"));
        ex.parent_index = j.value("parent_index", std::int64_t(-1));
        domain_id(ex.domain_label);  // reject unknown labels early
        examples.push_back(std::move(ex));
    }
    return examples;
}

void save_jsonl(const std::string& path, const std::vector<Example>& examples) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open dataset for writing: " + path);
    }
    for (const auto& ex : examples) {
        json j;
        j["text"] = ex.text;
        j["task_label"] = ex.task_label;
        j["domain_label"] = ex.domain_label;
        j["source"] = ex.source;
        j["parent_index"] = ex.parent_index;
        out << j.dump() << "\n";
    }
    if (!out) {
        throw IoError("short write while saving dataset: " + path);
    }
}

std::vector<int> task_ids(const std::vector<Example>& examples, const LabelVocab& vocab) {
    std::vector<int> ids;
    ids.reserve(examples.size());
    for (const auto& ex : examples) {
        ids.push_back(vocab.id(ex.task_label));
    }
    return ids;
}

std::vector<int> domain_ids(const std::vector<Example>& examples) {
    std::vector<int> ids;
    ids.reserve(examples.size());
    for (const auto& ex : examples) {
        ids.push_back(domain_id(ex.domain_label));
    }
    return ids;
}

}  // namespace dtrl::data
