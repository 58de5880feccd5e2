#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtrl/errors.hpp"
#include "dtrl/mat.hpp"

namespace dtrl::nn {

// One trainable array: value, same-shaped gradient accumulator, and the
// optimizer's moment buffers (allocated lazily on the first step).
template <class T>
struct Param {
    Mat<T> value;
    Mat<T> grad;
    Mat<T> adam_m;
    Mat<T> adam_v;
    std::int64_t steps = 0;
};

// Flat named collection of parameters. Insertion order is preserved and is
// the canonical iteration order everywhere (checkpoints, optimizer sweeps),
// which keeps runs bit-reproducible.
template <class T>
class ParamStore {
public:
    Param<T>& add(const std::string& name, Mat<T> value) {
        if (entries_.count(name)) {
            throw ValidationError("duplicate parameter name: " + name);
        }
        if (name.find(' ') != std::string::npos) {
            throw ValidationError("parameter names must not contain spaces: " + name);
        }
        order_.push_back(name);
        Param<T>& p = entries_[name];
        p.value = std::move(value);
        p.grad = Mat<T>(p.value.rows, p.value.cols);
        return p;
    }

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    Param<T>& at(const std::string& name) {
        auto it = entries_.find(name);
        if (it == entries_.end()) {
            throw ValidationError("unknown parameter: " + name);
        }
        return it->second;
    }

    const Param<T>& at(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) {
            throw ValidationError("unknown parameter: " + name);
        }
        return it->second;
    }

    const std::vector<std::string>& names() const { return order_; }

    std::vector<std::string> names_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& name : order_) {
            if (name.rfind(prefix, 0) == 0) {
                out.push_back(name);
            }
        }
        return out;
    }

    void zero_grads() {
        for (const auto& name : order_) {
            entries_[name].grad.fill(T(0));
        }
    }

    std::size_t size() const { return order_.size(); }
    std::int64_t step_count = 0;

    template <class U>
    ParamStore<U> cast() const {
        ParamStore<U> out;
        for (const auto& name : order_) {
            out.add(name, entries_.at(name).value.template cast<U>());
        }
        return out;
    }

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Param<T>> entries_;
};

}  // namespace dtrl::nn
