#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dtrl/mat.hpp"

namespace dtrl::nn {

template <class T>
struct LossAndGrad {
    double loss = 0.0;
    Mat<T> grad;
};

// max(x,0) + log1p(exp(-|x|)); finite for any representable x.
template <class T>
inline T softplus(T x) {
    const T ax = x < T(0) ? -x : x;
    return (x > T(0) ? x : T(0)) + std::log1p(std::exp(-ax));
}

template <class T>
inline T logistic(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// Mean softmax cross-entropy in nats over rows of `logits`; gradient w.r.t.
// the logits. Labels must lie in [0, n_classes).
template <class T>
LossAndGrad<T> cross_entropy_loss(const Mat<T>& logits, const std::vector<int>& labels) {
    if (logits.rows != labels.size()) {
        throw DimensionError("cross_entropy_loss: logit rows != label count");
    }
    if (logits.rows == 0) {
        throw ValidationError("cross_entropy_loss: empty batch");
    }
    const std::size_t classes = logits.cols;
    LossAndGrad<T> out;
    out.grad = Mat<T>(logits.rows, classes);
    double total = 0.0;
    const double inv_b = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= classes) {
            throw ValidationError("cross_entropy_loss: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(classes) + ")");
        }
        const T* row = logits.row_ptr(i);
        T max_logit = row[0];
        for (std::size_t c = 1; c < classes; ++c) {
            if (row[c] > max_logit) {
                max_logit = row[c];
            }
        }
        double sum_exp = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            sum_exp += std::exp(static_cast<double>(row[c] - max_logit));
        }
        const double lse = static_cast<double>(max_logit) + std::log(sum_exp);
        total += lse - static_cast<double>(row[label]);
        T* grow = out.grad.row_ptr(i);
        for (std::size_t c = 0; c < classes; ++c) {
            const double softmax = std::exp(static_cast<double>(row[c]) - lse);
            grow[c] = static_cast<T>((softmax - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_b);
        }
    }
    out.loss = total * inv_b;
    return out;
}

// Mean binary cross-entropy over pre-sigmoid scores:
//   t * softplus(-s) + (1 - t) * softplus(s)
// so both branches stay finite at any score magnitude.
template <class T>
LossAndGrad<T> binary_logistic_loss(const Mat<T>& scores, const std::vector<int>& targets) {
    if (scores.cols != 1) {
        throw DimensionError("binary_logistic_loss: scores must be a column");
    }
    if (scores.rows != targets.size()) {
        throw DimensionError("binary_logistic_loss: score rows != target count");
    }
    if (scores.rows == 0) {
        throw ValidationError("binary_logistic_loss: empty batch");
    }
    LossAndGrad<T> out;
    out.grad = Mat<T>(scores.rows, 1);
    double total = 0.0;
    const double inv_b = 1.0 / static_cast<double>(scores.rows);
    for (std::size_t i = 0; i < scores.rows; ++i) {
        const int t = targets[i];
        if (t != 0 && t != 1) {
            throw ValidationError("binary_logistic_loss: target must be 0 or 1");
        }
        const T s = scores.data[i];
        total += t == 1 ? static_cast<double>(softplus(-s)) : static_cast<double>(softplus(s));
        out.grad.data[i] = static_cast<T>((static_cast<double>(logistic(s)) - t) * inv_b);
    }
    out.loss = total * inv_b;
    return out;
}

}  // namespace dtrl::nn
