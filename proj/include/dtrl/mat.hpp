#pragma once

#include <cstddef>
#include <vector>

#include "dtrl/errors.hpp"

namespace dtrl::nn {

// Dense row-major matrix. Vectors are 1xN or Nx1 as convenient.
template <class T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    T* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const T* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Mat& other) const { return rows == other.rows && cols == other.cols; }

    void fill(T v) { data.assign(data.size(), v); }

    template <class U>
    Mat<U> cast() const {
        Mat<U> out(rows, cols);
        for (std::size_t i = 0; i < data.size(); ++i) {
            out.data[i] = static_cast<U>(data[i]);
        }
        return out;
    }
};

template <class T>
inline void check_same_shape(const Mat<T>& a, const Mat<T>& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows) + "x" +
                             std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                             std::to_string(b.cols) + ")");
    }
}

// C = A * B
template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: inner dimensions disagree (" + std::to_string(a.cols) +
                             " vs " + std::to_string(b.rows) + ")");
    }
    Mat<T> c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.row_ptr(i);
        T* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T aik = arow[k];
            if (aik == T(0)) {
                continue;
            }
            const T* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

// C = A^T * B  (A: m x n, B: m x p, C: n x p)
template <class T>
Mat<T> matmul_at_b(const Mat<T>& a, const Mat<T>& b) {
    if (a.rows != b.rows) {
        throw DimensionError("matmul_at_b: row counts disagree");
    }
    Mat<T> c(a.cols, b.cols);
    for (std::size_t m = 0; m < a.rows; ++m) {
        const T* arow = a.row_ptr(m);
        const T* brow = b.row_ptr(m);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const T aim = arow[i];
            if (aim == T(0)) {
                continue;
            }
            T* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += aim * brow[j];
            }
        }
    }
    return c;
}

// C = A * B^T  (A: m x n, B: p x n, C: m x p)
template <class T>
Mat<T> matmul_a_bt(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols != b.cols) {
        throw DimensionError("matmul_a_bt: column counts disagree");
    }
    Mat<T> c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.row_ptr(i);
        T* crow = c.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const T* brow = b.row_ptr(j);
            T acc = T(0);
            for (std::size_t k = 0; k < a.cols; ++k) {
                acc += arow[k] * brow[k];
            }
            crow[j] = acc;
        }
    }
    return c;
}

// Adds a 1 x cols bias row to every row of m, in place.
template <class T>
void add_bias_rows(Mat<T>& m, const Mat<T>& bias) {
    if (bias.rows != 1 || bias.cols != m.cols) {
        throw DimensionError("add_bias_rows: bias must be 1 x cols");
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        T* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) {
            row[j] += bias.data[j];
        }
    }
}

template <class T>
Mat<T> column_sums(const Mat<T>& m) {
    Mat<T> out(1, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const T* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) {
            out.data[j] += row[j];
        }
    }
    return out;
}

// Horizontal concat of equal-height matrices.
template <class T>
Mat<T> hconcat(const Mat<T>& a, const Mat<T>& b) {
    if (a.rows != b.rows) {
        throw DimensionError("hconcat: row counts disagree");
    }
    Mat<T> c(a.rows, a.cols + b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        T* crow = c.row_ptr(i);
        const T* arow = a.row_ptr(i);
        const T* brow = b.row_ptr(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            crow[j] = arow[j];
        }
        for (std::size_t j = 0; j < b.cols; ++j) {
            crow[a.cols + j] = brow[j];
        }
    }
    return c;
}

template <class T>
Mat<T> permute_rows(const Mat<T>& m, const std::vector<std::size_t>& perm) {
    if (perm.size() != m.rows) {
        throw DimensionError("permute_rows: permutation length mismatch");
    }
    Mat<T> out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const T* src = m.row_ptr(perm[i]);
        T* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) {
            dst[j] = src[j];
        }
    }
    return out;
}

}  // namespace dtrl::nn
