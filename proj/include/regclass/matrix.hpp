#pragma once

#include <cstddef>
#include <vector>

namespace regclass {

// Dense row-major 64-bit matrix, sized for whole-graph activations.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double* row(int r) { return data.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }
    const double* row(int r) const {
        return data.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
    }
    double& at(int r, int c) { return row(r)[c]; }
    double at(int r, int c) const { return row(r)[c]; }
    void zero() { data.assign(data.size(), 0.0); }
};

// out = a (r x k) * b (k x c). The k-middle loop order keeps both inner
// streams contiguous so the compiler can vectorize.
inline void matmul_into(Matrix& out, const Matrix& a, const Matrix& b) {
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(static_cast<size_t>(a.rows) * static_cast<size_t>(b.cols), 0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(out, a, b);
    return out;
}

// out = a^T (a is k x r) * b (k x c); accumulates rank-1 updates row by row.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    Matrix out(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = out.row(i);
            for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

// out = a (r x k) * b^T (b is c x k); row-by-row dot products.
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

inline void add_row_vector(Matrix& m, const std::vector<double>& v) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (int j = 0; j < m.cols; ++j) row[j] += v[static_cast<size_t>(j)];
    }
}

}  // namespace regclass
