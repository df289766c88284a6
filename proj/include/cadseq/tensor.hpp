#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cadseq/error.hpp"

namespace cadseq {

// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1 as convenient.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> d;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}

    double* row(std::size_t i) { return d.data() + i * cols; }
    const double* row(std::size_t i) const { return d.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return d[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return d[i * cols + j]; }
    std::size_t size() const { return d.size(); }
    void zero() { std::fill(d.begin(), d.end(), 0.0); }
};

// C += A * B
void matmul_nn(const Mat& a, const Mat& b, Mat& c);
// C += A^T * B
void matmul_tn(const Mat& a, const Mat& b, Mat& c);
// C += A * B^T
void matmul_nt(const Mat& a, const Mat& b, Mat& c);

Mat transposed(const Mat& a);

bool all_finite(const Mat& a);

inline void check_shape(const Mat& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows != rows || m.cols != cols)
        throw CadError(ErrorCode::ShapeMismatch,
                       std::string(what) + ": expected " + std::to_string(rows) + "x" +
                           std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                           std::to_string(m.cols));
}

}  // namespace cadseq
