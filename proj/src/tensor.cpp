#include <cmath>

#include "cadseq/kernels.hpp"
#include "cadseq/tensor.hpp"

namespace cadseq {

void matmul_nn(const Mat& a, const Mat& b, Mat& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw CadError(ErrorCode::ShapeMismatch, "matmul_nn shapes");
    kernels::gemm_nn(a.d.data(), b.d.data(), c.d.data(), a.rows, b.cols, a.cols);
}

void matmul_tn(const Mat& a, const Mat& b, Mat& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw CadError(ErrorCode::ShapeMismatch, "matmul_tn shapes");
    const Mat at = transposed(a);
    kernels::gemm_nn(at.d.data(), b.d.data(), c.d.data(), at.rows, b.cols, at.cols);
}

void matmul_nt(const Mat& a, const Mat& b, Mat& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw CadError(ErrorCode::ShapeMismatch, "matmul_nt shapes");
    const Mat bt = transposed(b);
    kernels::gemm_nn(a.d.data(), bt.d.data(), c.d.data(), a.rows, bt.cols, a.cols);
}

Mat transposed(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* src = a.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) t.d[j * a.rows + i] = src[j];
    }
    return t;
}

bool all_finite(const Mat& a) {
    for (double v : a.d) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace cadseq
