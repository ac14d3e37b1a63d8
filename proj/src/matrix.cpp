#include "gode/matrix.hpp"

#include <cassert>

namespace gode {

void gemm(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols() == b.rows());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    if (c.rows() != n || c.cols() != m) c = Matrix(n, m);
    else c.fill(0.0);
    const double* bp = b.data();
    for (std::size_t i = 0; i < n; ++i) {
        double* __restrict crow = c.data() + i * m;
        const double* arow = a.data() + i * k;
        std::size_t l = 0;
        // four B rows per pass: quarters the C-row traffic
        for (; l + 4 <= k; l += 4) {
            const double a0 = arow[l], a1 = arow[l + 1];
            const double a2 = arow[l + 2], a3 = arow[l + 3];
            const double* __restrict b0 = bp + l * m;
            const double* __restrict b1 = b0 + m;
            const double* __restrict b2 = b1 + m;
            const double* __restrict b3 = b2 + m;
            for (std::size_t j = 0; j < m; ++j) {
                crow[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
            }
        }
        for (; l < k; ++l) {
            const double av = arow[l];
            const double* __restrict brow = bp + l * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols() == b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    if (c.rows() != n || c.cols() != m) c = Matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* __restrict arow = a.data() + i * k;
        double* crow = c.data() + i * m;
        std::size_t j = 0;
        // four dots at a time against one A row
        for (; j + 4 <= m; j += 4) {
            const double* __restrict b0 = b.data() + j * k;
            const double* __restrict b1 = b0 + k;
            const double* __restrict b2 = b1 + k;
            const double* __restrict b3 = b2 + k;
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                const double av = arow[l];
                s0 += av * b0[l];
                s1 += av * b1[l];
                s2 += av * b2[l];
                s3 += av * b3[l];
            }
            crow[j] = s0;
            crow[j + 1] = s1;
            crow[j + 2] = s2;
            crow[j + 3] = s3;
        }
        for (; j < m; ++j) {
            const double* __restrict brow = b.data() + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += arow[l] * brow[l];
            crow[j] = s;
        }
    }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.rows() == b.rows());
    const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
    if (c.rows() != n || c.cols() != m) c = Matrix(n, m);
    else c.fill(0.0);
    std::size_t l = 0;
    for (; l + 4 <= k; l += 4) {
        const double* a0 = a.data() + l * n;
        const double* a1 = a0 + n;
        const double* a2 = a1 + n;
        const double* a3 = a2 + n;
        const double* __restrict b0 = b.data() + l * m;
        const double* __restrict b1 = b0 + m;
        const double* __restrict b2 = b1 + m;
        const double* __restrict b3 = b2 + m;
        for (std::size_t i = 0; i < n; ++i) {
            double* __restrict crow = c.data() + i * m;
            const double v0 = a0[i], v1 = a1[i], v2 = a2[i], v3 = a3[i];
            for (std::size_t j = 0; j < m; ++j) {
                crow[j] += v0 * b0[j] + v1 * b1[j] + v2 * b2[j] + v3 * b3[j];
            }
        }
    }
    for (; l < k; ++l) {
        const double* arow = a.data() + l * n;
        const double* __restrict brow = b.data() + l * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* __restrict crow = c.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c;
    gemm(a, b, c);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    Matrix c;
    gemm_nt(a, b, c);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    Matrix c;
    gemm_tn(a, b, c);
    return c;
}

}  // namespace gode
