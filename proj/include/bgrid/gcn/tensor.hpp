#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace bgrid::gcn {

// Dense row-major double matrix.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> d;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return d.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return d.data() + static_cast<size_t>(r) * cols; }
    size_t size() const { return d.size(); }
    bool empty() const { return d.empty(); }
};

// C = A * B. Row blocks may run on worker threads; per-row arithmetic order is
// fixed, so results are identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B, accumulated over a fixed number of row blocks and reduced in
// block order (deterministic regardless of threading).
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// C = A * B^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Compressed sparse rows; used for the normalized graph adjacency.
struct Csr {
    int n = 0;
    std::vector<int> ptr, idx;
    std::vector<double> val;
};

// Y = S * X (S symmetric in our use; the transpose product reuses this).
Matrix spmm(const Csr& s, const Matrix& x);

// Runs fn(block_begin, block_end) over a fixed block decomposition of [0, n).
// Blocks are independent; used by the matmul kernels.
void parallel_blocks(int n, const std::function<void(int, int)>& fn);

}  // namespace bgrid::gcn
