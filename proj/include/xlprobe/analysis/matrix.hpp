#pragma once

#include <cstddef>
#include <vector>

namespace xlprobe::analysis {

// Row-major dense matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

namespace kernels {

// Relative Affinity Score over a square accuracy matrix. Rows of a zero
// row mean come back as NaN. `row_mean` is resized and filled.
DenseMatrix ras_serial(const DenseMatrix& a, double c, std::vector<double>& row_mean);
DenseMatrix ras_parallel(const DenseMatrix& a, double c, std::vector<double>& row_mean);

// 1 - cosine similarity between the rows of `v`, clamped to [0, 2], with an
// exact zero diagonal. Rows must have non-zero norm.
DenseMatrix cosine_distance_serial(const DenseMatrix& v);
DenseMatrix cosine_distance_parallel(const DenseMatrix& v);

}  // namespace kernels

}  // namespace xlprobe::analysis
