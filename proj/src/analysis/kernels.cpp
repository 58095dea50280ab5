#include "xlprobe/analysis/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xlprobe::analysis::kernels {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double row_mean_of(const DenseMatrix& a, std::size_t x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < a.cols; ++y) sum += a(x, y);
    return sum / static_cast<double>(a.cols);
}

double ras_entry(const DenseMatrix& a, const std::vector<double>& mean, double c, std::size_t x, std::size_t y) {
    if (mean[x] == 0.0) return kNaN;
    return ((a(x, y) - mean[x]) / mean[x]) * std::exp(c * std::fabs(mean[y] - mean[x]));
}

std::vector<double> inverse_norms(const DenseMatrix& v) {
    std::vector<double> inv(v.rows);
    for (std::size_t i = 0; i < v.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < v.cols; ++k) s += v(i, k) * v(i, k);
        inv[i] = 1.0 / std::sqrt(s);
    }
    return inv;
}

double distance_entry(const DenseMatrix& v, const std::vector<double>& inv, std::size_t i, std::size_t j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < v.cols; ++k) dot += v(i, k) * v(j, k);
    return std::clamp(1.0 - dot * inv[i] * inv[j], 0.0, 2.0);
}

}  // namespace

DenseMatrix ras_serial(const DenseMatrix& a, double c, std::vector<double>& row_mean) {
    row_mean.assign(a.rows, 0.0);
    for (std::size_t x = 0; x < a.rows; ++x) row_mean[x] = row_mean_of(a, x);
    DenseMatrix d(a.rows, a.cols);
    for (std::size_t x = 0; x < a.rows; ++x)
        for (std::size_t y = 0; y < a.cols; ++y) d(x, y) = ras_entry(a, row_mean, c, x, y);
    return d;
}

DenseMatrix ras_parallel(const DenseMatrix& a, double c, std::vector<double>& row_mean) {
    row_mean.assign(a.rows, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t x = 0; x < n; ++x) row_mean[static_cast<std::size_t>(x)] = row_mean_of(a, static_cast<std::size_t>(x));
    DenseMatrix d(a.rows, a.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < a.cols; ++y)
            d(static_cast<std::size_t>(x), y) = ras_entry(a, row_mean, c, static_cast<std::size_t>(x), y);
    return d;
}

DenseMatrix cosine_distance_serial(const DenseMatrix& v) {
    const auto inv = inverse_norms(v);
    DenseMatrix d(v.rows, v.rows);
    for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t j = i + 1; j < v.rows; ++j) d(i, j) = d(j, i) = distance_entry(v, inv, i, j);
    return d;
}

DenseMatrix cosine_distance_parallel(const DenseMatrix& v) {
    const auto inv = inverse_norms(v);
    DenseMatrix d(v.rows, v.rows);
    const auto n = static_cast<std::ptrdiff_t>(v.rows);
    // Each thread writes only the upper triangle rows it owns; the mirror
    // pass below runs after the barrier.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < v.rows; ++j)
            d(static_cast<std::size_t>(i), j) = distance_entry(v, inv, static_cast<std::size_t>(i), j);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < static_cast<std::size_t>(i); ++j)
            d(static_cast<std::size_t>(i), j) = d(j, static_cast<std::size_t>(i));
    return d;
}

}  // namespace xlprobe::analysis::kernels
