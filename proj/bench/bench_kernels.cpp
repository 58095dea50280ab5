// Serial vs OpenMP timings for the analysis kernels.
#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include <omp.h>

#include "xlprobe/analysis/matrix.hpp"

using xlprobe::analysis::DenseMatrix;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (auto& v : m.data) v = dist(rng);
    return m;
}

template <typename F>
double best_ms(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 1200;
    const std::size_t dim = argc > 2 ? std::stoul(argv[2]) : 384;
    const int reps = argc > 3 ? std::stoi(argv[3]) : 3;
    std::printf("threads=%d n=%zu dim=%zu reps=%d\n", omp_get_max_threads(), n, dim, reps);

    const DenseMatrix acc = random_matrix(n, n, 0.05, 1.0, 1);
    std::vector<double> mean_s, mean_p;
    DenseMatrix rs, rp;
    const double ras_s = best_ms(reps, [&] { rs = xlprobe::analysis::kernels::ras_serial(acc, -1.0, mean_s); });
    const double ras_p = best_ms(reps, [&] { rp = xlprobe::analysis::kernels::ras_parallel(acc, -1.0, mean_p); });
    std::printf("ras       serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  max|diff| %.3g\n", ras_s, ras_p,
                ras_s / ras_p, max_abs_diff(rs, rp));

    const DenseMatrix vecs = random_matrix(n, dim, -1.0, 1.0, 2);
    DenseMatrix ds, dp;
    const double cos_s = best_ms(reps, [&] { ds = xlprobe::analysis::kernels::cosine_distance_serial(vecs); });
    const double cos_p = best_ms(reps, [&] { dp = xlprobe::analysis::kernels::cosine_distance_parallel(vecs); });
    std::printf("cosine    serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  max|diff| %.3g\n", cos_s, cos_p,
                cos_s / cos_p, max_abs_diff(ds, dp));
    return 0;
}
