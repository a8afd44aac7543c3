#include "manpqn/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace manpqn::kernels {

namespace omp {

void soft_threshold(ConstMatRef b, ConstVecRef d, double mu, MatRef out) {
    const Eigen::Index n = b.rows(), r = b.cols();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = b(i, j);
            const double shrunk = std::abs(v) - mu / d(i);
            out(i, j) = shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
        }
    }
}

void threshold_mask(ConstMatRef b, ConstVecRef d, double mu, MatRef out) {
    const Eigen::Index n = b.rows(), r = b.cols();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = std::abs(b(i, j)) > mu / d(i) ? 1.0 : 0.0;
}

void masked_row_scale(ConstMatRef mask, ConstVecRef d_inv, double scale, ConstMatRef xs, MatRef out) {
    const Eigen::Index n = xs.rows(), r = xs.cols();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = mask(i, j) * (scale * d_inv(i) * xs(i, j));
}

void periodic_second_difference(ConstMatRef x, double coef, MatRef out) {
    const Eigen::Index n = x.rows(), r = x.cols();
#pragma omp parallel for collapse(2) schedule(static)
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index prev = i == 0 ? n - 1 : i - 1;
            const Eigen::Index next = i == n - 1 ? 0 : i + 1;
            out(i, j) = coef * (2.0 * x(i, j) - x(prev, j) - x(next, j));
        }
    }
}

// Each row's sum stays on one thread, so the result matches the serial kernel.
void accumulate_row_squares(ConstMatRef u, double w, VecRef diag) {
    const Eigen::Index n = u.rows(), r = u.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < r; ++j) acc += u(i, j) * u(i, j);
        diag(i) += w * acc;
    }
}

}  // namespace omp

namespace {

bool go_parallel(Eigen::Index entries) {
#ifdef _OPENMP
    return entries >= kParallelThreshold && !omp_in_parallel();
#else
    (void)entries;
    return false;
#endif
}

}  // namespace

void soft_threshold(ConstMatRef b, ConstVecRef d, double mu, MatRef out) {
    go_parallel(b.size()) ? omp::soft_threshold(b, d, mu, out) : serial::soft_threshold(b, d, mu, out);
}

void threshold_mask(ConstMatRef b, ConstVecRef d, double mu, MatRef out) {
    go_parallel(b.size()) ? omp::threshold_mask(b, d, mu, out) : serial::threshold_mask(b, d, mu, out);
}

void masked_row_scale(ConstMatRef mask, ConstVecRef d_inv, double scale, ConstMatRef xs, MatRef out) {
    go_parallel(xs.size()) ? omp::masked_row_scale(mask, d_inv, scale, xs, out)
                           : serial::masked_row_scale(mask, d_inv, scale, xs, out);
}

void periodic_second_difference(ConstMatRef x, double coef, MatRef out) {
    go_parallel(x.size()) ? omp::periodic_second_difference(x, coef, out)
                          : serial::periodic_second_difference(x, coef, out);
}

void accumulate_row_squares(ConstMatRef u, double w, VecRef diag) {
    go_parallel(u.size()) ? omp::accumulate_row_squares(u, w, diag)
                          : serial::accumulate_row_squares(u, w, diag);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace manpqn::kernels
