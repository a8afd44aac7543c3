#include "manpqn/kernels.hpp"

#include <cmath>

namespace manpqn::kernels::serial {

void soft_threshold(ConstMatRef b, ConstVecRef d, double mu, MatRef out) {
    const Eigen::Index n = b.rows(), r = b.cols();
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
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = std::abs(b(i, j)) > mu / d(i) ? 1.0 : 0.0;
}

void masked_row_scale(ConstMatRef mask, ConstVecRef d_inv, double scale, ConstMatRef xs, MatRef out) {
    const Eigen::Index n = xs.rows(), r = xs.cols();
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = mask(i, j) * (scale * d_inv(i) * xs(i, j));
}

void periodic_second_difference(ConstMatRef x, double coef, MatRef out) {
    const Eigen::Index n = x.rows(), r = x.cols();
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index prev = i == 0 ? n - 1 : i - 1;
            const Eigen::Index next = i == n - 1 ? 0 : i + 1;
            out(i, j) = coef * (2.0 * x(i, j) - x(prev, j) - x(next, j));
        }
    }
}

void accumulate_row_squares(ConstMatRef u, double w, VecRef diag) {
    const Eigen::Index n = u.rows(), r = u.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < r; ++j) acc += u(i, j) * u(i, j);
        diag(i) += w * acc;
    }
}

}  // namespace manpqn::kernels::serial
