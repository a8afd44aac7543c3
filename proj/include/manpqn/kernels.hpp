#pragma once

// Elementwise inner loops of the solvers. Every kernel has a serial reference
// and an OpenMP twin; both produce bitwise-identical results (no reductions
// cross thread boundaries). The unqualified entry points pick the OpenMP twin
// once the problem is large enough to amortize thread start-up.

#include <Eigen/Dense>

namespace manpqn::kernels {

using ConstMatRef = Eigen::Ref<const Eigen::MatrixXd>;
using MatRef = Eigen::Ref<Eigen::MatrixXd>;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;

// Entry count (n*r) from which the dispatching wrappers go parallel.
inline constexpr Eigen::Index kParallelThreshold = 1 << 14;

#define MANPQN_KERNEL_DECLS                                                                  \
    /* out_ij = sign(b_ij) max(|b_ij| - mu/d_i, 0) */                                        \
    void soft_threshold(ConstMatRef b, ConstVecRef d, double mu, MatRef out);               \
    /* out_ij = 1 if |b_ij| > mu/d_i else 0 */                                               \
    void threshold_mask(ConstMatRef b, ConstVecRef d, double mu, MatRef out);               \
    /* out_ij = mask_ij * scale * d_inv_i * xs_ij */                                         \
    void masked_row_scale(ConstMatRef mask, ConstVecRef d_inv, double scale, ConstMatRef xs, \
                          MatRef out);                                                       \
    /* out = coef * (2 x_i - x_{i-1} - x_{i+1}) with periodic wrap, per column */            \
    void periodic_second_difference(ConstMatRef x, double coef, MatRef out);                \
    /* diag_i += w * sum_j u_ij^2 */                                                          \
    void accumulate_row_squares(ConstMatRef u, double w, VecRef diag);

namespace serial {
MANPQN_KERNEL_DECLS
}  // namespace serial

namespace omp {
MANPQN_KERNEL_DECLS
}  // namespace omp

#undef MANPQN_KERNEL_DECLS

void soft_threshold(ConstMatRef b, ConstVecRef d, double mu, MatRef out);
void threshold_mask(ConstMatRef b, ConstVecRef d, double mu, MatRef out);
void masked_row_scale(ConstMatRef mask, ConstVecRef d_inv, double scale, ConstMatRef xs, MatRef out);
void periodic_second_difference(ConstMatRef x, double coef, MatRef out);
void accumulate_row_squares(ConstMatRef u, double w, VecRef diag);

/// Threads the OpenMP twins will use (1 when built without OpenMP).
int max_threads();

}  // namespace manpqn::kernels
