#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "manpqn/matrix_market.hpp"
#include "manpqn/stiefel.hpp"

namespace manpqn {

/// Smooth part f of F = f + mu ||X||_1 on St(n, r).
struct ProblemSpec {
    std::string name;
    Eigen::Index n = 0;
    Eigen::Index r = 0;
    double mu = 0.0;
    std::function<double(const Matrix&)> f_value;
    std::function<Matrix(const Matrix&)> f_grad;  // Euclidean gradient
    std::optional<double> lipschitz_hint;

    double objective(const Matrix& x) const;  // f(X) + mu ||X||_1
};

/// Compressed modes: f(X) = tr(X^T H X) with H = -1/2 Laplacian of the free
/// electron on [0, 50], n grid points, periodic, second-difference stencil.
ProblemSpec cm_problem(Eigen::Index n, Eigen::Index r, double mu);

/// Applies the CM Hamiltonian above to the columns of x.
Matrix cm_hamiltonian_apply(const Matrix& x);
/// Dense copy of the CM Hamiltonian (tests and small n only).
Matrix cm_hamiltonian_dense(Eigen::Index n);
/// ||H||_2 of the CM Hamiltonian, from its circulant spectrum.
double cm_hamiltonian_norm(Eigen::Index n);

/// Sparse PCA: f(X) = -||A X||_F^2, gradient -2 A^T A X.
ProblemSpec spca_problem(Matrix a, Eigen::Index r, double mu);
ProblemSpec spca_problem(Eigen::SparseMatrix<double> a, Eigen::Index r, double mu);

/// Joint diagonalization: f(X) = -sum_l ||diag(X^T A_l X)||^2.
ProblemSpec jointdiag_problem(std::vector<Matrix> a_list, Eigen::Index r, double mu);

/// The closed-form Riemannian gradient
///   -4 sum_l (A_l X diag(X^T A_l X) - X sym(X^T A_l X diag(X^T A_l X))).
Matrix jointdiag_riemannian_gradient(const std::vector<Matrix>& a_list, const Matrix& x);

/// m-by-n Gaussian matrix, columns centered then scaled to unit 2-norm.
Matrix gen_spca_random(Eigen::Index m, Eigen::Index n, std::uint64_t seed);

/// A_i = P^T Lambda_i P with one shared random orthogonal P and Gaussian diagonals.
std::vector<Matrix> gen_jointdiag_random(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

/// Central differences (f(X + h E_ij) - f(X - h E_ij)) / 2h, entrywise.
Matrix finite_diff_gradient(const ProblemSpec& problem, const Matrix& x, double h_step);

/// Fraction of entries with |x_ij| <= threshold.
double sparsity(const Matrix& x, double threshold = 1e-5);

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
double power_iteration(const std::function<Vector(const Vector&)>& apply, Eigen::Index n, double tol = 1e-8,
                       int maxit = 10000, std::uint64_t seed = 0x5eed);

}  // namespace manpqn
