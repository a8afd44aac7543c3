#pragma once

#include <functional>

#include "manpqn/qn.hpp"
#include "manpqn/stiefel.hpp"

namespace manpqn {

/// Symmetric r-by-r Lagrange multiplier of the tangency constraint.
class Multiplier {
public:
    Multiplier() = default;
    explicit Multiplier(Matrix lambda);
    static Multiplier zero(Eigen::Index r) { return Multiplier(Matrix::Zero(r, r)); }

    const Matrix& matrix() const noexcept { return lambda_; }
    Eigen::Index r() const noexcept { return lambda_.rows(); }

private:
    Matrix lambda_;
};

/// Data of one tangent-space subproblem
///   min_V <g, V> + 1/2 tr(V^T D V) + mu ||X + V||_1   s.t.  V^T X + X^T V = 0.
struct SubproblemInput {
    SubproblemInput(StiefelPoint x, Matrix g, DiagonalMetric metric, double mu);

    StiefelPoint x;
    Matrix g;  // Euclidean gradient of f at x
    DiagonalMetric metric;
    double mu;

    /// X - D^{-1}(g - 2 X Lambda): the prox argument B(Lambda).
    Matrix prox_argument(const Multiplier& lambda) const;
    /// <g, V> + 1/2 tr(V^T D V) + mu ||X + V||_1
    double objective(const Matrix& v) const;
};

struct SsnConfig {
    int max_inner = 100;
    double inner_tol = -1.0;  // <= 0 selects max(1e-12, 1e-10 r)
    double cg_tol = 1e-8;
    int cg_maxit = 50;
    double eta_floor = 1e-10;
    double eta_factor = 0.1;
    int max_backtracks = 10;
    double accept_ratio = 1.0 - 1e-4;
    // evaluation cap for the fallback minimization of the dual along the Newton direction
    int dual_search_maxit = 60;

    double tolerance_for(Eigen::Index r) const;
};

struct SubproblemResult {
    TangentVector v;
    Multiplier lambda;
    int ssn_iters = 0;
    double residual = 0.0;
    bool converged = false;
    int cg_iters = 0;
    int safeguard_steps = 0;
    int dual_steps = 0;
};

Matrix v_of_lambda(const SubproblemInput& inp, const Multiplier& lambda);

/// Negated Lagrangian dual of the subproblem. Convex in Lambda with gradient E(Lambda).
double dual_value(const SubproblemInput& inp, const Multiplier& lambda);

/// Step s in (0, 1] approximately minimizing dual_value(lambda + s dir), or 0 when
/// dir is not a descent direction or no decrease was found.
double dual_line_search(const SubproblemInput& inp, const Matrix& lambda, const Matrix& dir,
                        const Matrix& e0, int maxit);

/// E(Lambda) = V^T X + X^T V for V = V(Lambda).
Matrix residual_E(const SubproblemInput& inp, const Multiplier& lambda);

/// S -> A(mask o (2 D^{-1} X S)), one element of the generalized Jacobian of E.
Matrix apply_dual_jacobian(const SubproblemInput& inp, const Matrix& mask, const Matrix& s);

using SymOperator = std::function<Matrix(const Matrix&)>;

struct CgResult {
    Matrix solution;
    int iterations = 0;
    double residual = 0.0;
};

/// Conjugate gradients for (G + eta I)[d] = -rhs over symmetric matrices with the
/// trace inner product. Stops at ||res|| <= tol ||rhs|| or after maxit steps.
CgResult cg_solve(const SymOperator& op, const Matrix& rhs, double eta, double tol, int maxit);

/// Regularized semismooth Newton on E(Lambda) = 0, warm-started at lambda_init.
SubproblemResult solve_subproblem(const SubproblemInput& inp, const Multiplier& lambda_init,
                                  const SsnConfig& cfg = {});

}  // namespace manpqn
