#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "manpqn/stiefel.hpp"

namespace manpqn {

/// diag(B_k): positive row weights of the subproblem's quadratic term.
class DiagonalMetric {
public:
    explicit DiagonalMetric(Vector d);
    static DiagonalMetric scaled_identity(Eigen::Index n, double value);

    const Vector& d() const noexcept { return d_; }
    const Vector& d_inv() const noexcept { return d_inv_; }
    Eigen::Index size() const noexcept { return d_.size(); }

    /// tr(V^T diag(d) V)
    double quad(const Matrix& v) const;

private:
    Vector d_;
    Vector d_inv_;
};

struct DampedPair {
    Matrix s;
    Matrix y;      // raw gradient difference
    Matrix y_bar;  // damped against the current delta
    double beta = 1.0;
};

/// Limited memory of damped curvature pairs, oldest first.
class QnMemory {
public:
    QnMemory(std::size_t capacity, double delta);

    /// Damps (s, y) against the base metric delta*I and stores it, evicting the
    /// oldest pair at capacity. A numerically zero s leaves the memory unchanged
    /// and returns false.
    bool push_pair(const Matrix& s, const Matrix& y);

    /// Changes the base metric to delta * I and re-damps every stored pair
    /// against it.
    void rebase(double delta);

    const std::deque<DampedPair>& pairs() const noexcept { return pairs_; }
    std::size_t capacity() const noexcept { return capacity_; }
    double delta() const noexcept { return delta_; }
    bool empty() const noexcept { return pairs_.empty(); }
    void clear() { pairs_.clear(); }

    /// Diagnostics produced by rejected pushes (degenerate steps).
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    void damp(DampedPair& pair) const;

    std::size_t capacity_;
    double delta_;
    std::deque<DampedPair> pairs_;
    std::vector<std::string> diagnostics_;
};

/// beta from the damping rule with base metric delta*I: 1 when
/// tr(s^T y) >= 0.25 delta ||s||^2, else 0.75 delta||s||^2 / (delta||s||^2 - tr(s^T y)).
double damping_beta(const Matrix& s, const Matrix& y, double delta);

struct MetricBuild {
    DiagonalMetric metric;
    std::size_t skipped = 0;  // pairs dropped by the curvature guard
};

/// diag(B_k), with B_k rebuilt from delta*I over the stored pairs (oldest to
/// newest) by B <- B - (Bs)(Bs)^T / tr(s^T B s) + y y^T / tr(s^T y).
/// Uses the factored form B = delta I + sum_t w_t U_t U_t^T, never an n-by-n matrix.
MetricBuild diag_metric_build(const QnMemory& mem, Eigen::Index n);
DiagonalMetric diag_metric(const QnMemory& mem, Eigen::Index n);

/// Dense B_k by the same recursion (test oracle, O(p n^2 r)).
Matrix dense_B(const QnMemory& mem, Eigen::Index n);

/// Dense H_k = B_k^{-1} by Woodbury updates on each rank-2r step (test oracle).
Matrix dense_H(const QnMemory& mem, Eigen::Index n);

/// The BFGS product form H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T with
/// rho = 1/tr(s^T y). It inverts the B recursion only when r = 1.
Matrix dense_H_product_form(const QnMemory& mem, Eigen::Index n);

}  // namespace manpqn
