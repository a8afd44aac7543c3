#pragma once

#include "manpqn/stiefel.hpp"

namespace manpqn {

/// Separable convex regularizer used by the subproblem: its value, its
/// proximal map under a diagonal (row-weighted) metric, and one element of the
/// generalized Jacobian of that map.
class Regularizer {
public:
    virtual ~Regularizer() = default;
    virtual double value(const Matrix& x) const = 0;
    /// argmin_y h(y) + 1/2 sum_ij d_i (y_ij - b_ij)^2
    virtual Matrix scaled_prox(const Matrix& b, const Vector& d) const = 0;
    /// 0/1 entries; the derivative of scaled_prox wherever it exists.
    virtual Matrix jacobian_mask(const Matrix& b, const Vector& d) const = 0;
};

/// h(X) = mu * ||X||_1 (entrywise).
class L1Regularizer final : public Regularizer {
public:
    explicit L1Regularizer(double mu);
    double mu() const noexcept { return mu_; }

    double value(const Matrix& x) const override;
    Matrix scaled_prox(const Matrix& b, const Vector& d) const override;
    Matrix jacobian_mask(const Matrix& b, const Vector& d) const override;

private:
    double mu_;
};

double l1_value(const Matrix& x, double mu);

/// Row-weighted soft thresholding: y_ij = sign(b_ij) max(|b_ij| - mu/d_i, 0).
/// Throws MetricError unless every d_i > 0.
Matrix scaled_prox_l1(const Matrix& b, const Vector& d, double mu);

/// mask_ij = 1 when |b_ij| > mu/d_i. Ties go to 0.
Matrix prox_jacobian_mask(const Matrix& b, const Vector& d, double mu);

/// Throws MetricError when d has a non-positive or non-finite entry, and
/// DimensionError when d's length differs from rows.
void check_metric_weights(const Vector& d, Eigen::Index rows);

}  // namespace manpqn
