#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace manpqn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point on St(n, r): an n-by-r matrix with orthonormal columns.
///
/// Construction checks ||X^T X - I||_F against a tolerance (1e-10 by default),
/// so every StiefelPoint in flight is feasible.
class StiefelPoint {
public:
    static constexpr double kFeasibilityTol = 1e-10;

    explicit StiefelPoint(Matrix data, double tol = kFeasibilityTol);

    const Matrix& matrix() const noexcept { return data_; }
    Eigen::Index n() const noexcept { return data_.rows(); }
    Eigen::Index r() const noexcept { return data_.cols(); }

private:
    Matrix data_;
};

/// A tangent vector V with V^T X + X^T V = 0 at some base point X.
///
/// The base point is not stored; operations that need it take it explicitly.
class TangentVector {
public:
    TangentVector() = default;
    const Matrix& matrix() const noexcept { return data_; }
    double norm() const { return data_.norm(); }

    /// Wraps a matrix the caller already knows to be tangent at x. The
    /// tangency residual is checked relative to ||v||.
    static TangentVector assume_tangent(const StiefelPoint& x, Matrix v, double rel_tol = 1e-10);

private:
    explicit TangentVector(Matrix data) : data_(std::move(data)) {}
    friend TangentVector project_tangent(const StiefelPoint&, const Matrix&);

    Matrix data_;
};

/// ||X^T X - I||_F.
double feasibility_error(const Matrix& x);

/// ||V^T X + X^T V||_F.
double tangency_residual(const Matrix& x, const Matrix& v);

/// Z - X sym(X^T Z).
TangentVector project_tangent(const StiefelPoint& x, const Matrix& z);

inline TangentVector riemannian_gradient(const StiefelPoint& x, const Matrix& euclid_grad) {
    return project_tangent(x, euclid_grad);
}

/// Polar retraction: U V^T from the thin SVD of X + xi. Throws SingularityError
/// when the smallest singular value of X + xi is at or below 1e-12.
StiefelPoint retract(const StiefelPoint& x, const Matrix& xi);
StiefelPoint retract(const StiefelPoint& x, const TangentVector& xi);

/// Orthonormal factor of an n-by-r Gaussian matrix drawn from a seeded mt19937_64.
StiefelPoint random_stiefel(Eigen::Index n, Eigen::Index r, std::uint64_t seed);

/// Orthonormal factor (polar) of an arbitrary full-column-rank matrix.
Matrix polar_factor(const Matrix& a);

/// n-by-m matrix with i.i.d. standard normal entries, column-major fill order.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

}  // namespace manpqn
