#include "manpqn/stiefel.hpp"

#include <random>
#include <sstream>

#include "manpqn/errors.hpp"

namespace manpqn {

namespace {

constexpr double kMinSingularValue = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << op << ": shape mismatch (" << a.rows() << "x" << a.cols() << " vs " << b.rows()
            << "x" << b.cols() << ")";
        throw DimensionError(msg.str());
    }
}

}  // namespace

StiefelPoint::StiefelPoint(Matrix data, double tol) : data_(std::move(data)) {
    if (data_.cols() < 1 || data_.cols() > data_.rows()) {
        throw DimensionError("StiefelPoint requires 1 <= r <= n");
    }
    const double err = feasibility_error(data_);
    if (!(err <= tol)) {
        std::ostringstream msg;
        msg << "StiefelPoint: ||X^T X - I||_F = " << err << " exceeds " << tol;
        throw DiagnosticsError(msg.str());
    }
}

TangentVector TangentVector::assume_tangent(const StiefelPoint& x, Matrix v, double rel_tol) {
    require_same_shape(x.matrix(), v, "assume_tangent");
    const double res = tangency_residual(x.matrix(), v);
    if (res > rel_tol * std::max(1.0, v.norm())) {
        std::ostringstream msg;
        msg << "assume_tangent: tangency residual " << res;
        throw DiagnosticsError(msg.str());
    }
    return TangentVector(std::move(v));
}

double feasibility_error(const Matrix& x) {
    const Eigen::Index r = x.cols();
    return (x.transpose() * x - Matrix::Identity(r, r)).norm();
}

double tangency_residual(const Matrix& x, const Matrix& v) {
    const Matrix xtv = x.transpose() * v;
    return (xtv + xtv.transpose()).norm();
}

TangentVector project_tangent(const StiefelPoint& x, const Matrix& z) {
    require_same_shape(x.matrix(), z, "project_tangent");
    const Matrix& X = x.matrix();
    const Matrix xtz = X.transpose() * z;
    const Matrix sym = 0.5 * (xtz + xtz.transpose());
    return TangentVector(z - X * sym);
}

Matrix polar_factor(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    if (!(smin > kMinSingularValue)) {
        std::ostringstream msg;
        msg << "polar factor undefined: smallest singular value " << smin;
        throw SingularityError(msg.str(), smin);
    }
    return svd.matrixU() * svd.matrixV().transpose();
}

StiefelPoint retract(const StiefelPoint& x, const Matrix& xi) {
    require_same_shape(x.matrix(), xi, "retract");
    if (xi.isZero(0.0)) return x;
    return StiefelPoint(polar_factor(x.matrix() + xi));
}

StiefelPoint retract(const StiefelPoint& x, const TangentVector& xi) {
    return retract(x, xi.matrix());
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(gen);
    return a;
}

StiefelPoint random_stiefel(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
    if (r < 1 || r > n) throw DimensionError("random_stiefel requires 1 <= r <= n");
    return StiefelPoint(polar_factor(gaussian_matrix(n, r, seed)));
}

}  // namespace manpqn
