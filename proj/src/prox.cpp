#include "manpqn/prox.hpp"

#include <cmath>
#include <sstream>

#include "manpqn/errors.hpp"
#include "manpqn/kernels.hpp"

namespace manpqn {

void check_metric_weights(const Vector& d, Eigen::Index rows) {
    if (d.size() != rows) {
        std::ostringstream msg;
        msg << "metric has " << d.size() << " weights for " << rows << " rows";
        throw DimensionError(msg.str());
    }
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d(i) > 0.0) || !std::isfinite(d(i))) {
            std::ostringstream msg;
            msg << "metric weight d[" << i << "] = " << d(i) << " is not positive";
            throw MetricError(msg.str());
        }
    }
}

L1Regularizer::L1Regularizer(double mu) : mu_(mu) {
    if (!(mu >= 0.0)) throw ConfigError("L1Regularizer: mu must be nonnegative");
}

double L1Regularizer::value(const Matrix& x) const { return l1_value(x, mu_); }

Matrix L1Regularizer::scaled_prox(const Matrix& b, const Vector& d) const {
    return scaled_prox_l1(b, d, mu_);
}

Matrix L1Regularizer::jacobian_mask(const Matrix& b, const Vector& d) const {
    return prox_jacobian_mask(b, d, mu_);
}

double l1_value(const Matrix& x, double mu) {
    if (mu == 0.0) return 0.0;
    return mu * x.cwiseAbs().sum();
}

Matrix scaled_prox_l1(const Matrix& b, const Vector& d, double mu) {
    check_metric_weights(d, b.rows());
    Matrix out(b.rows(), b.cols());
    kernels::soft_threshold(b, d, mu, out);
    return out;
}

Matrix prox_jacobian_mask(const Matrix& b, const Vector& d, double mu) {
    check_metric_weights(d, b.rows());
    Matrix out(b.rows(), b.cols());
    kernels::threshold_mask(b, d, mu, out);
    return out;
}

}  // namespace manpqn
