#include "manpqn/qn.hpp"

#include <cmath>
#include <sstream>

#include "manpqn/errors.hpp"
#include "manpqn/kernels.hpp"
#include "manpqn/prox.hpp"

namespace manpqn {

namespace {

constexpr double kCurvatureGuard = 1e-14;
constexpr double kZeroStepGuard = 1e-14;

double trace_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

// B = delta I + sum_t weight_t * U_t U_t^T
struct FactoredMetric {
    double delta;
    std::vector<Matrix> factors;
    std::vector<double> weights;

    Matrix apply(const Matrix& s) const {
        Matrix out = delta * s;
        for (std::size_t t = 0; t < factors.size(); ++t) {
            out.noalias() += weights[t] * (factors[t] * (factors[t].transpose() * s));
        }
        return out;
    }
};

}  // namespace

DiagonalMetric::DiagonalMetric(Vector d) : d_(std::move(d)) {
    check_metric_weights(d_, d_.size());
    d_inv_ = d_.cwiseInverse();
}

DiagonalMetric DiagonalMetric::scaled_identity(Eigen::Index n, double value) {
    return DiagonalMetric(Vector::Constant(n, value));
}

double DiagonalMetric::quad(const Matrix& v) const {
    if (v.rows() != d_.size()) throw DimensionError("DiagonalMetric::quad: row mismatch");
    return (v.array().square().colwise() * d_.array()).sum();
}

QnMemory::QnMemory(std::size_t capacity, double delta) : capacity_(capacity), delta_(delta) {
    if (capacity < 1) throw ConfigError("QnMemory: capacity must be >= 1");
    if (!(delta > 0.0)) throw ConfigError("QnMemory: delta must be positive");
}

double damping_beta(const Matrix& s, const Matrix& y, double delta) {
    const double sbs = delta * s.squaredNorm();
    const double sty = trace_inner(s, y);
    if (sty < 0.25 * sbs) return 0.75 * sbs / (sbs - sty);
    return 1.0;
}

bool QnMemory::push_pair(const Matrix& s, const Matrix& y) {
    if (s.rows() != y.rows() || s.cols() != y.cols()) throw DimensionError("push_pair: shape mismatch");
    if (!pairs_.empty() && pairs_.front().s.rows() != s.rows()) {
        throw DimensionError("push_pair: pair dimension differs from stored pairs");
    }
    const double floor = kZeroStepGuard * std::sqrt(static_cast<double>(s.size()));
    if (!(s.norm() >= floor)) {
        std::ostringstream msg;
        msg << "push_pair: degenerate step ||s||_F = " << s.norm() << ", pair skipped";
        diagnostics_.push_back(msg.str());
        return false;
    }
    DampedPair pair{s, y, Matrix(), 1.0};
    damp(pair);
    if (pairs_.size() == capacity_) pairs_.pop_front();
    pairs_.push_back(std::move(pair));
    return true;
}

void QnMemory::damp(DampedPair& pair) const {
    pair.beta = damping_beta(pair.s, pair.y, delta_);
    if (pair.beta == 1.0) {
        pair.y_bar = pair.y;
    } else {
        pair.y_bar = pair.beta * pair.y + (1.0 - pair.beta) * delta_ * pair.s;
    }
}

void QnMemory::rebase(double delta) {
    if (!(delta > 0.0)) throw ConfigError("QnMemory: delta must be positive");
    delta_ = delta;
    for (DampedPair& p : pairs_) damp(p);
}

MetricBuild diag_metric_build(const QnMemory& mem, Eigen::Index n) {
    FactoredMetric b{mem.delta(), {}, {}};
    Vector d = Vector::Constant(n, mem.delta());
    std::size_t skipped = 0;
    for (const DampedPair& p : mem.pairs()) {
        if (p.s.rows() != n) throw DimensionError("diag_metric: pair rows differ from n");
        Matrix bs = b.apply(p.s);
        const double sbs = trace_inner(p.s, bs);
        const double sy = trace_inner(p.s, p.y_bar);
        if (!(sbs > kCurvatureGuard * p.s.squaredNorm()) || !(sy > 0.0)) {
            ++skipped;
            continue;
        }
        kernels::accumulate_row_squares(bs, -1.0 / sbs, d);
        kernels::accumulate_row_squares(p.y_bar, 1.0 / sy, d);
        b.factors.push_back(std::move(bs));
        b.weights.push_back(-1.0 / sbs);
        b.factors.push_back(p.y_bar);
        b.weights.push_back(1.0 / sy);
    }
    return {DiagonalMetric(std::move(d)), skipped};
}

DiagonalMetric diag_metric(const QnMemory& mem, Eigen::Index n) {
    return diag_metric_build(mem, n).metric;
}

Matrix dense_B(const QnMemory& mem, Eigen::Index n) {
    Matrix b = mem.delta() * Matrix::Identity(n, n);
    for (const DampedPair& p : mem.pairs()) {
        const Matrix bs = b * p.s;
        const double sbs = trace_inner(p.s, bs);
        const double sy = trace_inner(p.s, p.y_bar);
        if (!(sbs > kCurvatureGuard * p.s.squaredNorm()) || !(sy > 0.0)) continue;
        b += -(bs * bs.transpose()) / sbs + (p.y_bar * p.y_bar.transpose()) / sy;
        b = 0.5 * (b + b.transpose()).eval();
    }
    return b;
}

Matrix dense_H(const QnMemory& mem, Eigen::Index n) {
    Matrix b = mem.delta() * Matrix::Identity(n, n);
    Matrix h = Matrix::Identity(n, n) / mem.delta();
    for (const DampedPair& p : mem.pairs()) {
        const Eigen::Index r = p.s.cols();
        const Matrix bs = b * p.s;
        const double sbs = trace_inner(p.s, bs);
        const double sy = trace_inner(p.s, p.y_bar);
        if (!(sbs > kCurvatureGuard * p.s.squaredNorm()) || !(sy > 0.0)) continue;
        // B+ = B + U C U^T with U = [Bs, y], C = diag(-1/sbs I, 1/sy I).
        Matrix u(n, 2 * r);
        u << bs, p.y_bar;
        Matrix hu(n, 2 * r);
        hu << p.s, h * p.y_bar;  // H (Bs) = s
        Matrix core = u.transpose() * hu;
        core.topLeftCorner(r, r).diagonal().array() -= sbs;
        core.bottomRightCorner(r, r).diagonal().array() += sy;
        const Matrix solved = core.fullPivLu().solve(hu.transpose());
        h -= hu * solved;
        h = 0.5 * (h + h.transpose()).eval();
        b += -(bs * bs.transpose()) / sbs + (p.y_bar * p.y_bar.transpose()) / sy;
        b = 0.5 * (b + b.transpose()).eval();
    }
    return h;
}

Matrix dense_H_product_form(const QnMemory& mem, Eigen::Index n) {
    Matrix h = Matrix::Identity(n, n) / mem.delta();
    const Matrix eye = Matrix::Identity(n, n);
    for (const DampedPair& p : mem.pairs()) {
        const double sy = trace_inner(p.s, p.y_bar);
        if (!(sy > 0.0)) continue;
        const double rho = 1.0 / sy;
        const Matrix left = eye - rho * p.s * p.y_bar.transpose();
        h = left * h * left.transpose() + rho * p.s * p.s.transpose();
    }
    return h;
}

}  // namespace manpqn
