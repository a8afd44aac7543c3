#include "manpqn/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "manpqn/errors.hpp"
#include "manpqn/kernels.hpp"
#include "manpqn/prox.hpp"

namespace manpqn {

namespace {

constexpr double kCmDomain = 50.0;

double cm_coef(Eigen::Index n) {
    const double h = kCmDomain / static_cast<double>(n);
    return 0.5 / (h * h);
}

void require_rank(Eigen::Index n, Eigen::Index r, const char* who) {
    if (r < 1 || r > n) {
        std::ostringstream msg;
        msg << who << ": need 1 <= r <= n (n=" << n << ", r=" << r << ")";
        throw DimensionError(msg.str());
    }
}

}  // namespace

double ProblemSpec::objective(const Matrix& x) const { return f_value(x) + l1_value(x, mu); }

Matrix cm_hamiltonian_apply(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    kernels::periodic_second_difference(x, cm_coef(x.rows()), out);
    return out;
}

Matrix cm_hamiltonian_dense(Eigen::Index n) {
    Matrix h = Matrix::Zero(n, n);
    const double c = cm_coef(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) += 2.0 * c;
        h(i, (i + 1) % n) -= c;
        h(i, (i + n - 1) % n) -= c;
    }
    return h;
}

double cm_hamiltonian_norm(Eigen::Index n) {
    // Circulant eigenvalues 2c (1 - cos(2 pi k / n)), k = 0..n-1.
    double best = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double ev = 2.0 * cm_coef(n) *
                          (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
        best = std::max(best, ev);
    }
    return best;
}

ProblemSpec cm_problem(Eigen::Index n, Eigen::Index r, double mu) {
    if (n < 4) throw DimensionError("cm_problem: n must be >= 4");
    require_rank(n, r, "cm_problem");
    if (!(mu >= 0.0)) throw ConfigError("cm_problem: mu must be nonnegative");
    ProblemSpec p;
    std::ostringstream name;
    name << "cm(n=" << n << ",r=" << r << ",mu=" << mu << ")";
    p.name = name.str();
    p.n = n;
    p.r = r;
    p.mu = mu;
    p.f_value = [](const Matrix& x) { return (x.array() * cm_hamiltonian_apply(x).array()).sum(); };
    p.f_grad = [](const Matrix& x) { return Matrix(2.0 * cm_hamiltonian_apply(x)); };
    p.lipschitz_hint = 2.0 * cm_hamiltonian_norm(n);
    return p;
}

double power_iteration(const std::function<Vector(const Vector&)>& apply, Eigen::Index n, double tol, int maxit,
                       std::uint64_t seed) {
    Vector v = gaussian_matrix(n, 1, seed).col(0);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < maxit; ++it) {
        Vector w = apply(v);
        const double next = v.dot(w);
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        v = w / wn;
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
        lambda = next;
    }
    return lambda;
}

namespace {

template <typename MatA>
ProblemSpec spca_from(std::shared_ptr<const MatA> a, Eigen::Index r, double mu, const char* label) {
    const Eigen::Index n = a->cols();
    require_rank(n, r, "spca_problem");
    if (!(mu >= 0.0)) throw ConfigError("spca_problem: mu must be nonnegative");
    ProblemSpec p;
    std::ostringstream name;
    name << label << "(m=" << a->rows() << ",n=" << n << ",r=" << r << ",mu=" << mu << ")";
    p.name = name.str();
    p.n = n;
    p.r = r;
    p.mu = mu;
    p.f_value = [a](const Matrix& x) { return -Matrix(*a * x).squaredNorm(); };
    p.f_grad = [a](const Matrix& x) {
        const Matrix ax = *a * x;
        return Matrix(-2.0 * (a->transpose() * ax));
    };
    const double lmax = power_iteration([&](const Vector& v) { return Vector(a->transpose() * (*a * v)); }, n);
    p.lipschitz_hint = 2.0 * lmax;
    return p;
}

}  // namespace

ProblemSpec spca_problem(Matrix a, Eigen::Index r, double mu) {
    return spca_from(std::make_shared<const Matrix>(std::move(a)), r, mu, "spca");
}

ProblemSpec spca_problem(Eigen::SparseMatrix<double> a, Eigen::Index r, double mu) {
    a.makeCompressed();
    return spca_from(std::make_shared<const Eigen::SparseMatrix<double>>(std::move(a)), r, mu, "spca-mtx");
}

ProblemSpec jointdiag_problem(std::vector<Matrix> a_list, Eigen::Index r, double mu) {
    if (a_list.empty()) throw DimensionError("jointdiag_problem: need at least one matrix");
    const Eigen::Index n = a_list.front().rows();
    for (std::size_t l = 0; l < a_list.size(); ++l) {
        const Matrix& a = a_list[l];
        if (a.rows() != n || a.cols() != n) throw DimensionError("jointdiag_problem: matrices must be n-by-n");
        const double asym = (a - a.transpose()).norm();
        if (asym > 1e-10 * std::max(1.0, a.norm())) {
            std::ostringstream msg;
            msg << "jointdiag_problem: A_" << l << " is not symmetric (||A - A^T||_F = " << asym << ")";
            throw DimensionError(msg.str());
        }
    }
    require_rank(n, r, "jointdiag_problem");
    if (!(mu >= 0.0)) throw ConfigError("jointdiag_problem: mu must be nonnegative");

    auto mats = std::make_shared<const std::vector<Matrix>>(std::move(a_list));
    ProblemSpec p;
    std::ostringstream name;
    name << "jd(n=" << n << ",N=" << mats->size() << ",r=" << r << ",mu=" << mu << ")";
    p.name = name.str();
    p.n = n;
    p.r = r;
    p.mu = mu;
    p.f_value = [mats](const Matrix& x) {
        double acc = 0.0;
        for (const Matrix& a : *mats) {
            const Vector dg = (x.array() * (a * x).array()).colwise().sum().transpose();
            acc -= dg.squaredNorm();
        }
        return acc;
    };
    p.f_grad = [mats](const Matrix& x) {
        Matrix g = Matrix::Zero(x.rows(), x.cols());
        for (const Matrix& a : *mats) {
            const Matrix ax = a * x;
            const Vector dg = (x.array() * ax.array()).colwise().sum().transpose();
            g.noalias() -= 4.0 * (ax * dg.asDiagonal());
        }
        return g;
    };
    // Along unit-column directions the Hessian of each term is bounded by 12 ||A_l||_2^2.
    double bound = 0.0;
    for (const Matrix& a : *mats) {
        bound += power_iteration([&a](const Vector& v) { return Vector(a * (a * v)); }, n);
    }
    p.lipschitz_hint = 12.0 * bound;
    return p;
}

Matrix jointdiag_riemannian_gradient(const std::vector<Matrix>& a_list, const Matrix& x) {
    Matrix g = Matrix::Zero(x.rows(), x.cols());
    for (const Matrix& a : a_list) {
        const Matrix ax = a * x;
        const Vector dg = (x.array() * ax.array()).colwise().sum().transpose();
        const Matrix axd = ax * dg.asDiagonal();
        const Matrix y = x.transpose() * axd;
        g.noalias() -= 4.0 * (axd - x * (0.5 * (y + y.transpose())));
    }
    return g;
}

Matrix gen_spca_random(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
    if (m < 1 || n < 1) throw DimensionError("gen_spca_random: m, n must be >= 1");
    Matrix a = gaussian_matrix(m, n, seed);
    a.rowwise() -= a.colwise().mean();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double nrm = a.col(j).norm();
        if (nrm > 0.0) a.col(j) /= nrm;
    }
    return a;
}

std::vector<Matrix> gen_jointdiag_random(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
    if (n < 1 || count < 1) throw DimensionError("gen_jointdiag_random: n, N must be >= 1");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(gen);
    const Matrix p = polar_factor(g);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index l = 0; l < count; ++l) {
        Vector lam(n);
        for (Eigen::Index i = 0; i < n; ++i) lam(i) = normal(gen);
        Matrix a = p.transpose() * lam.asDiagonal() * p;
        out.push_back(0.5 * (a + a.transpose()));
    }
    return out;
}

Matrix finite_diff_gradient(const ProblemSpec& problem, const Matrix& x, double h_step) {
    if (!(h_step > 0.0)) throw ConfigError("finite_diff_gradient: step must be positive");
    Matrix g(x.rows(), x.cols());
    Matrix probe = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double saved = probe(i, j);
            probe(i, j) = saved + h_step;
            const double fp = problem.f_value(probe);
            probe(i, j) = saved - h_step;
            const double fm = problem.f_value(probe);
            probe(i, j) = saved;
            g(i, j) = (fp - fm) / (2.0 * h_step);
        }
    }
    return g;
}

double sparsity(const Matrix& x, double threshold) {
    if (!(threshold >= 0.0)) throw ConfigError("sparsity: threshold must be nonnegative");
    if (x.size() == 0) return 0.0;
    const auto zeros = (x.array().abs() <= threshold).count();
    return static_cast<double>(zeros) / static_cast<double>(x.size());
}

}  // namespace manpqn
