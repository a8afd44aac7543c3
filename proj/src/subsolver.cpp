#include "manpqn/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "manpqn/errors.hpp"
#include "manpqn/kernels.hpp"
#include "manpqn/prox.hpp"

namespace manpqn {

namespace {

double frob_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

Matrix sym_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix constraint_map(const Matrix& x, const Matrix& v) {
    const Matrix vtx = v.transpose() * x;
    return vtx + vtx.transpose();
}

}  // namespace

double dual_line_search(const SubproblemInput& inp, const Matrix& lambda, const Matrix& dir,
                        const Matrix& e0, int maxit) {
    // psi is convex along the ray, so its directional derivative is monotone in s
    // and piecewise linear. Regula falsi with the Illinois modification brackets
    // the minimizer in [0, 1].
    const double slope0 = frob_inner(e0, dir);
    if (!(slope0 < 0.0)) return 0.0;
    auto dphi = [&](double s) {
        return frob_inner(residual_E(inp, Multiplier(sym_part(lambda + s * dir))), dir);
    };
    const double psi0 = dual_value(inp, Multiplier(lambda));
    auto decreases = [&](double s) {
        return dual_value(inp, Multiplier(sym_part(lambda + s * dir))) < psi0;
    };

    double lo = 0.0, f_lo = slope0;
    double hi = 1.0, f_hi = dphi(1.0);
    if (f_hi <= 0.0) return decreases(1.0) ? 1.0 : 0.0;

    const double target = 0.1 * std::abs(slope0);
    int side = 0;
    double s = 0.0;
    for (int it = 0; it < maxit; ++it) {
        s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
        const double f_s = dphi(s);
        if (std::abs(f_s) <= target) break;
        if (f_s < 0.0) {
            lo = s;
            f_lo = f_s;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = s;
            f_hi = f_s;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
    }
    if (s > 0.0 && decreases(s)) return s;
    return (lo > 0.0 && decreases(lo)) ? lo : 0.0;
}

Multiplier::Multiplier(Matrix lambda) : lambda_(std::move(lambda)) {
    if (lambda_.rows() != lambda_.cols()) throw DimensionError("Multiplier must be square");
    const double asym = (lambda_ - lambda_.transpose()).norm();
    if (asym > 1e-12 * (1.0 + lambda_.norm())) {
        std::ostringstream msg;
        msg << "Multiplier is not symmetric (||L - L^T||_F = " << asym << ")";
        throw DiagnosticsError(msg.str());
    }
}

SubproblemInput::SubproblemInput(StiefelPoint x_, Matrix g_, DiagonalMetric metric_, double mu_)
    : x(std::move(x_)), g(std::move(g_)), metric(std::move(metric_)), mu(mu_) {
    if (g.rows() != x.n() || g.cols() != x.r()) throw DimensionError("SubproblemInput: gradient shape");
    if (metric.size() != x.n()) throw DimensionError("SubproblemInput: metric size");
    if (!(mu >= 0.0)) throw ConfigError("SubproblemInput: mu must be nonnegative");
}

Matrix SubproblemInput::prox_argument(const Multiplier& lambda) const {
    if (lambda.r() != x.r()) throw DimensionError("multiplier size differs from r");
    const Matrix& X = x.matrix();
    const Matrix rhs = g - 2.0 * X * lambda.matrix();
    return X - metric.d_inv().asDiagonal() * rhs;
}

double SubproblemInput::objective(const Matrix& v) const {
    return frob_inner(g, v) + 0.5 * metric.quad(v) + l1_value(x.matrix() + v, mu);
}

double SsnConfig::tolerance_for(Eigen::Index r) const {
    if (inner_tol > 0.0) return inner_tol;
    return std::max(1e-12, 1e-10 * static_cast<double>(r));
}

Matrix v_of_lambda(const SubproblemInput& inp, const Multiplier& lambda) {
    return scaled_prox_l1(inp.prox_argument(lambda), inp.metric.d(), inp.mu) - inp.x.matrix();
}

double dual_value(const SubproblemInput& inp, const Multiplier& lambda) {
    const Matrix v = v_of_lambda(inp, lambda);
    const Matrix shifted = inp.g - 2.0 * inp.x.matrix() * lambda.matrix();
    return -(frob_inner(shifted, v) + 0.5 * inp.metric.quad(v) + l1_value(inp.x.matrix() + v, inp.mu));
}

Matrix residual_E(const SubproblemInput& inp, const Multiplier& lambda) {
    return constraint_map(inp.x.matrix(), v_of_lambda(inp, lambda));
}

Matrix apply_dual_jacobian(const SubproblemInput& inp, const Matrix& mask, const Matrix& s) {
    const Matrix& X = inp.x.matrix();
    if (mask.rows() != X.rows() || mask.cols() != X.cols()) throw DimensionError("mask shape");
    if (s.rows() != X.cols() || s.cols() != X.cols()) throw DimensionError("dual direction shape");
    const Matrix xs = X * s;
    Matrix m(X.rows(), X.cols());
    kernels::masked_row_scale(mask, inp.metric.d_inv(), 2.0, xs, m);
    return constraint_map(X, m);
}

CgResult cg_solve(const SymOperator& op, const Matrix& rhs, double eta, double tol, int maxit) {
    if (!(eta > 0.0)) throw ConfigError("cg_solve: eta must be positive");
    const Eigen::Index r = rhs.rows();
    CgResult out{Matrix::Zero(r, r), 0, 0.0};
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return out;

    auto apply = [&](const Matrix& p) {
        Matrix gp = op(p);
        const double asym = (gp - gp.transpose()).norm();
        if (asym > 1e-10 * (1.0 + gp.norm())) {
            throw DiagnosticsError("cg_solve: operator returned a non-symmetric matrix");
        }
        return Matrix(gp + eta * p);
    };

    Matrix& d = out.solution;
    Matrix res = -rhs;  // residual of (G + eta I) d = -rhs at d = 0
    Matrix dir = res;
    double rr = res.squaredNorm();
    const double stop = tol * rhs_norm;
    int it = 0;
    while (it < maxit && std::sqrt(rr) > stop) {
        const Matrix q = apply(dir);
        const double curv = frob_inner(dir, q);
        if (!(curv > 0.0)) break;
        const double step = rr / curv;
        d += step * dir;
        res -= step * q;
        const double rr_next = res.squaredNorm();
        dir = res + (rr_next / rr) * dir;
        rr = rr_next;
        ++it;
    }
    d = sym_part(d);
    out.iterations = it;
    out.residual = std::sqrt(rr);
    return out;
}

SubproblemResult solve_subproblem(const SubproblemInput& inp, const Multiplier& lambda_init,
                                  const SsnConfig& cfg) {
    const Eigen::Index r = inp.x.r();
    if (lambda_init.r() != r) throw DimensionError("solve_subproblem: multiplier size");
    const double tol = cfg.tolerance_for(r);

    Matrix lambda = sym_part(lambda_init.matrix());
    Matrix e = residual_E(inp, Multiplier(lambda));
    double e_norm = e.norm();

    Matrix best_lambda = lambda;
    double best_norm = e_norm;

    SubproblemResult result;
    int iters = 0;
    while (e_norm > tol && iters < cfg.max_inner) {
        const Matrix mask = prox_jacobian_mask(inp.prox_argument(Multiplier(lambda)), inp.metric.d(), inp.mu);
        const double eta = std::max(cfg.eta_floor, cfg.eta_factor * e_norm);
        const CgResult cg = cg_solve(
            [&](const Matrix& s) { return apply_dual_jacobian(inp, mask, s); }, e, eta, cfg.cg_tol,
            cfg.cg_maxit);
        result.cg_iters += cg.iterations;

        bool accepted = false;
        double step = 1.0;
        Matrix trial;
        Matrix e_trial;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
            trial = sym_part(lambda + step * cg.solution);
            e_trial = residual_E(inp, Multiplier(trial));
            if (e_trial.norm() <= cfg.accept_ratio * e_norm) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            const double s_star = dual_line_search(inp, lambda, cg.solution, e, cfg.dual_search_maxit);
            if (s_star > 0.0) {
                trial = sym_part(lambda + s_star * cg.solution);
                e_trial = residual_E(inp, Multiplier(trial));
                accepted = true;
                ++result.dual_steps;
            }
        }
        if (!accepted) {
            const double c = 0.1 / (1.0 + e_norm);
            trial = sym_part(lambda - c * e);
            e_trial = residual_E(inp, Multiplier(trial));
            ++result.safeguard_steps;
        }
        lambda = std::move(trial);
        e = std::move(e_trial);
        e_norm = e.norm();
        ++iters;
        if (e_norm < best_norm) {
            best_norm = e_norm;
            best_lambda = lambda;
        }
    }

    const Matrix v = v_of_lambda(inp, Multiplier(best_lambda));
    result.v = project_tangent(inp.x, v);
    result.lambda = Multiplier(best_lambda);
    result.ssn_iters = iters;
    result.residual = best_norm;
    result.converged = best_norm <= tol;
    return result;
}

}  // namespace manpqn
