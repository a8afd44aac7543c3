#include <cmath>
#include <random>

#include "doctest.h"
#include "manpqn/errors.hpp"
#include "manpqn/prox.hpp"
#include "manpqn/subsolver.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/subproblem_enumeration.hpp"

using namespace manpqn;

namespace {

double tr_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

SubproblemInput random_input(Eigen::Index n, Eigen::Index r, double mu, std::uint64_t seed) {
    return SubproblemInput(random_stiefel(n, r, seed), gaussian_matrix(n, r, seed + 1),
                           DiagonalMetric(fixture::positive_weights(n, seed + 2)), mu);
}

Matrix random_mask(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
    return (gaussian_matrix(n, r, seed).array() > 0.0).cast<double>().matrix();
}

}  // namespace

TEST_CASE("Multiplier must be symmetric and square") {
    CHECK_NOTHROW(Multiplier(fixture::symmetric(3, 1)));
    CHECK_THROWS_AS(Multiplier(gaussian_matrix(3, 3, 2)), DiagnosticsError);
    CHECK_THROWS_AS(Multiplier(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("SubproblemInput validation") {
    const StiefelPoint x = random_stiefel(5, 2, 1);
    CHECK_THROWS_AS(SubproblemInput(x, Matrix::Zero(5, 3), DiagonalMetric::scaled_identity(5, 1.0), 0.1),
                    DimensionError);
    CHECK_THROWS_AS(SubproblemInput(x, Matrix::Zero(5, 2), DiagonalMetric::scaled_identity(4, 1.0), 0.1),
                    DimensionError);
    CHECK_THROWS_AS(SubproblemInput(x, Matrix::Zero(5, 2), DiagonalMetric::scaled_identity(5, 1.0), -1.0),
                    ConfigError);
}

TEST_CASE("v_of_lambda and residual_E closed forms") {
    const StiefelPoint x = random_stiefel(7, 3, 4);
    const Matrix lam = fixture::symmetric(3, 5);

    SUBCASE("mu = 0, g = 0, D = delta I") {
        const double delta = 2.5;
        const SubproblemInput inp(x, Matrix::Zero(7, 3), DiagonalMetric::scaled_identity(7, delta), 0.0);
        const Matrix v = v_of_lambda(inp, Multiplier(lam));
        CHECK((v - (2.0 / delta) * x.matrix() * lam).norm() <= 1e-14);
        CHECK((residual_E(inp, Multiplier(lam)) - (4.0 / delta) * lam).norm() <= 1e-13);
        CHECK(residual_E(inp, Multiplier::zero(3)).norm() == 0.0);
    }
    SUBCASE("mu = 0, tangent g, D = I, Lambda = 0") {
        const Matrix g = fixture::tangent_at(x.matrix(), gaussian_matrix(7, 3, 6));
        const SubproblemInput inp(x, g, DiagonalMetric::scaled_identity(7, 1.0), 0.0);
        CHECK((v_of_lambda(inp, Multiplier::zero(3)) + g).norm() <= 1e-14);
        CHECK(residual_E(inp, Multiplier::zero(3)).norm() <= 1e-13);
    }
    SUBCASE("very large mu shrinks X + V to zero") {
        const SubproblemInput inp(x, gaussian_matrix(7, 3, 7), DiagonalMetric::scaled_identity(7, 1.0), 1e6);
        CHECK((v_of_lambda(inp, Multiplier(lam)) + x.matrix()).norm() == 0.0);
    }
}

TEST_CASE("dual_value has gradient E") {
    const SubproblemInput inp = random_input(9, 3, 0.3, 10);
    const Matrix lam = fixture::symmetric(3, 11);
    const Matrix e = residual_E(inp, Multiplier(lam));
    const double h = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix dir = fixture::symmetric(3, 20 + static_cast<std::uint64_t>(trial));
        const double fd = (dual_value(inp, Multiplier(Matrix(lam + h * dir))) -
                           dual_value(inp, Multiplier(Matrix(lam - h * dir)))) /
                          (2 * h);
        CHECK(fd == doctest::Approx(tr_inner(e, dir)).epsilon(1e-6));
    }
}

TEST_CASE("apply_dual_jacobian") {
    SUBCASE("all-ones mask, r = 1, D = delta I") {
        const double delta = 3.0;
        const StiefelPoint x = random_stiefel(6, 1, 1);
        const SubproblemInput inp(x, Matrix::Zero(6, 1), DiagonalMetric::scaled_identity(6, delta), 0.0);
        Matrix s(1, 1);
        s << 0.7;
        CHECK(apply_dual_jacobian(inp, Matrix::Ones(6, 1), s)(0, 0) == doctest::Approx(4.0 / delta * 0.7));
    }
    SUBCASE("zero mask") {
        const SubproblemInput inp = random_input(6, 2, 0.1, 3);
        CHECK(apply_dual_jacobian(inp, Matrix::Zero(6, 2), fixture::symmetric(2, 4)).norm() == 0.0);
    }
    SUBCASE("matches the directional derivative of E off the kinks") {
        const SubproblemInput inp = random_input(10, 3, 0.2, 5);
        const Matrix lam = fixture::symmetric(3, 6);
        const Matrix mask = prox_jacobian_mask(inp.prox_argument(Multiplier(lam)), inp.metric.d(), inp.mu);
        const Matrix dir = fixture::symmetric(3, 7);
        const double h = 1e-7;
        const Matrix fd = (residual_E(inp, Multiplier(Matrix(lam + h * dir))) -
                           residual_E(inp, Multiplier(Matrix(lam - h * dir)))) /
                          (2 * h);
        CHECK((fd - apply_dual_jacobian(inp, mask, dir)).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
    SUBCASE("self-adjoint and positive semidefinite") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const SubproblemInput inp = random_input(8, 3, 0.1, 100 + seed);
            const Matrix mask = random_mask(8, 3, 200 + seed);
            const Matrix s = fixture::symmetric(3, 300 + seed);
            const Matrix t = fixture::symmetric(3, 400 + seed);
            CHECK(std::abs(tr_inner(apply_dual_jacobian(inp, mask, s), t) -
                           tr_inner(s, apply_dual_jacobian(inp, mask, t))) <= 1e-10);
            CHECK(tr_inner(apply_dual_jacobian(inp, mask, s), s) >= -1e-12);
        }
    }
}

TEST_CASE("E is monotone") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SubproblemInput inp = random_input(8, 2, 0.5, 500 + seed);
        const Matrix a = fixture::symmetric(2, 600 + seed);
        const Matrix b = fixture::symmetric(2, 700 + seed);
        const Matrix diff = residual_E(inp, Multiplier(a)) - residual_E(inp, Multiplier(b));
        CHECK(tr_inner(diff, a - b) >= -1e-10);
    }
}

TEST_CASE("cg_solve") {
    const Matrix rhs = fixture::symmetric(3, 1);
    const SymOperator zero_op = [](const Matrix& s) { return Matrix(Matrix::Zero(s.rows(), s.cols())); };
    const SymOperator four = [](const Matrix& s) { return Matrix(4.0 * s); };

    CHECK(cg_solve(four, Matrix::Zero(3, 3), 1.0, 1e-8, 50).solution.norm() == 0.0);
    CHECK((cg_solve(zero_op, rhs, 2.0, 1e-8, 50).solution + rhs / 2.0).norm() <= 1e-14);
    CHECK((cg_solve(four, rhs, 1.0, 1e-8, 50).solution + rhs / 5.0).norm() <= 1e-14);

    SUBCASE("general SPD operator against a direct solve") {
        const Matrix a = gaussian_matrix(3, 3, 9);
        const Matrix m = a * a.transpose();
        const SymOperator op = [&](const Matrix& s) { return Matrix(m * s * m.transpose()); };
        const CgResult res = cg_solve(op, rhs, 0.5, 1e-12, 50);
        CHECK((op(res.solution) + 0.5 * res.solution + rhs).norm() <= 1e-10);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(cg_solve(four, rhs, 0.0, 1e-8, 50), ConfigError);
        const SymOperator skew = [](const Matrix& s) {
            Matrix out = s;
            out(0, 1) += 1.0;
            return out;
        };
        CHECK_THROWS_AS(cg_solve(skew, rhs, 1.0, 1e-8, 50), DiagnosticsError);
    }
}

TEST_CASE("solve_subproblem trivial and closed-form cases") {
    const StiefelPoint x = random_stiefel(8, 3, 21);

    SUBCASE("mu = 0, tangent g, D = I") {
        const Matrix g = fixture::tangent_at(x.matrix(), gaussian_matrix(8, 3, 22));
        const SubproblemInput inp(x, g, DiagonalMetric::scaled_identity(8, 1.0), 0.0);
        const SubproblemResult res = solve_subproblem(inp, Multiplier::zero(3));
        CHECK(res.ssn_iters <= 1);
        CHECK(res.converged);
        CHECK((res.v.matrix() + g).norm() <= 1e-12);
    }
    SUBCASE("g = 0, mu = 0 gives V = 0") {
        const SubproblemInput inp(x, Matrix::Zero(8, 3), DiagonalMetric::scaled_identity(8, 2.0), 0.0);
        CHECK(solve_subproblem(inp, Multiplier::zero(3)).v.norm() == 0.0);
    }
    SUBCASE("mu = 0, g = 0, D = delta I: one regularized Newton step contracts Lambda") {
        // E = (4/delta) Lambda and G = (4/delta) I, so the step solves ((4/delta) + eta) d = -(4/delta) Lambda
        const double delta = 2.0;
        const SubproblemInput inp(x, Matrix::Zero(8, 3), DiagonalMetric::scaled_identity(8, delta), 0.0);
        const Matrix lam0 = fixture::symmetric(3, 23);
        SsnConfig one;
        one.max_inner = 1;
        const SubproblemResult step = solve_subproblem(inp, Multiplier(lam0), one);
        const double eta = 0.1 * (4.0 / delta) * lam0.norm();
        CHECK((step.lambda.matrix() - eta / (4.0 / delta + eta) * lam0).norm() <= 1e-12);

        const SubproblemResult full = solve_subproblem(inp, Multiplier(lam0));
        CHECK(full.converged);
        CHECK(full.lambda.matrix().norm() <= 1e-10);
    }
    SUBCASE("mu = 0, general g and D against the dense KKT solve") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const SubproblemInput inp = random_input(9, 3, 0.0, 800 + seed);
            const Matrix want = oracle::kkt_subproblem_mu0(inp.x.matrix(), inp.g, inp.metric.d());
            const SubproblemResult res = solve_subproblem(inp, Multiplier::zero(3));
            CHECK(res.converged);
            CHECK(fixture::max_abs(res.v.matrix() - want) <= 1e-8);
        }
    }
}

TEST_CASE("solve_subproblem agrees with sign enumeration for r = 1") {
    std::mt19937_64 rng(77);
    const double mus[] = {0.0, 0.1, 1.0, 0.4};
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 4 + trial % 4;  // 4..7
        const auto seed = 900 + static_cast<std::uint64_t>(trial) * 5;
        const SubproblemInput inp = random_input(n, 1, mus[trial % 4], seed);
        const Vector want = oracle::enumerate_subproblem_r1(inp.x.matrix().col(0), inp.g.col(0), inp.metric.d(),
                                                            inp.mu);
        const SubproblemResult res = solve_subproblem(inp, Multiplier::zero(1));
        CHECK(res.converged);
        CHECK(fixture::max_abs(res.v.matrix().col(0) - want) <= 1e-6);
        CHECK(inp.objective(res.v.matrix()) <=
              oracle::subproblem_objective(inp.x.matrix(), inp.g, inp.metric.d(), inp.mu, want) + 1e-9);
    }
}

TEST_CASE("solve_subproblem output is tangent with a sparse prox pattern") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SubproblemInput inp = random_input(60, 4, 0.8, 1000 + seed);
        const SubproblemResult res = solve_subproblem(inp, Multiplier::zero(4));
        CHECK(res.converged);
        CHECK(tangency_residual(inp.x.matrix(), res.v.matrix()) <= 1e-9);
    }
}

TEST_CASE("dual_line_search decreases the dual along the Newton direction") {
    const SubproblemInput inp = random_input(12, 2, 0.5, 31);
    const Matrix lam = fixture::symmetric(2, 32);
    const Matrix e = residual_E(inp, Multiplier(lam));
    // -E is always a descent direction for the convex dual
    const Matrix dir = -e;
    const double s = dual_line_search(inp, lam, dir, e, 60);
    REQUIRE(s > 0.0);
    CHECK(dual_value(inp, Multiplier(Matrix(lam + s * dir))) < dual_value(inp, Multiplier(lam)));
    CHECK(dual_line_search(inp, lam, e, e, 60) == 0.0);  // ascent direction is refused
}
