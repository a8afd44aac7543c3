#include "manpqn/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include "manpqn/errors.hpp"

namespace manpqn {

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::manpqn: return "manpqn";
        case Algorithm::manpg: return "manpg";
        case Algorithm::manpg_ada: return "manpg-ada";
        case Algorithm::nls_manpg: return "nls-manpg";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "manpqn") return Algorithm::manpqn;
    if (name == "manpg") return Algorithm::manpg;
    if (name == "manpg-ada") return Algorithm::manpg_ada;
    if (name == "nls-manpg") return Algorithm::nls_manpg;
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    auto fail = [](const char* what) { throw ConfigError(std::string("SolverConfig: ") + what); };
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0,1)");
    if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0,1)");
    if (memory_m < 0) fail("window m must be >= 0");
    if (memory_p < 1) fail("pair capacity p must be >= 1");
    if (!(delta > 0.0)) fail("delta must be positive");
    if (!(tol_factor > 0.0)) fail("tol_factor must be positive");
    if (max_iter < 0) fail("max_iter must be >= 0");
    if (max_inner < 1) fail("max_inner must be >= 1");
    if (max_backtracks < 1) fail("max_backtracks must be >= 1");
    if (!(ada_up >= 1.0)) fail("ada_up must be >= 1");
    if (!(ada_down > 0.0 && ada_down <= 1.0)) fail("ada_down must lie in (0,1]");
    if (!(t_min > 0.0)) fail("t_min must be positive");
}

double RunTrace::mean_ssn_iters() const {
    if (records.empty()) return 0.0;
    double total = 0.0;
    for (const auto& rec : records) total += rec.ssn_iters;
    return total / static_cast<double>(records.size());
}

FHistory::FHistory(int window) : capacity_(static_cast<std::size_t>(std::max(window, 0)) + 1) {}

void FHistory::push(double f) {
    if (values_.size() == capacity_) values_.pop_front();
    values_.push_back(f);
}

double FHistory::max() const {
    if (values_.empty()) throw ConfigError("FHistory::max on empty history");
    return *std::max_element(values_.begin(), values_.end());
}

bool nonmonotone_accept(const FHistory& hist, double f_trial, double alpha, double quad, double sigma) {
    return f_trial <= hist.max() - 0.5 * sigma * alpha * quad;
}

bool is_eps_stationary(const Matrix& v, double eps) { return v.norm() <= eps; }

namespace {

struct LoopPolicy {
    Algorithm algorithm;
    bool quasi_newton;
    bool adaptive_step;
    int window;
};

RunTrace run_loop(const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg,
                  const LoopPolicy& policy) {
    cfg.validate();
    if (x0.n() != problem.n || x0.r() != problem.r) throw DimensionError("initial point shape differs from problem");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    const Eigen::Index n = problem.n, r = problem.r;
    const double stop_sq = cfg.tol_factor * static_cast<double>(n * r);

    RunTrace trace;
    trace.algorithm = policy.algorithm;
    trace.window = policy.window;
    trace.sigma = cfg.sigma;

    double t = cfg.t_init;
    double t_max = 1e300;
    if (!(t > 0.0)) {
        t = problem.lipschitz_hint && *problem.lipschitz_hint > 0.0 ? 1.0 / *problem.lipschitz_hint : 1e-3;
    }
    if (problem.lipschitz_hint && *problem.lipschitz_hint > 0.0) t_max = 100.0 / *problem.lipschitz_hint;

    StiefelPoint x = x0;
    Matrix grad = problem.f_grad(x.matrix());
    Matrix rgrad = riemannian_gradient(x, grad).matrix();
    double f = problem.objective(x.matrix());

    FHistory hist(policy.window);
    hist.push(f);
    QnMemory memory(static_cast<std::size_t>(cfg.memory_p), cfg.delta);
    Multiplier lambda = Multiplier::zero(r);

    SsnConfig ssn;
    ssn.max_inner = cfg.max_inner;

    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.f = f;
        rec.feasibility = feasibility_error(x.matrix());

        DiagonalMetric metric = policy.quasi_newton
                                    ? (k == 0 ? DiagonalMetric::scaled_identity(n, memory.delta()) : diag_metric(memory, n))
                                    : DiagonalMetric::scaled_identity(n, 1.0 / t);
        const SubproblemInput inp(x, grad, metric, problem.mu);
        SubproblemResult sub = solve_subproblem(inp, lambda, ssn);
        lambda = sub.lambda;
        rec.ssn_iters = sub.ssn_iters;
        rec.ssn_converged = sub.converged;
        if (!sub.converged) ++trace.ssn_failures;

        const Matrix& v = sub.v.matrix();
        rec.norm_v = v.norm();
        rec.quad = metric.quad(v);

        if (rec.norm_v * rec.norm_v <= stop_sq) {
            trace.converged = true;
            rec.wall_time = elapsed();
            trace.records.push_back(rec);
            break;
        }
        if (k >= cfg.max_iter) {
            rec.wall_time = elapsed();
            trace.records.push_back(rec);
            break;
        }

        double alpha = 1.0;
        int ls = 0;
        bool accepted = false;
        std::optional<StiefelPoint> x_next;
        double f_next = 0.0;
        while (true) {
            x_next = retract(x, Matrix(alpha * v));
            f_next = problem.objective(x_next->matrix());
            if (nonmonotone_accept(hist, f_next, alpha, rec.quad, cfg.sigma)) {
                accepted = true;
                break;
            }
            if (ls == cfg.max_backtracks) break;
            alpha *= cfg.gamma;
            ++ls;
        }
        rec.ls_steps = ls;
        trace.total_ls_steps += ls;
        if (!accepted) {
            trace.stalled = true;
            rec.alpha = 0.0;
            rec.wall_time = elapsed();
            trace.records.push_back(rec);
            break;
        }
        rec.alpha = alpha;
        rec.wall_time = elapsed();
        trace.records.push_back(rec);

        if (policy.adaptive_step) {
            t = ls == 0 ? std::min(t * cfg.ada_up, t_max) : std::max(t * cfg.ada_down, cfg.t_min);
        }

        const double feas = feasibility_error(x_next->matrix());
        if (!(feas <= cfg.feasibility_abort)) {
            std::ostringstream msg;
            msg << to_string(policy.algorithm) << ": feasibility error " << feas << " at iteration " << k + 1;
            throw DiagnosticsError(msg.str());
        }

        Matrix grad_next = problem.f_grad(x_next->matrix());
        Matrix rgrad_next = riemannian_gradient(*x_next, grad_next).matrix();
        if (policy.quasi_newton) {
            const Matrix s = x_next->matrix() - x.matrix();
            const Matrix yv = rgrad_next - rgrad;
            if (cfg.delta_bb) {
                const double ss = s.squaredNorm();
                if (ss > 0.0) {
                    const double bb = (s.array() * yv.array()).sum() / ss;
                    memory.rebase(std::clamp(bb, cfg.delta_min, cfg.delta_max));
                }
            }
            memory.push_pair(s, yv);
        }

        x = std::move(*x_next);
        grad = std::move(grad_next);
        rgrad = std::move(rgrad_next);
        f = f_next;
        hist.push(f);
        ++trace.total_iters;
    }

    trace.cpu_seconds = elapsed();
    trace.f_final = f;
    trace.x_final = x.matrix();
    trace.sparsity = sparsity(x.matrix(), cfg.sparsity_threshold);
    return trace;
}

}  // namespace

RunTrace manpqn_solve(const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg) {
    return run_loop(problem, x0, cfg, {Algorithm::manpqn, true, false, cfg.memory_m});
}

RunTrace manpg_solve(const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg,
                     ManpgVariant variant) {
    switch (variant) {
        case ManpgVariant::plain: return run_loop(problem, x0, cfg, {Algorithm::manpg, false, false, 0});
        case ManpgVariant::ada: return run_loop(problem, x0, cfg, {Algorithm::manpg_ada, false, true, 0});
        case ManpgVariant::nls: return run_loop(problem, x0, cfg, {Algorithm::nls_manpg, false, false, cfg.memory_m});
    }
    throw ConfigError("unknown ManPG variant");
}

RunTrace solve(Algorithm algo, const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg) {
    switch (algo) {
        case Algorithm::manpqn: return manpqn_solve(problem, x0, cfg);
        case Algorithm::manpg: return manpg_solve(problem, x0, cfg, ManpgVariant::plain);
        case Algorithm::manpg_ada: return manpg_solve(problem, x0, cfg, ManpgVariant::ada);
        case Algorithm::nls_manpg: return manpg_solve(problem, x0, cfg, ManpgVariant::nls);
    }
    throw ConfigError("unknown algorithm");
}

std::vector<double> reference_values(const RunTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.records.size());
    const std::size_t m = static_cast<std::size_t>(std::max(trace.window, 0));
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const std::size_t lo = k >= m ? k - m : 0;
        double best = trace.records[lo].f;
        for (std::size_t j = lo + 1; j <= k; ++j) best = std::max(best, trace.records[j].f);
        out.push_back(best);
    }
    return out;
}

}  // namespace manpqn
