#pragma once

#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "manpqn/problems.hpp"
#include "manpqn/subsolver.hpp"

namespace manpqn {

enum class Algorithm { manpqn, manpg, manpg_ada, nls_manpg };

std::string_view to_string(Algorithm a);
/// Accepts the CLI spellings: manpqn, manpg, manpg-ada, nls-manpg.
Algorithm parse_algorithm(std::string_view name);

struct SolverConfig {
    double gamma = 0.5;       // backtracking factor
    double sigma = 1e-4;      // sufficient decrease
    int memory_m = 10;        // nonmonotone window
    int memory_p = 5;         // stored curvature pairs
    double delta = 1.0;       // base metric delta * I
    bool delta_bb = true;     // rescale delta by tr(s^T y)/||s||^2 before each pair update
    double delta_min = 1e-4;
    double delta_max = 1e4;
    int max_iter = 30000;
    double tol_factor = 1e-8;  // stop when ||V||^2 <= tol_factor * n * r
    int max_inner = 100;
    int max_backtracks = 50;
    double t_init = -1.0;      // baseline step; <= 0 means 1/L from the problem, else 1e-3
    double ada_up = 1.01;
    double ada_down = 0.5;
    double t_min = 1e-6;
    double feasibility_abort = 1e-8;
    double sparsity_threshold = 1e-5;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct IterationRecord {
    int k = 0;
    double f = 0.0;          // F(X_k)
    double norm_v = 0.0;     // ||V_k||_F
    double quad = 0.0;       // ||V_k||_B^2
    double alpha = 0.0;      // accepted step; 0 on the final record
    int ls_steps = 0;        // backtracks before acceptance
    int ssn_iters = 0;
    bool ssn_converged = true;
    double feasibility = 0.0;  // ||X_k^T X_k - I||_F
    double wall_time = 0.0;    // seconds since the loop started
};

struct RunTrace {
    Algorithm algorithm = Algorithm::manpqn;
    int window = 0;      // m used by the line search (0 = monotone)
    double sigma = 0.0;
    std::vector<IterationRecord> records;

    bool converged = false;
    bool stalled = false;
    int total_iters = 0;
    double f_final = 0.0;
    double sparsity = 0.0;
    double cpu_seconds = 0.0;
    int total_ls_steps = 0;
    int ssn_failures = 0;
    Matrix x_final;

    /// Mean semismooth Newton iterations per subproblem solve.
    double mean_ssn_iters() const;
};

/// Objective values of the last m+1 iterates.
class FHistory {
public:
    explicit FHistory(int window);
    void push(double f);
    double max() const;
    bool empty() const noexcept { return values_.empty(); }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::size_t capacity_;
    std::deque<double> values_;
};

/// F_trial <= max(hist) - 1/2 sigma alpha quad.
bool nonmonotone_accept(const FHistory& hist, double f_trial, double alpha, double quad, double sigma);

/// ||V||_F <= eps.
bool is_eps_stationary(const Matrix& v, double eps);

/// Proximal quasi-Newton with the damped limited-memory diagonal metric and the
/// nonmonotone line search.
RunTrace manpqn_solve(const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg = {});

enum class ManpgVariant { plain, ada, nls };

/// Proximal gradient baselines: metric (1/t) I with monotone (plain, ada) or
/// nonmonotone (nls) line search.
RunTrace manpg_solve(const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg = {},
                     ManpgVariant variant = ManpgVariant::plain);

RunTrace solve(Algorithm algo, const ProblemSpec& problem, const StiefelPoint& x0, const SolverConfig& cfg = {});

/// max_{max(0,k-m) <= j <= k} F_j for every k of the trace.
std::vector<double> reference_values(const RunTrace& trace);

}  // namespace manpqn
