// manpqn: solve / bench / trace front end for the Stiefel composite solvers.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manpqn/bench.hpp"
#include "manpqn/errors.hpp"

namespace {

using manpqn::bench::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Options {
    std::string problem = "cm";
    long n = 64;
    long r = 4;
    double mu = 0.1;
    long m_rows = 50;
    long big_n = 5;
    std::vector<std::string> algos;
    int instances = 50;
    std::uint64_t seed = 0;
    int max_iter = 30000;
    double tol_factor = 1e-8;
    double gamma = 0.5;
    double sigma = 1e-4;
    int window = 10;
    int pairs = 5;
    double delta = 1.0;
    std::string mtx;
    std::string out;
    bool serial = false;
    bool fixed_delta = false;
    bool no_timing = false;
    bool no_traces = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--problem", o.problem, "cm | spca | spca-mtx | jd")
        ->check(CLI::IsMember({"cm", "spca", "spca-mtx", "jd"}));
    cmd->add_option("--n", o.n, "ambient dimension n");
    cmd->add_option("--r", o.r, "number of columns r");
    cmd->add_option("--mu", o.mu, "l1 weight");
    cmd->add_option("--m-rows", o.m_rows, "rows of the random SPCA matrix");
    cmd->add_option("--big-n", o.big_n, "number of joint-diagonalization matrices");
    cmd->add_option("--algo", o.algos, "manpqn | manpg | manpg-ada | nls-manpg (repeatable)")
        ->check(CLI::IsMember({"manpqn", "manpg", "manpg-ada", "nls-manpg"}));
    cmd->add_option("--seed", o.seed, "base seed (instance i uses seed + i)");
    cmd->add_option("--max-iter", o.max_iter, "outer iteration cap");
    cmd->add_option("--tol-factor", o.tol_factor, "stop when ||V||^2 <= tol-factor * n * r");
    cmd->add_option("--gamma", o.gamma, "backtracking factor");
    cmd->add_option("--sigma", o.sigma, "sufficient decrease constant");
    cmd->add_option("--window", o.window, "nonmonotone window m");
    cmd->add_option("--pairs", o.pairs, "stored curvature pairs p");
    cmd->add_option("--delta", o.delta, "base metric delta");
    cmd->add_option("--mtx", o.mtx, "Matrix Market file (spca-mtx)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--fixed-delta", o.fixed_delta, "keep the base metric at --delta instead of rescaling it");
    cmd->add_flag("--serial", o.serial, "run instances on one thread");
    cmd->add_flag("--no-timing", o.no_timing, "write cpu_s = 0 (byte-reproducible reports)");
}

ExperimentConfig to_config(const Options& o) {
    ExperimentConfig cfg;
    cfg.problem = manpqn::bench::parse_problem_kind(o.problem);
    cfg.n = o.n;
    cfg.r = o.r;
    cfg.mu = o.mu;
    cfg.m_rows = o.m_rows;
    cfg.big_n = o.big_n;
    cfg.mtx_path = o.mtx;
    if (!o.algos.empty()) {
        cfg.algorithms.clear();
        for (const auto& a : o.algos) cfg.algorithms.push_back(manpqn::parse_algorithm(a));
    }
    cfg.instances = o.instances;
    cfg.base_seed = o.seed;
    cfg.solver.max_iter = o.max_iter;
    cfg.solver.tol_factor = o.tol_factor;
    cfg.solver.gamma = o.gamma;
    cfg.solver.sigma = o.sigma;
    cfg.solver.memory_m = o.window;
    cfg.solver.memory_p = o.pairs;
    cfg.solver.delta = o.delta;
    cfg.solver.delta_bb = !o.fixed_delta;
    cfg.out_dir = o.out;
    cfg.serial = o.serial;
    cfg.record_timing = !o.no_timing;
    cfg.write_traces = !o.no_traces;
    if (cfg.problem == manpqn::bench::ProblemKind::spca_mtx && !cfg.mtx_path.empty() &&
        std::filesystem::exists(cfg.mtx_path)) {
        // n comes from the file; probe it so validation sees the real shape.
        cfg.n = static_cast<long>(manpqn::load_matrix_market(cfg.mtx_path).cols);
    }
    cfg.validate();
    return cfg;
}

// key=value lines (# comments); keys are flag names without the leading dashes.
// Values from the file are prepended, so explicit flags parsed later win.
std::vector<std::string> config_file_args(const std::string& path, const std::vector<std::string>& user_args) {
    std::ifstream in(path);
    if (!in) throw manpqn::ConfigError("cannot open config file " + path);
    std::vector<std::string> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw manpqn::ParseError("expected key=value", lineno);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        bool overridden = false;
        for (const auto& a : user_args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) overridden = true;
        }
        if (overridden) continue;
        if (key == "serial" || key == "no-timing" || key == "fixed-delta") {
            if (value == "1" || value == "true") out.push_back(flag);
            continue;
        }
        std::stringstream vs(value);
        std::string item;
        while (std::getline(vs, item, ',')) {
            out.push_back(flag);
            out.push_back(trim(item));
        }
    }
    return out;
}

void print_summary(const manpqn::RunTrace& t, std::ostream& out) {
    const double norm_v = t.records.empty() ? 0.0 : t.records.back().norm_v;
    out << std::left << std::setw(11) << manpqn::to_string(t.algorithm) << std::right << " iters=" << std::setw(6)
        << t.total_iters << " F=" << std::setprecision(10) << std::setw(16) << t.f_final
        << " sparsity=" << std::setprecision(4) << std::setw(7) << t.sparsity << " ||V||=" << std::setprecision(3)
        << std::setw(10) << norm_v << " ls=" << std::setw(5) << t.total_ls_steps << " ssn/it=" << std::setw(6)
        << t.mean_ssn_iters() << " cpu=" << std::setw(9) << t.cpu_seconds << "s"
        << (t.converged ? "" : (t.stalled ? "  [stalled]" : "  [max-iter]")) << '\n';
}

int run_single(const ExperimentConfig& cfg, bool write_traces) {
    const auto inst = manpqn::bench::make_instance(cfg, 0);
    std::cout << inst.problem.name << "  seed=" << inst.seed << '\n';
    for (const auto algo : cfg.algorithms) {
        const auto trace = manpqn::solve(algo, inst.problem, inst.x0, cfg.solver);
        print_summary(trace, std::cout);
        if (write_traces) {
            const std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(".") : cfg.out_dir;
            const auto path = dir / manpqn::bench::trace_file_name(algo, inst.seed);
            manpqn::bench::emit_trace(trace, path);
            std::cout << "  trace -> " << path.string() << '\n';
        }
    }
    return kExitOk;
}

int run_bench(const ExperimentConfig& cfg) {
    const auto result = manpqn::bench::run_experiment(cfg);
    std::cout << "problem=" << manpqn::bench::to_string(cfg.problem) << " n=" << cfg.n << " r=" << cfg.r
              << " mu=" << cfg.mu << " instances=" << cfg.instances << " seed=" << cfg.base_seed << '\n';
    manpqn::bench::print_table(result.rows, std::cout);
    for (const auto& row : result.rows) {
        if (row.failures == 0) continue;
        std::cout << manpqn::to_string(row.algorithm) << ": " << row.failures << " run(s) did not converge, seeds";
        for (auto s : row.failed_seeds) std::cout << ' ' << s;
        std::cout << '\n';
    }
    if (!cfg.out_dir.empty()) std::cout << "report -> " << (cfg.out_dir / "report.csv").string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    // --config FILE is handled here so file values can be overridden by flags.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }

    CLI::App app{"Proximal quasi-Newton and proximal gradient solvers on the Stiefel manifold"};
    app.require_subcommand(1);
    Options opts;
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance and print a summary per algorithm");
    auto* bench_cmd = app.add_subcommand("bench", "averaged comparison table over random instances");
    auto* trace_cmd = app.add_subcommand("trace", "solve one instance and write per-iteration trace files");
    for (auto* cmd : {solve_cmd, bench_cmd, trace_cmd}) add_common(cmd, opts);
    bench_cmd->add_option("--instances", opts.instances, "number of random instances");
    bench_cmd->add_flag("--no-traces", opts.no_traces, "skip per-run trace files");

    try {
        if (!config_path.empty() && !args.empty()) {
            auto extra = config_file_args(config_path, args);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const manpqn::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        ExperimentConfig cfg = to_config(opts);
        if (*solve_cmd) {
            cfg.instances = 1;
            return run_single(cfg, false);
        }
        if (*trace_cmd) {
            cfg.instances = 1;
            return run_single(cfg, true);
        }
        return run_bench(cfg);
    } catch (const manpqn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const manpqn::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const manpqn::bench::ExperimentError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const manpqn::Error& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
