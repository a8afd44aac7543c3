#include "manpqn/bench.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "manpqn/errors.hpp"

namespace manpqn::bench {

namespace {

// Keeps the data seed and the starting-point seed of an instance apart.
constexpr std::uint64_t kStartSeedOffset = 0x9E3779B97F4A7C15ull;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

}  // namespace

std::string_view to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::cm: return "cm";
        case ProblemKind::spca: return "spca";
        case ProblemKind::spca_mtx: return "spca-mtx";
        case ProblemKind::jd: return "jd";
    }
    return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
    if (name == "cm") return ProblemKind::cm;
    if (name == "spca") return ProblemKind::spca;
    if (name == "spca-mtx") return ProblemKind::spca_mtx;
    if (name == "jd") return ProblemKind::jd;
    throw ConfigError("unknown problem '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (instances < 1) throw ConfigError("instances must be >= 1");
    if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
    if (!(mu >= 0.0)) throw ConfigError("mu must be nonnegative");
    if (r < 1) throw ConfigError("r must be >= 1");
    if (problem != ProblemKind::spca_mtx && r > n) throw ConfigError("r must not exceed n");
    if (problem == ProblemKind::cm && n < 4) throw ConfigError("cm needs n >= 4");
    if (problem == ProblemKind::spca && m_rows < 1) throw ConfigError("m-rows must be >= 1");
    if (problem == ProblemKind::jd && big_n < 1) throw ConfigError("big-n must be >= 1");
    if (problem == ProblemKind::spca_mtx) {
        if (mtx_path.empty()) throw ConfigError("spca-mtx needs --mtx");
        if (!std::filesystem::exists(mtx_path)) throw ConfigError("mtx file not found: " + mtx_path.string());
    }
    solver.validate();
}

Instance make_instance(const ExperimentConfig& cfg, int index) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(index);
    ProblemSpec problem = [&]() -> ProblemSpec {
        switch (cfg.problem) {
            case ProblemKind::cm: return cm_problem(cfg.n, cfg.r, cfg.mu);
            case ProblemKind::spca: return spca_problem(gen_spca_random(cfg.m_rows, cfg.n, seed), cfg.r, cfg.mu);
            case ProblemKind::spca_mtx:
                return spca_problem(load_matrix_market(cfg.mtx_path).to_eigen(), cfg.r, cfg.mu);
            case ProblemKind::jd: return jointdiag_problem(gen_jointdiag_random(cfg.n, cfg.big_n, seed), cfg.r, cfg.mu);
        }
        throw ConfigError("unknown problem kind");
    }();
    StiefelPoint x0 = random_stiefel(problem.n, problem.r, seed + kStartSeedOffset);
    return {seed, std::move(problem), std::move(x0)};
}

ReportRow aggregate(Algorithm algo, const std::vector<RunTrace>& runs, const std::vector<std::uint64_t>& seeds,
                    bool record_timing) {
    ReportRow row;
    row.algorithm = algo;
    row.instances = static_cast<int>(runs.size());
    if (runs.empty()) return row;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunTrace& t = runs[i];
        row.iters += t.total_iters;
        row.f += t.f_final;
        row.sparsity += t.sparsity;
        row.cpu_s += record_timing ? t.cpu_seconds : 0.0;
        row.linesearch += t.total_ls_steps;
        row.ssn_iters += t.mean_ssn_iters();
        if (!t.converged) {
            ++row.failures;
            row.failed_seeds.push_back(i < seeds.size() ? seeds[i] : i);
        }
    }
    const double count = static_cast<double>(runs.size());
    row.iters /= count;
    row.f /= count;
    row.sparsity /= count;
    row.cpu_s /= count;
    row.linesearch /= count;
    row.ssn_iters /= count;
    return row;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int count = cfg.instances;
    const std::size_t algos = cfg.algorithms.size();

    ExperimentResult result;
    result.traces.assign(algos, std::vector<RunTrace>(static_cast<std::size_t>(count)));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));

    auto run_one = [&](int i) {
        try {
            const Instance inst = make_instance(cfg, i);
            seeds[static_cast<std::size_t>(i)] = inst.seed;
            for (std::size_t a = 0; a < algos; ++a) {
                result.traces[a][static_cast<std::size_t>(i)] = solve(cfg.algorithms[a], inst.problem, inst.x0, cfg.solver);
            }
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };

    if (cfg.serial) {
        for (int i = 0; i < count; ++i) run_one(i);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < count; ++i) run_one(i);
    }

    for (int i = 0; i < count; ++i) {
        if (!errors[static_cast<std::size_t>(i)]) continue;
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ExperimentError("instance seed " + std::to_string(seed) + ": " + e.what(), seed);
        }
    }

    for (std::size_t a = 0; a < algos; ++a) {
        result.rows.push_back(aggregate(cfg.algorithms[a], result.traces[a], seeds, cfg.record_timing));
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        emit_csv(result.rows, cfg.out_dir / "report.csv");
        if (cfg.write_traces) {
            for (std::size_t a = 0; a < algos; ++a) {
                for (int i = 0; i < count; ++i) {
                    emit_trace(result.traces[a][static_cast<std::size_t>(i)],
                               cfg.out_dir / trace_file_name(cfg.algorithms[a], seeds[static_cast<std::size_t>(i)]));
                }
            }
        }
    }
    return result;
}

std::string trace_file_name(Algorithm algo, std::uint64_t seed) {
    return "trace_" + std::string(to_string(algo)) + "_seed" + std::to_string(seed) + ".csv";
}

void emit_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << kReportHeader << '\n';
    for (const ReportRow& row : rows) {
        out << to_string(row.algorithm) << ',' << fmt(row.iters) << ',' << fmt(row.f) << ',' << fmt(row.sparsity)
            << ',' << fmt(row.cpu_s) << ',' << fmt(row.linesearch) << ',' << fmt(row.ssn_iters) << '\n';
    }
    if (!out) throw Error("failed writing report CSV");
}

void emit_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    emit_csv(rows, out);
}

void emit_trace(const RunTrace& trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const IterationRecord& rec : trace.records) {
        out << rec.k << ',' << fmt(rec.f) << ',' << fmt(rec.norm_v) << ',' << fmt(rec.alpha) << ',' << rec.ls_steps
            << ',' << rec.ssn_iters << '\n';
    }
    if (!out) throw Error("failed writing trace CSV");
}

void emit_trace(const RunTrace& trace, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    emit_trace(trace, out);
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
    std::string line;
    long lineno = 1;
    if (!std::getline(in, line) || line != kReportHeader) throw ParseError("unexpected report header", lineno);
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 7) throw ParseError("expected 7 columns", lineno);
        ReportRow row;
        try {
            row.algorithm = parse_algorithm(cells[0]);
            row.iters = std::stod(cells[1]);
            row.f = std::stod(cells[2]);
            row.sparsity = std::stod(cells[3]);
            row.cpu_s = std::stod(cells[4]);
            row.linesearch = std::stod(cells[5]);
            row.ssn_iters = std::stod(cells[6]);
        } catch (const std::exception& e) {
            throw ParseError(e.what(), lineno);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
    std::string line;
    long lineno = 1;
    if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("unexpected trace header", lineno);
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) throw ParseError("expected 6 columns", lineno);
        try {
            rows.push_back({std::stoi(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                            std::stoi(cells[4]), std::stoi(cells[5])});
        } catch (const std::exception& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return rows;
}

bool envelope_nonincreasing(const std::vector<TraceRow>& rows, int window, double slack) {
    const std::size_t m = static_cast<std::size_t>(std::max(window, 0));
    double prev = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t lo = k >= m ? k - m : 0;
        double env = rows[lo].f;
        for (std::size_t j = lo + 1; j <= k; ++j) env = std::max(env, rows[j].f);
        if (k > 0 && env > prev + slack) return false;
        prev = env;
    }
    return true;
}

void print_table(const std::vector<ReportRow>& rows, std::ostream& out) {
    const auto flags = out.flags();
    out << std::left << std::setw(11) << "algo" << std::right << std::setw(10) << "Iter" << std::setw(12) << "F(X*)"
        << std::setw(10) << "sparsity" << std::setw(11) << "CPU(s)" << std::setw(13) << "#line-search"
        << std::setw(11) << "SSN iters" << std::setw(10) << "failures" << '\n';
    for (const ReportRow& row : rows) {
        out << std::left << std::setw(11) << to_string(row.algorithm) << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << row.iters << std::setprecision(4) << std::setw(12) << row.f
            << std::setprecision(2) << std::setw(10) << row.sparsity << std::setprecision(4) << std::setw(11)
            << row.cpu_s << std::setprecision(2) << std::setw(13) << row.linesearch << std::setw(11) << row.ssn_iters
            << std::setw(10) << row.failures << '\n';
    }
    out.flags(flags);
}

}  // namespace manpqn::bench
