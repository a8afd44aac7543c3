#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "manpqn/driver.hpp"
#include "manpqn/errors.hpp"

namespace manpqn::bench {

enum class ProblemKind { cm, spca, spca_mtx, jd };

std::string_view to_string(ProblemKind k);
ProblemKind parse_problem_kind(std::string_view name);

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::cm;
    Eigen::Index n = 64;
    Eigen::Index r = 4;
    double mu = 0.1;
    Eigen::Index m_rows = 50;  // rows of the random SPCA data matrix
    Eigen::Index big_n = 5;    // number of joint-diagonalization matrices
    std::filesystem::path mtx_path;
    std::vector<Algorithm> algorithms{Algorithm::manpqn, Algorithm::manpg, Algorithm::manpg_ada,
                                      Algorithm::nls_manpg};
    int instances = 50;
    std::uint64_t base_seed = 0;
    SolverConfig solver;
    std::filesystem::path out_dir;  // empty: nothing written
    bool write_traces = true;
    bool serial = false;
    bool record_timing = true;  // false writes cpu_s = 0 so reruns are byte-identical

    /// Throws ConfigError (bad values, missing mtx file).
    void validate() const;
};

/// One benchmark instance: the problem and the shared starting point.
struct Instance {
    std::uint64_t seed;
    ProblemSpec problem;
    StiefelPoint x0;
};

/// Instance i uses seed base_seed + i for its data and starting point.
Instance make_instance(const ExperimentConfig& cfg, int index);

/// Row of a results table; means are over all configured instances.
struct ReportRow {
    Algorithm algorithm = Algorithm::manpqn;
    double iters = 0.0;
    double f = 0.0;
    double sparsity = 0.0;
    double cpu_s = 0.0;
    double linesearch = 0.0;  // mean over instances of the per-run total
    double ssn_iters = 0.0;   // mean SSN iterations per outer iteration
    int instances = 0;
    int failures = 0;         // runs that stalled or hit max_iter
    std::vector<std::uint64_t> failed_seeds;
};

struct ExperimentResult {
    std::vector<ReportRow> rows;
    // traces[a][i]: algorithm a, instance i
    std::vector<std::vector<RunTrace>> traces;
};

/// Thrown when a run aborts on a diagnostics error; carries the instance seed.
class ExperimentError : public Error {
public:
    ExperimentError(const std::string& what, std::uint64_t seed) : Error(what), seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

ReportRow aggregate(Algorithm algo, const std::vector<RunTrace>& runs, const std::vector<std::uint64_t>& seeds,
                    bool record_timing = true);

inline constexpr const char* kReportHeader = "algo,iters,F,sparsity,cpu_s,linesearch,ssn_iters";
inline constexpr const char* kTraceHeader = "k,F,normV,alpha,ls,ssn";

void emit_csv(const std::vector<ReportRow>& rows, std::ostream& out);
void emit_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
void emit_trace(const RunTrace& trace, std::ostream& out);
void emit_trace(const RunTrace& trace, const std::filesystem::path& path);

/// Parsers for the two CSV layouts above (used for post-processing and tests).
std::vector<ReportRow> read_report_csv(std::istream& in);
struct TraceRow {
    int k;
    double f;
    double norm_v;
    double alpha;
    int ls;
    int ssn;
};
std::vector<TraceRow> read_trace_csv(std::istream& in);

/// True when max_{max(0,k-m)<=j<=k} F_j never increases along the rows.
bool envelope_nonincreasing(const std::vector<TraceRow>& rows, int window, double slack = 0.0);

/// Human-readable table in the layout of the usual comparison tables.
void print_table(const std::vector<ReportRow>& rows, std::ostream& out);

std::string trace_file_name(Algorithm algo, std::uint64_t seed);

}  // namespace manpqn::bench
