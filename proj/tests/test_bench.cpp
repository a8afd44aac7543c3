#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <omp.h>

#include "doctest.h"
#include "manpqn/bench.hpp"

using namespace manpqn;
using namespace manpqn::bench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("manpqn_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_cm(int instances) {
    ExperimentConfig cfg;
    cfg.problem = ProblemKind::cm;
    cfg.n = 32;
    cfg.r = 2;
    cfg.mu = 0.1;
    cfg.instances = instances;
    cfg.base_seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("problem kind names") {
    for (ProblemKind k : {ProblemKind::cm, ProblemKind::spca, ProblemKind::spca_mtx, ProblemKind::jd}) {
        CHECK(parse_problem_kind(to_string(k)) == k);
    }
    CHECK(to_string(ProblemKind::spca_mtx) == "spca-mtx");
    CHECK_THROWS_AS(parse_problem_kind("lasso"), ConfigError);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = small_cm(1);
    CHECK_NOTHROW(cfg.validate());
    cfg.instances = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cm(1);
    cfg.r = 40;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cm(1);
    cfg.algorithms.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cm(1);
    cfg.problem = ProblemKind::spca_mtx;
    cfg.mtx_path = "/nonexistent/file.mtx";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("instances are seeded deterministically and shared across algorithms") {
    const ExperimentConfig cfg = small_cm(2);
    const Instance a = make_instance(cfg, 1);
    const Instance b = make_instance(cfg, 1);
    CHECK(a.seed == 4);
    CHECK(a.x0.matrix() == b.x0.matrix());
    CHECK(a.x0.matrix() != make_instance(cfg, 0).x0.matrix());

    ExperimentConfig one = small_cm(1);
    one.algorithms = {Algorithm::manpqn, Algorithm::manpg};
    const ExperimentResult res = run_experiment(one);
    REQUIRE(res.traces.size() == 2);
    CHECK(res.traces[0][0].records.front().f == res.traces[1][0].records.front().f);
}

TEST_CASE("every problem kind builds and runs") {
    for (ProblemKind k : {ProblemKind::cm, ProblemKind::spca, ProblemKind::jd}) {
        ExperimentConfig cfg = small_cm(1);
        cfg.problem = k;
        cfg.n = 20;
        cfg.m_rows = 10;
        cfg.big_n = 3;
        cfg.algorithms = {Algorithm::manpqn};
        const ExperimentResult res = run_experiment(cfg);
        CHECK(res.rows.size() == 1);
        CHECK(res.rows[0].failures == 0);
    }
    ExperimentConfig mtx = small_cm(1);
    mtx.problem = ProblemKind::spca_mtx;
    mtx.mtx_path = std::string(MANPQN_TEST_DATA) + "/spca_8x12.mtx";
    mtx.n = 12;
    mtx.algorithms = {Algorithm::manpqn, Algorithm::manpg};
    const ExperimentResult res = run_experiment(mtx);
    CHECK(res.rows.size() == 2);
    CHECK(res.traces[0][0].x_final.rows() == 12);
}

TEST_CASE("aggregate takes means and lists failures") {
    RunTrace a, b;
    a.total_iters = 10;
    a.f_final = 1.0;
    a.converged = true;
    a.total_ls_steps = 4;
    a.cpu_seconds = 2.0;
    b.total_iters = 20;
    b.f_final = 3.0;
    b.converged = false;
    b.total_ls_steps = 0;
    b.cpu_seconds = 4.0;
    const ReportRow row = aggregate(Algorithm::manpg, {a, b}, {7, 8});
    CHECK(row.iters == 15.0);
    CHECK(row.f == 2.0);
    CHECK(row.linesearch == 2.0);
    CHECK(row.cpu_s == 3.0);
    CHECK(row.failures == 1);
    REQUIRE(row.failed_seeds.size() == 1);
    CHECK(row.failed_seeds[0] == 8);
    CHECK(aggregate(Algorithm::manpg, {a, b}, {7, 8}, false).cpu_s == 0.0);
}

TEST_CASE("report CSV") {
    SUBCASE("empty row list writes only the header") {
        std::ostringstream out;
        emit_csv({}, out);
        CHECK(out.str() == std::string(kReportHeader) + "\n");
    }
    SUBCASE("round trip") {
        const ExperimentResult res = run_experiment(small_cm(2));
        std::stringstream buf;
        emit_csv(res.rows, buf);
        const auto back = read_report_csv(buf);
        REQUIRE(back.size() == res.rows.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].algorithm == res.rows[i].algorithm);
            CHECK(back[i].iters == doctest::Approx(res.rows[i].iters).epsilon(1e-12));
            CHECK(back[i].f == doctest::Approx(res.rows[i].f).epsilon(1e-12));
            CHECK(back[i].sparsity == doctest::Approx(res.rows[i].sparsity).epsilon(1e-12));
            CHECK(back[i].ssn_iters == doctest::Approx(res.rows[i].ssn_iters).epsilon(1e-12));
        }
    }
    SUBCASE("bad header") {
        std::istringstream in("algo,iters\nmanpqn,3\n");
        CHECK_THROWS_AS(read_report_csv(in), ParseError);
    }
}

TEST_CASE("trace CSV") {
    const ProblemSpec p = cm_problem(32, 2, 0.1);
    const RunTrace tr = manpqn_solve(p, random_stiefel(32, 2, 1));
    std::stringstream buf;
    emit_trace(tr, buf);
    const auto rows = read_trace_csv(buf);
    REQUIRE(rows.size() == static_cast<std::size_t>(tr.total_iters) + 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].k == static_cast<int>(k));
        CHECK(rows[k].f == doctest::Approx(tr.records[k].f).epsilon(1e-12));
        CHECK(rows[k].norm_v == doctest::Approx(tr.records[k].norm_v).epsilon(1e-12));
        CHECK(rows[k].ssn == tr.records[k].ssn_iters);
    }
    CHECK(envelope_nonincreasing(rows, tr.window));
}

TEST_CASE("envelope_nonincreasing") {
    auto rows_of = [](std::initializer_list<double> fs) {
        std::vector<TraceRow> rows;
        int k = 0;
        for (double f : fs) rows.push_back({k++, f, 0.0, 0.0, 0, 0});
        return rows;
    };
    CHECK(envelope_nonincreasing(rows_of({3, 1, 2, 0.5}), 2));
    CHECK_FALSE(envelope_nonincreasing(rows_of({3, 1, 2, 0.5}), 0));
    CHECK_FALSE(envelope_nonincreasing(rows_of({1, 2}), 3));
}

TEST_CASE("files on disk, serial and threaded runs are byte-identical") {
    ExperimentConfig cfg = small_cm(3);
    cfg.record_timing = false;

    cfg.out_dir = scratch_dir("threaded");
    cfg.serial = false;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);  // oversubscribe on purpose so instances interleave
    run_experiment(cfg);
    omp_set_num_threads(saved);
    const std::string threaded = slurp(cfg.out_dir / "report.csv");
    const std::string trace_threaded = slurp(cfg.out_dir / trace_file_name(Algorithm::manpqn, 4));

    cfg.out_dir = scratch_dir("serial");
    cfg.serial = true;
    run_experiment(cfg);
    CHECK(slurp(cfg.out_dir / "report.csv") == threaded);
    CHECK(slurp(cfg.out_dir / trace_file_name(Algorithm::manpqn, 4)) == trace_threaded);
    CHECK(fs::exists(cfg.out_dir / "trace_nls-manpg_seed5.csv"));

    cfg.out_dir = scratch_dir("no_traces");
    cfg.write_traces = false;
    run_experiment(cfg);
    CHECK(fs::exists(cfg.out_dir / "report.csv"));
    CHECK_FALSE(fs::exists(cfg.out_dir / trace_file_name(Algorithm::manpqn, 3)));
}

TEST_CASE("print_table lists every algorithm") {
    const ExperimentResult res = run_experiment(small_cm(1));
    std::ostringstream out;
    print_table(res.rows, out);
    for (Algorithm a : {Algorithm::manpqn, Algorithm::manpg, Algorithm::manpg_ada, Algorithm::nls_manpg}) {
        CHECK(out.str().find(std::string(to_string(a))) != std::string::npos);
    }
}
