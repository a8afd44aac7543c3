// Serial reference vs OpenMP kernels on SPCA-sized blocks.

#include <benchmark/benchmark.h>

#include "manpqn/kernels.hpp"
#include "manpqn/stiefel.hpp"

namespace {

using manpqn::Matrix;
using manpqn::Vector;
namespace kernels = manpqn::kernels;

struct Block {
    Matrix b;
    Matrix mask;
    Vector d;
    Vector d_inv;
    Matrix out;
    Vector diag;

    explicit Block(Eigen::Index n, Eigen::Index r)
        : b(manpqn::gaussian_matrix(n, r, 1)),
          mask(Matrix::Ones(n, r)),
          d(manpqn::gaussian_matrix(n, 1, 2).col(0).cwiseAbs().array() + 0.5),
          out(n, r),
          diag(Vector::Zero(n)) {
        d_inv = d.cwiseInverse();
    }
};

template <auto Kernel>
void BM_soft_threshold(benchmark::State& state) {
    Block blk(state.range(0), state.range(1));
    for (auto _ : state) {
        Kernel(blk.b, blk.d, 0.3, blk.out);
        benchmark::DoNotOptimize(blk.out.data());
    }
    state.SetItemsProcessed(state.iterations() * blk.b.size());
}

template <auto Kernel>
void BM_masked_row_scale(benchmark::State& state) {
    Block blk(state.range(0), state.range(1));
    for (auto _ : state) {
        Kernel(blk.mask, blk.d_inv, 2.0, blk.b, blk.out);
        benchmark::DoNotOptimize(blk.out.data());
    }
    state.SetItemsProcessed(state.iterations() * blk.b.size());
}

template <auto Kernel>
void BM_second_difference(benchmark::State& state) {
    Block blk(state.range(0), state.range(1));
    for (auto _ : state) {
        Kernel(blk.b, 0.5, blk.out);
        benchmark::DoNotOptimize(blk.out.data());
    }
    state.SetItemsProcessed(state.iterations() * blk.b.size());
}

template <auto Kernel>
void BM_row_squares(benchmark::State& state) {
    Block blk(state.range(0), state.range(1));
    for (auto _ : state) {
        Kernel(blk.b, 0.5, blk.diag);
        benchmark::DoNotOptimize(blk.diag.data());
    }
    state.SetItemsProcessed(state.iterations() * blk.b.size());
}

void sizes(benchmark::internal::Benchmark* b) {
    for (long n : {500, 2000, 20000, 200000}) b->Args({n, 5});
}

BENCHMARK(BM_soft_threshold<kernels::serial::soft_threshold>)->Name("soft_threshold/serial")->Apply(sizes);
BENCHMARK(BM_soft_threshold<kernels::omp::soft_threshold>)->Name("soft_threshold/omp")->Apply(sizes);
BENCHMARK(BM_masked_row_scale<kernels::serial::masked_row_scale>)->Name("masked_row_scale/serial")->Apply(sizes);
BENCHMARK(BM_masked_row_scale<kernels::omp::masked_row_scale>)->Name("masked_row_scale/omp")->Apply(sizes);
BENCHMARK(BM_second_difference<kernels::serial::periodic_second_difference>)
    ->Name("second_difference/serial")
    ->Apply(sizes);
BENCHMARK(BM_second_difference<kernels::omp::periodic_second_difference>)
    ->Name("second_difference/omp")
    ->Apply(sizes);
BENCHMARK(BM_row_squares<kernels::serial::accumulate_row_squares>)->Name("row_squares/serial")->Apply(sizes);
BENCHMARK(BM_row_squares<kernels::omp::accumulate_row_squares>)->Name("row_squares/omp")->Apply(sizes);

}  // namespace

BENCHMARK_MAIN();
