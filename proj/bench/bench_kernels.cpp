// Batched affine kernels: OpenMP path against the serial reference, at the
// shapes used by the SAC networks (batch 128, widths 64 and 256).
#include <benchmark/benchmark.h>

#include <vector>

#include "hrl/kernels.hpp"
#include "hrl/rng.hpp"

namespace {

using hrl::Matrix;

struct Problem {
  Matrix x, y, dy, dx;
  std::vector<double> w, b, dw, db;

  Problem(int batch, int n_in, int n_out) {
    hrl::Rng rng(7);
    x.resize(batch, n_in);
    dy.resize(batch, n_out);
    for (double& v : x.data) v = rng.normal();
    for (double& v : dy.data) v = rng.normal();
    w.resize(static_cast<std::size_t>(n_in) * n_out);
    b.resize(n_out);
    for (double& v : w) v = rng.normal(0.0, 0.1);
    dw.assign(w.size(), 0.0);
    db.assign(b.size(), 0.0);
  }
};

template <bool Parallel>
void BM_Forward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Problem p(128, width, width);
  for (auto _ : state) {
    if constexpr (Parallel) {
      hrl::kernels::affine_forward(p.x, p.w, p.b, p.y);
    } else {
      hrl::kernels::serial::affine_forward(p.x, p.w, p.b, p.y);
    }
    benchmark::DoNotOptimize(p.y.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 128LL * width * width);
}

template <bool Parallel>
void BM_BackwardParams(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Problem p(128, width, width);
  for (auto _ : state) {
    if constexpr (Parallel) {
      hrl::kernels::affine_backward_params(p.dy, p.x, p.dw, p.db);
    } else {
      hrl::kernels::serial::affine_backward_params(p.dy, p.x, p.dw, p.db);
    }
    benchmark::DoNotOptimize(p.dw.data());
  }
  state.SetItemsProcessed(state.iterations() * 128LL * width * width);
}

template <bool Parallel>
void BM_BackwardInput(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Problem p(128, width, width);
  for (auto _ : state) {
    if constexpr (Parallel) {
      hrl::kernels::affine_backward_input(p.dy, p.w, width, p.dx);
    } else {
      hrl::kernels::serial::affine_backward_input(p.dy, p.w, width, p.dx);
    }
    benchmark::DoNotOptimize(p.dx.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 128LL * width * width);
}

}  // namespace

BENCHMARK(BM_Forward<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_Forward<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_BackwardParams<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_BackwardParams<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_BackwardInput<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_BackwardInput<false>)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
