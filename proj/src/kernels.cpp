#include "hrl/kernels.hpp"

#include <algorithm>
#include <vector>

#include "hrl/errors.hpp"

namespace hrl::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long kParallelThreshold = 1L << 15;

void check_forward(const Matrix& x, std::span<const double> w, std::span<const double> bias) {
  require(bias.size() * static_cast<std::size_t>(x.cols) == w.size(),
          "affine_forward: weight shape does not match input width");
}

constexpr int kTileCols = 16;

// C[r..r+NR, n0..n0+16) += sum_k A(r, k) * B[k, n0..n0+16), with
// A(r, k) = a[r * ars + k * acs]. The tile stays in registers across k.
template <int NR>
void accumulate_tile(int r, int n0, int K, int N, const double* a, long ars, long acs,
                     const double* b, double* c) {
  double acc[NR][kTileCols];
  for (int q = 0; q < NR; ++q) {
    const double* cr = c + static_cast<std::size_t>(r + q) * N + n0;
#pragma omp simd
    for (int j = 0; j < kTileCols; ++j) acc[q][j] = cr[j];
  }
  for (int k = 0; k < K; ++k) {
    const double* bk = b + static_cast<std::size_t>(k) * N + n0;
    for (int q = 0; q < NR; ++q) {
      const double aq = a[(r + q) * ars + k * acs];
#pragma omp simd
      for (int j = 0; j < kTileCols; ++j) acc[q][j] += aq * bk[j];
    }
  }
  for (int q = 0; q < NR; ++q) {
    double* cr = c + static_cast<std::size_t>(r + q) * N + n0;
#pragma omp simd
    for (int j = 0; j < kTileCols; ++j) cr[j] = acc[q][j];
  }
}

// Columns [n0, N) that do not fill a whole tile.
void accumulate_tail(int r, int nr, int n0, int K, int N, const double* a, long ars, long acs,
                     const double* b, double* c) {
  for (int q = r; q < r + nr; ++q) {
    double* cr = c + static_cast<std::size_t>(q) * N;
    for (int k = 0; k < K; ++k) {
      const double aq = a[q * ars + k * acs];
      const double* bk = b + static_cast<std::size_t>(k) * N;
      for (int j = n0; j < N; ++j) cr[j] += aq * bk[j];
    }
  }
}

void accumulate_rows(int r, int nr, int K, int N, const double* a, long ars, long acs,
                     const double* b, double* c) {
  int n0 = 0;
  for (; n0 + kTileCols <= N; n0 += kTileCols) {
    if (nr == 4) {
      accumulate_tile<4>(r, n0, K, N, a, ars, acs, b, c);
    } else {
      for (int q = r; q < r + nr; ++q) accumulate_tile<1>(q, n0, K, N, a, ars, acs, b, c);
    }
  }
  if (n0 < N) accumulate_tail(r, nr, n0, K, N, a, ars, acs, b, c);
}

// C (R x N) += A (R x K) * B (K x N); rows of C are split across threads,
// so every element is summed in the same order regardless of thread count.
void accumulate_product(int R, int K, int N, const double* a, long ars, long acs, const double* b,
                        double* c) {
  const long work = static_cast<long>(R) * K * N;
  const int blocks = (R + 3) / 4;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int blk = 0; blk < blocks; ++blk) {
    const int r = blk * 4;
    accumulate_rows(r, std::min(4, R - r), K, N, a, ars, acs, b, c);
  }
}

}  // namespace

void affine_forward(const Matrix& x, std::span<const double> w, std::span<const double> bias,
                    Matrix& y) {
  check_forward(x, w, bias);
  const int n_in = x.cols;
  const int n_out = static_cast<int>(bias.size());
  const int batch = x.rows;
  if (y.rows != batch || y.cols != n_out) y.resize(batch, n_out);
  // y = x W^T + b, computed as rows of x times the transposed weights.
  thread_local std::vector<double> wt;
  wt.resize(w.size());
  for (int o = 0; o < n_out; ++o) {
    for (int i = 0; i < n_in; ++i) {
      wt[static_cast<std::size_t>(i) * n_out + o] = w[static_cast<std::size_t>(o) * n_in + i];
    }
  }
  for (int b = 0; b < batch; ++b) {
    std::copy(bias.begin(), bias.end(), y.data.begin() + static_cast<std::size_t>(b) * n_out);
  }
  accumulate_product(batch, n_in, n_out, x.data.data(), n_in, 1, wt.data(), y.data.data());
}

void affine_backward_params(const Matrix& dy, const Matrix& x, std::span<double> dw,
                            std::span<double> db) {
  require(dy.rows == x.rows, "affine_backward_params: batch mismatch");
  require(db.size() == static_cast<std::size_t>(dy.cols) &&
              dw.size() == static_cast<std::size_t>(dy.cols) * x.cols,
          "affine_backward_params: gradient shape mismatch");
  const int n_in = x.cols;
  const int n_out = dy.cols;
  const int batch = dy.rows;
  // dW (n_out x n_in) += dy^T x
  accumulate_product(n_out, batch, n_in, dy.data.data(), 1, n_out, x.data.data(), dw.data());
  for (int b = 0; b < batch; ++b) {
    const double* g = dy.data.data() + static_cast<std::size_t>(b) * n_out;
    for (int o = 0; o < n_out; ++o) db[o] += g[o];
  }
}

void affine_backward_input(const Matrix& dy, std::span<const double> w, int n_in, Matrix& dx) {
  require(w.size() == static_cast<std::size_t>(dy.cols) * n_in,
          "affine_backward_input: weight shape mismatch");
  const int n_out = dy.cols;
  const int batch = dy.rows;
  if (dx.rows != batch || dx.cols != n_in) dx.resize(batch, n_in);
  std::fill(dx.data.begin(), dx.data.end(), 0.0);
  // dx (batch x n_in) = dy W
  accumulate_product(batch, n_out, n_in, dy.data.data(), n_out, 1, w.data(), dx.data.data());
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(const Matrix& pre, Matrix& grad) {
  require(pre.data.size() == grad.data.size(), "relu_backward: shape mismatch");
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (pre.data[i] <= 0.0) grad.data[i] = 0.0;
  }
}

namespace serial {

void affine_forward(const Matrix& x, std::span<const double> w, std::span<const double> bias,
                    Matrix& y) {
  check_forward(x, w, bias);
  const int n_in = x.cols;
  const int n_out = static_cast<int>(bias.size());
  y.resize(x.rows, n_out);
  for (int b = 0; b < x.rows; ++b) {
    for (int o = 0; o < n_out; ++o) {
      double acc = bias[o];
      for (int i = 0; i < n_in; ++i) acc += x(b, i) * w[static_cast<std::size_t>(o) * n_in + i];
      y(b, o) = acc;
    }
  }
}

void affine_backward_params(const Matrix& dy, const Matrix& x, std::span<double> dw,
                            std::span<double> db) {
  require(dy.rows == x.rows, "affine_backward_params: batch mismatch");
  require(db.size() == static_cast<std::size_t>(dy.cols) &&
              dw.size() == static_cast<std::size_t>(dy.cols) * x.cols,
          "affine_backward_params: gradient shape mismatch");
  for (int o = 0; o < dy.cols; ++o) {
    for (int i = 0; i < x.cols; ++i) {
      double acc = 0.0;
      for (int b = 0; b < dy.rows; ++b) acc += dy(b, o) * x(b, i);
      dw[static_cast<std::size_t>(o) * x.cols + i] += acc;
    }
    double acc = 0.0;
    for (int b = 0; b < dy.rows; ++b) acc += dy(b, o);
    db[o] += acc;
  }
}

void affine_backward_input(const Matrix& dy, std::span<const double> w, int n_in, Matrix& dx) {
  require(w.size() == static_cast<std::size_t>(dy.cols) * n_in,
          "affine_backward_input: weight shape mismatch");
  dx.resize(dy.rows, n_in);
  for (int b = 0; b < dy.rows; ++b) {
    for (int i = 0; i < n_in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < dy.cols; ++o) acc += dy(b, o) * w[static_cast<std::size_t>(o) * n_in + i];
      dx(b, i) = acc;
    }
  }
}

}  // namespace serial
}  // namespace hrl::kernels
