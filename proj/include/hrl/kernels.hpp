#pragma once

#include <span>
#include <vector>

namespace hrl {

// Dense row-major matrix. Rows index batch samples throughout the library.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, 0.0);
  }
};

// Batched affine-layer kernels. Weights are stored row-major as
// [n_out x n_in]; x is [batch x n_in], y is [batch x n_out].
//
// The default versions are OpenMP-parallel over independent output rows, so
// every output element is reduced by exactly one thread in a fixed order and
// results do not depend on the thread count. The `serial` namespace keeps
// plain triple-loop references used by the tests and the benchmark.
namespace kernels {

void affine_forward(const Matrix& x, std::span<const double> w, std::span<const double> bias,
                    Matrix& y);
// Accumulates dW += dy^T x and db += colsum(dy).
void affine_backward_params(const Matrix& dy, const Matrix& x, std::span<double> dw,
                            std::span<double> db);
// dx = dy W (overwrites dx).
void affine_backward_input(const Matrix& dy, std::span<const double> w, int n_in, Matrix& dx);

void relu_inplace(Matrix& m);
// grad[i] = 0 wherever pre[i] <= 0.
void relu_backward_inplace(const Matrix& pre, Matrix& grad);

namespace serial {
void affine_forward(const Matrix& x, std::span<const double> w, std::span<const double> bias,
                    Matrix& y);
void affine_backward_params(const Matrix& dy, const Matrix& x, std::span<double> dw,
                            std::span<double> db);
void affine_backward_input(const Matrix& dy, std::span<const double> w, int n_in, Matrix& dx);
}  // namespace serial

}  // namespace kernels
}  // namespace hrl
