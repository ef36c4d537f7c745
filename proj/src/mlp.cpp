#include "hrl/mlp.hpp"

#include <atomic>
#include <cmath>

#include "hrl/errors.hpp"

namespace hrl::netopt {

namespace {
std::uint64_t fresh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)), id_(fresh_id()) {
  if (sizes_.size() < 2) throw ContractViolation("Mlp: need at least input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw ContractViolation("Mlp: layer sizes must be positive");
  }
  layout();
}

void Mlp::layout() {
  offsets_.clear();
  std::size_t total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::vector<int> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    for (double& w : net.mutable_weights(l)) w = rng.uniform(-bound, bound);
    for (double& b : net.mutable_biases(l)) b = rng.uniform(-bound, bound);
  }
  return net;
}

Mlp::Mlp(const Mlp& other)
    : sizes_(other.sizes_), offsets_(other.offsets_), params_(other.params_), id_(fresh_id()) {}

Mlp& Mlp::operator=(const Mlp& other) {
  if (this != &other) {
    sizes_ = other.sizes_;
    offsets_ = other.offsets_;
    params_ = other.params_;
    id_ = fresh_id();
    generation_ = 0;
  }
  return *this;
}

std::span<double> Mlp::mutable_params() {
  ++generation_;
  return params_;
}

std::span<const double> Mlp::weights(int layer) const {
  return {params_.data() + weight_offset(layer),
          static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1]};
}

std::span<const double> Mlp::biases(int layer) const {
  return {params_.data() + bias_offset(layer), static_cast<std::size_t>(sizes_[layer + 1])};
}

std::span<double> Mlp::mutable_weights(int layer) {
  ++generation_;
  return {params_.data() + weight_offset(layer),
          static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1]};
}

std::span<double> Mlp::mutable_biases(int layer) {
  ++generation_;
  return {params_.data() + bias_offset(layer), static_cast<std::size_t>(sizes_[layer + 1])};
}

Matrix Mlp::forward(const Matrix& x, ForwardCache& cache) const {
  if (x.cols != input_size()) throw ContractViolation("Mlp::forward: input width mismatch");
  const int L = num_layers();
  cache.net_id = id_;
  cache.generation = generation_;
  cache.inputs.resize(L);
  cache.pre.resize(L);
  cache.inputs[0] = x;
  for (int l = 0; l < L; ++l) {
    kernels::affine_forward(cache.inputs[l], weights(l), biases(l), cache.pre[l]);
    if (l + 1 < L) {
      cache.inputs[l + 1] = cache.pre[l];
      kernels::relu_inplace(cache.inputs[l + 1]);
    }
  }
  return cache.pre[L - 1];
}

Matrix Mlp::predict(const Matrix& x) const {
  if (x.cols != input_size()) throw ContractViolation("Mlp::predict: input width mismatch");
  Matrix cur = x;
  Matrix next;
  for (int l = 0; l < num_layers(); ++l) {
    kernels::affine_forward(cur, weights(l), biases(l), next);
    if (l + 1 < num_layers()) kernels::relu_inplace(next);
    std::swap(cur, next);
  }
  return cur;
}

std::vector<double> Mlp::predict(std::span<const double> input) const {
  Matrix x(1, static_cast<int>(input.size()));
  std::copy(input.begin(), input.end(), x.data.begin());
  return predict(x).data;
}

Matrix Mlp::backward(const ForwardCache& cache, const Matrix& out_grad,
                     std::span<double> param_grads, bool want_input_grad) const {
  if (cache.net_id != id_ || cache.generation != generation_ ||
      static_cast<int>(cache.pre.size()) != num_layers()) {
    throw ContractViolation("Mlp::backward: cache was not produced by this network state");
  }
  const bool want_params = !param_grads.empty();
  if (want_params && param_grads.size() != params_.size()) {
    throw ContractViolation("Mlp::backward: gradient buffer has the wrong size");
  }
  const int L = num_layers();
  const Matrix& last = cache.pre[L - 1];
  if (out_grad.rows != last.rows || out_grad.cols != last.cols) {
    throw ContractViolation("Mlp::backward: output gradient shape mismatch");
  }

  Matrix delta = out_grad;
  Matrix below;
  for (int l = L - 1; l >= 0; --l) {
    if (want_params) {
      const std::size_t w0 = weight_offset(l);
      const std::size_t nw = static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1];
      kernels::affine_backward_params(delta, cache.inputs[l], param_grads.subspan(w0, nw),
                                      param_grads.subspan(bias_offset(l), sizes_[l + 1]));
    }
    if (l == 0 && !want_input_grad) break;
    kernels::affine_backward_input(delta, weights(l), sizes_[l], below);
    if (l > 0) kernels::relu_backward_inplace(cache.pre[l - 1], below);
    std::swap(delta, below);
  }
  return want_input_grad ? delta : Matrix{};
}

Backprop Mlp::backward(const ForwardCache& cache, const Matrix& out_grad) const {
  Backprop out;
  out.param_grads.assign(params_.size(), 0.0);
  out.input_grad = backward(cache, out_grad, out.param_grads, true);
  return out;
}

}  // namespace hrl::netopt
