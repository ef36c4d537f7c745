#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hrl/kernels.hpp"
#include "hrl/rng.hpp"

namespace hrl::netopt {

// Activations recorded by a forward pass; consumed by backward. Tagged with
// the producing network's identity and parameter generation so a cache can
// not be replayed against a different or since-modified network.
struct ForwardCache {
  std::uint64_t net_id = 0;
  std::uint64_t generation = 0;
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

struct Backprop {
  std::vector<double> param_grads;
  Matrix input_grad;
};

// Fully connected network: ReLU on hidden layers, linear output layer.
// All parameters live in one flat buffer, layer by layer, each layer as its
// row-major [n_out x n_in] weight block followed by its n_out biases.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialised network. Every size must be positive and there must be
  // at least an input and an output layer.
  explicit Mlp(std::vector<int> layer_sizes);
  // Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp random(std::vector<int> layer_sizes, Rng& rng);

  Mlp(const Mlp& other);
  Mlp& operator=(const Mlp& other);
  Mlp(Mlp&&) noexcept = default;
  Mlp& operator=(Mlp&&) noexcept = default;

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<const double> params() const { return params_; }
  // Any mutable access invalidates outstanding forward caches.
  std::span<double> mutable_params();
  std::span<const double> weights(int layer) const;
  std::span<const double> biases(int layer) const;
  std::span<double> mutable_weights(int layer);
  std::span<double> mutable_biases(int layer);
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1];
  }

  Matrix forward(const Matrix& x, ForwardCache& cache) const;
  Matrix predict(const Matrix& x) const;
  std::vector<double> predict(std::span<const double> input) const;

  // Reverse pass for the scalar sum(output .* out_grad). Parameter gradients
  // are *accumulated* into `param_grads` (an empty span skips them); the
  // input gradient is returned when requested.
  Matrix backward(const ForwardCache& cache, const Matrix& out_grad, std::span<double> param_grads,
                  bool want_input_grad = true) const;
  Backprop backward(const ForwardCache& cache, const Matrix& out_grad) const;

  std::uint64_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }

 private:
  void layout();

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::uint64_t id_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace hrl::netopt
