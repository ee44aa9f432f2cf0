#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace hab::sac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully connected network with ReLU hidden layers and a linear output.
///
/// All weights and biases live in one flat parameter vector (per layer: the
/// column-major weight matrix, then the bias), so optimisers, target-network
/// averaging and checkpoints operate on a single array. Batches are stored
/// column-wise: an input batch is (input_size x batch).
class Mlp {
 public:
  /// Activations kept by forward() for backward().
  struct Cache {
    std::vector<Matrix> inputs;  // input of every layer; hidden ones are post-ReLU
  };

  Mlp() = default;
  /// PyTorch-style init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  /// With `zero_output_layer` the last layer starts at exactly zero.
  Mlp(std::vector<std::size_t> sizes, std::uint64_t seed, bool zero_output_layer = false);

  Matrix forward(const Matrix& input, Cache* cache = nullptr) const;

  /// Back-propagate d(loss)/d(output). Parameter gradients are added to
  /// `*grad` (resized and zeroed when empty; skipped when null);
  /// d(loss)/d(input) is written to `grad_input` when non-null.
  void backward(const Cache& cache, const Matrix& grad_output, Vector* grad,
                Matrix* grad_input = nullptr) const;

  std::span<const std::size_t> sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

 private:
  Eigen::Map<const Matrix> weight(std::size_t layer) const;
  Eigen::Map<const Vector> bias(std::size_t layer) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights in params_
  Vector params_;
};

/// Element-wise target <- polyak * target + (1 - polyak) * online.
void polyak_update(Mlp& target, const Mlp& online, double polyak);

}  // namespace hab::sac
