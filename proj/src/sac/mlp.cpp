#include "hab/sac/mlp.hpp"

#include <cmath>

#include "hab/errors.hpp"
#include "hab/seeding.hpp"

namespace hab::sac {

Mlp::Mlp(std::vector<std::size_t> sizes, std::uint64_t seed, bool zero_output_layer)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw ConfigError("MLP layer sizes must be positive");
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.resize(static_cast<Eigen::Index>(total));

  std::uint64_t rng = seed;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t count = sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    const bool zero = zero_output_layer && l + 1 == layer_count();
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    for (std::size_t i = 0; i < count; ++i) {
      const double unit = static_cast<double>(splitmix64(rng) >> 11) * 0x1.0p-53;
      params_[static_cast<Eigen::Index>(offsets_[l] + i)] = zero ? 0.0 : bound * (2.0 * unit - 1.0);
    }
  }
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<const Vector> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + sizes_[layer + 1] * sizes_[layer],
          static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Matrix Mlp::forward(const Matrix& input, Cache* cache) const {
  if (input.rows() != static_cast<Eigen::Index>(input_size())) {
    throw ShapeMismatch("network expects " + std::to_string(input_size()) + " inputs, got " +
                        std::to_string(input.rows()));
  }
  if (cache) {
    cache->inputs.resize(layer_count());
    cache->inputs[0] = input;
  }
  Matrix activation = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix z = weight(l) * activation;
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) {
      activation = z.cwiseMax(0.0);
      if (cache) cache->inputs[l + 1] = activation;
    } else {
      activation = std::move(z);
    }
  }
  return activation;
}

void Mlp::backward(const Cache& cache, const Matrix& grad_output, Vector* grad,
                   Matrix* grad_input) const {
  if (grad && grad->size() == 0) *grad = Vector::Zero(params_.size());
  Matrix delta = grad_output;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Matrix& input = cache.inputs[l];
    if (grad) {
      const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
      const auto cols = static_cast<Eigen::Index>(sizes_[l]);
      Eigen::Map<Matrix> grad_weight(grad->data() + offsets_[l], rows, cols);
      Eigen::Map<Vector> grad_bias(grad->data() + offsets_[l] + sizes_[l + 1] * sizes_[l], rows);
      grad_weight.noalias() += delta * input.transpose();
      grad_bias += delta.rowwise().sum();
    }
    if (l > 0) {
      Matrix upstream = weight(l).transpose() * delta;
      delta = upstream.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    } else if (grad_input) {
      *grad_input = weight(0).transpose() * delta;
    }
  }
}

void polyak_update(Mlp& target, const Mlp& online, double polyak) {
  target.params() = polyak * target.params() + (1.0 - polyak) * online.params();
}

}  // namespace hab::sac
