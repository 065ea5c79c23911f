#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camp/rng.hpp"

namespace camp::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One affine map y = W x + b. weight is out_dim x in_dim.
struct DenseLayer {
  Matrix weight;
  Vector bias;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

// Per-parameter gradient with the same layout as the network it belongs to.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void set_zero();
  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double scale);
  double squared_norm() const;
  bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
};

// Activations kept from a batched forward pass; columns are samples.
struct BatchTrace {
  Matrix input;
  std::vector<Matrix> hidden;  // rectified output of each hidden layer
  Matrix output;
};

// Fully connected Q-network: rectifier between layers, identity at the
// output. Rectifier subgradient at exactly zero is zero.
class QNetwork {
 public:
  QNetwork() = default;

  // Zero-initialised network with the given layer widths
  // {input, hidden..., actions}; needs at least two entries.
  explicit QNetwork(std::span<const std::size_t> dims);

  // Weights and biases uniform in +-1/sqrt(fan_in).
  static QNetwork make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                           std::size_t action_dim, Engine& rng);

  // input -> 256 -> 256 -> actions
  static QNetwork make_default(std::size_t input_dim, std::size_t action_dim, Engine& rng);

  std::size_t input_dim() const;
  std::size_t action_dim() const;
  std::vector<std::size_t> hidden_dims() const;
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Vector forward(std::span<const double> obs) const;
  Vector forward(const Vector& obs) const { return forward(std::span<const double>(obs.data(), obs.size())); }

  // Gradient of <upstream, forward(obs)> with respect to every parameter.
  GradientSet backward_params(std::span<const double> obs, std::span<const double> upstream) const;
  GradientSet backward_params(const Vector& obs, const Vector& upstream) const {
    return backward_params(std::span<const double>(obs.data(), obs.size()),
                           std::span<const double>(upstream.data(), upstream.size()));
  }

  // Gradient of <upstream, forward(obs)> with respect to obs.
  Vector backward_input(std::span<const double> obs, std::span<const double> upstream) const;
  Vector backward_input(const Vector& obs, const Vector& upstream) const {
    return backward_input(std::span<const double>(obs.data(), obs.size()),
                          std::span<const double>(upstream.data(), upstream.size()));
  }

  // Batched forms used by the trainer and attacker; each column of `obs`
  // is one sample.
  Matrix forward_batch(const Matrix& obs) const;
  BatchTrace trace_batch(const Matrix& obs) const;

  // Accumulates parameter gradients of sum_j <upstream_j, Q(obs_j)> into
  // `grads` (if non-null) and writes input gradients into `input_grads`
  // (if non-null).
  void backward_batch(const BatchTrace& trace, const Matrix& upstream, GradientSet* grads,
                      Matrix* input_grads) const;

  GradientSet zero_gradients() const;
  bool all_finite() const;

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<DenseLayer> layers_;
};

struct CrossEntropy {
  double loss = 0.0;
  Vector logit_grad;
};

Vector softmax(const Vector& logits);

/// -sum target * log softmax(logits), max-shift stabilised. The gradient with
/// respect to the logits is softmax(logits) - target.
CrossEntropy softmax_cross_entropy(const Vector& logits, const Vector& target);

// Bias-corrected Adam.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  GradientSet first_moment;
  GradientSet second_moment;

  static AdamState for_network(const QNetwork& net, double lr);
};

void adam_step(AdamState& state, QNetwork& net, const GradientSet& grads);

// Greedy action; ties go to the lowest index.
std::size_t argmax(const Vector& q);

// Top-1 minus runner-up Q-value.
double q_gap(const Vector& q);

}  // namespace camp::nn
