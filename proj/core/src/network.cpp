#include "camp/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "camp/errors.hpp"

namespace camp::nn {

namespace {

Eigen::Map<const Vector> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_congruent(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b,
                     const char* what) {
  bool ok = a.size() == b.size();
  for (std::size_t i = 0; ok && i < a.size(); ++i) {
    ok = a[i].weight.rows() == b[i].weight.rows() && a[i].weight.cols() == b[i].weight.cols() &&
         a[i].bias.size() == b[i].bias.size();
  }
  if (!ok) {
    throw UsageError(std::string(what) + ": parameter shapes differ");
  }
}

}  // namespace

void GradientSet::set_zero() {
  for (auto& l : layers_) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  check_congruent(layers_, other.layers_, "GradientSet::operator+=");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight += other.layers_[i].weight;
    layers_[i].bias += other.layers_[i].bias;
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double scale) {
  for (auto& l : layers_) {
    l.weight *= scale;
    l.bias *= scale;
  }
  return *this;
}

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers_) {
    s += l.weight.squaredNorm() + l.bias.squaredNorm();
  }
  return s;
}

bool GradientSet::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

QNetwork::QNetwork(std::span<const std::size_t> dims) {
  if (dims.size() < 2) {
    throw UsageError("QNetwork needs at least an input and an output width");
  }
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] == 0 || dims[i + 1] == 0) {
      throw UsageError("QNetwork layer widths must be positive");
    }
    const auto in = static_cast<Eigen::Index>(dims[i]);
    const auto out = static_cast<Eigen::Index>(dims[i + 1]);
    layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
}

QNetwork QNetwork::make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                            std::size_t action_dim, Engine& rng) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(action_dim);
  QNetwork net(dims);
  for (auto& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
    auto draw = [&] { return bound * (2.0 * uniform_unit(rng) - 1.0); };
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = draw();
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      layer.bias(r) = draw();
    }
  }
  return net;
}

QNetwork QNetwork::make_default(std::size_t input_dim, std::size_t action_dim, Engine& rng) {
  static constexpr std::size_t kHidden[] = {256, 256};
  return make_mlp(input_dim, kHidden, action_dim, rng);
}

std::size_t QNetwork::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_dim();
}

std::size_t QNetwork::action_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

std::vector<std::size_t> QNetwork::hidden_dims() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    out.push_back(layers_[i].out_dim());
  }
  return out;
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  }
  return n;
}

void QNetwork::check_input(Eigen::Index rows) const {
  if (layers_.empty()) {
    throw UsageError("QNetwork has no layers");
  }
  if (rows != static_cast<Eigen::Index>(input_dim())) {
    throw UsageError("observation length " + std::to_string(rows) + " does not match input_dim " +
                     std::to_string(input_dim()));
  }
}

Vector QNetwork::forward(std::span<const double> obs) const {
  check_input(static_cast<Eigen::Index>(obs.size()));
  Vector a = as_vector(obs);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Vector z = layers_[i].weight * a + layers_[i].bias;
    if (i + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Matrix QNetwork::forward_batch(const Matrix& obs) const {
  check_input(obs.rows());
  Matrix a = obs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

BatchTrace QNetwork::trace_batch(const Matrix& obs) const {
  check_input(obs.rows());
  BatchTrace trace;
  trace.input = obs;
  trace.hidden.reserve(layers_.size() - 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Matrix& a = i == 0 ? trace.input : trace.hidden.back();
    Matrix z;
    z.noalias() = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) {
      trace.hidden.push_back(z.cwiseMax(0.0));
    } else {
      trace.output = std::move(z);
    }
  }
  return trace;
}

void QNetwork::backward_batch(const BatchTrace& trace, const Matrix& upstream, GradientSet* grads,
                              Matrix* input_grads) const {
  if (upstream.rows() != static_cast<Eigen::Index>(action_dim()) ||
      upstream.cols() != trace.input.cols()) {
    throw UsageError("upstream gradient shape does not match the network output");
  }
  if (grads != nullptr) {
    check_congruent(layers_, grads->layers(), "backward_batch");
  }
  Matrix delta = upstream;
  Matrix back;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    const Matrix& below = li == 0 ? trace.input : trace.hidden[li - 1];
    if (grads != nullptr) {
      auto& g = grads->layers()[li];
      g.weight.noalias() += delta * below.transpose();
      g.bias += delta.rowwise().sum();
    }
    if (li == 0) {
      if (input_grads != nullptr) {
        input_grads->noalias() = layer.weight.transpose() * delta;
      }
      break;
    }
    // A unit is active exactly when its rectified output is positive.
    back.noalias() = layer.weight.transpose() * delta;
    delta = (below.array() > 0.0).select(back, 0.0);
  }
}

GradientSet QNetwork::backward_params(std::span<const double> obs,
                                      std::span<const double> upstream) const {
  check_input(static_cast<Eigen::Index>(obs.size()));
  if (upstream.size() != action_dim()) {
    throw UsageError("upstream length does not match action_dim");
  }
  const BatchTrace trace = trace_batch(as_vector(obs));
  GradientSet grads = zero_gradients();
  backward_batch(trace, Matrix(as_vector(upstream)), &grads, nullptr);
  return grads;
}

Vector QNetwork::backward_input(std::span<const double> obs, std::span<const double> upstream) const {
  check_input(static_cast<Eigen::Index>(obs.size()));
  if (upstream.size() != action_dim()) {
    throw UsageError("upstream length does not match action_dim");
  }
  const BatchTrace trace = trace_batch(as_vector(obs));
  Matrix input_grads;
  backward_batch(trace, Matrix(as_vector(upstream)), nullptr, &input_grads);
  return input_grads.col(0);
}

GradientSet QNetwork::zero_gradients() const {
  std::vector<DenseLayer> layers;
  layers.reserve(layers_.size());
  for (const auto& l : layers_) {
    layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return GradientSet(std::move(layers));
}

bool QNetwork::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Vector softmax(const Vector& logits) {
  const double shift = logits.maxCoeff();
  Vector e = (logits.array() - shift).exp();
  return e / e.sum();
}

CrossEntropy softmax_cross_entropy(const Vector& logits, const Vector& target) {
  if (logits.size() != target.size() || logits.size() == 0) {
    throw UsageError("softmax_cross_entropy: logits and target lengths differ");
  }
  if (!logits.allFinite()) {
    throw DomainError("softmax_cross_entropy: non-finite logits");
  }
  if (std::abs(target.sum() - 1.0) > 1e-9 || (target.array() < 0.0).any()) {
    throw DomainError("softmax_cross_entropy: target is not a probability vector");
  }
  const double shift = logits.maxCoeff();
  const Vector shifted = logits.array() - shift;
  const double log_z = std::log(shifted.array().exp().sum());
  const Vector log_probs = shifted.array() - log_z;
  CrossEntropy out;
  out.loss = -(target.array() * log_probs.array()).sum();
  out.logit_grad = log_probs.array().exp().matrix() - target;
  return out;
}

AdamState AdamState::for_network(const QNetwork& net, double lr) {
  AdamState s;
  s.lr = lr;
  s.first_moment = net.zero_gradients();
  s.second_moment = net.zero_gradients();
  return s;
}

void adam_step(AdamState& state, QNetwork& net, const GradientSet& grads) {
  check_congruent(net.layers(), grads.layers(), "adam_step");
  check_congruent(net.layers(), state.first_moment.layers(), "adam_step");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    auto& p = net.layers()[i];
    auto& m = state.first_moment.layers()[i];
    auto& v = state.second_moment.layers()[i];
    const auto& g = grads.layers()[i];
    update(p.weight, m.weight, v.weight, g.weight);
    update(p.bias, m.bias, v.bias, g.bias);
  }
}

std::size_t argmax(const Vector& q) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

double q_gap(const Vector& q) {
  if (q.size() < 2) {
    throw UsageError("q_gap needs at least two actions");
  }
  const std::size_t top = argmax(q);
  double runner = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (static_cast<std::size_t>(i) != top) runner = std::max(runner, q(i));
  }
  return q(static_cast<Eigen::Index>(top)) - runner;
}

}  // namespace camp::nn
