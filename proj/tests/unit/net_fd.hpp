#pragma once

// Finite-difference gradients of scalar functions of a network's parameters
// or inputs, for checking the analytic backward passes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "camp/network.hpp"
#include "camp/rng.hpp"

namespace oracle {

// Flattened parameters in layer order: weights (row-major), then biases.
inline std::vector<double*> parameter_slots(camp::nn::QNetwork& net) {
  std::vector<double*> out;
  for (auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(&l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(&l.bias(r));
  }
  return out;
}

inline std::vector<double> flatten(const camp::nn::GradientSet& g) {
  std::vector<double> out;
  for (const auto& l : g.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

// Central differences of f(net) with respect to every parameter.
inline std::vector<double> fd_params(camp::nn::QNetwork net, const std::function<double(const camp::nn::QNetwork&)>& f,
                                     double h = 1e-6) {
  std::vector<double> out;
  for (double* p : parameter_slots(net)) {
    const double keep = *p;
    *p = keep + h;
    const double up = f(net);
    *p = keep - h;
    const double down = f(net);
    *p = keep;
    out.push_back((up - down) / (2.0 * h));
  }
  return out;
}

inline Eigen::VectorXd fd_input(const Eigen::VectorXd& x, const std::function<double(const Eigen::VectorXd&)>& f,
                                double h = 1e-6) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a(i) += h;
    b(i) -= h;
    out(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return out;
}

// ||a - b|| / max(||a||, ||b||), zero when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Small random net with shape drawn from the stream.
inline camp::nn::QNetwork random_small_net(camp::Engine& rng, std::size_t input_dim, std::size_t actions) {
  std::vector<std::size_t> hidden;
  const auto depth = 1 + camp::uniform_index(rng, 2);
  for (std::size_t i = 0; i < depth; ++i) hidden.push_back(3 + camp::uniform_index(rng, 6));
  return camp::nn::QNetwork::make_mlp(input_dim, hidden, actions, rng);
}

inline Eigen::VectorXd random_vector(camp::Engine& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * camp::standard_normal(rng);
  return v;
}

}  // namespace oracle
