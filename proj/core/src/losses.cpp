#include "camp/losses.hpp"

#include <cmath>
#include <string>

#include "camp/errors.hpp"

namespace camp::loss {

namespace {

nn::Matrix noisy_obs(Batch batch, bool next) {
  if (batch.empty()) {
    throw UsageError("loss batch is empty");
  }
  const auto dim = batch.front()->s.size();
  nn::Matrix out(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = *batch[j];
    out.col(static_cast<Eigen::Index>(j)) = next ? (t.s_next + t.eps_next) : (t.s + t.eps);
  }
  return out;
}

struct TopTwo {
  Eigen::Index first = 0;
  Eigen::Index second = 1;
};

TopTwo top_two(const nn::Vector& q) {
  TopTwo t;
  t.first = static_cast<Eigen::Index>(nn::argmax(q));
  t.second = t.first == 0 ? 1 : 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (i != t.first && q(i) > q(t.second)) t.second = i;
  }
  return t;
}

void check_same_actions(const nn::QNetwork& a, const nn::QNetwork& b) {
  if (a.action_dim() != b.action_dim() || a.input_dim() != b.input_dim()) {
    throw UsageError("networks disagree on input or action dimension");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (!(lambda >= 0.0)) {
    throw ConfigError("lambda must be >= 0");
  }
  if (eta_mode == EtaMode::kFixed && !(eta_fixed >= 0.0)) {
    throw ConfigError("fixed eta must be >= 0");
  }
}

double utility_loss_batch(const nn::QNetwork& net, const nn::QNetwork& target, Batch batch, double gamma,
                          nn::GradientSet& grad) {
  check_same_actions(net, target);
  const nn::Matrix obs = noisy_obs(batch, false);
  const nn::Matrix next_q = target.forward_batch(noisy_obs(batch, true));
  const nn::BatchTrace trace = net.trace_batch(obs);

  nn::Matrix upstream = nn::Matrix::Zero(trace.output.rows(), trace.output.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = *batch[j];
    const auto col = static_cast<Eigen::Index>(j);
    if (t.action < 0 || t.action >= trace.output.rows()) {
      throw UsageError("transition action index out of range");
    }
    const double bootstrap = t.done ? 0.0 : gamma * next_q.col(col).maxCoeff();
    const double diff = trace.output(t.action, col) - (t.reward + bootstrap);
    loss += diff * diff;
    upstream(t.action, col) = 2.0 * diff;
  }
  net.backward_batch(trace, upstream, &grad, nullptr);
  return loss;
}

LossGrad loss_ut(const nn::QNetwork& reference, const nn::QNetwork& reference_target,
                 const replay::Transition& t, const LossConfig& cfg) {
  LossGrad out{0.0, reference.zero_gradients()};
  const replay::Transition* one[] = {&t};
  out.loss = utility_loss_batch(reference, reference_target, one, cfg.gamma, out.grad);
  return out;
}

LogitLoss robustness_hinge(const nn::Vector& q_primary, const nn::Vector& q_reference, double lambda,
                           double eta) {
  if (q_primary.size() < 2) {
    throw UsageError("robustness loss needs at least two actions");
  }
  if (q_reference.size() != q_primary.size()) {
    throw UsageError("robustness loss: action dimensions differ");
  }
  LogitLoss out{0.0, nn::Vector::Zero(q_primary.size())};
  const TopTwo top = top_two(q_primary);
  if (q_reference(top.first) < q_reference(top.second)) {
    return out;
  }
  const double slack = eta - (q_primary(top.first) - q_primary(top.second));
  if (slack > 0.0) {
    out.loss = lambda * slack;
    out.grad(top.first) = -lambda;
    out.grad(top.second) = lambda;
  }
  return out;
}

LogitLoss imitation_ce(const nn::Vector& q_primary, const nn::Vector& q_reference) {
  if (q_primary.size() != q_reference.size()) {
    throw UsageError("imitation loss: action dimensions differ");
  }
  const nn::CrossEntropy ce = nn::softmax_cross_entropy(q_primary, nn::softmax(q_reference));
  return {ce.loss, ce.logit_grad};
}

LossGrad loss_ro(const nn::QNetwork& primary, const nn::QNetwork& reference, const nn::Vector& obs_noisy,
                 const LossConfig& cfg, double eta) {
  check_same_actions(primary, reference);
  const LogitLoss hinge = robustness_hinge(primary.forward(obs_noisy), reference.forward(obs_noisy),
                                           cfg.lambda, eta);
  return {hinge.loss, primary.backward_params(obs_noisy, hinge.grad)};
}

LossGrad loss_im(const nn::QNetwork& primary, const nn::QNetwork& reference, const nn::Vector& obs_noisy) {
  check_same_actions(primary, reference);
  const LogitLoss ce = imitation_ce(primary.forward(obs_noisy), reference.forward(obs_noisy));
  return {ce.loss, primary.backward_params(obs_noisy, ce.grad)};
}

double adaptive_eta(const nn::Matrix& q_values) {
  if (q_values.size() == 0) {
    throw UsageError("adaptive_eta: empty batch");
  }
  return q_values.maxCoeff() - q_values.minCoeff();
}

CampLoss camp_loss(const nn::QNetwork& primary, const nn::QNetwork& reference,
                   const nn::QNetwork& reference_target, Batch batch_ref, Batch batch_primary,
                   const LossConfig& cfg) {
  check_same_actions(primary, reference);
  CampLoss out;
  out.reference_grad = reference.zero_gradients();
  out.primary_grad = primary.zero_gradients();

  out.utility = utility_loss_batch(reference, reference_target, batch_ref, cfg.gamma, out.reference_grad);

  const nn::Matrix obs = noisy_obs(batch_primary, false);
  const nn::BatchTrace trace = primary.trace_batch(obs);
  const nn::Matrix q_ref = reference.forward_batch(obs);
  switch (cfg.eta_mode) {
    case EtaMode::kAdaptive: out.eta = adaptive_eta(trace.output); break;
    case EtaMode::kAdaptiveReference: out.eta = adaptive_eta(q_ref); break;
    case EtaMode::kFixed: out.eta = cfg.eta_fixed; break;
  }

  nn::Matrix upstream(trace.output.rows(), trace.output.cols());
  for (Eigen::Index j = 0; j < trace.output.cols(); ++j) {
    const nn::Vector qp = trace.output.col(j);
    const nn::Vector qr = q_ref.col(j);
    const LogitLoss hinge = robustness_hinge(qp, qr, cfg.lambda, out.eta);
    const LogitLoss ce = imitation_ce(qp, qr);
    out.robustness += hinge.loss;
    out.imitation += ce.loss;
    upstream.col(j) = hinge.grad + ce.grad;
  }
  primary.backward_batch(trace, upstream, &out.primary_grad, nullptr);
  out.total = out.utility + out.robustness + out.imitation;
  return out;
}

}  // namespace camp::loss
