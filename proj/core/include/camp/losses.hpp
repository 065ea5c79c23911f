#pragma once

#include <span>

#include "camp/network.hpp"
#include "camp/replay_buffer.hpp"

namespace camp::loss {

// kAdaptive: max - min of the primary's Q over the primary batch.
// kAdaptiveReference: same spread, read from the reference net's Q.
enum class EtaMode { kAdaptive, kAdaptiveReference, kFixed };

struct LossConfig {
  double gamma = 0.99;
  double lambda = 1.0;
  EtaMode eta_mode = EtaMode::kAdaptiveReference;
  double eta_fixed = 1.0;

  void validate() const;
};

struct LossGrad {
  double loss = 0.0;
  nn::GradientSet grad;
};

// Value and gradient of a loss with respect to one network's output logits.
struct LogitLoss {
  double loss = 0.0;
  nn::Vector grad;
};

using Batch = std::span<const replay::Transition* const>;

/// Squared TD error on noisy observations:
///   [Q_ref(s + eps, a) - (r + (1 - d) gamma max_a' Q_target(s' + eps', a'))]^2
/// The bootstrap target is a constant; only `reference` receives gradient.
LossGrad loss_ut(const nn::QNetwork& reference, const nn::QNetwork& reference_target,
                 const replay::Transition& t, const LossConfig& cfg);

/// Summed squared TD error over a batch; gradient accumulated into `grad`.
double utility_loss_batch(const nn::QNetwork& net, const nn::QNetwork& target, Batch batch,
                          double gamma, nn::GradientSet& grad);

/// Hinge on the primary network's top-1 vs runner-up gap, active only when
/// the reference network ranks the same pair in the same order. Ties in
/// ranking break toward the lower action index.
LogitLoss robustness_hinge(const nn::Vector& q_primary, const nn::Vector& q_reference, double lambda,
                           double eta);

LossGrad loss_ro(const nn::QNetwork& primary, const nn::QNetwork& reference, const nn::Vector& obs_noisy,
                 const LossConfig& cfg, double eta);

/// Cross-entropy of softmax(primary) against softmax(reference); the
/// reference is a fixed target.
LogitLoss imitation_ce(const nn::Vector& q_primary, const nn::Vector& q_reference);

LossGrad loss_im(const nn::QNetwork& primary, const nn::QNetwork& reference, const nn::Vector& obs_noisy);

/// max - min over every (sample, action) entry; columns are samples.
double adaptive_eta(const nn::Matrix& q_values);

struct CampLoss {
  double total = 0.0;
  double utility = 0.0;
  double robustness = 0.0;
  double imitation = 0.0;
  double eta = 0.0;
  nn::GradientSet reference_grad;  // d(sum utility)/d reference
  nn::GradientSet primary_grad;    // d(sum robustness + imitation)/d primary
};

/// Full CAMP objective. batch_ref feeds the utility term (reference update),
/// batch_primary the robustness and imitation terms (primary update).
CampLoss camp_loss(const nn::QNetwork& primary, const nn::QNetwork& reference,
                   const nn::QNetwork& reference_target, Batch batch_ref, Batch batch_primary,
                   const LossConfig& cfg);

}  // namespace camp::loss
