#include <doctest.h>

#include <cmath>
#include <vector>

#include "camp/errors.hpp"
#include "camp/losses.hpp"
#include "net_fd.hpp"

using namespace camp;
using namespace camp::loss;
using nn::Matrix;
using nn::QNetwork;
using nn::Vector;

namespace {

// Network whose output is exactly its bias (zero weights).
QNetwork constant_net(std::size_t in, std::vector<double> q) {
  const std::vector<std::size_t> dims{in, q.size()};
  QNetwork net(dims);
  for (std::size_t i = 0; i < q.size(); ++i) net.layers()[0].bias(static_cast<Eigen::Index>(i)) = q[i];
  return net;
}

replay::Transition transition(Engine& rng, std::size_t dim, int action, double reward, bool done,
                              double sigma = 0.3) {
  replay::Transition t;
  t.s = oracle::random_vector(rng, static_cast<Eigen::Index>(dim));
  t.eps = oracle::random_vector(rng, static_cast<Eigen::Index>(dim), sigma);
  t.s_next = oracle::random_vector(rng, static_cast<Eigen::Index>(dim));
  t.eps_next = oracle::random_vector(rng, static_cast<Eigen::Index>(dim), sigma);
  t.action = action;
  t.reward = reward;
  t.done = done;
  return t;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("utility loss hand example") {
  Engine rng = make_stream(1, "ut");
  const QNetwork ref = constant_net(4, {1.0, 0.0});
  const QNetwork target = constant_net(4, {2.0, -1.0});
  replay::Transition t = transition(rng, 4, 0, 1.0, false);
  LossConfig cfg;
  cfg.gamma = 0.99;
  // target 1 + 0.99 * 2 = 2.98; (1 - 2.98)^2
  CHECK(loss_ut(ref, target, t, cfg).loss == doctest::Approx(3.9204).epsilon(1e-14));

  // Terminal: bootstrap masked, Q equals r.
  t.done = true;
  t.reward = 1.0;
  CHECK(loss_ut(ref, target, t, cfg).loss == 0.0);
}

TEST_CASE("utility loss uses the noisy observations") {
  Engine rng = make_stream(2, "ut");
  const std::vector<std::size_t> hidden{5};
  const QNetwork net = QNetwork::make_mlp(3, hidden, 2, rng);
  const QNetwork target = QNetwork::make_mlp(3, hidden, 2, rng);
  replay::Transition t = transition(rng, 3, 1, 0.5, false);
  LossConfig cfg;
  const double want_target = t.reward + cfg.gamma * target.forward(Vector(t.s_next + t.eps_next)).maxCoeff();
  const double diff = net.forward(Vector(t.s + t.eps))(1) - want_target;
  CHECK(loss_ut(net, target, t, cfg).loss == doctest::Approx(diff * diff).epsilon(1e-13));
}

TEST_CASE("utility gradient matches central differences") {
  Engine rng = make_stream(3, "ut_fd");
  LossConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const QNetwork net = oracle::random_small_net(rng, 4, 2);
    QNetwork target = net;
    const auto t = transition(rng, 4, trial % 2, 1.0, trial % 3 == 0);
    const auto analytic = oracle::flatten(loss_ut(net, target, t, cfg).grad);
    const auto numeric = oracle::fd_params(net, [&](const QNetwork& n) { return loss_ut(n, target, t, cfg).loss; });
    CHECK(oracle::relative_error(analytic, numeric) <= 1e-6);
  }
}

TEST_CASE("robustness hinge hand examples") {
  // lambda 2, eta 1, gap 0.3, reference agrees: 2 * 0.7
  LogitLoss h = robustness_hinge(vec({0.3, 0.0}), vec({1.0, 0.5}), 2.0, 1.0);
  CHECK(h.loss == doctest::Approx(1.4));
  CHECK(h.grad(0) == -2.0);
  CHECK(h.grad(1) == 2.0);

  h = robustness_hinge(vec({1.5, 0.0}), vec({1.0, 0.5}), 2.0, 1.0);
  CHECK(h.loss == 0.0);
  CHECK(h.grad.norm() == 0.0);

  // Reference disagrees with the primary's ordering.
  h = robustness_hinge(vec({0.3, 0.0}), vec({0.0, 0.5}), 2.0, 1.0);
  CHECK(h.loss == 0.0);

  // Primary tie: lowest index is top-1; reference tie counts as agreement.
  h = robustness_hinge(vec({0.0, 0.0}), vec({0.2, 0.2}), 1.0, 1.0);
  CHECK(h.loss == 1.0);
  CHECK(h.grad(0) == -1.0);

  // Three actions: only the top pair is involved.
  h = robustness_hinge(vec({0.0, 2.0, 1.8}), vec({0.0, 3.0, 1.0}), 1.0, 0.5);
  CHECK(h.loss == doctest::Approx(0.3));
  CHECK(h.grad(0) == 0.0);
  CHECK(h.grad(1) == -1.0);
  CHECK(h.grad(2) == 1.0);

  CHECK_THROWS_AS(robustness_hinge(vec({1.0}), vec({1.0}), 1.0, 1.0), UsageError);
}

TEST_CASE("robustness hinge is bounded and shift invariant") {
  Engine rng = make_stream(4, "ro");
  for (int i = 0; i < 200; ++i) {
    const Vector qp = oracle::random_vector(rng, 3);
    const Vector qr = oracle::random_vector(rng, 3);
    const double lambda = 3.0 * uniform_unit(rng);
    const double eta = 2.0 * uniform_unit(rng);
    const LogitLoss a = robustness_hinge(qp, qr, lambda, eta);
    CHECK(a.loss >= 0.0);
    CHECK(a.loss <= lambda * eta + 1e-15);
    const LogitLoss b = robustness_hinge((qp.array() + 7.5).matrix(), qr, lambda, eta);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-12));
  }
}

TEST_CASE("imitation loss values") {
  CHECK(imitation_ce(vec({0.0, 0.0}), vec({0.0, 0.0})).loss == doctest::Approx(0.6931472).epsilon(1e-7));
  CHECK(imitation_ce(vec({0.0, 0.0}), vec({std::log(3.0), 0.0})).loss == doctest::Approx(0.6931472).epsilon(1e-7));

  // Minimised, at the reference entropy, when logits agree up to a shift.
  const Vector ref = vec({0.4, -1.1, 2.0});
  const Vector p = nn::softmax(ref);
  const double entropy = -(p.array() * p.array().log()).sum();
  CHECK(imitation_ce((ref.array() + 3.0).matrix(), ref).loss == doctest::Approx(entropy).epsilon(1e-13));
  CHECK(imitation_ce(vec({0.0, 0.0, 0.0}), ref).loss > entropy);
}

TEST_CASE("robustness and imitation gradients match central differences") {
  Engine rng = make_stream(5, "ro_fd");
  LossConfig cfg;
  cfg.lambda = 1.5;
  for (int trial = 0; trial < 10; ++trial) {
    const QNetwork primary = oracle::random_small_net(rng, 4, 3);
    const QNetwork reference = oracle::random_small_net(rng, 4, 3);
    const Vector x = oracle::random_vector(rng, 4);
    const double eta = trial % 2 == 0 ? 10.0 : 0.01;

    const auto ro = oracle::flatten(loss_ro(primary, reference, x, cfg, eta).grad);
    const auto ro_fd =
        oracle::fd_params(primary, [&](const QNetwork& n) { return loss_ro(n, reference, x, cfg, eta).loss; });
    CHECK(oracle::relative_error(ro, ro_fd) <= 1e-6);

    const auto im = oracle::flatten(loss_im(primary, reference, x).grad);
    const auto im_fd = oracle::fd_params(primary, [&](const QNetwork& n) { return loss_im(n, reference, x).loss; });
    CHECK(oracle::relative_error(im, im_fd) <= 1e-6);
  }
}

TEST_CASE("adaptive eta") {
  Matrix q(1, 3);
  q << 1.0, 3.5, -0.5;
  CHECK(adaptive_eta(q) == 4.0);
  CHECK(adaptive_eta(Matrix::Constant(2, 5, 1.25)) == 0.0);
  CHECK(adaptive_eta(2.5 * q) == doctest::Approx(10.0));
  CHECK_THROWS_AS(adaptive_eta(Matrix(2, 0)), UsageError);
}

TEST_CASE("camp loss routes gradients to the right network") {
  Engine rng = make_stream(6, "camp");
  const std::vector<std::size_t> hidden{6};
  const QNetwork primary = QNetwork::make_mlp(4, hidden, 2, rng);
  const QNetwork reference = QNetwork::make_mlp(4, hidden, 2, rng);
  const QNetwork ref_target = QNetwork::make_mlp(4, hidden, 2, rng);
  std::vector<replay::Transition> za;
  std::vector<replay::Transition> zb;
  for (int i = 0; i < 8; ++i) {
    za.push_back(transition(rng, 4, i % 2, 1.0, i == 3));
    zb.push_back(transition(rng, 4, (i + 1) % 2, 1.0, false));
  }
  std::vector<const replay::Transition*> batch_ref;
  std::vector<const replay::Transition*> batch_primary;
  for (auto& t : za) batch_ref.push_back(&t);
  for (auto& t : zb) batch_primary.push_back(&t);

  LossConfig cfg;
  cfg.eta_mode = EtaMode::kFixed;
  cfg.eta_fixed = 3.0;
  const CampLoss l = camp_loss(primary, reference, ref_target, batch_ref, batch_primary, cfg);
  CHECK(l.total == doctest::Approx(l.utility + l.robustness + l.imitation).epsilon(1e-12));
  CHECK(l.eta == 3.0);

  // Reference gradient is the summed utility gradient over batch_ref only.
  const auto ref_fd = oracle::fd_params(reference, [&](const QNetwork& n) {
    double s = 0.0;
    for (const auto* t : batch_ref) s += loss_ut(n, ref_target, *t, cfg).loss;
    return s;
  });
  CHECK(oracle::relative_error(oracle::flatten(l.reference_grad), ref_fd) <= 1e-6);

  // Primary gradient is the summed robustness + imitation gradient over batch_primary.
  const auto prim_fd = oracle::fd_params(primary, [&](const QNetwork& n) {
    double s = 0.0;
    for (const auto* t : batch_primary) {
      const Vector x = t->s + t->eps;
      s += loss_ro(n, reference, x, cfg, cfg.eta_fixed).loss + loss_im(n, reference, x).loss;
    }
    return s;
  });
  CHECK(oracle::relative_error(oracle::flatten(l.primary_grad), prim_fd) <= 1e-6);

  // Adaptive mode reads eta off the primary's batch Q-values.
  cfg.eta_mode = EtaMode::kAdaptive;
  const CampLoss la = camp_loss(primary, reference, ref_target, batch_ref, batch_primary, cfg);
  Matrix q(2, static_cast<Eigen::Index>(zb.size()));
  for (std::size_t j = 0; j < zb.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = primary.forward(Vector(zb[j].s + zb[j].eps));
  CHECK(la.eta == doctest::Approx(adaptive_eta(q)).epsilon(1e-14));

  // The default reads it off the reference net on the same batch.
  cfg.eta_mode = EtaMode::kAdaptiveReference;
  const CampLoss lr = camp_loss(primary, reference, ref_target, batch_ref, batch_primary, cfg);
  for (std::size_t j = 0; j < zb.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = reference.forward(Vector(zb[j].s + zb[j].eps));
  CHECK(lr.eta == doctest::Approx(adaptive_eta(q)).epsilon(1e-14));
  CHECK(LossConfig{}.eta_mode == EtaMode::kAdaptiveReference);
}

TEST_CASE("with lambda zero and identical nets the primary sits at a stationary point") {
  Engine rng = make_stream(7, "stationary");
  const std::vector<std::size_t> hidden{5};
  const QNetwork net = QNetwork::make_mlp(4, hidden, 2, rng);
  std::vector<replay::Transition> z;
  for (int i = 0; i < 6; ++i) z.push_back(transition(rng, 4, i % 2, 1.0, false));
  std::vector<const replay::Transition*> b;
  for (auto& t : z) b.push_back(&t);
  LossConfig cfg;
  cfg.lambda = 0.0;
  const CampLoss l = camp_loss(net, net, net, b, b, cfg);
  CHECK(l.robustness == 0.0);
  CHECK(l.primary_grad.squared_norm() < 1e-24);
}
