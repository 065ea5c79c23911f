#include <benchmark/benchmark.h>

#include <vector>

#include "camp/attacker.hpp"
#include "camp/certifier.hpp"
#include "camp/losses.hpp"
#include "camp/stats.hpp"

using namespace camp;

namespace {

nn::QNetwork default_net(std::uint64_t seed) {
  Engine rng = make_stream(seed, "bench_net");
  return nn::QNetwork::make_default(4, 2, rng);
}

std::vector<replay::Transition> random_transitions(std::size_t n, Engine& rng) {
  std::vector<replay::Transition> out(n);
  for (auto& t : out) {
    t.s = Eigen::VectorXd::NullaryExpr(4, [&] { return 0.05 * standard_normal(rng); });
    t.eps = Eigen::VectorXd::NullaryExpr(4, [&] { return 0.2 * standard_normal(rng); });
    t.s_next = t.s;
    t.eps_next = t.eps;
    t.action = static_cast<int>(uniform_index(rng, 2));
    t.reward = 1.0;
  }
  return out;
}

}  // namespace

static void BM_NormalQuantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::std_normal_quantile(p));
    p = p < 0.999 ? p * 1.001 : 1e-6;
  }
}
BENCHMARK(BM_NormalQuantile);

static void BM_ForwardBatch(benchmark::State& state) {
  const nn::QNetwork net = default_net(1);
  Engine rng = make_stream(2, "bench_obs");
  const nn::Matrix obs = nn::Matrix::NullaryExpr(4, state.range(0), [&] { return standard_normal(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(obs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(256);

// One gradient step's worth of loss evaluation at the desk batch size.
static void BM_CampLoss(benchmark::State& state) {
  const nn::QNetwork primary = default_net(3);
  const nn::QNetwork reference = default_net(4);
  Engine rng = make_stream(5, "bench_batch");
  const auto za = random_transitions(256, rng);
  const auto zb = random_transitions(256, rng);
  std::vector<const replay::Transition*> a;
  std::vector<const replay::Transition*> b;
  for (const auto& t : za) a.push_back(&t);
  for (const auto& t : zb) b.push_back(&t);
  const loss::LossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(loss::camp_loss(primary, reference, reference, a, b, cfg).total);
}
BENCHMARK(BM_CampLoss)->Unit(benchmark::kMillisecond);

static void BM_CertifyCurve(benchmark::State& state) {
  Engine rng = make_stream(6, "bench_returns");
  std::vector<double> r(static_cast<std::size_t>(state.range(0)));
  for (auto& v : r) v = static_cast<double>(1 + uniform_index(rng, 200));
  const cert::ReturnSample s(std::move(r), 0.2, 0);
  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto mode = state.range(1) == 0 ? cert::BoundMode::kDkw : cert::BoundMode::kClopperPearson;
  for (auto _ : state) benchmark::DoNotOptimize(cert::certify_curve(s, 0.05, 0.2, grid, mode).points.back().bound);
}
BENCHMARK(BM_CertifyCurve)->Args({10000, 0})->Args({10000, 1});

static void BM_AttackEpisode(benchmark::State& state) {
  const nn::QNetwork net = default_net(7);
  const auto env_cfg = env::EnvConfig::from_name("cartpole1");
  attack::AttackConfig cfg;
  cfg.tau = 1.0;
  cfg.inner = state.range(0) == 0 ? attack::InnerAttack::kPgd : attack::InnerAttack::kApgd;
  std::uint64_t episode = 0;
  for (auto _ : state) benchmark::DoNotOptimize(attack::attack_episode(net, env_cfg, cfg, episode++).episode_return);
}
BENCHMARK(BM_AttackEpisode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
