// Copyright 2026 The soundtrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "soundtrig/errors.hpp"
#include "soundtrig/learning.hpp"

using namespace soundtrig;

namespace {

// Independent forward pass written from the layout description.
PolicyNet::Output ref_forward(const PolicyNet& net, const std::vector<double>& x) {
  const int in = net.input_dim(), hid = net.hidden(), act = net.actions();
  const auto& p = net.params;
  std::vector<double> h1(hid), h2(hid);
  for (int r = 0; r < hid; ++r) {
    double s = p[net.b1() + r];
    for (int c = 0; c < in; ++c) s += p[net.w1() + r * in + c] * x[c];
    h1[r] = std::tanh(s);
  }
  for (int r = 0; r < hid; ++r) {
    double s = p[net.b2() + r];
    for (int c = 0; c < hid; ++c) s += p[net.w2() + r * hid + c] * h1[c];
    h2[r] = std::tanh(s);
  }
  PolicyNet::Output o;
  o.logits.resize(act);
  for (int k = 0; k < act; ++k) {
    double s = p[net.bp() + k];
    for (int c = 0; c < hid; ++c) s += p[net.wp() + k * hid + c] * h2[c];
    o.logits[k] = s;
  }
  o.value = p[net.bv()];
  for (int c = 0; c < hid; ++c) o.value += p[net.wv() + c] * h2[c];
  return o;
}

double ref_loss(const PolicyNet& net, const Batch& b, const PpoConfig& cfg) {
  double pl = 0.0, vl = 0.0, ent = 0.0;
  const double n = static_cast<double>(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto o = ref_forward(net, b.obs[i]);
    const double m = *std::max_element(o.logits.begin(), o.logits.end());
    double z = 0.0;
    for (double l : o.logits) z += std::exp(l - m);
    std::vector<double> lp;
    for (double l : o.logits) lp.push_back(l - m - std::log(z));
    const double ratio = std::exp(lp[b.actions[i]] - b.old_log_probs[i]);
    const double a = b.advantages[i];
    pl -= std::min(ratio * a, std::clamp(ratio, 1 - cfg.clip, 1 + cfg.clip) * a) / n;
    vl += (o.value - b.returns[i]) * (o.value - b.returns[i]) / n;
    for (double l : lp) ent -= std::exp(l) * l / n;
  }
  return pl + cfg.value_coef * vl - cfg.entropy_coef * ent;
}

PolicyNet random_net(std::uint64_t seed, int in = 5, int hid = 7) {
  PolicyNet net(in, hid);
  Rng rng(seed);
  net.init(rng);
  for (double& w : net.params) w += 0.3 * rng.normal();
  return net;
}

Batch random_batch(const PolicyNet& net, std::uint64_t seed, int n = 12) {
  Rng rng(seed);
  Batch b;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform(-1.5, 1.5);
    const auto o = ref_forward(net, x);
    const auto pr = softmax(o.logits);
    const int a = static_cast<int>(rng.index(net.actions()));
    b.obs.push_back(x);
    b.actions.push_back(a);
    // Old policy within +-0.5 nats, so both clip branches occur.
    b.old_log_probs.push_back(std::log(pr[a]) + rng.uniform(-0.5, 0.5));
    b.advantages.push_back(rng.normal());
    b.returns.push_back(rng.normal());
  }
  return b;
}

// One-step contextual bandit: the sign of obs[1] says which of actions 0/1 pays.
class BanditEnv : public Env {
 public:
  explicit BanditEnv(std::uint64_t seed) : rng_(seed) {}
  int obs_dim() const override { return 2; }
  std::vector<double> reset() override {
    s_ = rng_.bernoulli(0.5) ? 1.0 : -1.0;
    return {1.0, s_};
  }
  EnvStep step(int action) override {
    const bool right = (action == 0) == (s_ > 0);
    EnvStep e;
    e.reward = right ? 1.0 : 0.0;
    e.done = true;
    e.success = right;
    e.obs = reset();
    return e;
  }

 private:
  Rng rng_;
  double s_ = 1.0;
};

EnvFactory bandit() {
  return [](std::uint64_t seed) { return std::make_unique<BanditEnv>(seed); };
}

}  // namespace

TEST(PolicyNet, ForwardMatchesReference) {
  const PolicyNet net = random_net(1);
  const std::vector<double> x{0.1, -0.4, 0.9, 0.0, 1.2};
  const auto a = net.forward(x), b = ref_forward(net, x);
  for (int k = 0; k < net.actions(); ++k) EXPECT_NEAR(a.logits[k], b.logits[k], 1e-12);
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_EQ(net.param_count(), std::size_t{7 * 5 + 7 + 7 * 7 + 7 + 4 * 7 + 4 + 7 + 1});
}

TEST(PolicyNet, SoftmaxStable) {
  const auto p = softmax(std::vector<double>{1000.0, 1000.0, -1000.0, 0.0});
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[1], 0.5, 1e-12);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Loss, MatchesReferenceLoss) {
  PpoConfig cfg;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PolicyNet net = random_net(s);
    const Batch b = random_batch(net, 100 + s);
    EXPECT_NEAR(forward_backward(net, b, cfg).loss, ref_loss(net, b, cfg), 1e-12);
  }
}

TEST(Loss, GradientMatchesCentralDifferences) {
  PpoConfig cfg;
  cfg.max_grad_norm = 0.0;  // compare the raw gradient
  const double h = 1e-5;
  for (std::uint64_t s = 0; s < 10; ++s) {
    PolicyNet net = random_net(10 + s);
    const Batch b = random_batch(net, 200 + s);
    const auto g = forward_backward(net, b, cfg).grad;
    double worst = 0.0;
    for (std::size_t i = 0; i < net.param_count(); ++i) {
      const double keep = net.params[i];
      net.params[i] = keep + h;
      const double up = ref_loss(net, b, cfg);
      net.params[i] = keep - h;
      const double down = ref_loss(net, b, cfg);
      net.params[i] = keep;
      const double fd = (up - down) / (2 * h);
      // Relative error; coordinates whose gradient is below 1e-7 are compared absolutely.
      const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-7});
      worst = std::max(worst, rel);
    }
    EXPECT_LT(worst, 1e-4) << "net " << s;
  }
}

TEST(Loss, ReturnedGradientIsNormClipped) {
  const PolicyNet net = random_net(31);
  const Batch b = random_batch(net, 32);
  PpoConfig raw_cfg;
  raw_cfg.max_grad_norm = 0.0;
  const auto raw = forward_backward(net, b, raw_cfg);
  const auto clipped = forward_backward(net, b, PpoConfig{});
  double norm = 0.0;
  for (double g : raw.grad) norm += g * g;
  norm = std::sqrt(norm);
  ASSERT_GT(norm, 0.5);
  EXPECT_NEAR(clipped.grad_norm, norm, 1e-12);
  for (std::size_t i = 0; i < raw.grad.size(); ++i) EXPECT_NEAR(clipped.grad[i], raw.grad[i] * 0.5 / norm, 1e-12);
}

TEST(Loss, RatioOneGivesMeanAdvantage) {
  const PolicyNet net = random_net(3);
  Batch b = random_batch(net, 4);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b.old_log_probs[i] = std::log(softmax(ref_forward(net, b.obs[i]).logits)[b.actions[i]]);
  }
  const LossResult r = forward_backward(net, b, PpoConfig{});
  const double mean_adv = std::accumulate(b.advantages.begin(), b.advantages.end(), 0.0) / b.size();
  EXPECT_NEAR(-r.policy_loss, mean_adv, 1e-12);
}

TEST(Loss, UniformLogitsGiveLnFourEntropy) {
  PolicyNet net = random_net(5);
  std::fill(net.params.begin() + net.wp(), net.params.begin() + net.wv(), 0.0);
  const LossResult r = forward_backward(net, random_batch(net, 6), PpoConfig{});
  EXPECT_NEAR(r.entropy, std::log(4.0), 1e-12);
}

TEST(Loss, BindingClipZeroesPolicyGradient) {
  PolicyNet net = random_net(7);
  Batch b = random_batch(net, 8);
  PpoConfig cfg;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double lp = std::log(softmax(ref_forward(net, b.obs[i]).logits)[b.actions[i]]);
    // Ratio 1.5 with positive advantage: the clipped branch binds.
    b.old_log_probs[i] = lp - std::log(1.5);
    b.advantages[i] = std::abs(b.advantages[i]) + 0.1;
  }
  const LossResult r = forward_backward(net, b, cfg);
  const double mean_adv = std::accumulate(b.advantages.begin(), b.advantages.end(), 0.0) / b.size();
  EXPECT_NEAR(r.policy_loss, -(1 + cfg.clip) * mean_adv, 1e-12);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
}

TEST(Loss, EntropyCoefficientShiftsLossExactly) {
  const PolicyNet net = random_net(9);
  const Batch b = random_batch(net, 10);
  PpoConfig with, without;
  without.entropy_coef = 0.0;
  const auto a = forward_backward(net, b, with), z = forward_backward(net, b, without);
  EXPECT_NEAR(z.loss - a.loss, 0.1 * a.entropy, 1e-12);
}

TEST(Loss, PermutationInvariant) {
  const PolicyNet net = random_net(11);
  const Batch b = random_batch(net, 12);
  Batch p;
  std::vector<std::size_t> order(b.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[0], order[3]);
  for (std::size_t i : order) {
    p.obs.push_back(b.obs[i]);
    p.actions.push_back(b.actions[i]);
    p.old_log_probs.push_back(b.old_log_probs[i]);
    p.advantages.push_back(b.advantages[i]);
    p.returns.push_back(b.returns[i]);
  }
  const auto x = forward_backward(net, b, PpoConfig{}), y = forward_backward(net, p, PpoConfig{});
  EXPECT_NEAR(x.loss, y.loss, 1e-12);
  for (std::size_t i = 0; i < x.grad.size(); ++i) EXPECT_NEAR(x.grad[i], y.grad[i], 1e-12);
}

TEST(Loss, NonFiniteThrows) {
  PolicyNet net = random_net(13);
  Batch b = random_batch(net, 14);
  b.returns[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(forward_backward(net, b, PpoConfig{}), NonFiniteLoss);
}

TEST(Gae, MatchesDirectSum) {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 16;
    std::vector<double> r(T), v(T);
    std::vector<std::uint8_t> d(T);
    for (int t = 0; t < T; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      d[t] = rng.bernoulli(0.2) ? 1 : 0;
    }
    const double last = rng.normal(), gamma = 0.99, lambda = 0.95;
    const GaeResult g = compute_gae(r, v, d, last, gamma, lambda);
    for (int t = 0; t < T; ++t) {
      double adv = 0.0, weight = 1.0;
      for (int k = t; k < T; ++k) {
        const double next_v = k + 1 < T ? v[k + 1] : last;
        adv += weight * (r[k] + gamma * next_v * (1 - d[k]) - v[k]);
        if (d[k]) break;
        weight *= gamma * lambda;
      }
      EXPECT_NEAR(g.advantages[t], adv, 1e-10);
      EXPECT_NEAR(g.returns[t], adv + v[t], 1e-10);
    }
  }
}

TEST(Gae, LambdaZeroIsOneStepTd) {
  const std::vector<double> r{1, 0, 2}, v{0.5, -0.2, 0.3};
  const std::vector<std::uint8_t> d{0, 0, 0};
  const GaeResult g = compute_gae(r, v, d, 0.7, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(g.advantages[0], 1 + 0.9 * -0.2 - 0.5);
  EXPECT_DOUBLE_EQ(g.advantages[1], 0 + 0.9 * 0.3 + 0.2);
  EXPECT_DOUBLE_EQ(g.advantages[2], 2 + 0.9 * 0.7 - 0.3);
}

TEST(Gae, LambdaOneGammaOneIsMonteCarlo) {
  const std::vector<double> r{1, 2, 3, 4}, v(4, 0.0);
  const std::vector<std::uint8_t> d{0, 1, 0, 0};
  const GaeResult g = compute_gae(r, v, d, 0.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.advantages[0], 3);
  EXPECT_DOUBLE_EQ(g.advantages[1], 2);
  EXPECT_DOUBLE_EQ(g.advantages[2], 7);
  EXPECT_DOUBLE_EQ(g.advantages[3], 4);
}

TEST(Optim, ClipGradNorm) {
  std::vector<double> g{3, 4};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(std::hypot(g[0], g[1]), 1.0, 1e-12);
  EXPECT_NEAR(g[0] / g[1], 0.75, 1e-12);
  std::vector<double> small{0.1, 0.1};
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small, (std::vector<double>{0.1, 0.1}));
}

TEST(Optim, NormalizeAdvantages) {
  std::vector<double> a{1, 2, 3, 4, 10};
  normalize_advantages(a);
  double m = 0, s = 0;
  for (double x : a) m += x / a.size();
  for (double x : a) s += (x - m) * (x - m) / a.size();
  EXPECT_NEAR(m, 0.0, 1e-12);
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(Optim, AdamFirstStepIsLearningRate) {
  Adam opt(3);
  std::vector<double> p{0, 0, 0};
  opt.step(p, {0.5, -2.0, 0.0}, 1e-3);
  EXPECT_NEAR(p[0], -1e-3, 1e-7);
  EXPECT_NEAR(p[1], 1e-3, 1e-7);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Train, ZeroStepsReturnsInitialization) {
  PpoConfig cfg;
  cfg.total_steps = 0;
  const TrainResult r = train_policy(bandit(), cfg, 5);
  PolicyNet init(2, cfg.hidden);
  Rng rng(derive_seed(5, "policy-init"));
  init.init(rng);
  EXPECT_EQ(r.net, init);
  EXPECT_TRUE(r.curve.empty());
}

TEST(Train, DeterministicCurves) {
  PpoConfig cfg;
  cfg.total_steps = 1280;
  const TrainResult a = train_policy(bandit(), cfg, 3), b = train_policy(bandit(), cfg, 3);
  EXPECT_EQ(a.net, b.net);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].mean_return, b.curve[i].mean_return);
    EXPECT_EQ(a.curve[i].entropy, b.curve[i].entropy);
    EXPECT_EQ(a.curve[i].loss, b.curve[i].loss);
  }
  EXPECT_FALSE(train_policy(bandit(), cfg, 4).net == a.net);
}

TEST(Train, EntropyBonusKeepsEarlyEntropyHigher) {
  PpoConfig with, without;
  with.total_steps = without.total_steps = 10 * 128;
  without.entropy_coef = 0.0;
  // A sharper learning rate makes the entropy gap visible in ten rollouts.
  with.learning_rate = without.learning_rate = 3e-3;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = train_policy(bandit(), with, seed).curve, b = train_policy(bandit(), without, seed).curve;
    double ha = 0, hb = 0;
    for (int i = 0; i < 10; ++i) {
      ha += a[i].entropy;
      hb += b[i].entropy;
    }
    EXPECT_GT(ha, hb) << seed;
  }
}

TEST(Train, LearnsContextualBandit) {
  PpoConfig cfg;
  cfg.total_steps = 20000;
  const TrainResult r = train_policy(bandit(), cfg, 1);
  const EvalResult e = evaluate_policy(r.net, bandit(), 200, 9);
  EXPECT_EQ(e.successes, 200);
  EXPECT_GT(r.curve.back().success_rate, r.curve.front().success_rate);
}

TEST(Config, JsonRoundTripAndValidation) {
  PpoConfig c;
  c.entropy_coef = 0.05;
  c.scale_rewards = false;
  EXPECT_EQ(PpoConfig::from_json(c.to_json()).to_json(), c.to_json());
  PpoConfig bad;
  bad.minibatches = 0;
  EXPECT_THROW(bad.validate(), FormatError);
  const PpoConfig d = PpoConfig::desk();
  EXPECT_EQ(d.learning_rate, 3e-4);
  EXPECT_EQ(d.gamma, 0.99);
  EXPECT_EQ(d.gae_lambda, 0.95);
  EXPECT_EQ(d.clip, 0.2);
  EXPECT_EQ(d.rollout_length, 128);
  EXPECT_EQ(d.hidden, 64);
  EXPECT_EQ(d.total_steps, 50000);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "soundtrig_ckpt_test";
  std::filesystem::create_directories(dir);
  const PolicyNet net = random_net(21);
  save_checkpoint(dir / "n.bin", net, {{"seed", 21}});
  nlohmann::json header;
  EXPECT_EQ(load_checkpoint(dir / "n.bin", &header), net);
  EXPECT_EQ(header.at("seed"), 21);
  {
    std::fstream f(dir / "n.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint(dir / "n.bin"), FormatError);
  std::filesystem::resize_file(dir / "n.bin", 10);
  EXPECT_THROW(load_checkpoint(dir / "n.bin"), FormatError);
  std::filesystem::remove_all(dir);
}
