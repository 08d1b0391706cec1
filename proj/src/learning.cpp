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


#include "soundtrig/learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "soundtrig/errors.hpp"

namespace soundtrig {

using nlohmann::json;

PolicyNet::PolicyNet(int input_dim, int hidden, int actions) : in_(input_dim), hid_(hidden), act_(actions) {
  if (input_dim <= 0 || hidden <= 0 || actions <= 0) throw FormatError("policy shape must be positive");
  params.assign(bv() + 1, 0.0);
}

void PolicyNet::init(Rng& rng) {
  // Scaled normal weights, zero biases; small policy head so the initial
  // policy is near uniform.
  auto fill = [&](std::size_t off, int rows, int cols, double gain) {
    const double s = gain / std::sqrt(static_cast<double>(cols));
    for (std::size_t k = 0; k < static_cast<std::size_t>(rows) * cols; ++k) params[off + k] = s * rng.normal();
  };
  std::fill(params.begin(), params.end(), 0.0);
  fill(w1(), hid_, in_, std::sqrt(2.0));
  fill(w2(), hid_, hid_, std::sqrt(2.0));
  fill(wp(), act_, hid_, 0.01);
  fill(wv(), 1, hid_, 1.0);
}

namespace {

struct Activations {
  std::vector<double> h1, h2, logits;
  double value = 0.0;
};

void forward_into(const PolicyNet& n, std::span<const double> x, Activations& a) {
  const auto& p = n.params;
  const int in = n.input_dim(), hid = n.hidden(), act = n.actions();
  if (static_cast<int>(x.size()) != in) throw FormatError("observation size does not match policy input");
  a.h1.assign(hid, 0.0);
  a.h2.assign(hid, 0.0);
  a.logits.assign(act, 0.0);
  for (int r = 0; r < hid; ++r) {
    double s = p[n.b1() + r];
    const double* w = &p[n.w1() + static_cast<std::size_t>(r) * in];
    for (int c = 0; c < in; ++c) s += w[c] * x[c];
    a.h1[r] = std::tanh(s);
  }
  for (int r = 0; r < hid; ++r) {
    double s = p[n.b2() + r];
    const double* w = &p[n.w2() + static_cast<std::size_t>(r) * hid];
    for (int c = 0; c < hid; ++c) s += w[c] * a.h1[c];
    a.h2[r] = std::tanh(s);
  }
  for (int r = 0; r < act; ++r) {
    double s = p[n.bp() + r];
    const double* w = &p[n.wp() + static_cast<std::size_t>(r) * hid];
    for (int c = 0; c < hid; ++c) s += w[c] * a.h2[c];
    a.logits[r] = s;
  }
  double v = p[n.bv()];
  for (int c = 0; c < hid; ++c) v += p[n.wv() + c] * a.h2[c];
  a.value = v;
}

std::vector<double> log_softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] - lse;
  return out;
}

}  // namespace

PolicyNet::Output PolicyNet::forward(std::span<const double> x) const {
  Activations a;
  forward_into(*this, x, a);
  return {a.logits, a.value};
}

std::vector<double> softmax(std::span<const double> logits) {
  auto lp = log_softmax(logits);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

PpoConfig PpoConfig::paper() {
  PpoConfig c;
  c.total_steps = 500000;
  c.hidden = 512;
  return c;
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw FormatError("gamma must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw FormatError("gae_lambda must be in [0, 1]");
  if (!(clip > 0.0)) throw FormatError("clip must be positive");
  if (epochs < 1 || minibatches < 1 || rollout_length < minibatches) throw FormatError("bad PPO batch layout");
  if (total_steps < 0 || hidden < 1) throw FormatError("bad PPO size");
}

json PpoConfig::to_json() const {
  return json{{"learning_rate", learning_rate}, {"lr_decay", lr_decay},
              {"gamma", gamma},                 {"gae_lambda", gae_lambda},
              {"clip", clip},                   {"epochs", epochs},
              {"minibatches", minibatches},     {"rollout_length", rollout_length},
              {"value_coef", value_coef},       {"entropy_coef", entropy_coef},
              {"max_grad_norm", max_grad_norm}, {"total_steps", total_steps},
              {"hidden", hidden},               {"adam_eps", adam_eps},
              {"scale_rewards", scale_rewards}};
}

PpoConfig PpoConfig::from_json(const json& j) {
  PpoConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip = j.value("clip", c.clip);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatches = j.value("minibatches", c.minibatches);
  c.rollout_length = j.value("rollout_length", c.rollout_length);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.hidden = j.value("hidden", c.hidden);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.scale_rewards = j.value("scale_rewards", c.scale_rewards);
  c.validate();
  return c;
}

LossResult forward_backward(const PolicyNet& net, const Batch& batch, const PpoConfig& cfg) {
  const std::size_t n = batch.size();
  if (n == 0) throw FormatError("empty batch");
  const int in = net.input_dim(), hid = net.hidden(), act = net.actions();
  const auto& p = net.params;
  LossResult r;
  r.grad.assign(p.size(), 0.0);
  auto& g = r.grad;
  const double inv_n = 1.0 / static_cast<double>(n);

  Activations a;
  std::vector<double> dz(act), dh2(hid), da2(hid), dh1(hid), da1(hid);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = batch.obs[i];
    forward_into(net, x, a);
    const auto lp = log_softmax(a.logits);
    const int act_i = batch.actions[i];
    const double adv = batch.advantages[i];

    const double ratio = std::exp(lp[act_i] - batch.old_log_probs[i]);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    const bool use_unclipped = unclipped_term <= clipped_term;
    r.policy_loss -= std::min(unclipped_term, clipped_term) * inv_n;
    // d(-surrogate)/d(log pi(a)); zero when the clipped branch is active and binding.
    const double g_logp = (use_unclipped || clipped == ratio) ? -adv * ratio : 0.0;

    double entropy = 0.0;
    for (int k = 0; k < act; ++k) entropy -= std::exp(lp[k]) * lp[k];
    r.entropy += entropy * inv_n;

    const double verr = a.value - batch.returns[i];
    r.value_loss += verr * verr * inv_n;

    for (int k = 0; k < act; ++k) {
      const double pk = std::exp(lp[k]);
      const double dlogp = (k == act_i ? 1.0 : 0.0) - pk;
      const double dent = -pk * (lp[k] + entropy);
      dz[k] = inv_n * (g_logp * dlogp - cfg.entropy_coef * dent);
    }
    const double dv = inv_n * cfg.value_coef * 2.0 * verr;

    for (int k = 0; k < act; ++k) {
      g[net.bp() + k] += dz[k];
      double* gw = &g[net.wp() + static_cast<std::size_t>(k) * hid];
      for (int c = 0; c < hid; ++c) gw[c] += dz[k] * a.h2[c];
    }
    g[net.bv()] += dv;
    for (int c = 0; c < hid; ++c) g[net.wv() + c] += dv * a.h2[c];

    for (int c = 0; c < hid; ++c) {
      double s = p[net.wv() + c] * dv;
      for (int k = 0; k < act; ++k) s += p[net.wp() + static_cast<std::size_t>(k) * hid + c] * dz[k];
      dh2[c] = s;
      da2[c] = s * (1.0 - a.h2[c] * a.h2[c]);
    }
    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int rr = 0; rr < hid; ++rr) {
      g[net.b2() + rr] += da2[rr];
      double* gw = &g[net.w2() + static_cast<std::size_t>(rr) * hid];
      const double* w = &p[net.w2() + static_cast<std::size_t>(rr) * hid];
      for (int c = 0; c < hid; ++c) {
        gw[c] += da2[rr] * a.h1[c];
        dh1[c] += w[c] * da2[rr];
      }
    }
    for (int rr = 0; rr < hid; ++rr) {
      da1[rr] = dh1[rr] * (1.0 - a.h1[rr] * a.h1[rr]);
      g[net.b1() + rr] += da1[rr];
      double* gw = &g[net.w1() + static_cast<std::size_t>(rr) * in];
      for (int c = 0; c < in; ++c) gw[c] += da1[rr] * x[c];
    }
  }
  r.loss = r.policy_loss + cfg.value_coef * r.value_loss - cfg.entropy_coef * r.entropy;
  if (!std::isfinite(r.loss)) throw NonFiniteLoss("PPO loss is not finite");
  r.grad_norm = clip_grad_norm(g, cfg.max_grad_norm);
  if (!std::isfinite(r.grad_norm)) throw NonFiniteLoss("PPO gradient is not finite");
  return r;
}

double clip_grad_norm(std::vector<double>& grad, double max_norm) {
  double sq = 0.0;
  for (double v : grad) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& v : grad) v *= s;
  }
  return norm;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
  double var = 0.0;
  for (double v : adv) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / adv.size());
  for (double& v : adv) v = (v - mean) / (sd + 1e-8);
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double last_value, double gamma, double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T) throw FormatError("GAE inputs differ in length");
  GaeResult r;
  r.advantages.assign(T, 0.0);
  r.returns.assign(T, 0.0);
  double running = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double next_v = k + 1 < T ? values[k + 1] : last_value;
    const double delta = rewards[k] + gamma * next_v * live - values[k];
    running = delta + gamma * lambda * live * running;
    r.advantages[k] = running;
    r.returns[k] = running + values[k];
  }
  return r;
}

Adam::Adam(std::size_t n, double eps, double beta1, double beta2)
    : m_(n, 0.0), v_(n, 0.0), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = b1_ * m_[k] + (1.0 - b1_) * grad[k];
    v_[k] = b2_ * v_[k] + (1.0 - b2_) * grad[k] * grad[k];
    params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

namespace {

int sample_action(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

int greedy_action(const PolicyNet& net, std::span<const double> obs) {
  const auto out = net.forward(obs);
  return static_cast<int>(std::max_element(out.logits.begin(), out.logits.end()) - out.logits.begin());
}

TrainResult train_policy(const EnvFactory& factory, const PpoConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto env = factory(derive_seed(seed, "env"));
  TrainResult result;
  result.net = PolicyNet(env->obs_dim(), cfg.hidden);
  Rng init_rng(derive_seed(seed, "policy-init"));
  result.net.init(init_rng);
  PolicyNet& net = result.net;

  const long updates = cfg.total_steps / cfg.rollout_length;
  if (updates == 0) return result;

  Rng act_rng(derive_seed(seed, "actions"));
  Rng shuffle_rng(derive_seed(seed, "minibatch"));
  Adam opt(net.param_count(), cfg.adam_eps);
  const int T = cfg.rollout_length;

  std::vector<std::vector<double>> obs_buf(T);
  std::vector<int> act_buf(T);
  std::vector<double> logp_buf(T), val_buf(T), rew_buf(T);
  std::vector<std::uint8_t> done_buf(T);

  std::vector<double> obs = env->reset();
  double ep_return = 0.0;
  // Running variance of the discounted return, for reward scaling.
  double disc_return = 0.0, ret_mean = 0.0, ret_m2 = 0.0;
  long ret_count = 0;
  long steps = 0;
  for (long u = 0; u < updates; ++u) {
    CurvePoint cp;
    double returns_sum = 0.0;
    int successes = 0;
    double entropy_sum = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto out = net.forward(obs);
      const auto lp = log_softmax(out.logits);
      std::vector<double> probs(lp.size());
      double h = 0.0;
      for (std::size_t k = 0; k < lp.size(); ++k) {
        probs[k] = std::exp(lp[k]);
        h -= probs[k] * lp[k];
      }
      entropy_sum += h;
      const int a = sample_action(probs, act_rng);
      obs_buf[t] = obs;
      act_buf[t] = a;
      logp_buf[t] = lp[a];
      val_buf[t] = out.value;
      EnvStep s = env->step(a);
      rew_buf[t] = s.reward;
      if (cfg.scale_rewards) {
        disc_return = disc_return * cfg.gamma + s.reward;
        ++ret_count;
        const double delta = disc_return - ret_mean;
        ret_mean += delta / static_cast<double>(ret_count);
        ret_m2 += delta * (disc_return - ret_mean);
        if (ret_count > 1) rew_buf[t] = s.reward / std::sqrt(ret_m2 / static_cast<double>(ret_count) + 1e-8);
        if (s.done) disc_return = 0.0;
      }
      done_buf[t] = s.done ? 1 : 0;
      ep_return += s.reward;
      if (s.done) {
        ++cp.episodes;
        returns_sum += ep_return;
        successes += s.success ? 1 : 0;
        ep_return = 0.0;
        obs = env->reset();
      } else {
        obs = std::move(s.obs);
      }
    }
    steps += T;
    const double last_value = net.forward(obs).value;
    const GaeResult gae = compute_gae(rew_buf, val_buf, done_buf, last_value, cfg.gamma, cfg.gae_lambda);

    const double frac = cfg.lr_decay ? 1.0 - static_cast<double>(u) / static_cast<double>(updates) : 1.0;
    const double lr = cfg.learning_rate * frac;
    std::vector<int> idx(T);
    std::iota(idx.begin(), idx.end(), 0);
    const int mb_size = T / cfg.minibatches;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (int k = T - 1; k > 0; --k) std::swap(idx[k], idx[shuffle_rng.index(static_cast<std::size_t>(k) + 1)]);
      for (int mb = 0; mb < cfg.minibatches; ++mb) {
        Batch b;
        const int lo = mb * mb_size;
        const int hi = mb + 1 == cfg.minibatches ? T : lo + mb_size;
        for (int q = lo; q < hi; ++q) {
          const int i = idx[q];
          b.obs.push_back(obs_buf[i]);
          b.actions.push_back(act_buf[i]);
          b.old_log_probs.push_back(logp_buf[i]);
          b.advantages.push_back(gae.advantages[i]);
          b.returns.push_back(gae.returns[i]);
        }
        normalize_advantages(b.advantages);
        const LossResult lr_res = forward_backward(net, b, cfg);
        opt.step(net.params, lr_res.grad, lr);
        cp.loss = lr_res.loss;
      }
    }
    cp.steps = steps;
    cp.mean_return = cp.episodes ? returns_sum / cp.episodes : 0.0;
    cp.success_rate = cp.episodes ? static_cast<double>(successes) / cp.episodes : 0.0;
    cp.entropy = entropy_sum / T;
    result.curve.push_back(cp);
  }
  return result;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << "steps,episodes,mean_return,success_rate,entropy,loss\n";
  out.precision(10);
  for (const auto& c : curve) {
    out << c.steps << ',' << c.episodes << ',' << c.mean_return << ',' << c.success_rate << ',' << c.entropy
        << ',' << c.loss << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path.string());
}

int sampled_action(const PolicyNet& net, std::span<const double> obs, Rng& rng) {
  const auto lp = log_softmax(net.forward(obs).logits);
  std::vector<double> probs(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) probs[k] = std::exp(lp[k]);
  return sample_action(probs, rng);
}

EvalResult evaluate_policy(const PolicyNet& net, const EnvFactory& factory, int episodes, std::uint64_t seed,
                           ActionMode mode) {
  EvalResult r;
  auto env = factory(derive_seed(seed, "eval"));
  Rng rng(derive_seed(seed, "eval-actions"));
  long total_steps = 0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> obs = env->reset();
    for (;;) {
      const int a = mode == ActionMode::Greedy ? greedy_action(net, obs) : sampled_action(net, obs, rng);
      EnvStep s = env->step(a);
      ++total_steps;
      if (s.done) {
        r.successes += s.success ? 1 : 0;
        break;
      }
      obs = std::move(s.obs);
    }
    ++r.episodes;
  }
  r.mean_steps = episodes ? static_cast<double>(total_steps) / episodes : 0.0;
  return r;
}

namespace {

constexpr char kCheckpointMagic[4] = {'S', 'T', 'P', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.put(static_cast<char>((v >> s) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) out.put(static_cast<char>((v >> s) & 0xff));
}
std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int k = 0; k < bytes; ++k) {
    const int c = in.get();
    if (c == EOF) throw FormatError("truncated checkpoint");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * k);
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net, const json& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  json h = header;
  h["input_dim"] = net.input_dim();
  h["hidden"] = net.hidden();
  h["actions"] = net.actions();
  h["param_count"] = net.param_count();
  const std::string text = h.dump();
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : net.params) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoFailure("write failed: " + path.string());
}

PolicyNet load_checkpoint(const std::filesystem::path& path, json* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kCheckpointMagic)) {
    throw FormatError("not a policy checkpoint: " + path.string());
  }
  if (get_le(in, 4) != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
  const auto len = static_cast<std::size_t>(get_le(in, 4));
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("truncated checkpoint");
  json h;
  try {
    h = json::parse(text);
  } catch (const json::exception&) {
    throw FormatError("checkpoint header is not JSON");
  }
  PolicyNet net(h.at("input_dim").get<int>(), h.at("hidden").get<int>(), h.at("actions").get<int>());
  if (h.at("param_count").get<std::size_t>() != net.param_count()) throw FormatError("checkpoint size mismatch");
  for (double& v : net.params) v = std::bit_cast<double>(get_le(in, 8));
  if (header) *header = std::move(h);
  return net;
}

}  // namespace soundtrig
