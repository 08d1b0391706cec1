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


#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "soundtrig/rng.hpp"

namespace soundtrig {

inline constexpr int kNavActionCount = 4;

/// Shared tanh trunk with a logits head and a value head. All weights live in
/// one flat vector: W1, b1, W2, b2, Wpi, bpi, Wv, bv (row-major, out x in).
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int input_dim, int hidden, int actions = kNavActionCount);

  void init(Rng& rng);

  int input_dim() const { return in_; }
  int hidden() const { return hid_; }
  int actions() const { return act_; }
  std::size_t param_count() const { return params.size(); }

  struct Output {
    std::vector<double> logits;
    double value = 0.0;
  };
  Output forward(std::span<const double> x) const;

  std::vector<double> params;

  // Offsets into params.
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return w1() + static_cast<std::size_t>(hid_) * in_; }
  std::size_t w2() const { return b1() + hid_; }
  std::size_t b2() const { return w2() + static_cast<std::size_t>(hid_) * hid_; }
  std::size_t wp() const { return b2() + hid_; }
  std::size_t bp() const { return wp() + static_cast<std::size_t>(act_) * hid_; }
  std::size_t wv() const { return bp() + act_; }
  std::size_t bv() const { return wv() + hid_; }

  bool operator==(const PolicyNet&) const = default;

 private:
  int in_ = 0;
  int hid_ = 0;
  int act_ = kNavActionCount;
};

std::vector<double> softmax(std::span<const double> logits);

struct PpoConfig {
  double learning_rate = 3e-4;
  bool lr_decay = true;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 2;
  int minibatches = 2;
  int rollout_length = 128;
  double value_coef = 0.5;
  double entropy_coef = 0.1;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  long total_steps = 50000;
  int hidden = 64;
  double adam_eps = 1e-5;
  bool scale_rewards = true;  // divide rewards by a running std of the discounted return

  static PpoConfig desk() { return {}; }
  static PpoConfig paper();
  void validate() const;
  nlohmann::json to_json() const;
  static PpoConfig from_json(const nlohmann::json& j);
};

struct Batch {
  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // already normalized
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
};

struct LossResult {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;  // before clipping
  std::vector<double> grad;
};

/// Clipped surrogate + value_coef * MSE - entropy_coef * entropy, averaged over
/// the batch, with its exact gradient. Throws NonFiniteLoss.
LossResult forward_backward(const PolicyNet& net, const Batch& batch, const PpoConfig& config);

/// Scales grad in place to L2 norm <= max_norm; returns the original norm.
double clip_grad_norm(std::vector<double>& grad, double max_norm);

/// Mean 0, std 1 (population std, eps 1e-8).
void normalize_advantages(std::vector<double>& adv);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// dones[t] marks that the episode ended after step t, so values beyond it
/// are not bootstrapped.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double last_value, double gamma, double lambda);

class Adam {
 public:
  Adam(std::size_t n, double eps = 1e-5, double beta1 = 0.9, double beta2 = 0.999);
  void step(std::vector<double>& params, const std::vector<double>& grad, double lr);

 private:
  std::vector<double> m_, v_;
  double b1_, b2_, eps_;
  long t_ = 0;
};

struct EnvStep {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual std::vector<double> reset() = 0;
  virtual EnvStep step(int action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>(std::uint64_t seed)>;

struct CurvePoint {
  long steps = 0;
  int episodes = 0;       // completed during this rollout
  double mean_return = 0.0;
  double success_rate = 0.0;
  double entropy = 0.0;   // mean policy entropy over the rollout
  double loss = 0.0;      // last minibatch loss
};

struct TrainResult {
  PolicyNet net;
  std::vector<CurvePoint> curve;
};

TrainResult train_policy(const EnvFactory& factory, const PpoConfig& config, std::uint64_t seed);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);

struct EvalResult {
  int episodes = 0;
  int successes = 0;
  double mean_steps = 0.0;
  double success_rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
};

/// Greedy rollouts on fresh environments seeded from `seed`.
enum class ActionMode { Greedy, Sampled };

/// Sampled mode draws actions from the policy with an rng derived from seed.
EvalResult evaluate_policy(const PolicyNet& net, const EnvFactory& factory, int episodes, std::uint64_t seed,
                           ActionMode mode = ActionMode::Greedy);

int sampled_action(const PolicyNet& net, std::span<const double> obs, Rng& rng);

int greedy_action(const PolicyNet& net, std::span<const double> obs);

/// Checkpoint: "STPN", u32 version, u32 header length, JSON header (config and
/// shapes), then float64 little-endian parameters.
void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net, const nlohmann::json& header);
PolicyNet load_checkpoint(const std::filesystem::path& path, nlohmann::json* header = nullptr);

}  // namespace soundtrig
