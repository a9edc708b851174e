#pragma once

// PPO actor-critic over a multi-binary action space: independent Bernoulli
// bits, GAE, clipped surrogate, separate AdamW optimizers for actor and critic.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "imdial/nn.hpp"
#include "imdial/random.hpp"

namespace imdial::ppo {

using nn::Matrix;
using nn::Vector;

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.1;
  double actor_lr = 5e-6;
  double critic_lr = 1e-5;
  int actor_hidden = 100;
  int critic_hidden = 50;
  int epochs = 5;
  int batch_dialogues = 32;
  int minibatch = 32;
  double entropy_coef = 0.0;  // no entropy bonus; kept so configs can state it
  double actor_grad_clip = 10.0;
  double weight_decay = 0.01;
  double prob_floor = 1e-6;
  /// Initial bias of the actor's output layer (logit of every action bit).
  double actor_output_bias = 0.0;

  void validate() const;
  nlohmann::json to_json() const;
  static PpoConfig from_json(const nlohmann::json& j);
  static PpoConfig from_json(const nlohmann::json& j, PpoConfig base);
};

enum class ActMode { Sample, Greedy };

/// sigmoid(logits) clamped to [floor, 1 - floor].
Vector bernoulli_probs(const Vector& logits, double floor = 1e-6);

/// sum_i log p(bit_i) under the clamped probabilities.
double bernoulli_log_prob(const Vector& logits, const Vector& bits, double floor = 1e-6);

struct ActionSample {
  Vector bits;
  double log_prob = 0.0;
};

/// Throws ShapeError when the state length differs from the actor input.
ActionSample policy_act(const nn::Mlp& actor, const Vector& state, ActMode mode, Rng& rng,
                        double floor = 1e-6);

struct Transition {
  Vector state;
  Vector action;  // raw sampled bits
  double log_prob = 0.0;
  double extrinsic_reward = 0.0;
  double intrinsic_reward = 0.0;
  bool done = false;
  double value = 0.0;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;
};

/// A_t = delta_t + gamma*lambda*A_{t+1}, delta_t = r_t + gamma*V_{t+1} - V_t,
/// with V_T = bootstrap (0 for a terminal trajectory). Targets are A_t + V_t.
/// Throws ArgumentError for an empty or ragged trajectory.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda, bool terminal = true,
                      double bootstrap_value = 0.0);

/// Mean 0, std 1 (population std, floored at 1e-8).
void normalize_advantages(std::vector<double>& advantages);

/// -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A)), rho = exp(new - old).
double clipped_surrogate_loss(std::span<const double> new_log_probs,
                              std::span<const double> old_log_probs,
                              std::span<const double> advantages, double eps);

/// d loss / d new_log_prob for each sample; zero where the clipped branch is selected.
std::vector<double> clipped_surrogate_grad(std::span<const double> new_log_probs,
                                           std::span<const double> old_log_probs,
                                           std::span<const double> advantages, double eps);

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double first_minibatch_max_ratio_error = 0.0;  // max |rho - 1| on the first minibatch
  double first_minibatch_clip_fraction = 0.0;
  std::int64_t transitions = 0;
  std::int64_t minibatches = 0;
};

class PpoAgent {
 public:
  PpoAgent() = default;
  PpoAgent(int state_dim, int action_dim, PpoConfig config, std::uint64_t seed);

  const PpoConfig& config() const { return config_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  nn::Mlp& mutable_actor() { return actor_; }
  nn::Mlp& mutable_critic() { return critic_; }

  double value(const Vector& state) const;

  /// Five epochs (by default) of shuffled minibatch updates over every
  /// transition of the given episodes. Rewards are extrinsic + intrinsic.
  /// `actor_loss_scale` multiplies the actor gradient; 0 freezes the actor.
  /// Throws NumericError on a non-finite loss.
  UpdateStats update(const std::vector<std::vector<Transition>>& episodes, Rng& rng,
                     double actor_loss_scale = 1.0);

  nlohmann::json to_json() const;
  static PpoAgent from_json(const nlohmann::json& j);

 private:
  PpoConfig config_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  nn::AdamW actor_opt_;
  nn::AdamW critic_opt_;
};

}  // namespace imdial::ppo
