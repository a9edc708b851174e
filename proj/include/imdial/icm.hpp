#pragma once

// Intrinsic curiosity: encoder phi, forward model F(phi(s), a) -> phi(s'),
// inverse model I(phi(s), phi(s')) -> action-bit logits.
// r_int = eta * ||F(phi(s), a) - phi(s')||^2.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imdial/env.hpp"
#include "imdial/nn.hpp"
#include "imdial/vectorize.hpp"

namespace imdial::icm {

using nn::Matrix;
using nn::Vector;

enum class Variant { DAs, Utt };
enum class TrainMode { Pretrain, Joint };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view s);

struct IcConfig {
  int pretrain_steps = 1000;
  double lr_pretrain = 1e-3;
  double lr_joint = 1e-5;
  int update_rounds = 1;
  double grad_clip = 10.0;
  double eta = 0.01;
  double beta_das = 0.2;
  double beta_utt = 0.2;
  double beta_joint = 0.8;
  double lambda_pol = 0.5;
  int inverse_hidden = 524;
  int forward_hidden = 524;
  int feature_dim = 256;
  int encoder_hidden = 256;  // DAs encoder hidden width
  int max_length = 200;      // Utt featurizer truncation
  int pretrain_epochs = 1;
  double weight_decay = 0.0;

  void validate() const;
  nlohmann::json to_json() const;
  static IcConfig from_json(const nlohmann::json& j);
  static IcConfig from_json(const nlohmann::json& j, IcConfig base);
};

/// One transition as seen by the curiosity module. `obs` is the encoder input
/// (a state vector for DAs, an utterance embedding for Utt); `action` is the
/// executed action indicator vector.
struct IcSample {
  Vector obs;
  Vector action;
  Vector next_obs;
};

struct IcStats {
  double forward_loss = 0.0;
  double inverse_loss = 0.0;
  double inverse_accuracy = 0.0;
  double combined_loss = 0.0;
};

class IcModel {
 public:
  IcModel() = default;
  IcModel(Variant variant, IcConfig config, int obs_dim, int action_dim, std::uint64_t seed);

  Variant variant() const { return variant_; }
  const IcConfig& config() const { return config_; }
  int obs_dim() const { return encoder_.input_dim(); }
  int action_dim() const { return action_dim_; }

  Vector features(const Vector& obs) const;

  /// ||F(phi(s), a) - phi(s')||^2.
  double forward_error(const IcSample& sample) const;
  /// eta * forward_error; always >= 0.
  double intrinsic_reward(const IcSample& sample) const;

  /// Losses on a batch without changing parameters. Throws ArgumentError when empty.
  IcStats evaluate(std::span<const IcSample> batch) const;
  IcStats evaluate(std::span<const IcSample> batch, double beta) const;

  /// Mode-dependent beta and learning rate.
  double beta_for(TrainMode mode) const;

  /// update_rounds steps of (1-beta)*inverse + beta*forward. Gradients are
  /// multiplied by `grad_scale` before clipping. Returns the statistics
  /// measured before the final step. Throws NumericError on a non-finite loss.
  IcStats update(std::span<const IcSample> batch, TrainMode mode, double grad_scale = 1.0);
  IcStats update_with_beta(std::span<const IcSample> batch, double beta, double lr,
                           double grad_scale = 1.0);

  std::uint64_t checksum() const;

  const nn::Mlp& encoder() const { return encoder_; }
  const nn::Mlp& forward_model() const { return forward_; }
  const nn::Mlp& inverse_model() const { return inverse_; }

  nlohmann::json to_json() const;
  static IcModel from_json(const nlohmann::json& j);

 private:
  Variant variant_ = Variant::DAs;
  IcConfig config_;
  int action_dim_ = 0;
  nn::Mlp encoder_;
  nn::Mlp forward_;
  nn::Mlp inverse_;
  nn::AdamW encoder_opt_;
  nn::AdamW forward_opt_;
  nn::AdamW inverse_opt_;
};

/// lambda * policy_loss + (1 - lambda) * ic_loss. Throws ArgumentError on a
/// non-finite input.
double ic_joint_loss(double ic_loss, double policy_loss, double lambda_pol);

/// Behaviour policy used for pre-training: returns catalog acts for a state.
using BehaviorPolicy = std::function<ActSet(const BeliefState&, Rng&)>;

/// Picks k ~ U{1..max_acts} distinct catalog acts uniformly.
BehaviorPolicy uniform_catalog_policy(const IndexMap& index);

/// Maps a belief state to the encoder input.
using ObsFn = std::function<Vector(const BeliefState&)>;

/// Collects transitions from `env` with `behavior`, resetting with seeds
/// derived from `seed` whenever a dialogue ends.
std::vector<IcSample> collect_transitions(Environment& env, const IndexMap& index,
                                          const BehaviorPolicy& behavior, const ObsFn& obs,
                                          int steps, std::uint64_t seed);

/// Collects config.pretrain_steps transitions, then runs pretrain_epochs
/// shuffled passes of `minibatch`-sized updates at the pre-train learning
/// rate. Returns the collected transitions.
std::vector<IcSample> ic_pretrain(IcModel& model, Environment& env, const IndexMap& index,
                                  const BehaviorPolicy& behavior, const ObsFn& obs,
                                  std::uint64_t seed, int minibatch = 32);

}  // namespace imdial::icm
