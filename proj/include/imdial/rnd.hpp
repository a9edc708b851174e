#pragma once

// Random Network Distillation bonus over dialogue exchanges.
//
// DAs mode feeds [user-act indicators | system-act indicators]; Utt mode feeds
// the frozen utterance embedding of the realized exchange. The raw error
// ||f'(x) - f(x)||^2 is divided by a pooled running std over the last
// `moving_average_period` update batches and scaled by eta.

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imdial/nlg.hpp"
#include "imdial/nn.hpp"
#include "imdial/vectorize.hpp"

namespace imdial::rnd {

using nn::Matrix;
using nn::Vector;

enum class Mode { DAs, Utt };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view s);

struct RndConfig {
  Mode mode = Mode::DAs;
  double eta0 = 5.0;
  double alpha = 0.001;
  int warmup_episodes = 100;
  int moving_average_period = 2;
  int update_rounds = 5;
  double lr = 1e-3;
  double grad_clip = 10.0;
  std::int64_t annealing_steps = 20000;
  int hidden = 524;
  double weight_decay = 0.0;
  bool normalize = true;
  double std_floor = 1e-8;

  static RndConfig defaults(Mode mode);
  void validate() const;
  nlohmann::json to_json() const;
  static RndConfig from_json(const nlohmann::json& j, RndConfig base);
};

/// Concatenated user-act and system-act indicators.
Vector das_input(const IndexMap& index, const ActSet& user_acts, const ActSet& system_acts);

/// Utterance embedding of the realized exchange; empty sides realize to "".
Vector utt_input(const UtteranceEncoder& encoder, const TemplateSet& templates,
                 const ActSet& user_acts, const ActSet& system_acts);

class RndModel {
 public:
  RndModel() = default;
  RndModel(RndConfig config, int input_dim, int output_dim, std::uint64_t seed);

  const RndConfig& config() const { return config_; }
  int input_dim() const { return target_.input_dim(); }

  /// ||f'(x) - f(x)||^2 for each column.
  std::vector<double> raw_errors(const Matrix& inputs) const;
  double raw_error(const Vector& input) const;

  /// Pooled std of the raw errors in the window (1 before any batch), floored.
  double running_std() const;

  /// eta * e / std (or eta * e without normalization). Zero during warm-up.
  double intrinsic_reward(const Vector& input) const;
  double intrinsic_reward_from_error(double raw_error) const;
  /// e / std when normalizing, e otherwise.
  double normalized_error(double raw_error) const;

  /// Pushes one batch of raw errors into the moving window.
  void observe_errors(std::span<const double> errors);

  /// update_rounds full-batch steps on the predictor. Returns the mean loss of
  /// the final round, measured before its step. Throws ArgumentError for an
  /// empty batch and NumericError on a non-finite loss.
  double update(const Matrix& inputs);

  /// One environment step of the schedule: eta *= (1 - alpha) while inside the
  /// annealing span, unchanged afterwards. Returns the new eta.
  double anneal_eta();

  void note_episodes(std::int64_t n) { episodes_seen_ += n; }
  bool warmed_up() const { return episodes_seen_ >= config_.warmup_episodes; }
  std::int64_t episodes_seen() const { return episodes_seen_; }
  std::int64_t anneal_steps() const { return anneal_steps_; }
  double eta() const { return eta_; }
  void set_eta(double eta) { eta_ = eta; }

  const nn::Mlp& target() const { return target_; }
  const nn::Mlp& predictor() const { return predictor_; }
  nn::Mlp& mutable_predictor() { return predictor_; }
  std::uint64_t target_checksum() const { return target_.checksum(); }

  nlohmann::json to_json() const;
  static RndModel from_json(const nlohmann::json& j);

 private:
  struct BatchStats {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
  };

  RndConfig config_;
  std::uint64_t target_seed_ = 0;
  nn::Mlp target_;
  nn::Mlp predictor_;
  nn::AdamW opt_;
  double eta_ = 0.0;
  std::int64_t anneal_steps_ = 0;
  std::int64_t episodes_seen_ = 0;
  std::deque<BatchStats> window_;
};

}  // namespace imdial::rnd
