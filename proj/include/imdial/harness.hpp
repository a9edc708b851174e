#pragma once

// Training orchestration, evaluation and run artifacts.
//
// Output directory layout:
//   metrics.csv              one row per crossed evaluation boundary
//   manifest.json            resolved config, version, seed, dimensions
//   checkpoints/step_N.json  full trainer state at each evaluation
//   episodes.jsonl           training dialogues (only with log_episodes)

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imdial/env.hpp"
#include "imdial/icm.hpp"
#include "imdial/nlg.hpp"
#include "imdial/policies.hpp"
#include "imdial/ppo.hpp"
#include "imdial/rnd.hpp"
#include "imdial/vectorize.hpp"

namespace imdial {

enum class Arm { Ppo, RndDas, RndUtt, IcDas, IcUtt };

std::string_view arm_name(Arm arm);
/// Accepts "ppo", "ppo+rnd-das", "ppo+rnd-utt", "ppo+ic-das", "ppo+ic-utt"
/// (case-insensitive, "PPO+RND(Utt)" style also accepted). Throws ConfigError.
Arm parse_arm(std::string_view name);
const std::array<Arm, 5>& all_arms();

struct RunConfig {
  Arm arm = Arm::Ppo;
  std::int64_t total_steps = 200000;
  std::uint64_t seed = 0;
  std::string ontology_path;  // empty: built-in ontology
  std::uint64_t database_seed = 0;
  std::int64_t eval_interval = 10000;
  int n_eval = 1000;
  std::string out_dir;  // empty: no files written
  bool log_episodes = false;
  int keep_checkpoints = 2;  // 0 keeps every checkpoint
  EnvConfig env;
  ppo::PpoConfig ppo;
  rnd::RndConfig rnd = rnd::RndConfig::defaults(rnd::Mode::DAs);
  icm::IcConfig ic;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; RND defaults follow the arm.
  static RunConfig from_json(const nlohmann::json& j);
};

nlohmann::json env_config_to_json(const EnvConfig& c);
EnvConfig env_config_from_json(const nlohmann::json& j, EnvConfig base = {});

/// Builds the world for a run config (ontology file or default, seeded database).
std::shared_ptr<const World> make_world(const RunConfig& config);

inline constexpr std::string_view kCsvHeader =
    "step,complete_rate,success_rate,book_rate,avg_turns,avg_return,actor_loss,critic_loss,"
    "mean_ratio,clip_fraction,mean_r_int,eta,predictor_loss,forward_loss,inverse_loss,"
    "inverse_accuracy";

/// Greedy-mode dialogues on seeded goals (episode i uses derive_seed(seed, i)).
/// With a goal pool, episode i uses pool[i % size]. The policy's network is
/// not modified. Throws ArgumentError when n_eval < 1.
Metrics analyze(DialoguePolicy& policy, const std::shared_ptr<const World>& world,
                const EnvConfig& env_config, int n_eval, std::uint64_t seed,
                std::vector<EpisodeLog>* logs = nullptr,
                const std::vector<UserGoal>* goal_pool = nullptr);

struct VarianceRow {
  int n_eval = 0;
  double mean_success = 0.0;
  double std_success = 0.0;   // sample std over repeats
  double binomial_std = 0.0;  // sqrt(p(1-p)/N) at the mean p
  std::vector<double> samples;
};

/// `repeats` analyze calls per n_eval with distinct seeds. Throws
/// ArgumentError when repeats < 2.
std::vector<VarianceRow> eval_variance_study(DialoguePolicy& policy,
                                             const std::shared_ptr<const World>& world,
                                             const EnvConfig& env_config,
                                             const std::vector<int>& n_evals, int repeats,
                                             std::uint64_t seed,
                                             const std::vector<UserGoal>* goal_pool = nullptr);

std::string variance_csv(const std::vector<VarianceRow>& rows);

struct BatchReport {
  ppo::UpdateStats ppo;
  double mean_r_int = 0.0;
  double eta = 0.0;
  std::optional<double> predictor_loss;
  std::optional<icm::IcStats> ic;
  std::int64_t steps = 0;
};

class Trainer {
 public:
  explicit Trainer(RunConfig config);

  /// Restores a trainer from a checkpoint file. When `out_dir` is given the
  /// resumed run writes there instead of the recorded directory.
  static Trainer resume(const std::filesystem::path& checkpoint,
                        std::optional<std::string> out_dir = std::nullopt);
  static Trainer from_checkpoint(const nlohmann::json& j,
                                 std::optional<std::string> out_dir = std::nullopt);

  /// Iterates until total_steps. On a module error, writes diagnostic.json
  /// (when an output directory is set) and rethrows.
  void run();

  /// One collect / intrinsic update / PPO update round plus any evaluations
  /// it crosses. Returns false when the step budget was already spent.
  bool iterate();

  bool finished() const { return step_count_ >= config_.total_steps; }

  /// Greedy evaluation of the current actor.
  Metrics evaluate(int n_eval, std::uint64_t seed) const;
  std::uint64_t eval_seed() const;

  nlohmann::json checkpoint_json() const;
  std::string csv_text() const;
  const std::vector<std::string>& csv_rows() const { return csv_rows_; }

  const RunConfig& config() const { return config_; }
  const IndexMap& index() const { return *index_; }
  const std::shared_ptr<const World>& world() const { return world_; }
  const ppo::PpoAgent& agent() const { return agent_; }
  const std::optional<rnd::RndModel>& rnd_model() const { return rnd_; }
  const std::optional<icm::IcModel>& ic_model() const { return ic_; }
  std::int64_t step_count() const { return step_count_; }
  std::int64_t episode_count() const { return episode_count_; }
  const BatchReport& last_batch() const { return last_batch_; }

  /// Called for every finished training dialogue.
  std::function<void(const EpisodeLog&)> on_episode;
  /// Called after each iteration with the intrinsic rewards assigned to the
  /// batch's transitions (empty for the plain PPO arm).
  std::function<void(const Trainer&, const std::vector<double>& r_int)> on_batch;

 private:
  struct Accum {
    double actor_loss = 0, critic_loss = 0, ratio = 0, clip = 0, r_int = 0, eta = 0;
    double predictor_loss = 0, forward_loss = 0, inverse_loss = 0, inverse_accuracy = 0;
    int batches = 0;
  };

  Trainer() = default;
  void init_modules();
  Eigen::VectorXd rnd_input(const ActSet& user, const ActSet& system) const;
  Eigen::VectorXd ic_obs(const BeliefState& state) const;
  std::string format_row(std::int64_t step, const Metrics& m) const;
  void write_outputs(bool with_checkpoint, std::int64_t boundary);
  void write_manifest() const;
  void write_diagnostic(const std::string& what) const;
  bool uses_rnd() const { return config_.arm == Arm::RndDas || config_.arm == Arm::RndUtt; }
  bool uses_ic() const { return config_.arm == Arm::IcDas || config_.arm == Arm::IcUtt; }
  bool uses_utt() const { return config_.arm == Arm::RndUtt || config_.arm == Arm::IcUtt; }

  RunConfig config_;
  std::shared_ptr<const World> world_;
  std::unique_ptr<IndexMap> index_;
  std::shared_ptr<const UtteranceEncoder> encoder_;
  std::unique_ptr<Environment> env_;
  ppo::PpoAgent agent_;
  std::optional<rnd::RndModel> rnd_;
  std::optional<icm::IcModel> ic_;
  bool ic_pretrained_ = false;
  Rng rng_{0};
  std::int64_t step_count_ = 0;
  std::int64_t episode_count_ = 0;
  std::int64_t next_eval_ = 0;
  Accum accum_;
  BatchReport last_batch_;
  std::vector<std::string> csv_rows_;
  std::vector<std::filesystem::path> written_checkpoints_;
};

}  // namespace imdial
