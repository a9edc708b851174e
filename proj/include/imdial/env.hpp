#pragma once

// Rule-based state tracking, the dialogue MDP and the outcome evaluator.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "imdial/domain.hpp"
#include "imdial/nlg.hpp"
#include "imdial/user_sim.hpp"

namespace imdial {

/// Immutable resources shared by every environment instance.
struct World {
  Ontology ontology;
  EntityDatabase database;
  TemplateSet templates;

  /// Default ontology, database seeded with `database_seed`, default templates.
  static std::shared_ptr<const World> make_default(std::uint64_t database_seed = 0);
  /// Validates template coverage.
  static std::shared_ptr<const World> make(Ontology ontology, EntityDatabase database,
                                           TemplateSet templates);
};

enum class BookingStatus { None, Confirmed, Failed };

struct DomainBelief {
  Constraints constraints;                       // slot -> value, as informed by the user
  std::set<std::string> outstanding;             // user requests not yet answered
  std::map<std::string, std::string> delivered;  // answered request -> value
  std::string offered;                           // last offered entity name
  bool booking_requested = false;
  BookingStatus booking = BookingStatus::None;
  int match_count = -1;  // database matches for `constraints`; -1 when unknown

  bool operator==(const DomainBelief&) const = default;
};

struct BeliefState {
  std::map<std::string, DomainBelief> domains;  // only domains mentioned so far
  ActSet last_system;
  ActSet last_user;
  int turn_index = 0;
  bool terminal = false;

  bool operator==(const BeliefState& o) const {
    return domains == o.domains && last_system == o.last_system && last_user == o.last_user &&
           turn_index == o.turn_index && terminal == o.terminal;
  }
};

/// Applies one side's acts to the belief state. Throws ActError on a malformed act.
BeliefState dst_update(const BeliefState& state, const ActSet& acts, Speaker speaker);

struct EnvConfig {
  int max_turns = 40;  // L
  double step_reward = -1.0;
  UserConfig user;
  GoalSamplerConfig goals;

  double success_reward() const { return static_cast<double>(max_turns); }
  void validate() const;
};

struct StepResult {
  BeliefState next_state;
  double extrinsic_reward = 0.0;
  bool done = false;
  bool success = false;  // meaningful only when done
  ActSet system_acts;    // after database binding
  ActSet user_acts;      // the user's reply
};

struct EpisodeOutcome {
  bool completed = false;
  bool successful = false;
  bool bookable = false;
  bool booked = false;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  UserGoal goal;
  ActSet opening;  // the user's first turn
  std::vector<std::pair<ActSet, ActSet>> turns;  // (system, user) per step
  EpisodeOutcome outcome;
  int turn_count = 0;
  double extrinsic_return = 0.0;

  nlohmann::json to_json() const;
};

struct Metrics {
  double complete_rate = 0.0;
  double success_rate = 0.0;
  std::optional<double> book_rate;  // absent when no dialogue was bookable
  std::int64_t n_dialogues = 0;
  std::int64_t n_bookable = 0;
  double avg_turns = 0.0;
  double avg_return = 0.0;
};

/// Complete, success and book rates over a set of episode logs.
/// Throws ArgumentError for an empty set.
Metrics compute_metrics(const std::vector<EpisodeLog>& logs);

/// Judges a finished (or truncated) dialogue from the user's point of view.
EpisodeOutcome evaluate_outcome(const Ontology& ontology, const EntityDatabase& db,
                                const UserState& user);

/// One dialogue at a time: reset() then step() until done.
class Environment {
 public:
  Environment(std::shared_ptr<const World> world, EnvConfig config = {});

  const BeliefState& reset(std::uint64_t seed);
  const BeliefState& reset_with_goal(const UserGoal& goal, std::uint64_t seed = 0);

  /// Takes catalog or bound system acts. Throws StateError after termination.
  StepResult step(const ActSet& system_acts);

  /// Resolves database-dependent acts against the current belief state:
  /// Inform(d, s) takes its value from the selected entity, Offer(d) names it,
  /// Book(d) becomes BookConfirm or BookFail. No matching entity yields NoOffer(d).
  ActSet bind(const ActSet& acts) const;

  const BeliefState& state() const { return belief_; }
  const UserState& user() const { return user_; }
  const EpisodeLog& log() const { return log_; }
  const World& world() const { return *world_; }
  const std::shared_ptr<const World>& world_ptr() const { return world_; }
  const EnvConfig& config() const { return config_; }

 private:
  void refresh_match_counts();
  const Entity* selected_entity(const std::string& domain, std::vector<Entity>& scratch) const;

  std::shared_ptr<const World> world_;
  EnvConfig config_;
  BeliefState belief_;
  UserState user_;
  EpisodeLog log_;
  bool started_ = false;
};

}  // namespace imdial
