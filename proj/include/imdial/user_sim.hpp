#pragma once

// Agenda-based user simulator. Deterministic unless the slip option is on.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imdial/domain.hpp"
#include "imdial/random.hpp"

namespace imdial {

struct UserConfig {
  int max_acts_per_turn = 3;
  int patience = 6;
  /// Per-turn probability of forgetting one satisfied request and asking again.
  double slip_prob = 0.0;
};

struct Agenda {
  std::vector<DialogueAct> stack;  // back() is the top
  std::size_t active_section = 0;  // index into UserGoal::sections
  int patience = 0;
};

/// What the user has learned so far about one goal section.
struct SectionProgress {
  std::set<std::string> informed;          // constraint slots already told
  std::set<std::string> pending_requests;  // asked and not yet answered
  std::map<std::string, std::string> received;  // satisfied request -> value
  std::set<std::string> fallback_used;
  std::string offered_entity;
  bool offered = false;
  bool booking_pending = false;
  bool booking_done = false;
  bool booking_given_up = false;
  std::string booked_entity;
  bool given_up = false;

  bool operator==(const SectionProgress&) const = default;
};

struct UserState {
  UserGoal goal;  // constraints reflect any relaxation applied so far
  Agenda agenda;
  std::vector<SectionProgress> progress;  // parallel to goal.sections
  bool finished = false;
  bool completed = false;  // finished by saying goodbye with everything handled
  UserConfig config;
  std::optional<Rng> slip_rng;

  std::set<std::string> satisfied_requests(std::size_t section) const;
  bool section_complete(std::size_t section) const;
};

struct UserTurn {
  UserState state;
  ActSet acts;
  bool finished = false;
};

/// Builds the agenda (per section: informs, requests, book; bye last) and
/// emits the opening turn.
UserTurn user_reset(const UserGoal& goal, const UserConfig& config = {}, std::uint64_t seed = 0);

/// Reacts to one system turn. Throws StateError when the user already finished.
UserTurn user_respond(const UserState& state, const ActSet& system_acts);

}  // namespace imdial
