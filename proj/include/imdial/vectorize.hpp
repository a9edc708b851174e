#pragma once

// Fixed-length encodings of belief states and system actions.
//
// State layout, per domain in ontology order:
//   constraint one-hots   (one index per informable slot value)
//   outstanding, delivered flags per requestable slot
//   offered flag
//   booking requested / confirmed / failed  (bookable domains only)
//   database match bins: 0, 1, 2-5, 6+
// followed by last-user-act indicators (user catalog), last-system-act
// indicators (system catalog) and the turn counter scaled by 1/L.
//
// The system action catalog is delexicalized: Greet, Bye, then per domain
// Inform(d, s) for every slot, Request(d, s) for informable slots, Offer(d),
// NoOffer(d) and Book(d) when bookable. Values are bound by the environment.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "imdial/domain.hpp"
#include "imdial/env.hpp"

namespace imdial {

struct LayoutEntry {
  std::string kind;
  std::string domain;
  std::string slot;
  std::string value;
};

class IndexMap {
 public:
  explicit IndexMap(const Ontology& ontology, int max_turns = 40, int max_acts_per_turn = 3);

  int state_dim() const { return static_cast<int>(state_layout_.size()); }
  int action_dim() const { return static_cast<int>(system_catalog_.size()); }
  int user_act_dim() const { return static_cast<int>(user_catalog_.size()); }
  int max_acts_per_turn() const { return max_acts_; }

  const std::vector<DialogueAct>& system_catalog() const { return system_catalog_; }
  const std::vector<DialogueAct>& user_catalog() const { return user_catalog_; }
  const std::vector<LayoutEntry>& state_layout() const { return state_layout_; }

  /// Catalog key of a (possibly bound) system act; BookConfirm and BookFail
  /// map back to Book(d).
  static DialogueAct delexicalize_system(const DialogueAct& act);
  static DialogueAct delexicalize_user(const DialogueAct& act);

  std::optional<int> system_index(const DialogueAct& act) const;
  std::optional<int> user_index(const DialogueAct& act) const;

  /// Throws EncodingError for domains, slots, values or acts outside the layout.
  Eigen::VectorXd encode_state(const BeliefState& state) const;

  /// Throws CatalogError for an act outside the system catalog.
  Eigen::VectorXd encode_action(const ActSet& acts) const;
  Eigen::VectorXd encode_user_acts(const ActSet& acts) const;

  /// Bits above 0.5 become acts; only the max_acts_per_turn highest indices are kept.
  ActSet decode_action(const Eigen::Ref<const Eigen::VectorXd>& bits) const;

  nlohmann::json layout_json() const;

 private:
  struct DomainOffsets {
    std::map<std::string, std::map<std::string, int>> constraint;  // slot -> value -> index
    std::map<std::string, int> outstanding;
    std::map<std::string, int> delivered;
    int offered = -1;
    int booking_requested = -1;
    int booking_confirmed = -1;
    int booking_failed = -1;
    int match_bins = -1;
  };

  int push(LayoutEntry e);

  int max_turns_;
  int max_acts_;
  std::vector<LayoutEntry> state_layout_;
  std::map<std::string, DomainOffsets> offsets_;
  std::vector<DialogueAct> system_catalog_;
  std::vector<DialogueAct> user_catalog_;
  std::map<DialogueAct, int> system_lookup_;
  std::map<DialogueAct, int> user_lookup_;
  int last_user_offset_ = 0;
  int last_system_offset_ = 0;
  int turn_index_ = 0;
};

}  // namespace imdial
