#pragma once

// Synthetic multi-domain ontology, entity database, user goals and the
// dialogue-act algebra shared by every other module.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace imdial {

// ---------------------------------------------------------------------------
// Ontology
// ---------------------------------------------------------------------------

struct InformableSlot {
  std::string name;
  std::vector<std::string> values;
};

struct DomainSpec {
  std::string name;
  std::vector<InformableSlot> informable;
  std::vector<std::string> requestable;
  bool bookable = false;

  const InformableSlot* find_informable(std::string_view slot) const;
  bool is_requestable(std::string_view slot) const;
  bool has_slot(std::string_view slot) const;
};

class Ontology {
 public:
  Ontology() = default;
  /// Validates on construction; throws ConfigError.
  explicit Ontology(std::vector<DomainSpec> domains);

  /// Five-domain default (attraction, hotel, restaurant, taxi, train).
  static Ontology default_ontology();

  const std::vector<DomainSpec>& domains() const { return domains_; }
  const DomainSpec& domain(std::string_view name) const;  // DomainError
  const DomainSpec* find(std::string_view name) const;
  std::size_t domain_index(std::string_view name) const;

  nlohmann::json to_json() const;
  static Ontology from_json(const nlohmann::json& j);

 private:
  std::vector<DomainSpec> domains_;
};

// ---------------------------------------------------------------------------
// Entity database
// ---------------------------------------------------------------------------

struct Entity {
  int id = 0;
  std::string name;
  std::map<std::string, std::string> slots;  // informable and requestable values

  bool matches(const std::map<std::string, std::string>& constraints) const;
};

class EntityDatabase {
 public:
  EntityDatabase() = default;
  EntityDatabase(const Ontology& ontology, std::map<std::string, std::vector<Entity>> entities);

  /// Seeded synthetic database, `per_domain` entities per domain.
  static EntityDatabase generate(const Ontology& ontology, std::uint64_t seed,
                                 int per_domain = 20);

  const std::vector<Entity>& entities(std::string_view domain) const;  // DomainError
  const Entity* find_by_name(std::string_view domain, std::string_view name) const;

  nlohmann::json to_json() const;
  static EntityDatabase from_json(const Ontology& ontology, const nlohmann::json& j);

 private:
  std::map<std::string, std::vector<Entity>, std::less<>> entities_;
};

using Constraints = std::map<std::string, std::string>;

/// Entities of `domain` matching every constraint, ordered by id.
/// Throws DomainError for an unknown domain, ConstraintError for a slot the
/// domain does not define.
std::vector<Entity> query_entities(const Ontology& ontology, const EntityDatabase& db,
                                   std::string_view domain, const Constraints& constraints);

struct BookingOutcome {
  bool confirmed = false;
  std::optional<Entity> entity;  // set iff confirmed
};

/// BookConfirm iff query_entities is non-empty; the first match is booked.
/// Throws DomainError for a domain that is not bookable.
BookingOutcome check_booking(const Ontology& ontology, const EntityDatabase& db,
                             std::string_view domain, const Constraints& constraints);

// ---------------------------------------------------------------------------
// User goals
// ---------------------------------------------------------------------------

struct GoalSection {
  std::string domain;
  Constraints constraints;
  std::map<std::string, std::string> fallback;  // constraint slot -> alternative value
  std::vector<std::string> requests;            // sorted, unique
  bool wants_booking = false;

  bool operator==(const GoalSection&) const = default;
};

struct UserGoal {
  std::vector<GoalSection> sections;  // in the order the user pursues them

  const GoalSection* find(std::string_view domain) const;
  bool bookable() const;
  bool operator==(const UserGoal&) const = default;

  nlohmann::json to_json() const;
};

struct GoalSamplerConfig {
  // P(1), P(2), P(3) domains.
  std::vector<double> domain_count_probs{0.35, 0.45, 0.20};
  int max_constraints = 3;
  int max_requests = 2;
  double booking_prob = 0.5;
};

/// Constraints are copied from a randomly drawn entity, so every sampled goal
/// is satisfiable. Pure function of the seed.
UserGoal sample_goal(const Ontology& ontology, const EntityDatabase& db, std::uint64_t seed,
                     const GoalSamplerConfig& config = {});

// ---------------------------------------------------------------------------
// Dialogue acts
// ---------------------------------------------------------------------------

enum class Intent { Inform, Request, Book, Offer, NoOffer, BookConfirm, BookFail, Bye, Greet };

inline constexpr int kIntentCount = 9;

std::string_view intent_name(Intent intent);
Intent parse_intent(std::string_view name);  // ActError

/// (intent, domain, slot, value). Empty strings denote an absent field.
struct DialogueAct {
  Intent intent = Intent::Greet;
  std::string domain;
  std::string slot;
  std::string value;

  static DialogueAct inform(std::string d, std::string s, std::string v = {}) {
    return {Intent::Inform, std::move(d), std::move(s), std::move(v)};
  }
  static DialogueAct request(std::string d, std::string s) {
    return {Intent::Request, std::move(d), std::move(s), {}};
  }
  static DialogueAct of(Intent i, std::string d = {}) { return {i, std::move(d), {}, {}}; }

  /// Canonical order: (domain, intent, slot, value).
  auto operator<=>(const DialogueAct& o) const {
    if (auto c = domain <=> o.domain; c != 0) return c;
    if (auto c = intent <=> o.intent; c != 0) return c;
    if (auto c = slot <=> o.slot; c != 0) return c;
    return value <=> o.value;
  }
  bool operator==(const DialogueAct&) const = default;

  std::string to_string() const;
};

/// Throws ActError when the act violates its intent's shape. `require_value`
/// distinguishes bound (executed) acts from delexicalized catalog acts.
void validate_act(const DialogueAct& act, bool require_value);

/// A turn's acts: a sorted set with a size cap.
class ActSet {
 public:
  static constexpr std::size_t kDefaultMax = 8;

  ActSet() = default;
  explicit ActSet(std::size_t max_size) : max_size_(max_size) {}
  ActSet(std::initializer_list<DialogueAct> acts);

  /// Returns false when the act was already present. Throws ActError when
  /// inserting would exceed the cap.
  bool insert(DialogueAct act);
  bool contains(const DialogueAct& act) const;

  const std::vector<DialogueAct>& acts() const { return acts_; }
  auto begin() const { return acts_.begin(); }
  auto end() const { return acts_.end(); }
  std::size_t size() const { return acts_.size(); }
  bool empty() const { return acts_.empty(); }
  std::size_t max_size() const { return max_size_; }

  bool operator==(const ActSet& o) const { return acts_ == o.acts_; }

  std::string to_string() const;
  nlohmann::json to_json() const;

 private:
  std::vector<DialogueAct> acts_;
  std::size_t max_size_ = kDefaultMax;
};

}  // namespace imdial
