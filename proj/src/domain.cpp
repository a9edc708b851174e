#include "imdial/domain.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>

#include "imdial/error.hpp"
#include "imdial/random.hpp"

namespace imdial {

using nlohmann::json;

// ---------------------------------------------------------------------------
// DomainSpec / Ontology
// ---------------------------------------------------------------------------

const InformableSlot* DomainSpec::find_informable(std::string_view slot) const {
  for (const auto& s : informable) {
    if (s.name == slot) return &s;
  }
  return nullptr;
}

bool DomainSpec::is_requestable(std::string_view slot) const {
  return std::find(requestable.begin(), requestable.end(), slot) != requestable.end();
}

bool DomainSpec::has_slot(std::string_view slot) const {
  return find_informable(slot) != nullptr || is_requestable(slot);
}

Ontology::Ontology(std::vector<DomainSpec> domains) : domains_(std::move(domains)) {
  if (domains_.empty()) throw ConfigError("ontology has no domains");
  std::set<std::string> names;
  for (const auto& d : domains_) {
    if (d.name.empty()) throw ConfigError("domain with empty name");
    if (!names.insert(d.name).second) throw ConfigError("duplicate domain: " + d.name);
    if (d.informable.empty()) throw ConfigError("domain " + d.name + " has no informable slots");
    std::set<std::string> slots;
    for (const auto& s : d.informable) {
      if (!slots.insert(s.name).second) {
        throw ConfigError("duplicate slot " + s.name + " in domain " + d.name);
      }
      if (s.values.empty()) {
        throw ConfigError("slot " + d.name + "." + s.name + " has an empty value set");
      }
      std::set<std::string> values(s.values.begin(), s.values.end());
      if (values.size() != s.values.size()) {
        throw ConfigError("slot " + d.name + "." + s.name + " has duplicate values");
      }
    }
    for (const auto& r : d.requestable) {
      if (!slots.insert(r).second) throw ConfigError("duplicate slot " + r + " in domain " + d.name);
    }
  }
}

const DomainSpec* Ontology::find(std::string_view name) const {
  for (const auto& d : domains_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const DomainSpec& Ontology::domain(std::string_view name) const {
  const DomainSpec* d = find(name);
  if (d == nullptr) throw DomainError("unknown domain: " + std::string(name));
  return *d;
}

std::size_t Ontology::domain_index(std::string_view name) const {
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (domains_[i].name == name) return i;
  }
  throw DomainError("unknown domain: " + std::string(name));
}

Ontology Ontology::default_ontology() {
  const std::vector<std::string> areas{"centre", "north", "south", "east", "west"};
  const std::vector<std::string> prices{"cheap", "moderate", "expensive", "luxury"};
  const std::vector<std::string> places{"cambridge", "london",  "ely",
                                        "norwich",   "stansted", "peterborough"};
  const std::vector<std::string> times{"morning", "afternoon", "evening", "night"};

  std::vector<DomainSpec> domains;
  domains.push_back({"attraction",
                     {{"area", areas},
                      {"type", {"museum", "park", "theatre", "cinema", "college", "gallery"}},
                      {"entrance", {"free", "cheap", "moderate", "expensive"}}},
                     {"address", "phone", "postcode"},
                     false});
  domains.push_back({"hotel",
                     {{"area", areas},
                      {"pricerange", prices},
                      {"stars", {"one", "two", "three", "four", "five"}},
                      {"type", {"hotel", "guesthouse", "hostel", "lodge"}}},
                     {"address", "phone", "postcode"},
                     true});
  domains.push_back({"restaurant",
                     {{"area", areas},
                      {"food",
                       {"italian", "chinese", "indian", "british", "french", "thai", "mexican",
                        "korean"}},
                      {"pricerange", prices}},
                     {"address", "phone", "postcode"},
                     true});
  domains.push_back({"taxi",
                     {{"departure", places}, {"destination", places}, {"leaveat", times}},
                     {"cartype", "phone"},
                     false});
  domains.push_back({"train",
                     {{"day",
                       {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
                        "sunday"}},
                      {"departure", places},
                      {"destination", places},
                      {"leaveat", times}},
                     {"duration", "price", "trainid"},
                     true});
  return Ontology(std::move(domains));
}

json Ontology::to_json() const {
  json doms = json::array();
  for (const auto& d : domains_) {
    json inf = json::array();
    for (const auto& s : d.informable) inf.push_back({{"slot", s.name}, {"values", s.values}});
    doms.push_back({{"name", d.name},
                    {"informable", inf},
                    {"requestable", d.requestable},
                    {"bookable", d.bookable}});
  }
  return json{{"domains", doms}};
}

Ontology Ontology::from_json(const json& j) {
  try {
    std::vector<DomainSpec> domains;
    for (const auto& d : j.at("domains")) {
      DomainSpec spec;
      spec.name = d.at("name").get<std::string>();
      for (const auto& s : d.at("informable")) {
        spec.informable.push_back(
            {s.at("slot").get<std::string>(), s.at("values").get<std::vector<std::string>>()});
      }
      spec.requestable = d.value("requestable", std::vector<std::string>{});
      spec.bookable = d.value("bookable", false);
      domains.push_back(std::move(spec));
    }
    return Ontology(std::move(domains));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ontology json: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

bool Entity::matches(const Constraints& constraints) const {
  for (const auto& [slot, value] : constraints) {
    auto it = slots.find(slot);
    if (it == slots.end() || it->second != value) return false;
  }
  return true;
}

EntityDatabase::EntityDatabase(const Ontology& ontology,
                               std::map<std::string, std::vector<Entity>> entities) {
  for (const auto& d : ontology.domains()) {
    auto it = entities.find(d.name);
    if (it == entities.end() || it->second.empty()) {
      throw ConfigError("database has no entities for domain " + d.name);
    }
    auto& list = it->second;
    std::sort(list.begin(), list.end(), [](const Entity& a, const Entity& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].id == list[i - 1].id) {
        throw ConfigError("duplicate entity id in domain " + d.name);
      }
    }
    for (const auto& e : list) {
      for (const auto& slot : d.informable) {
        auto v = e.slots.find(slot.name);
        if (v == e.slots.end() ||
            std::find(slot.values.begin(), slot.values.end(), v->second) == slot.values.end()) {
          throw ConfigError("entity " + e.name + " has an illegal value for " + slot.name);
        }
      }
      for (const auto& [slot, value] : e.slots) {
        if (!d.has_slot(slot)) throw ConfigError("entity " + e.name + " has unknown slot " + slot);
      }
    }
    entities_.emplace(d.name, std::move(list));
  }
  for (const auto& [name, list] : entities) {
    if (ontology.find(name) == nullptr) throw ConfigError("database domain not in ontology: " + name);
  }
}

EntityDatabase EntityDatabase::generate(const Ontology& ontology, std::uint64_t seed,
                                        int per_domain) {
  if (per_domain < 1) throw ConfigError("database needs at least one entity per domain");
  std::map<std::string, std::vector<Entity>> all;
  for (std::size_t di = 0; di < ontology.domains().size(); ++di) {
    const DomainSpec& d = ontology.domains()[di];
    Rng rng(derive_seed(seed, di));
    std::vector<Entity> list;
    for (int id = 0; id < per_domain; ++id) {
      Entity e;
      e.id = id;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s-%02d", d.name.c_str(), id);
      e.name = buf;
      for (const auto& slot : d.informable) {
        e.slots[slot.name] = slot.values[rng.uniform_index(slot.values.size())];
      }
      for (const auto& slot : d.requestable) {
        std::snprintf(buf, sizeof buf, "%s-%s-%02d", slot.c_str(), d.name.c_str(), id);
        e.slots[slot] = buf;
      }
      list.push_back(std::move(e));
    }
    all.emplace(d.name, std::move(list));
  }
  return EntityDatabase(ontology, std::move(all));
}

const std::vector<Entity>& EntityDatabase::entities(std::string_view domain) const {
  auto it = entities_.find(domain);
  if (it == entities_.end()) throw DomainError("unknown domain: " + std::string(domain));
  return it->second;
}

const Entity* EntityDatabase::find_by_name(std::string_view domain, std::string_view name) const {
  for (const auto& e : entities(domain)) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

json EntityDatabase::to_json() const {
  json out = json::object();
  for (const auto& [domain, list] : entities_) {
    json arr = json::array();
    for (const auto& e : list) arr.push_back({{"id", e.id}, {"name", e.name}, {"slots", e.slots}});
    out[domain] = arr;
  }
  return out;
}

EntityDatabase EntityDatabase::from_json(const Ontology& ontology, const json& j) {
  try {
    std::map<std::string, std::vector<Entity>> all;
    for (const auto& [domain, arr] : j.items()) {
      for (const auto& e : arr) {
        all[domain].push_back({e.at("id").get<int>(), e.at("name").get<std::string>(),
                               e.at("slots").get<std::map<std::string, std::string>>()});
      }
    }
    return EntityDatabase(ontology, std::move(all));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed database json: ") + e.what());
  }
}

std::vector<Entity> query_entities(const Ontology& ontology, const EntityDatabase& db,
                                   std::string_view domain, const Constraints& constraints) {
  const DomainSpec& spec = ontology.domain(domain);
  for (const auto& [slot, value] : constraints) {
    if (!spec.has_slot(slot)) {
      throw ConstraintError("domain " + spec.name + " has no slot " + slot);
    }
  }
  std::vector<Entity> out;
  for (const auto& e : db.entities(domain)) {
    if (e.matches(constraints)) out.push_back(e);
  }
  return out;
}

BookingOutcome check_booking(const Ontology& ontology, const EntityDatabase& db,
                             std::string_view domain, const Constraints& constraints) {
  if (!ontology.domain(domain).bookable) {
    throw DomainError("domain is not bookable: " + std::string(domain));
  }
  auto matches = query_entities(ontology, db, domain, constraints);
  if (matches.empty()) return {};
  return {true, matches.front()};
}

// ---------------------------------------------------------------------------
// Goals
// ---------------------------------------------------------------------------

const GoalSection* UserGoal::find(std::string_view domain) const {
  for (const auto& s : sections) {
    if (s.domain == domain) return &s;
  }
  return nullptr;
}

bool UserGoal::bookable() const {
  return std::any_of(sections.begin(), sections.end(),
                     [](const GoalSection& s) { return s.wants_booking; });
}

json UserGoal::to_json() const {
  json arr = json::array();
  for (const auto& s : sections) {
    arr.push_back({{"domain", s.domain},
                   {"constraints", s.constraints},
                   {"fallback", s.fallback},
                   {"requests", s.requests},
                   {"wants_booking", s.wants_booking}});
  }
  return arr;
}

UserGoal sample_goal(const Ontology& ontology, const EntityDatabase& db, std::uint64_t seed,
                     const GoalSamplerConfig& config) {
  const auto& domains = ontology.domains();
  if (domains.empty()) throw ConfigError("cannot sample a goal from an empty ontology");
  if (config.domain_count_probs.empty()) throw ConfigError("empty domain-count distribution");

  Rng rng(seed);
  double u = rng.uniform();
  std::size_t count = config.domain_count_probs.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < config.domain_count_probs.size(); ++k) {
    acc += config.domain_count_probs[k];
    if (u < acc) {
      count = k + 1;
      break;
    }
  }
  count = std::min(count, domains.size());

  std::vector<std::size_t> order(domains.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  UserGoal goal;
  for (std::size_t k = 0; k < count; ++k) {
    const DomainSpec& d = domains[order[k]];
    const auto& entities = db.entities(d.name);
    const Entity& anchor = entities[rng.uniform_index(entities.size())];

    GoalSection section;
    section.domain = d.name;

    std::vector<std::size_t> slot_idx(d.informable.size());
    std::iota(slot_idx.begin(), slot_idx.end(), 0);
    rng.shuffle(slot_idx);
    const std::size_t max_c =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_constraints), slot_idx.size());
    const std::size_t n_constraints = 1 + rng.uniform_index(max_c);
    for (std::size_t i = 0; i < n_constraints; ++i) {
      const InformableSlot& slot = d.informable[slot_idx[i]];
      const std::string& value = anchor.slots.at(slot.name);
      section.constraints[slot.name] = value;
      if (slot.values.size() > 1) {
        std::size_t alt = rng.uniform_index(slot.values.size() - 1);
        std::size_t own = static_cast<std::size_t>(
            std::find(slot.values.begin(), slot.values.end(), value) - slot.values.begin());
        if (alt >= own) ++alt;
        section.fallback[slot.name] = slot.values[alt];
      }
    }

    std::vector<std::string> req = d.requestable;
    rng.shuffle(req);
    const std::size_t max_r =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_requests), req.size());
    const std::size_t n_requests = rng.uniform_index(max_r + 1);
    section.requests.assign(req.begin(), req.begin() + static_cast<std::ptrdiff_t>(n_requests));
    std::sort(section.requests.begin(), section.requests.end());

    section.wants_booking = d.bookable && rng.bernoulli(config.booking_prob);
    goal.sections.push_back(std::move(section));
  }
  return goal;
}

// ---------------------------------------------------------------------------
// Acts
// ---------------------------------------------------------------------------

namespace {
constexpr std::array<std::string_view, kIntentCount> kIntentNames{
    "inform", "request", "book", "offer", "nooffer", "bookconfirm", "bookfail", "bye", "greet"};
}

std::string_view intent_name(Intent intent) { return kIntentNames[static_cast<int>(intent)]; }

Intent parse_intent(std::string_view name) {
  for (int i = 0; i < kIntentCount; ++i) {
    if (kIntentNames[i] == name) return static_cast<Intent>(i);
  }
  throw ActError("unknown intent: " + std::string(name));
}

std::string DialogueAct::to_string() const {
  std::string out(intent_name(intent));
  out += "(" + domain + "," + slot + "," + value + ")";
  return out;
}

void validate_act(const DialogueAct& act, bool require_value) {
  auto fail = [&](const char* why) { throw ActError(act.to_string() + ": " + why); };
  switch (act.intent) {
    case Intent::Inform:
      if (act.domain.empty() || act.slot.empty()) fail("inform needs domain and slot");
      if (require_value && act.value.empty()) fail("inform needs a value");
      break;
    case Intent::Request:
      if (act.domain.empty() || act.slot.empty()) fail("request needs domain and slot");
      if (!act.value.empty()) fail("request carries no value");
      break;
    case Intent::Bye:
    case Intent::Greet:
      if (!act.domain.empty() || !act.slot.empty() || !act.value.empty()) {
        fail("bye/greet carry no arguments");
      }
      break;
    case Intent::Book:
    case Intent::Offer:
    case Intent::NoOffer:
    case Intent::BookConfirm:
    case Intent::BookFail:
      if (act.domain.empty()) fail("act needs a domain");
      break;
  }
}

ActSet::ActSet(std::initializer_list<DialogueAct> acts) {
  for (const auto& a : acts) insert(a);
}

bool ActSet::insert(DialogueAct act) {
  auto it = std::lower_bound(acts_.begin(), acts_.end(), act);
  if (it != acts_.end() && *it == act) return false;
  if (acts_.size() >= max_size_) {
    throw ActError("act set exceeds its cap of " + std::to_string(max_size_));
  }
  acts_.insert(it, std::move(act));
  return true;
}

bool ActSet::contains(const DialogueAct& act) const {
  return std::binary_search(acts_.begin(), acts_.end(), act);
}

std::string ActSet::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < acts_.size(); ++i) {
    if (i) out += ", ";
    out += acts_[i].to_string();
  }
  return out + "}";
}

json ActSet::to_json() const {
  json arr = json::array();
  for (const auto& a : acts_) {
    arr.push_back({std::string(intent_name(a.intent)), a.domain, a.slot, a.value});
  }
  return arr;
}

}  // namespace imdial
