#include "imdial/vectorize.hpp"

#include <algorithm>

#include "imdial/error.hpp"

namespace imdial {

using nlohmann::json;

int IndexMap::push(LayoutEntry e) {
  state_layout_.push_back(std::move(e));
  return static_cast<int>(state_layout_.size()) - 1;
}

IndexMap::IndexMap(const Ontology& ontology, int max_turns, int max_acts_per_turn)
    : max_turns_(max_turns), max_acts_(max_acts_per_turn) {
  if (max_turns < 1 || max_acts_per_turn < 1) throw ConfigError("invalid index map limits");

  system_catalog_.push_back(DialogueAct::of(Intent::Greet));
  system_catalog_.push_back(DialogueAct::of(Intent::Bye));
  user_catalog_.push_back(DialogueAct::of(Intent::Greet));
  user_catalog_.push_back(DialogueAct::of(Intent::Bye));

  for (const auto& d : ontology.domains()) {
    DomainOffsets& off = offsets_[d.name];
    for (const auto& s : d.informable) {
      for (const auto& v : s.values) {
        off.constraint[s.name][v] = push({"constraint", d.name, s.name, v});
      }
    }
    for (const auto& r : d.requestable) {
      off.outstanding[r] = push({"outstanding", d.name, r, {}});
      off.delivered[r] = push({"delivered", d.name, r, {}});
    }
    off.offered = push({"offered", d.name, {}, {}});
    if (d.bookable) {
      off.booking_requested = push({"booking_requested", d.name, {}, {}});
      off.booking_confirmed = push({"booking_confirmed", d.name, {}, {}});
      off.booking_failed = push({"booking_failed", d.name, {}, {}});
    }
    off.match_bins = push({"db_matches", d.name, {}, "0"});
    push({"db_matches", d.name, {}, "1"});
    push({"db_matches", d.name, {}, "2-5"});
    push({"db_matches", d.name, {}, "6+"});

    for (const auto& s : d.informable) system_catalog_.push_back(DialogueAct::inform(d.name, s.name));
    for (const auto& r : d.requestable) system_catalog_.push_back(DialogueAct::inform(d.name, r));
    for (const auto& s : d.informable) system_catalog_.push_back(DialogueAct::request(d.name, s.name));
    system_catalog_.push_back(DialogueAct::of(Intent::Offer, d.name));
    system_catalog_.push_back(DialogueAct::of(Intent::NoOffer, d.name));
    if (d.bookable) system_catalog_.push_back(DialogueAct::of(Intent::Book, d.name));

    for (const auto& s : d.informable) user_catalog_.push_back(DialogueAct::inform(d.name, s.name));
    for (const auto& r : d.requestable) user_catalog_.push_back(DialogueAct::request(d.name, r));
    if (d.bookable) user_catalog_.push_back(DialogueAct::of(Intent::Book, d.name));
  }

  for (std::size_t i = 0; i < system_catalog_.size(); ++i) {
    system_lookup_[system_catalog_[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < user_catalog_.size(); ++i) {
    user_lookup_[user_catalog_[i]] = static_cast<int>(i);
  }

  last_user_offset_ = static_cast<int>(state_layout_.size());
  for (const auto& a : user_catalog_) {
    push({"last_user_act", a.domain, a.slot, std::string(intent_name(a.intent))});
  }
  last_system_offset_ = static_cast<int>(state_layout_.size());
  for (const auto& a : system_catalog_) {
    push({"last_system_act", a.domain, a.slot, std::string(intent_name(a.intent))});
  }
  turn_index_ = push({"turn", {}, {}, {}});
}

DialogueAct IndexMap::delexicalize_system(const DialogueAct& act) {
  switch (act.intent) {
    case Intent::Inform: return DialogueAct::inform(act.domain, act.slot);
    case Intent::Request: return DialogueAct::request(act.domain, act.slot);
    case Intent::Offer: return DialogueAct::of(Intent::Offer, act.domain);
    case Intent::NoOffer: return DialogueAct::of(Intent::NoOffer, act.domain);
    case Intent::Book:
    case Intent::BookConfirm:
    case Intent::BookFail: return DialogueAct::of(Intent::Book, act.domain);
    case Intent::Bye:
    case Intent::Greet: return DialogueAct::of(act.intent);
  }
  return act;
}

DialogueAct IndexMap::delexicalize_user(const DialogueAct& act) {
  switch (act.intent) {
    case Intent::Inform: return DialogueAct::inform(act.domain, act.slot);
    case Intent::Request: return DialogueAct::request(act.domain, act.slot);
    default: return DialogueAct::of(act.intent, act.domain);
  }
}

std::optional<int> IndexMap::system_index(const DialogueAct& act) const {
  auto it = system_lookup_.find(delexicalize_system(act));
  if (it == system_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> IndexMap::user_index(const DialogueAct& act) const {
  auto it = user_lookup_.find(delexicalize_user(act));
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd IndexMap::encode_state(const BeliefState& state) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(state_dim());
  for (const auto& [domain, d] : state.domains) {
    auto oit = offsets_.find(domain);
    if (oit == offsets_.end()) throw EncodingError("unknown domain in belief state: " + domain);
    const DomainOffsets& off = oit->second;
    for (const auto& [slot, value] : d.constraints) {
      auto sit = off.constraint.find(slot);
      if (sit == off.constraint.end()) throw EncodingError("unknown slot " + domain + "." + slot);
      auto vit = sit->second.find(value);
      if (vit == sit->second.end()) {
        throw EncodingError("unknown value " + value + " for " + domain + "." + slot);
      }
      v[vit->second] = 1.0;
    }
    for (const auto& slot : d.outstanding) {
      auto it = off.outstanding.find(slot);
      if (it == off.outstanding.end()) throw EncodingError("unknown request slot " + slot);
      v[it->second] = 1.0;
    }
    for (const auto& [slot, value] : d.delivered) {
      auto it = off.delivered.find(slot);
      if (it == off.delivered.end()) throw EncodingError("unknown request slot " + slot);
      v[it->second] = 1.0;
    }
    if (!d.offered.empty()) v[off.offered] = 1.0;
    const bool booking_state =
        d.booking_requested || d.booking != BookingStatus::None;
    if (booking_state && off.booking_requested < 0) {
      throw EncodingError("booking state on non-bookable domain " + domain);
    }
    if (d.booking_requested) v[off.booking_requested] = 1.0;
    if (d.booking == BookingStatus::Confirmed) v[off.booking_confirmed] = 1.0;
    if (d.booking == BookingStatus::Failed) v[off.booking_failed] = 1.0;
    if (d.match_count >= 0) {
      const int bin = d.match_count == 0 ? 0 : d.match_count == 1 ? 1 : d.match_count <= 5 ? 2 : 3;
      v[off.match_bins + bin] = 1.0;
    }
  }
  for (const auto& act : state.last_user) {
    auto idx = user_index(act);
    if (!idx) throw EncodingError("user act outside the catalog: " + act.to_string());
    v[last_user_offset_ + *idx] = 1.0;
  }
  for (const auto& act : state.last_system) {
    auto idx = system_index(act);
    if (!idx) throw EncodingError("system act outside the catalog: " + act.to_string());
    v[last_system_offset_ + *idx] = 1.0;
  }
  v[turn_index_] = std::clamp(static_cast<double>(state.turn_index) / max_turns_, 0.0, 1.0);
  return v;
}

Eigen::VectorXd IndexMap::encode_action(const ActSet& acts) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(action_dim());
  for (const auto& act : acts) {
    auto idx = system_index(act);
    if (!idx) throw CatalogError("act outside the system catalog: " + act.to_string());
    v[*idx] = 1.0;
  }
  return v;
}

Eigen::VectorXd IndexMap::encode_user_acts(const ActSet& acts) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(user_act_dim());
  for (const auto& act : acts) {
    auto idx = user_index(act);
    if (!idx) throw CatalogError("act outside the user catalog: " + act.to_string());
    v[*idx] = 1.0;
  }
  return v;
}

ActSet IndexMap::decode_action(const Eigen::Ref<const Eigen::VectorXd>& bits) const {
  if (bits.size() != action_dim()) {
    throw ShapeError("action vector has length " + std::to_string(bits.size()) + ", expected " +
                     std::to_string(action_dim()));
  }
  ActSet out(static_cast<std::size_t>(max_acts_));
  int kept = 0;
  for (int i = action_dim() - 1; i >= 0 && kept < max_acts_; --i) {
    if (bits[i] > 0.5) {
      out.insert(system_catalog_[static_cast<std::size_t>(i)]);
      ++kept;
    }
  }
  return out;
}

json IndexMap::layout_json() const {
  json state = json::array();
  for (std::size_t i = 0; i < state_layout_.size(); ++i) {
    const auto& e = state_layout_[i];
    state.push_back({{"index", i}, {"kind", e.kind}, {"domain", e.domain}, {"slot", e.slot},
                     {"value", e.value}});
  }
  auto catalog = [](const std::vector<DialogueAct>& acts) {
    json arr = json::array();
    for (std::size_t i = 0; i < acts.size(); ++i) {
      arr.push_back({{"index", i},
                     {"intent", intent_name(acts[i].intent)},
                     {"domain", acts[i].domain},
                     {"slot", acts[i].slot}});
    }
    return arr;
  };
  return json{{"state_dim", state_dim()},
              {"action_dim", action_dim()},
              {"user_act_dim", user_act_dim()},
              {"max_turns", max_turns_},
              {"max_acts_per_turn", max_acts_},
              {"state", state},
              {"system_actions", catalog(system_catalog_)},
              {"user_actions", catalog(user_catalog_)}};
}

}  // namespace imdial
