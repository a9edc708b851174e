#include "imdial/user_sim.hpp"

#include <algorithm>

#include "imdial/error.hpp"

namespace imdial {

namespace {

bool has_agenda_items(const UserState& s, const std::string& domain) {
  return std::any_of(s.agenda.stack.begin(), s.agenda.stack.end(),
                     [&](const DialogueAct& a) { return a.domain == domain; });
}

void drop_agenda_items(UserState& s, const std::string& domain) {
  auto& st = s.agenda.stack;
  st.erase(std::remove_if(st.begin(), st.end(),
                          [&](const DialogueAct& a) { return a.domain == domain; }),
           st.end());
}

// Switches the first constraint with an unused fallback to that fallback.
// Returns false when no constraint can be relaxed.
bool relax_constraint(UserState& s, std::size_t idx) {
  GoalSection& sec = s.goal.sections[idx];
  SectionProgress& p = s.progress[idx];
  for (auto& [slot, value] : sec.constraints) {
    auto fb = sec.fallback.find(slot);
    if (fb == sec.fallback.end() || p.fallback_used.count(slot)) continue;
    value = fb->second;
    p.fallback_used.insert(slot);
    p.offered = false;
    p.offered_entity.clear();
    // Answers about the previous entity no longer apply.
    for (const auto& [req, v] : p.received) {
      s.agenda.stack.push_back(DialogueAct::request(sec.domain, req));
    }
    p.received.clear();
    for (const auto& req : p.pending_requests) {
      s.agenda.stack.push_back(DialogueAct::request(sec.domain, req));
    }
    p.pending_requests.clear();
    s.agenda.stack.push_back(DialogueAct::inform(sec.domain, slot, value));
    return true;
  }
  return false;
}

ActSet emit_turn(UserState& s) {
  ActSet acts(static_cast<std::size_t>(s.config.max_acts_per_turn));
  const std::size_t idx = s.agenda.active_section;
  const GoalSection& sec = s.goal.sections[idx];
  SectionProgress& p = s.progress[idx];
  auto& st = s.agenda.stack;
  const auto cap = static_cast<std::size_t>(s.config.max_acts_per_turn);

  while (!st.empty() && st.back().domain == sec.domain && acts.size() < cap) {
    DialogueAct act = st.back();
    st.pop_back();
    switch (act.intent) {
      case Intent::Inform: p.informed.insert(act.slot); break;
      case Intent::Request: p.pending_requests.insert(act.slot); break;
      case Intent::Book: p.booking_pending = true; break;
      default: break;
    }
    acts.insert(std::move(act));
  }
  if (!acts.empty()) return acts;

  // Nothing new to say: repeat what is still outstanding.
  for (const auto& req : p.pending_requests) {
    if (acts.size() == cap) break;
    acts.insert(DialogueAct::request(sec.domain, req));
  }
  if (p.booking_pending && acts.size() < cap) acts.insert(DialogueAct::of(Intent::Book, sec.domain));
  if (!acts.empty()) return acts;
  for (const auto& [slot, value] : sec.constraints) {
    if (acts.size() == cap) break;
    acts.insert(DialogueAct::inform(sec.domain, slot, value));
  }
  return acts;
}

}  // namespace

std::set<std::string> UserState::satisfied_requests(std::size_t section) const {
  std::set<std::string> out;
  for (const auto& [slot, value] : progress.at(section).received) out.insert(slot);
  return out;
}

bool UserState::section_complete(std::size_t idx) const {
  const GoalSection& sec = goal.sections.at(idx);
  const SectionProgress& p = progress.at(idx);
  if (p.given_up) return true;
  if (has_agenda_items(*this, sec.domain)) return false;
  if (!p.pending_requests.empty() || p.booking_pending) return false;
  if (p.received.size() != sec.requests.size()) return false;
  if (sec.wants_booking && !p.booking_done && !p.booking_given_up) return false;
  return p.offered || p.booking_done;
}

UserTurn user_reset(const UserGoal& goal, const UserConfig& config, std::uint64_t seed) {
  if (goal.sections.empty()) throw ArgumentError("user goal has no sections");
  if (config.max_acts_per_turn < 1 || config.patience < 1) {
    throw ConfigError("user config needs max_acts_per_turn >= 1 and patience >= 1");
  }
  UserState s;
  s.goal = goal;
  s.config = config;
  s.progress.resize(goal.sections.size());
  s.agenda.patience = config.patience;
  if (config.slip_prob > 0.0) s.slip_rng.emplace(seed);

  auto& st = s.agenda.stack;
  st.push_back(DialogueAct::of(Intent::Bye));
  for (auto it = goal.sections.rbegin(); it != goal.sections.rend(); ++it) {
    if (it->wants_booking) st.push_back(DialogueAct::of(Intent::Book, it->domain));
    for (auto r = it->requests.rbegin(); r != it->requests.rend(); ++r) {
      st.push_back(DialogueAct::request(it->domain, *r));
    }
    for (auto c = it->constraints.rbegin(); c != it->constraints.rend(); ++c) {
      st.push_back(DialogueAct::inform(it->domain, c->first, c->second));
    }
  }

  ActSet acts = emit_turn(s);
  return {std::move(s), std::move(acts), false};
}

UserTurn user_respond(const UserState& state, const ActSet& system_acts) {
  if (state.finished) throw StateError("user simulator already finished");
  UserState s = state;
  const std::size_t idx = s.agenda.active_section;
  GoalSection& sec = s.goal.sections[idx];
  SectionProgress& p = s.progress[idx];
  bool helpful = false;

  for (const auto& act : system_acts) {
    if (act.domain != sec.domain) continue;
    switch (act.intent) {
      case Intent::Request: {
        auto c = sec.constraints.find(act.slot);
        if (c != sec.constraints.end()) {
          s.agenda.stack.push_back(DialogueAct::inform(sec.domain, c->first, c->second));
          helpful = true;
        }
        break;
      }
      case Intent::Inform:
        if (p.pending_requests.erase(act.slot)) {
          p.received[act.slot] = act.value;
          p.offered = true;
          helpful = true;
        }
        break;
      case Intent::Offer:
        p.offered = true;
        p.offered_entity = act.value;
        helpful = true;
        break;
      case Intent::NoOffer:
        helpful = true;
        if (!relax_constraint(s, idx)) {
          p.given_up = true;
          drop_agenda_items(s, sec.domain);
        }
        break;
      case Intent::BookConfirm:
        if (p.booking_pending) {
          p.booking_pending = false;
          p.booking_done = true;
          p.booked_entity = act.value;
          p.offered = true;
          helpful = true;
        }
        break;
      case Intent::BookFail:
        if (p.booking_pending) {
          p.booking_pending = false;
          helpful = true;
          s.agenda.stack.push_back(DialogueAct::of(Intent::Book, sec.domain));
          if (!relax_constraint(s, idx)) {
            s.agenda.stack.pop_back();
            p.booking_given_up = true;
          }
        }
        break;
      default:
        break;
    }
  }

  if (!helpful) {
    s.agenda.patience = std::max(0, s.agenda.patience - 1);
    if (s.agenda.patience == 0) {
      s.finished = true;
      s.completed = false;
      return {std::move(s), ActSet{DialogueAct::of(Intent::Bye)}, true};
    }
  }

  while (s.agenda.active_section < s.goal.sections.size() &&
         s.section_complete(s.agenda.active_section)) {
    ++s.agenda.active_section;
  }
  if (s.agenda.active_section == s.goal.sections.size()) {
    s.agenda.stack.clear();
    s.finished = true;
    s.completed = true;
    return {std::move(s), ActSet{DialogueAct::of(Intent::Bye)}, true};
  }

  ActSet acts = emit_turn(s);
  if (s.slip_rng && s.slip_rng->bernoulli(s.config.slip_prob)) {
    SectionProgress& cur = s.progress[s.agenda.active_section];
    if (!cur.received.empty() && acts.size() < acts.max_size()) {
      auto it = cur.received.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(s.slip_rng->uniform_index(cur.received.size())));
      const std::string slot = it->first;
      cur.received.erase(it);
      cur.pending_requests.insert(slot);
      acts.insert(
          DialogueAct::request(s.goal.sections[s.agenda.active_section].domain, slot));
    }
  }
  return {std::move(s), std::move(acts), false};
}

}  // namespace imdial
