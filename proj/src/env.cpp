#include "imdial/env.hpp"

#include <algorithm>

#include "imdial/error.hpp"

namespace imdial {

using nlohmann::json;

std::shared_ptr<const World> World::make_default(std::uint64_t database_seed) {
  Ontology onto = Ontology::default_ontology();
  EntityDatabase db = EntityDatabase::generate(onto, database_seed);
  return make(std::move(onto), std::move(db), TemplateSet::default_templates());
}

std::shared_ptr<const World> World::make(Ontology ontology, EntityDatabase database,
                                         TemplateSet templates) {
  templates.check_coverage(ontology);
  return std::make_shared<const World>(
      World{std::move(ontology), std::move(database), std::move(templates)});
}

// ---------------------------------------------------------------------------
// DST
// ---------------------------------------------------------------------------

BeliefState dst_update(const BeliefState& state, const ActSet& acts, Speaker speaker) {
  for (const auto& act : acts) validate_act(act, act.intent == Intent::Inform);
  BeliefState next = state;
  for (const auto& act : acts) {
    if (act.domain.empty()) continue;
    DomainBelief& d = next.domains[act.domain];
    if (speaker == Speaker::User) {
      switch (act.intent) {
        case Intent::Inform: d.constraints[act.slot] = act.value; break;
        case Intent::Request:
          if (!d.delivered.count(act.slot)) d.outstanding.insert(act.slot);
          break;
        case Intent::Book:
          d.booking_requested = true;
          if (d.booking == BookingStatus::Failed) d.booking = BookingStatus::None;
          break;
        default: break;
      }
    } else {
      switch (act.intent) {
        case Intent::Inform:
          if (d.outstanding.erase(act.slot)) d.delivered[act.slot] = act.value;
          break;
        case Intent::Offer: d.offered = act.value; break;
        case Intent::BookConfirm:
          d.booking = BookingStatus::Confirmed;
          d.offered = act.value;
          break;
        case Intent::BookFail: d.booking = BookingStatus::Failed; break;
        default: break;
      }
    }
  }
  (speaker == Speaker::User ? next.last_user : next.last_system) = acts;
  return next;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

void EnvConfig::validate() const {
  if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
}

EpisodeOutcome evaluate_outcome(const Ontology& ontology, const EntityDatabase& db,
                                const UserState& user) {
  EpisodeOutcome out;
  out.completed = user.finished && user.completed;
  out.bookable = user.goal.bookable();

  bool all_ok = true;
  bool all_booked = true;
  for (std::size_t i = 0; i < user.goal.sections.size(); ++i) {
    const GoalSection& sec = user.goal.sections[i];
    const SectionProgress& p = user.progress[i];
    const auto matches = query_entities(ontology, db, sec.domain, sec.constraints);
    auto matching_name = [&](const std::string& name) {
      return std::any_of(matches.begin(), matches.end(),
                         [&](const Entity& e) { return e.name == name; });
    };

    bool booking_ok = true;
    if (sec.wants_booking) {
      booking_ok = p.booking_done && matching_name(p.booked_entity);
      all_booked = all_booked && booking_ok;
    }

    bool ok = !p.given_up && booking_ok;
    if (ok && !sec.requests.empty()) {
      // All answers must describe one entity that satisfies the goal.
      ok = p.received.size() == sec.requests.size() &&
           std::any_of(matches.begin(), matches.end(), [&](const Entity& e) {
             return std::all_of(p.received.begin(), p.received.end(), [&](const auto& kv) {
               auto it = e.slots.find(kv.first);
               return it != e.slots.end() && it->second == kv.second;
             });
           });
    } else if (ok && !sec.wants_booking) {
      ok = matching_name(p.offered_entity);
    }
    all_ok = all_ok && ok;
  }
  out.successful = out.completed && all_ok;
  out.booked = out.bookable && all_booked;
  return out;
}

Metrics compute_metrics(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) throw ArgumentError("compute_metrics needs at least one episode");
  std::int64_t completed = 0, successful = 0, bookable = 0, booked = 0, turns = 0;
  double ret = 0.0;
  for (const auto& log : logs) {
    completed += log.outcome.completed;
    successful += log.outcome.successful;
    bookable += log.outcome.bookable;
    booked += log.outcome.bookable && log.outcome.booked;
    turns += log.turn_count;
    ret += log.extrinsic_return;
  }
  const auto n = static_cast<std::int64_t>(logs.size());
  Metrics m;
  m.n_dialogues = n;
  m.n_bookable = bookable;
  m.complete_rate = static_cast<double>(completed) / static_cast<double>(n);
  m.success_rate = static_cast<double>(successful) / static_cast<double>(n);
  if (bookable > 0) m.book_rate = static_cast<double>(booked) / static_cast<double>(bookable);
  m.avg_turns = static_cast<double>(turns) / static_cast<double>(n);
  m.avg_return = ret / static_cast<double>(n);
  return m;
}

json EpisodeLog::to_json() const {
  json turns_json = json::array();
  for (const auto& [sys, usr] : turns) {
    turns_json.push_back({{"system", sys.to_json()}, {"user", usr.to_json()}});
  }
  return json{{"seed", seed},
              {"goal", goal.to_json()},
              {"opening", opening.to_json()},
              {"turns", turns_json},
              {"completed", outcome.completed},
              {"successful", outcome.successful},
              {"bookable", outcome.bookable},
              {"booked", outcome.booked},
              {"turn_count", turn_count},
              {"return", extrinsic_return}};
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

Environment::Environment(std::shared_ptr<const World> world, EnvConfig config)
    : world_(std::move(world)), config_(std::move(config)) {
  if (!world_) throw ConfigError("environment needs a world");
  config_.validate();
}

const BeliefState& Environment::reset(std::uint64_t seed) {
  UserGoal goal = sample_goal(world_->ontology, world_->database, seed, config_.goals);
  return reset_with_goal(goal, seed);
}

const BeliefState& Environment::reset_with_goal(const UserGoal& goal, std::uint64_t seed) {
  UserTurn first = user_reset(goal, config_.user, derive_seed(seed, 1));
  user_ = std::move(first.state);
  belief_ = dst_update(BeliefState{}, first.acts, Speaker::User);
  belief_.turn_index = 0;
  belief_.terminal = false;
  refresh_match_counts();

  log_ = EpisodeLog{};
  log_.seed = seed;
  log_.goal = goal;
  log_.opening = first.acts;
  started_ = true;
  return belief_;
}

void Environment::refresh_match_counts() {
  for (auto& [domain, d] : belief_.domains) {
    if (world_->ontology.find(domain) == nullptr) continue;
    d.match_count = static_cast<int>(
        query_entities(world_->ontology, world_->database, domain, d.constraints).size());
  }
}

const Entity* Environment::selected_entity(const std::string& domain,
                                           std::vector<Entity>& scratch) const {
  Constraints constraints;
  std::string offered;
  if (auto it = belief_.domains.find(domain); it != belief_.domains.end()) {
    constraints = it->second.constraints;
    offered = it->second.offered;
  }
  scratch = query_entities(world_->ontology, world_->database, domain, constraints);
  if (scratch.empty()) return nullptr;
  for (const auto& e : scratch) {
    if (e.name == offered) return &e;
  }
  return &scratch.front();
}

ActSet Environment::bind(const ActSet& acts) const {
  ActSet out(acts.max_size());
  std::vector<Entity> scratch;
  for (const auto& act : acts) {
    if (act.domain.empty() || !act.value.empty()) {
      out.insert(act);
      continue;
    }
    const DomainSpec& spec = world_->ontology.domain(act.domain);
    switch (act.intent) {
      case Intent::Inform: {
        if (!spec.has_slot(act.slot)) throw CatalogError("no slot " + act.slot + " in " + spec.name);
        const Entity* e = selected_entity(act.domain, scratch);
        if (e == nullptr) {
          out.insert(DialogueAct::of(Intent::NoOffer, act.domain));
        } else {
          out.insert(DialogueAct::inform(act.domain, act.slot, e->slots.at(act.slot)));
        }
        break;
      }
      case Intent::Offer: {
        const Entity* e = selected_entity(act.domain, scratch);
        if (e == nullptr) {
          out.insert(DialogueAct::of(Intent::NoOffer, act.domain));
        } else {
          out.insert(DialogueAct{Intent::Offer, act.domain, "name", e->name});
        }
        break;
      }
      case Intent::Book: {
        Constraints constraints;
        if (auto it = belief_.domains.find(act.domain); it != belief_.domains.end()) {
          constraints = it->second.constraints;
        }
        BookingOutcome b = check_booking(world_->ontology, world_->database, act.domain, constraints);
        if (b.confirmed) {
          out.insert(DialogueAct{Intent::BookConfirm, act.domain, "ref", b.entity->name});
        } else {
          out.insert(DialogueAct::of(Intent::BookFail, act.domain));
        }
        break;
      }
      default:
        out.insert(act);
        break;
    }
  }
  return out;
}

StepResult Environment::step(const ActSet& system_acts) {
  if (!started_) throw StateError("environment stepped before reset");
  if (belief_.terminal) throw StateError("environment stepped after the dialogue ended");

  ActSet bound = bind(system_acts);
  belief_ = dst_update(belief_, bound, Speaker::System);
  UserTurn reply = user_respond(user_, bound);
  user_ = std::move(reply.state);
  belief_ = dst_update(belief_, reply.acts, Speaker::User);
  belief_.turn_index += 1;
  refresh_match_counts();

  StepResult r;
  r.done = reply.finished || belief_.turn_index >= config_.max_turns;
  if (r.done) {
    log_.outcome = evaluate_outcome(world_->ontology, world_->database, user_);
    r.success = log_.outcome.successful;
  }
  r.extrinsic_reward = (r.done && r.success) ? config_.success_reward() : config_.step_reward;
  belief_.terminal = r.done;
  r.next_state = belief_;
  r.system_acts = bound;
  r.user_acts = reply.acts;

  log_.turns.emplace_back(bound, reply.acts);
  log_.turn_count = belief_.turn_index;
  log_.extrinsic_return += r.extrinsic_reward;
  return r;
}

}  // namespace imdial
