#include "imdial/policies.hpp"

#include <numeric>

namespace imdial {

ActSet OraclePolicy::act(const BeliefState& state) {
  const auto cap = static_cast<std::size_t>(max_acts_);
  ActSet out(cap);
  auto add = [&](DialogueAct a) {
    if (out.size() < cap) out.insert(std::move(a));
  };
  for (const auto& [domain, b] : state.domains) {
    if (b.outstanding.empty()) continue;
    if (b.offered.empty()) add(DialogueAct::of(Intent::Offer, domain));
    for (const auto& slot : b.outstanding) add(DialogueAct::inform(domain, slot));
  }
  for (const auto& [domain, b] : state.domains) {
    if (b.booking_requested && b.booking != BookingStatus::Confirmed) {
      add(DialogueAct::of(Intent::Book, domain));
    }
  }
  if (!out.empty()) return out;
  for (const auto& a : state.last_user) {
    if (!a.domain.empty()) {
      add(DialogueAct::of(Intent::Offer, a.domain));
      return out;
    }
  }
  for (const auto& [domain, b] : state.domains) {
    if (b.offered.empty()) {
      add(DialogueAct::of(Intent::Offer, domain));
      break;
    }
  }
  return out;
}

ActSet RandomPolicy::act(const BeliefState&) {
  const auto& catalog = index_.system_catalog();
  const auto max_acts = static_cast<std::size_t>(index_.max_acts_per_turn());
  const std::size_t k = std::min(catalog.size(), 1 + rng_.uniform_index(max_acts));
  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng_.uniform_index(order.size() - i)]);
  }
  ActSet out(max_acts);
  for (std::size_t i = 0; i < k; ++i) out.insert(catalog[order[i]]);
  return out;
}

ActSet ActorPolicy::act(const BeliefState& state) {
  const Eigen::VectorXd logits = actor_.forward_one(index_.encode_state(state));
  Eigen::VectorXd bits = Eigen::VectorXd::Zero(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) bits[i] = logits[i] > 0.0 ? 1.0 : 0.0;
  return index_.decode_action(bits);
}

}  // namespace imdial
