#pragma once

#include <memory>

#include "imdial/env.hpp"
#include "imdial/nn.hpp"
#include "imdial/vectorize.hpp"

namespace imdial {

/// Maps a belief state to catalog system acts. Implementations must be
/// deterministic given their construction arguments and call sequence.
class DialoguePolicy {
 public:
  virtual ~DialoguePolicy() = default;
  virtual ActSet act(const BeliefState& state) = 0;
  /// Called before each dialogue with that dialogue's seed.
  virtual void begin_dialogue(std::uint64_t /*seed*/) {}
};

/// Answers outstanding requests, books when asked, otherwise offers in the
/// domain the user last spoke about. Succeeds on every sampled goal.
class OraclePolicy : public DialoguePolicy {
 public:
  explicit OraclePolicy(int max_acts = 3) : max_acts_(max_acts) {}
  ActSet act(const BeliefState& state) override;

 private:
  int max_acts_;
};

class EmptyPolicy : public DialoguePolicy {
 public:
  ActSet act(const BeliefState&) override { return ActSet{}; }
};

/// k ~ U{1..max_acts} catalog acts per turn, reseeded per dialogue.
class RandomPolicy : public DialoguePolicy {
 public:
  explicit RandomPolicy(const IndexMap& index) : index_(index) {}
  void begin_dialogue(std::uint64_t seed) override { rng_ = Rng(seed); }
  ActSet act(const BeliefState& state) override;

 private:
  const IndexMap& index_;
  Rng rng_{0};
};

/// Greedy decoding of a trained actor; holds its own copy of the network.
class ActorPolicy : public DialoguePolicy {
 public:
  ActorPolicy(nn::Mlp actor, const IndexMap& index) : actor_(std::move(actor)), index_(index) {}
  ActSet act(const BeliefState& state) override;
  const nn::Mlp& actor() const { return actor_; }

 private:
  nn::Mlp actor_;
  const IndexMap& index_;
};

}  // namespace imdial
