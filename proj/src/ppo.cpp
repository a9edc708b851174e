#include "imdial/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "imdial/error.hpp"

namespace imdial::ppo {

using nlohmann::json;

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must be in (0, 1]");
  if (!(clip > 0.0)) throw ConfigError("clip must be positive");
  if (epochs < 1 || minibatch < 1 || batch_dialogues < 1) {
    throw ConfigError("epochs, minibatch and batch_dialogues must be >= 1");
  }
  if (actor_hidden < 1 || critic_hidden < 1) throw ConfigError("hidden sizes must be >= 1");
  if (!(actor_grad_clip > 0.0)) throw ConfigError("actor_grad_clip must be positive");
}

json PpoConfig::to_json() const {
  return json{{"gamma", gamma},
              {"gae_lambda", gae_lambda},
              {"clip", clip},
              {"actor_lr", actor_lr},
              {"critic_lr", critic_lr},
              {"actor_hidden", actor_hidden},
              {"critic_hidden", critic_hidden},
              {"epochs", epochs},
              {"batch_dialogues", batch_dialogues},
              {"minibatch", minibatch},
              {"entropy_coef", entropy_coef},
              {"actor_grad_clip", actor_grad_clip},
              {"weight_decay", weight_decay},
              {"prob_floor", prob_floor},
              {"actor_output_bias", actor_output_bias}};
}

PpoConfig PpoConfig::from_json(const json& j) { return from_json(j, PpoConfig{}); }

PpoConfig PpoConfig::from_json(const json& j, PpoConfig c) {
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip = j.value("clip", c.clip);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.actor_hidden = j.value("actor_hidden", c.actor_hidden);
  c.critic_hidden = j.value("critic_hidden", c.critic_hidden);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_dialogues = j.value("batch_dialogues", c.batch_dialogues);
  c.minibatch = j.value("minibatch", c.minibatch);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.actor_grad_clip = j.value("actor_grad_clip", c.actor_grad_clip);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.prob_floor = j.value("prob_floor", c.prob_floor);
  c.actor_output_bias = j.value("actor_output_bias", c.actor_output_bias);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Policy head
// ---------------------------------------------------------------------------

Vector bernoulli_probs(const Vector& logits, double floor) {
  Vector p(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    p[i] = std::clamp(s, floor, 1.0 - floor);
  }
  return p;
}

double bernoulli_log_prob(const Vector& logits, const Vector& bits, double floor) {
  const Vector p = bernoulli_probs(logits, floor);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    lp += bits[i] > 0.5 ? std::log(p[i]) : std::log1p(-p[i]);
  }
  return lp;
}

ActionSample policy_act(const nn::Mlp& actor, const Vector& state, ActMode mode, Rng& rng,
                        double floor) {
  if (state.size() != actor.input_dim()) {
    throw ShapeError("state vector length " + std::to_string(state.size()) +
                     " does not match actor input " + std::to_string(actor.input_dim()));
  }
  const Vector logits = actor.forward_one(state);
  const Vector p = bernoulli_probs(logits, floor);
  ActionSample out;
  out.bits = Vector::Zero(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (mode == ActMode::Sample) {
      out.bits[i] = rng.uniform() < p[i] ? 1.0 : 0.0;
    } else {
      out.bits[i] = p[i] > 0.5 ? 1.0 : 0.0;
    }
  }
  out.log_prob = bernoulli_log_prob(logits, out.bits, floor);
  return out;
}

// ---------------------------------------------------------------------------
// Advantages and the surrogate objective
// ---------------------------------------------------------------------------

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda, bool terminal, double bootstrap_value) {
  if (rewards.empty()) throw ArgumentError("compute_gae needs a non-empty trajectory");
  if (rewards.size() != values.size()) throw ArgumentError("rewards and values differ in length");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double next_value = terminal ? 0.0 : bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    next_adv = delta + gamma * lambda * next_adv;
    out.advantages[t] = next_adv;
    out.targets[t] = next_adv + values[t];
    next_value = values[t];
  }
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::max(std::sqrt(var / n), 1e-8);
  for (double& a : adv) a = (a - mean) / sd;
}

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw ArgumentError("surrogate inputs differ in length");
  }
  if (a.empty()) throw ArgumentError("surrogate inputs are empty");
}

}  // namespace

double clipped_surrogate_loss(std::span<const double> new_lp, std::span<const double> old_lp,
                              std::span<const double> adv, double eps) {
  check_lengths(new_lp, old_lp, adv);
  double total = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double rho = std::exp(new_lp[i] - old_lp[i]);
    const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps);
    total += std::min(rho * adv[i], clipped * adv[i]);
  }
  return -total / static_cast<double>(adv.size());
}

std::vector<double> clipped_surrogate_grad(std::span<const double> new_lp,
                                           std::span<const double> old_lp,
                                           std::span<const double> adv, double eps) {
  check_lengths(new_lp, old_lp, adv);
  const double n = static_cast<double>(adv.size());
  std::vector<double> g(adv.size(), 0.0);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double rho = std::exp(new_lp[i] - old_lp[i]);
    const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps);
    if (rho * adv[i] <= clipped * adv[i]) g[i] = -rho * adv[i] / n;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

PpoAgent::PpoAgent(int state_dim, int action_dim, PpoConfig config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  actor_ = nn::Mlp({state_dim, config_.actor_hidden, action_dim}, rng);
  critic_ = nn::Mlp({state_dim, config_.critic_hidden, 1}, rng);
  if (config_.actor_output_bias != 0.0) {
    actor_.mutable_layers().back().bias.setConstant(config_.actor_output_bias);
  }
  actor_opt_ = nn::AdamW(actor_, {config_.actor_lr, 0.9, 0.999, 1e-8, config_.weight_decay});
  critic_opt_ = nn::AdamW(critic_, {config_.critic_lr, 0.9, 0.999, 1e-8, config_.weight_decay});
}

double PpoAgent::value(const Vector& state) const { return critic_.forward_one(state)[0]; }

UpdateStats PpoAgent::update(const std::vector<std::vector<Transition>>& episodes, Rng& rng,
                             double actor_loss_scale) {
  std::vector<const Transition*> flat;
  std::vector<double> advantages, targets;
  for (const auto& ep : episodes) {
    if (ep.empty()) continue;
    std::vector<double> rewards, values;
    for (const auto& t : ep) {
      rewards.push_back(t.extrinsic_reward + t.intrinsic_reward);
      values.push_back(t.value);
      flat.push_back(&t);
    }
    GaeResult g = compute_gae(rewards, values, config_.gamma, config_.gae_lambda, ep.back().done,
                              ep.back().done ? 0.0 : values.back());
    advantages.insert(advantages.end(), g.advantages.begin(), g.advantages.end());
    targets.insert(targets.end(), g.targets.begin(), g.targets.end());
  }
  if (flat.empty()) throw ArgumentError("ppo update needs at least one transition");
  normalize_advantages(advantages);

  const auto n = static_cast<Eigen::Index>(flat.size());
  const Eigen::Index sdim = actor_.input_dim();
  const Eigen::Index adim = actor_.output_dim();
  Matrix states(sdim, n), actions(adim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    states.col(i) = flat[static_cast<std::size_t>(i)]->state;
    actions.col(i) = flat[static_cast<std::size_t>(i)]->action;
  }

  UpdateStats stats;
  stats.transitions = n;
  double ratio_sum = 0.0, clipped_count = 0.0, actor_loss_sum = 0.0, critic_loss_sum = 0.0;
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto mb = static_cast<std::size_t>(config_.minibatch);
  const double floor = config_.prob_floor;

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(order.size(), start + mb);
      const auto m = static_cast<Eigen::Index>(end - start);
      Matrix s(sdim, m), a(adim, m);
      std::vector<double> old_lp(static_cast<std::size_t>(m)), adv(old_lp.size()), tgt(old_lp.size());
      for (Eigen::Index k = 0; k < m; ++k) {
        const std::size_t idx = order[start + static_cast<std::size_t>(k)];
        s.col(k) = states.col(static_cast<Eigen::Index>(idx));
        a.col(k) = actions.col(static_cast<Eigen::Index>(idx));
        old_lp[static_cast<std::size_t>(k)] = flat[idx]->log_prob;
        adv[static_cast<std::size_t>(k)] = advantages[idx];
        tgt[static_cast<std::size_t>(k)] = targets[idx];
      }

      // Actor.
      nn::Tape tape;
      const Matrix logits = actor_.forward(s, &tape);
      std::vector<double> new_lp(old_lp.size());
      Matrix dlogp_dlogit(adim, m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const Vector z = logits.col(k);
        const Vector p = bernoulli_probs(z, floor);
        new_lp[static_cast<std::size_t>(k)] = bernoulli_log_prob(z, a.col(k), floor);
        for (Eigen::Index i = 0; i < adim; ++i) {
          const bool saturated = p[i] <= floor || p[i] >= 1.0 - floor;
          dlogp_dlogit(i, k) = saturated ? 0.0 : a(i, k) - p[i];
        }
      }
      const double actor_loss = clipped_surrogate_loss(new_lp, old_lp, adv, config_.clip);
      if (!std::isfinite(actor_loss)) {
        std::ostringstream os;
        os << "non-finite actor loss at epoch " << epoch << ", minibatch starting " << start;
        throw NumericError(os.str());
      }
      const std::vector<double> dl = clipped_surrogate_grad(new_lp, old_lp, adv, config_.clip);
      Matrix out_grad(adim, m);
      double mb_clipped = 0.0, mb_max_dev = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        out_grad.col(k) = dlogp_dlogit.col(k) * dl[ku];
        const double rho = std::exp(new_lp[ku] - old_lp[ku]);
        ratio_sum += rho;
        mb_max_dev = std::max(mb_max_dev, std::abs(rho - 1.0));
        if (std::abs(rho - 1.0) > config_.clip) mb_clipped += 1.0;
      }
      clipped_count += mb_clipped;
      if (stats.minibatches == 0) {
        stats.first_minibatch_max_ratio_error = mb_max_dev;
        stats.first_minibatch_clip_fraction = mb_clipped / static_cast<double>(m);
      }
      if (actor_loss_scale != 0.0) {
        nn::Gradient g = actor_.backward(tape, out_grad);
        g.scale(actor_loss_scale);
        nn::clip_grad_norm(g, config_.actor_grad_clip);
        actor_opt_.step(actor_, g);
      }
      actor_loss_sum += actor_loss;

      // Critic.
      nn::Tape ctape;
      const Matrix v = critic_.forward(s, &ctape);
      Matrix vgrad(1, m);
      double critic_loss = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        const double diff = v(0, k) - tgt[static_cast<std::size_t>(k)];
        critic_loss += diff * diff;
        vgrad(0, k) = 2.0 * diff / static_cast<double>(m);
      }
      critic_loss /= static_cast<double>(m);
      if (!std::isfinite(critic_loss)) throw NumericError("non-finite critic loss");
      critic_opt_.step(critic_, critic_.backward(ctape, vgrad));
      critic_loss_sum += critic_loss;
      ++stats.minibatches;
    }
  }
  const double total = static_cast<double>(n) * config_.epochs;
  stats.actor_loss = actor_loss_sum / static_cast<double>(stats.minibatches);
  stats.critic_loss = critic_loss_sum / static_cast<double>(stats.minibatches);
  stats.mean_ratio = ratio_sum / total;
  stats.clip_fraction = clipped_count / total;
  return stats;
}

json PpoAgent::to_json() const {
  return json{{"config", config_.to_json()},
              {"actor", actor_.to_json()},
              {"critic", critic_.to_json()},
              {"actor_opt", actor_opt_.to_json()},
              {"critic_opt", critic_opt_.to_json()}};
}

PpoAgent PpoAgent::from_json(const json& j) {
  PpoAgent a;
  a.config_ = PpoConfig::from_json(j.at("config"));
  a.actor_ = nn::Mlp::from_json(j.at("actor"));
  a.critic_ = nn::Mlp::from_json(j.at("critic"));
  a.actor_opt_ = nn::AdamW::from_json(j.at("actor_opt"));
  a.critic_opt_ = nn::AdamW::from_json(j.at("critic_opt"));
  return a;
}

}  // namespace imdial::ppo
