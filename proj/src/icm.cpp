#include "imdial/icm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imdial/error.hpp"

namespace imdial::icm {

using nlohmann::json;

std::string_view variant_name(Variant v) { return v == Variant::DAs ? "das" : "utt"; }

Variant parse_variant(std::string_view s) {
  if (s == "das" || s == "DAs") return Variant::DAs;
  if (s == "utt" || s == "Utt") return Variant::Utt;
  throw ConfigError("unknown curiosity variant: " + std::string(s));
}

void IcConfig::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(beta_das) || !unit(beta_utt) || !unit(beta_joint)) throw ConfigError("beta must be in [0, 1]");
  if (!unit(lambda_pol)) throw ConfigError("lambda_pol must be in [0, 1]");
  if (!(eta > 0.0)) throw ConfigError("curiosity eta must be positive");
  if (pretrain_steps < 0 || update_rounds < 1 || pretrain_epochs < 1) {
    throw ConfigError("invalid curiosity step counts");
  }
  if (inverse_hidden < 1 || forward_hidden < 1 || feature_dim < 1 || encoder_hidden < 1) {
    throw ConfigError("curiosity layer sizes must be >= 1");
  }
  if (!(grad_clip > 0.0)) throw ConfigError("curiosity grad_clip must be positive");
}

json IcConfig::to_json() const {
  return json{{"pretrain_steps", pretrain_steps}, {"lr_pretrain", lr_pretrain},
              {"lr_joint", lr_joint},             {"update_rounds", update_rounds},
              {"grad_clip", grad_clip},           {"eta", eta},
              {"beta_das", beta_das},             {"beta_utt", beta_utt},
              {"beta_joint", beta_joint},         {"lambda_pol", lambda_pol},
              {"inverse_hidden", inverse_hidden}, {"forward_hidden", forward_hidden},
              {"feature_dim", feature_dim},       {"encoder_hidden", encoder_hidden},
              {"max_length", max_length},         {"pretrain_epochs", pretrain_epochs},
              {"weight_decay", weight_decay}};
}

IcConfig IcConfig::from_json(const json& j) { return from_json(j, IcConfig{}); }

IcConfig IcConfig::from_json(const json& j, IcConfig c) {
  c.pretrain_steps = j.value("pretrain_steps", c.pretrain_steps);
  c.lr_pretrain = j.value("lr_pretrain", c.lr_pretrain);
  c.lr_joint = j.value("lr_joint", c.lr_joint);
  c.update_rounds = j.value("update_rounds", c.update_rounds);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.eta = j.value("eta", c.eta);
  c.beta_das = j.value("beta_das", c.beta_das);
  c.beta_utt = j.value("beta_utt", c.beta_utt);
  c.beta_joint = j.value("beta_joint", c.beta_joint);
  c.lambda_pol = j.value("lambda_pol", c.lambda_pol);
  c.inverse_hidden = j.value("inverse_hidden", c.inverse_hidden);
  c.forward_hidden = j.value("forward_hidden", c.forward_hidden);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
  c.max_length = j.value("max_length", c.max_length);
  c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.validate();
  return c;
}

IcModel::IcModel(Variant variant, IcConfig config, int obs_dim, int action_dim, std::uint64_t seed)
    : variant_(variant), config_(config), action_dim_(action_dim) {
  config_.validate();
  const int fd = config_.feature_dim;
  Rng erng(derive_seed(seed, 0));
  if (variant_ == Variant::DAs) {
    encoder_ = nn::Mlp({obs_dim, config_.encoder_hidden, fd}, erng);
  } else {
    encoder_ = nn::Mlp({obs_dim, fd}, erng);
  }
  Rng frng(derive_seed(seed, 1));
  forward_ = nn::Mlp({fd + action_dim, config_.forward_hidden, fd}, frng);
  Rng irng(derive_seed(seed, 2));
  inverse_ = nn::Mlp({2 * fd, config_.inverse_hidden, action_dim}, irng);
  const nn::AdamWConfig oc{config_.lr_pretrain, 0.9, 0.999, 1e-8, config_.weight_decay};
  encoder_opt_ = nn::AdamW(encoder_, oc);
  forward_opt_ = nn::AdamW(forward_, oc);
  inverse_opt_ = nn::AdamW(inverse_, oc);
}

Vector IcModel::features(const Vector& obs) const { return encoder_.forward_one(obs); }

double IcModel::forward_error(const IcSample& s) const {
  const Vector phi = features(s.obs);
  Vector in(phi.size() + s.action.size());
  in << phi, s.action;
  return (forward_.forward_one(in) - features(s.next_obs)).squaredNorm();
}

double IcModel::intrinsic_reward(const IcSample& s) const {
  return config_.eta * forward_error(s);
}

double IcModel::beta_for(TrainMode mode) const {
  if (mode == TrainMode::Joint) return config_.beta_joint;
  return variant_ == Variant::DAs ? config_.beta_das : config_.beta_utt;
}

namespace {

struct Batch {
  Matrix obs, action, next_obs;
};

Batch stack(std::span<const IcSample> batch, int obs_dim, int action_dim) {
  if (batch.empty()) throw ArgumentError("curiosity batch is empty");
  const auto n = static_cast<Eigen::Index>(batch.size());
  Batch b{Matrix(obs_dim, n), Matrix(action_dim, n), Matrix(obs_dim, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const IcSample& s = batch[static_cast<std::size_t>(i)];
    if (s.obs.size() != obs_dim || s.next_obs.size() != obs_dim || s.action.size() != action_dim) {
      throw ShapeError("curiosity sample has the wrong shape");
    }
    b.obs.col(i) = s.obs;
    b.action.col(i) = s.action;
    b.next_obs.col(i) = s.next_obs;
  }
  return b;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

struct Pass {
  nn::Tape enc, enc_next, fwd, inv;
  Matrix phi, phi_next, pred, logits;
  IcStats stats;
};

Pass run_pass(const nn::Mlp& encoder, const nn::Mlp& fwd, const nn::Mlp& inv, const Batch& b,
              double beta, bool record) {
  Pass p;
  p.phi = encoder.forward(b.obs, record ? &p.enc : nullptr);
  p.phi_next = encoder.forward(b.next_obs, record ? &p.enc_next : nullptr);
  Matrix fin(p.phi.rows() + b.action.rows(), p.phi.cols());
  fin << p.phi, b.action;
  p.pred = fwd.forward(fin, record ? &p.fwd : nullptr);
  Matrix iin(2 * p.phi.rows(), p.phi.cols());
  iin << p.phi, p.phi_next;
  p.logits = inv.forward(iin, record ? &p.inv : nullptr);

  const double n = static_cast<double>(b.obs.cols());
  p.stats.forward_loss = (p.pred - p.phi_next).colwise().squaredNorm().sum() / n;
  double bce = 0.0, correct = 0.0;
  for (Eigen::Index c = 0; c < p.logits.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.logits.rows(); ++r) {
      const double z = p.logits(r, c);
      const double y = b.action(r, c);
      bce += softplus(z) - z * y;
      if ((z > 0.0) == (y > 0.5)) correct += 1.0;
    }
  }
  const double cells = static_cast<double>(p.logits.size());
  p.stats.inverse_loss = bce / cells;
  p.stats.inverse_accuracy = correct / cells;
  p.stats.combined_loss = (1.0 - beta) * p.stats.inverse_loss + beta * p.stats.forward_loss;
  return p;
}

}  // namespace

IcStats IcModel::evaluate(std::span<const IcSample> batch) const {
  return evaluate(batch, beta_for(TrainMode::Pretrain));
}

IcStats IcModel::evaluate(std::span<const IcSample> batch, double beta) const {
  const Batch b = stack(batch, obs_dim(), action_dim_);
  return run_pass(encoder_, forward_, inverse_, b, beta, false).stats;
}

IcStats IcModel::update(std::span<const IcSample> batch, TrainMode mode, double grad_scale) {
  const double lr = mode == TrainMode::Joint ? config_.lr_joint : config_.lr_pretrain;
  return update_with_beta(batch, beta_for(mode), lr, grad_scale);
}

IcStats IcModel::update_with_beta(std::span<const IcSample> batch, double beta, double lr,
                                  double grad_scale) {
  const Batch b = stack(batch, obs_dim(), action_dim_);
  const double n = static_cast<double>(b.obs.cols());
  const Eigen::Index fd = config_.feature_dim;
  encoder_opt_.set_lr(lr);
  forward_opt_.set_lr(lr);
  inverse_opt_.set_lr(lr);
  IcStats last;
  for (int round = 0; round < config_.update_rounds; ++round) {
    Pass p = run_pass(encoder_, forward_, inverse_, b, beta, true);
    last = p.stats;
    if (!std::isfinite(last.combined_loss)) throw NumericError("non-finite curiosity loss");

    // phi(s') is a fixed target for the forward model.
    const Matrix dpred = (beta * 2.0 / n) * (p.pred - p.phi_next);
    Matrix dlogits(p.logits.rows(), p.logits.cols());
    const double cells = static_cast<double>(p.logits.size());
    for (Eigen::Index c = 0; c < p.logits.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.logits.rows(); ++r) {
        dlogits(r, c) = (1.0 - beta) * (sigmoid(p.logits(r, c)) - b.action(r, c)) / cells;
      }
    }
    nn::Gradient gf = forward_.backward(p.fwd, dpred);
    nn::Gradient gi = inverse_.backward(p.inv, dlogits);
    const Matrix dphi = gf.input.topRows(fd) + gi.input.topRows(fd);
    const Matrix dphi_next = gi.input.bottomRows(fd);
    nn::Gradient ge = encoder_.backward(p.enc, dphi);
    ge += encoder_.backward(p.enc_next, dphi_next);

    gf.scale(grad_scale);
    gi.scale(grad_scale);
    ge.scale(grad_scale);
    nn::Gradient* all[] = {&ge, &gf, &gi};
    nn::clip_grad_norm(all, config_.grad_clip);
    encoder_opt_.step(encoder_, ge);
    forward_opt_.step(forward_, gf);
    inverse_opt_.step(inverse_, gi);
  }
  return last;
}

std::uint64_t IcModel::checksum() const {
  return mix_seed(encoder_.checksum() ^ mix_seed(forward_.checksum() ^ mix_seed(inverse_.checksum())));
}

json IcModel::to_json() const {
  return json{{"variant", variant_name(variant_)},
              {"config", config_.to_json()},
              {"action_dim", action_dim_},
              {"encoder", encoder_.to_json()},
              {"forward", forward_.to_json()},
              {"inverse", inverse_.to_json()},
              {"encoder_opt", encoder_opt_.to_json()},
              {"forward_opt", forward_opt_.to_json()},
              {"inverse_opt", inverse_opt_.to_json()}};
}

IcModel IcModel::from_json(const json& j) {
  IcModel m;
  m.variant_ = parse_variant(j.at("variant").get<std::string>());
  m.config_ = IcConfig::from_json(j.at("config"));
  m.action_dim_ = j.at("action_dim").get<int>();
  m.encoder_ = nn::Mlp::from_json(j.at("encoder"));
  m.forward_ = nn::Mlp::from_json(j.at("forward"));
  m.inverse_ = nn::Mlp::from_json(j.at("inverse"));
  m.encoder_opt_ = nn::AdamW::from_json(j.at("encoder_opt"));
  m.forward_opt_ = nn::AdamW::from_json(j.at("forward_opt"));
  m.inverse_opt_ = nn::AdamW::from_json(j.at("inverse_opt"));
  return m;
}

double ic_joint_loss(double ic_loss, double policy_loss, double lambda_pol) {
  if (!std::isfinite(ic_loss) || !std::isfinite(policy_loss)) {
    throw ArgumentError("joint loss inputs must be finite");
  }
  if (lambda_pol < 0.0 || lambda_pol > 1.0) throw ArgumentError("lambda_pol must be in [0, 1]");
  return lambda_pol * policy_loss + (1.0 - lambda_pol) * ic_loss;
}

BehaviorPolicy uniform_catalog_policy(const IndexMap& index) {
  const auto& catalog = index.system_catalog();
  const int max_acts = index.max_acts_per_turn();
  return [catalog, max_acts](const BeliefState&, Rng& rng) {
    const std::size_t k = 1 + rng.uniform_index(static_cast<std::size_t>(max_acts));
    std::vector<std::size_t> order(catalog.size());
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k && i < order.size(); ++i) {
      std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
    }
    ActSet acts(static_cast<std::size_t>(max_acts));
    for (std::size_t i = 0; i < k && i < order.size(); ++i) acts.insert(catalog[order[i]]);
    return acts;
  };
}

std::vector<IcSample> collect_transitions(Environment& env, const IndexMap& index,
                                          const BehaviorPolicy& behavior, const ObsFn& obs,
                                          int steps, std::uint64_t seed) {
  std::vector<IcSample> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  Rng rng(derive_seed(seed, 0));
  std::uint64_t episode = 0;
  env.reset(derive_seed(seed, 1000 + episode));
  while (static_cast<int>(out.size()) < steps) {
    const BeliefState before = env.state();
    const ActSet acts = behavior(before, rng);
    const StepResult r = env.step(acts);
    out.push_back({obs(before), index.encode_action(r.system_acts), obs(r.next_state)});
    if (r.done) {
      ++episode;
      env.reset(derive_seed(seed, 1000 + episode));
    }
  }
  return out;
}

std::vector<IcSample> ic_pretrain(IcModel& model, Environment& env, const IndexMap& index,
                                  const BehaviorPolicy& behavior, const ObsFn& obs,
                                  std::uint64_t seed, int minibatch) {
  if (minibatch < 1) throw ArgumentError("minibatch must be >= 1");
  std::vector<IcSample> data =
      collect_transitions(env, index, behavior, obs, model.config().pretrain_steps, seed);
  if (data.empty()) return data;
  Rng rng(derive_seed(seed, 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<IcSample> mb;
  for (int epoch = 0; epoch < model.config().pretrain_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(minibatch));
      mb.clear();
      for (std::size_t i = start; i < end; ++i) mb.push_back(data[order[i]]);
      model.update(mb, TrainMode::Pretrain);
    }
  }
  return data;
}

}  // namespace imdial::icm
