#include "imdial/rnd.hpp"

#include <cmath>

#include "imdial/error.hpp"

namespace imdial::rnd {

using nlohmann::json;

std::string_view mode_name(Mode m) { return m == Mode::DAs ? "das" : "utt"; }

Mode parse_mode(std::string_view s) {
  if (s == "das" || s == "DAs") return Mode::DAs;
  if (s == "utt" || s == "Utt") return Mode::Utt;
  throw ConfigError("unknown rnd mode: " + std::string(s));
}

RndConfig RndConfig::defaults(Mode mode) {
  RndConfig c;
  c.mode = mode;
  if (mode == Mode::Utt) {
    c.eta0 = 1.0;
    c.warmup_episodes = 200;
    c.moving_average_period = 10;
    c.update_rounds = 1;
    c.annealing_steps = 50000;
  }
  return c;
}

void RndConfig::validate() const {
  if (!(eta0 > 0.0)) throw ConfigError("rnd eta0 must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("rnd alpha must be in (0, 1)");
  if (warmup_episodes < 1 || moving_average_period < 1 || update_rounds < 1 ||
      annealing_steps < 1 || hidden < 1) {
    throw ConfigError("rnd counts must be >= 1");
  }
  if (!(lr > 0.0) || !(grad_clip > 0.0)) throw ConfigError("rnd lr and grad_clip must be positive");
}

json RndConfig::to_json() const {
  return json{{"mode", mode_name(mode)},
              {"eta0", eta0},
              {"alpha", alpha},
              {"warmup_episodes", warmup_episodes},
              {"moving_average_period", moving_average_period},
              {"update_rounds", update_rounds},
              {"lr", lr},
              {"grad_clip", grad_clip},
              {"annealing_steps", annealing_steps},
              {"hidden", hidden},
              {"weight_decay", weight_decay},
              {"normalize", normalize},
              {"std_floor", std_floor}};
}

RndConfig RndConfig::from_json(const json& j, RndConfig c) {
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  c.eta0 = j.value("eta0", c.eta0);
  c.alpha = j.value("alpha", c.alpha);
  c.warmup_episodes = j.value("warmup_episodes", c.warmup_episodes);
  c.moving_average_period = j.value("moving_average_period", c.moving_average_period);
  c.update_rounds = j.value("update_rounds", c.update_rounds);
  c.lr = j.value("lr", c.lr);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.annealing_steps = j.value("annealing_steps", c.annealing_steps);
  c.hidden = j.value("hidden", c.hidden);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.normalize = j.value("normalize", c.normalize);
  c.std_floor = j.value("std_floor", c.std_floor);
  c.validate();
  return c;
}

Vector das_input(const IndexMap& index, const ActSet& user_acts, const ActSet& system_acts) {
  Vector out(index.user_act_dim() + index.action_dim());
  out << index.encode_user_acts(user_acts), index.encode_action(system_acts);
  return out;
}

Vector utt_input(const UtteranceEncoder& encoder, const TemplateSet& templates,
                 const ActSet& user_acts, const ActSet& system_acts) {
  const std::string user = user_acts.empty() ? "" : realize(templates, user_acts, Speaker::User).text;
  const std::string sys =
      system_acts.empty() ? "" : realize(templates, system_acts, Speaker::System).text;
  return encoder.encode(user, sys);
}

RndModel::RndModel(RndConfig config, int input_dim, int output_dim, std::uint64_t seed)
    : config_(config), target_seed_(derive_seed(seed, 0)) {
  config_.validate();
  Rng trng(target_seed_);
  target_ = nn::Mlp({input_dim, config_.hidden, output_dim}, trng);
  Rng prng(derive_seed(seed, 1));
  predictor_ = nn::Mlp({input_dim, config_.hidden, output_dim}, prng);
  opt_ = nn::AdamW(predictor_, {config_.lr, 0.9, 0.999, 1e-8, config_.weight_decay});
  eta_ = config_.eta0;
}

std::vector<double> RndModel::raw_errors(const Matrix& inputs) const {
  const Matrix diff = predictor_.forward(inputs) - target_.forward(inputs);
  std::vector<double> out(static_cast<std::size_t>(diff.cols()));
  for (Eigen::Index c = 0; c < diff.cols(); ++c) out[static_cast<std::size_t>(c)] = diff.col(c).squaredNorm();
  return out;
}

double RndModel::raw_error(const Vector& input) const {
  return (predictor_.forward_one(input) - target_.forward_one(input)).squaredNorm();
}

double RndModel::running_std() const {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  // Pairwise merge of per-batch moments.
  for (const auto& b : window_) {
    if (b.count == 0.0) continue;
    const double total = n + b.count;
    const double delta = b.mean - mean;
    mean += delta * b.count / total;
    m2 += b.m2 + delta * delta * n * b.count / total;
    n = total;
  }
  if (n < 2.0) return 1.0;
  return std::max(std::sqrt(m2 / n), config_.std_floor);
}

double RndModel::normalized_error(double e) const {
  return config_.normalize ? e / running_std() : e;
}

double RndModel::intrinsic_reward_from_error(double e) const {
  if (!warmed_up()) return 0.0;
  return std::max(0.0, eta_ * normalized_error(e));
}

double RndModel::intrinsic_reward(const Vector& input) const {
  if (!warmed_up()) return 0.0;
  return intrinsic_reward_from_error(raw_error(input));
}

void RndModel::observe_errors(std::span<const double> errors) {
  if (errors.empty()) return;
  BatchStats b;
  for (double e : errors) {
    b.count += 1.0;
    const double delta = e - b.mean;
    b.mean += delta / b.count;
    b.m2 += delta * (e - b.mean);
  }
  window_.push_back(b);
  while (window_.size() > static_cast<std::size_t>(config_.moving_average_period)) {
    window_.pop_front();
  }
}

double RndModel::update(const Matrix& inputs) {
  if (inputs.cols() == 0) throw ArgumentError("rnd update needs a non-empty batch");
  const Matrix target_out = target_.forward(inputs);
  const double n = static_cast<double>(inputs.cols());
  double loss = 0.0;
  for (int round = 0; round < config_.update_rounds; ++round) {
    nn::Tape tape;
    const Matrix diff = predictor_.forward(inputs, &tape) - target_out;
    loss = diff.colwise().squaredNorm().sum() / n;
    if (!std::isfinite(loss)) throw NumericError("non-finite rnd predictor loss");
    nn::Gradient g = predictor_.backward(tape, (2.0 / n) * diff);
    nn::clip_grad_norm(g, config_.grad_clip);
    opt_.step(predictor_, g);
  }
  return loss;
}

double RndModel::anneal_eta() {
  if (anneal_steps_ < config_.annealing_steps) {
    eta_ *= 1.0 - config_.alpha;
    ++anneal_steps_;
  }
  return eta_;
}

json RndModel::to_json() const {
  json window = json::array();
  for (const auto& b : window_) window.push_back({b.count, b.mean, b.m2});
  return json{{"config", config_.to_json()},
              {"input_dim", target_.input_dim()},
              {"output_dim", target_.output_dim()},
              {"target_seed", target_seed_},
              {"target_checksum", target_.checksum()},
              {"predictor", predictor_.to_json()},
              {"optimizer", opt_.to_json()},
              {"eta", eta_},
              {"anneal_steps", anneal_steps_},
              {"episodes_seen", episodes_seen_},
              {"window", window}};
}

RndModel RndModel::from_json(const json& j) {
  RndModel m;
  m.config_ = RndConfig::from_json(j.at("config"), RndConfig{});
  m.target_seed_ = j.at("target_seed").get<std::uint64_t>();
  Rng trng(m.target_seed_);
  m.target_ = nn::Mlp({j.at("input_dim").get<int>(), m.config_.hidden, j.at("output_dim").get<int>()},
                      trng);
  if (m.target_.checksum() != j.at("target_checksum").get<std::uint64_t>()) {
    throw StateError("rnd target network does not match its recorded checksum");
  }
  m.predictor_ = nn::Mlp::from_json(j.at("predictor"));
  m.opt_ = nn::AdamW::from_json(j.at("optimizer"));
  m.eta_ = j.at("eta").get<double>();
  m.anneal_steps_ = j.at("anneal_steps").get<std::int64_t>();
  m.episodes_seen_ = j.at("episodes_seen").get<std::int64_t>();
  for (const auto& b : j.at("window")) {
    m.window_.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()});
  }
  return m;
}

}  // namespace imdial::rnd
