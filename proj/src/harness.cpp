#include "imdial/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "imdial/error.hpp"
#include "imdial/version.hpp"

namespace imdial {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Stream indices for derive_seed(config.seed, ...).
constexpr std::uint64_t kTrainEpisodes = 1;
constexpr std::uint64_t kEval = 2;
constexpr std::uint64_t kAgentInit = 3;
constexpr std::uint64_t kSampling = 4;
constexpr std::uint64_t kIntrinsicInit = 5;
constexpr std::uint64_t kPretrain = 6;

constexpr int kCheckpointFormat = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path.string());
  return json::parse(in);
}

std::shared_ptr<const World> world_from(Ontology onto, std::uint64_t db_seed) {
  EntityDatabase db = EntityDatabase::generate(onto, db_seed);
  return World::make(std::move(onto), std::move(db), TemplateSet::default_templates());
}

}  // namespace

// ---------------------------------------------------------------------------
// Arms and configuration
// ---------------------------------------------------------------------------

std::string_view arm_name(Arm arm) {
  switch (arm) {
    case Arm::Ppo: return "ppo";
    case Arm::RndDas: return "ppo+rnd-das";
    case Arm::RndUtt: return "ppo+rnd-utt";
    case Arm::IcDas: return "ppo+ic-das";
    case Arm::IcUtt: return "ppo+ic-utt";
  }
  return "ppo";
}

Arm parse_arm(std::string_view name) {
  std::string key;
  for (char c : lower(name)) {
    if (c == '(' || c == '-' || c == '_' || c == ' ') {
      key += '-';
    } else if (c != ')') {
      key += c;
    }
  }
  for (Arm a : all_arms()) {
    if (key == arm_name(a)) return a;
  }
  if (key == "ppo+icm-das") return Arm::IcDas;
  if (key == "ppo+icm-utt") return Arm::IcUtt;
  throw ConfigError("unknown arm: " + std::string(name));
}

const std::array<Arm, 5>& all_arms() {
  static const std::array<Arm, 5> arms{Arm::Ppo, Arm::RndDas, Arm::RndUtt, Arm::IcDas, Arm::IcUtt};
  return arms;
}

json env_config_to_json(const EnvConfig& c) {
  return json{{"max_turns", c.max_turns},
              {"step_reward", c.step_reward},
              {"user",
               {{"max_acts_per_turn", c.user.max_acts_per_turn},
                {"patience", c.user.patience},
                {"slip_prob", c.user.slip_prob}}},
              {"goals",
               {{"domain_count_probs", c.goals.domain_count_probs},
                {"max_constraints", c.goals.max_constraints},
                {"max_requests", c.goals.max_requests},
                {"booking_prob", c.goals.booking_prob}}}};
}

EnvConfig env_config_from_json(const json& j, EnvConfig c) {
  c.max_turns = j.value("max_turns", c.max_turns);
  c.step_reward = j.value("step_reward", c.step_reward);
  if (j.contains("user")) {
    const json& u = j.at("user");
    c.user.max_acts_per_turn = u.value("max_acts_per_turn", c.user.max_acts_per_turn);
    c.user.patience = u.value("patience", c.user.patience);
    c.user.slip_prob = u.value("slip_prob", c.user.slip_prob);
  }
  if (j.contains("goals")) {
    const json& g = j.at("goals");
    c.goals.domain_count_probs = g.value("domain_count_probs", c.goals.domain_count_probs);
    c.goals.max_constraints = g.value("max_constraints", c.goals.max_constraints);
    c.goals.max_requests = g.value("max_requests", c.goals.max_requests);
    c.goals.booking_prob = g.value("booking_prob", c.goals.booking_prob);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (total_steps <= 0) throw ConfigError("total_steps must be positive");
  if (n_eval <= 0) throw ConfigError("n_eval must be positive");
  if (eval_interval <= 0) throw ConfigError("eval_interval must be positive");
  if (keep_checkpoints < 0) throw ConfigError("keep_checkpoints must be >= 0");
  env.validate();
  ppo.validate();
  rnd.validate();
  ic.validate();
}

json RunConfig::to_json() const {
  return json{{"arm", arm_name(arm)},
              {"total_steps", total_steps},
              {"seed", seed},
              {"ontology_path", ontology_path},
              {"database_seed", database_seed},
              {"eval_interval", eval_interval},
              {"n_eval", n_eval},
              {"out_dir", out_dir},
              {"log_episodes", log_episodes},
              {"keep_checkpoints", keep_checkpoints},
              {"env", env_config_to_json(env)},
              {"ppo", ppo.to_json()},
              {"rnd", rnd.to_json()},
              {"ic", ic.to_json()}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (j.contains("arm")) c.arm = parse_arm(j.at("arm").get<std::string>());
  c.total_steps = j.value("total_steps", c.total_steps);
  c.seed = j.value("seed", c.seed);
  c.ontology_path = j.value("ontology_path", c.ontology_path);
  c.database_seed = j.value("database_seed", c.database_seed);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.n_eval = j.value("n_eval", c.n_eval);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.log_episodes = j.value("log_episodes", c.log_episodes);
  c.keep_checkpoints = j.value("keep_checkpoints", c.keep_checkpoints);
  if (j.contains("env")) c.env = env_config_from_json(j.at("env"));
  if (j.contains("ppo")) c.ppo = ppo::PpoConfig::from_json(j.at("ppo"));
  const rnd::Mode mode = c.arm == Arm::RndUtt ? rnd::Mode::Utt : rnd::Mode::DAs;
  c.rnd = rnd::RndConfig::defaults(mode);
  if (j.contains("rnd")) {
    json r = j.at("rnd");
    r.erase("mode");
    c.rnd = rnd::RndConfig::from_json(r, c.rnd);
  }
  if (j.contains("ic")) c.ic = icm::IcConfig::from_json(j.at("ic"));
  c.validate();
  return c;
}

std::shared_ptr<const World> make_world(const RunConfig& config) {
  Ontology onto = config.ontology_path.empty()
                      ? Ontology::default_ontology()
                      : Ontology::from_json(read_json_file(config.ontology_path));
  return world_from(std::move(onto), config.database_seed);
}

// ---------------------------------------------------------------------------
// Analyzer
// ---------------------------------------------------------------------------

Metrics analyze(DialoguePolicy& policy, const std::shared_ptr<const World>& world,
                const EnvConfig& env_config, int n_eval, std::uint64_t seed,
                std::vector<EpisodeLog>* logs, const std::vector<UserGoal>* goal_pool) {
  if (n_eval < 1) throw ArgumentError("n_eval must be >= 1");
  if (goal_pool && goal_pool->empty()) throw ArgumentError("goal pool is empty");
  Environment env(world, env_config);
  std::vector<EpisodeLog> local;
  local.reserve(static_cast<std::size_t>(n_eval));
  for (int i = 0; i < n_eval; ++i) {
    const std::uint64_t ep_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    if (goal_pool) {
      env.reset_with_goal((*goal_pool)[static_cast<std::size_t>(i) % goal_pool->size()], ep_seed);
    } else {
      env.reset(ep_seed);
    }
    policy.begin_dialogue(ep_seed);
    bool done = false;
    while (!done) done = env.step(policy.act(env.state())).done;
    local.push_back(env.log());
  }
  Metrics m = compute_metrics(local);
  if (logs) *logs = std::move(local);
  return m;
}

std::vector<VarianceRow> eval_variance_study(DialoguePolicy& policy,
                                             const std::shared_ptr<const World>& world,
                                             const EnvConfig& env_config,
                                             const std::vector<int>& n_evals, int repeats,
                                             std::uint64_t seed,
                                             const std::vector<UserGoal>* goal_pool) {
  if (repeats < 2) throw ArgumentError("variance study needs repeats >= 2");
  std::vector<VarianceRow> rows;
  for (int n : n_evals) {
    VarianceRow row;
    row.n_eval = n;
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t s = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)),
                                          static_cast<std::uint64_t>(r));
      row.samples.push_back(analyze(policy, world, env_config, n, s, nullptr, goal_pool).success_rate);
    }
    const double k = static_cast<double>(repeats);
    double mean = 0.0;
    for (double x : row.samples) mean += x;
    mean /= k;
    double ss = 0.0;
    for (double x : row.samples) ss += (x - mean) * (x - mean);
    row.mean_success = mean;
    row.std_success = std::sqrt(ss / (k - 1.0));
    row.binomial_std = std::sqrt(mean * (1.0 - mean) / static_cast<double>(n));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string variance_csv(const std::vector<VarianceRow>& rows) {
  std::ostringstream os;
  os << "n_eval,mean_success,std_success,binomial_std\n";
  for (const auto& r : rows) {
    os << r.n_eval << ',' << fmt(r.mean_success) << ',' << fmt(r.std_success) << ','
       << fmt(r.binomial_std) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  world_ = make_world(config_);
  init_modules();
  agent_ = ppo::PpoAgent(index_->state_dim(), index_->action_dim(), config_.ppo,
                         derive_seed(config_.seed, kAgentInit));
  rng_ = Rng(derive_seed(config_.seed, kSampling));
  const std::uint64_t iseed = derive_seed(config_.seed, kIntrinsicInit);
  if (config_.arm == Arm::RndDas) {
    rnd_.emplace(config_.rnd, index_->user_act_dim() + index_->action_dim(), index_->state_dim(), iseed);
  } else if (config_.arm == Arm::RndUtt) {
    rnd_.emplace(config_.rnd, encoder_->embed_dim(), encoder_->embed_dim(), iseed);
  } else if (config_.arm == Arm::IcDas) {
    ic_.emplace(icm::Variant::DAs, config_.ic, index_->state_dim(), index_->action_dim(), iseed);
  } else if (config_.arm == Arm::IcUtt) {
    ic_.emplace(icm::Variant::Utt, config_.ic, encoder_->embed_dim(), index_->action_dim(), iseed);
  }
  next_eval_ = config_.eval_interval;
}

void Trainer::init_modules() {
  index_ = std::make_unique<IndexMap>(world_->ontology, config_.env.max_turns,
                                      config_.env.user.max_acts_per_turn);
  env_ = std::make_unique<Environment>(world_, config_.env);
  if (uses_utt()) {
    encoder_ = std::make_shared<const UtteranceEncoder>(2048, 256, config_.ic.max_length);
  }
}

Eigen::VectorXd Trainer::rnd_input(const ActSet& user, const ActSet& system) const {
  if (config_.arm == Arm::RndUtt) return rnd::utt_input(*encoder_, world_->templates, user, system);
  return rnd::das_input(*index_, user, system);
}

Eigen::VectorXd Trainer::ic_obs(const BeliefState& state) const {
  if (config_.arm == Arm::IcUtt) {
    return rnd::utt_input(*encoder_, world_->templates, state.last_user, state.last_system);
  }
  return index_->encode_state(state);
}

std::uint64_t Trainer::eval_seed() const { return derive_seed(config_.seed, kEval); }

Metrics Trainer::evaluate(int n_eval, std::uint64_t seed) const {
  ActorPolicy policy(agent_.actor(), *index_);
  return analyze(policy, world_, config_.env, n_eval, seed);
}

bool Trainer::iterate() {
  if (finished()) return false;
  const bool ic_arm = uses_ic();
  const bool rnd_arm = uses_rnd();

  if (ic_arm && !ic_pretrained_) {
    Environment pre_env(world_, config_.env);
    icm::ic_pretrain(*ic_, pre_env, *index_, icm::uniform_catalog_policy(*index_),
                     [this](const BeliefState& b) { return ic_obs(b); },
                     derive_seed(config_.seed, kPretrain), config_.ppo.minibatch);
    ic_pretrained_ = true;
  }

  const bool rnd_live = rnd_arm && rnd_->warmed_up();
  std::vector<std::vector<ppo::Transition>> episodes;
  std::vector<Eigen::VectorXd> rnd_inputs;
  std::vector<double> step_eta;
  std::vector<icm::IcSample> ic_samples;
  std::ofstream episode_log;
  if (config_.log_episodes && !config_.out_dir.empty()) {
    episode_log.open(fs::path(config_.out_dir) / "episodes.jsonl", std::ios::app);
  }

  for (int d = 0; d < config_.ppo.batch_dialogues; ++d) {
    env_->reset(derive_seed(derive_seed(config_.seed, kTrainEpisodes),
                            static_cast<std::uint64_t>(episode_count_)));
    ++episode_count_;
    std::vector<ppo::Transition> traj;
    bool done = false;
    while (!done) {
      const BeliefState& before = env_->state();
      Eigen::VectorXd s = index_->encode_state(before);
      ppo::ActionSample a =
          ppo::policy_act(agent_.actor(), s, ppo::ActMode::Sample, rng_, config_.ppo.prob_floor);
      const double v = agent_.value(s);
      Eigen::VectorXd obs_before;
      if (ic_arm) obs_before = ic_obs(before);
      const StepResult r = env_->step(index_->decode_action(a.bits));
      ++step_count_;
      done = r.done;
      traj.push_back({std::move(s), std::move(a.bits), a.log_prob, r.extrinsic_reward, 0.0, r.done, v});
      if (rnd_arm) {
        rnd_inputs.push_back(rnd_input(r.user_acts, r.system_acts));
        step_eta.push_back(rnd_live ? rnd_->anneal_eta() : 0.0);
      }
      if (ic_arm) {
        ic_samples.push_back({std::move(obs_before), index_->encode_action(r.system_acts),
                              ic_obs(r.next_state)});
      }
    }
    if (on_episode) on_episode(env_->log());
    if (episode_log.is_open()) episode_log << env_->log().to_json().dump() << '\n';
    episodes.push_back(std::move(traj));
  }

  BatchReport report;
  std::vector<double> r_int;
  if (rnd_arm) {
    Eigen::MatrixXd x(rnd_->input_dim(), static_cast<Eigen::Index>(rnd_inputs.size()));
    for (std::size_t i = 0; i < rnd_inputs.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = rnd_inputs[i];
    const std::vector<double> errors = rnd_->raw_errors(x);
    rnd_->observe_errors(errors);
    r_int.resize(errors.size(), 0.0);
    if (rnd_live) {
      for (std::size_t i = 0; i < errors.size(); ++i) {
        r_int[i] = std::max(0.0, step_eta[i] * rnd_->normalized_error(errors[i]));
      }
    }
    report.predictor_loss = rnd_->update(x);
    rnd_->note_episodes(config_.ppo.batch_dialogues);
    report.eta = rnd_->eta();
  } else if (ic_arm) {
    r_int.reserve(ic_samples.size());
    for (const auto& smp : ic_samples) r_int.push_back(ic_->intrinsic_reward(smp));
    report.ic = ic_->update(ic_samples, icm::TrainMode::Joint, 1.0 - config_.ic.lambda_pol);
    report.eta = config_.ic.eta;
  }
  if (!r_int.empty()) {
    std::size_t k = 0;
    double total = 0.0;
    for (auto& ep : episodes) {
      for (auto& t : ep) {
        t.intrinsic_reward = r_int[k++];
        total += t.intrinsic_reward;
      }
    }
    report.mean_r_int = total / static_cast<double>(r_int.size());
  }
  report.ppo = agent_.update(episodes, rng_, ic_arm ? config_.ic.lambda_pol : 1.0);
  report.steps = 0;
  for (const auto& ep : episodes) report.steps += static_cast<std::int64_t>(ep.size());
  last_batch_ = report;

  accum_.actor_loss += report.ppo.actor_loss;
  accum_.critic_loss += report.ppo.critic_loss;
  accum_.ratio += report.ppo.mean_ratio;
  accum_.clip += report.ppo.clip_fraction;
  accum_.r_int += report.mean_r_int;
  accum_.eta = report.eta;
  if (report.predictor_loss) accum_.predictor_loss += *report.predictor_loss;
  if (report.ic) {
    accum_.forward_loss += report.ic->forward_loss;
    accum_.inverse_loss += report.ic->inverse_loss;
    accum_.inverse_accuracy += report.ic->inverse_accuracy;
  }
  ++accum_.batches;
  if (on_batch) on_batch(*this, r_int);

  std::optional<Metrics> metrics;
  std::int64_t boundary = -1;
  while (next_eval_ <= config_.total_steps && step_count_ >= next_eval_) {
    if (!metrics) metrics = evaluate(config_.n_eval, eval_seed());
    csv_rows_.push_back(format_row(next_eval_, *metrics));
    boundary = next_eval_;
    next_eval_ += config_.eval_interval;
  }
  if (boundary >= 0) {
    accum_ = Accum{};
    write_outputs(true, boundary);
  }
  return true;
}

std::string Trainer::format_row(std::int64_t step, const Metrics& m) const {
  const double n = std::max(1, accum_.batches);
  std::ostringstream os;
  os << step << ',' << fmt(m.complete_rate) << ',' << fmt(m.success_rate) << ','
     << fmt(m.book_rate) << ',' << fmt(m.avg_turns) << ',' << fmt(m.avg_return) << ','
     << fmt(accum_.actor_loss / n) << ',' << fmt(accum_.critic_loss / n) << ','
     << fmt(accum_.ratio / n) << ',' << fmt(accum_.clip / n) << ',';
  if (uses_rnd() || uses_ic()) {
    os << fmt(accum_.r_int / n) << ',' << fmt(accum_.eta) << ',';
  } else {
    os << ",,";
  }
  os << (uses_rnd() ? fmt(accum_.predictor_loss / n) : "") << ',';
  if (uses_ic()) {
    os << fmt(accum_.forward_loss / n) << ',' << fmt(accum_.inverse_loss / n) << ','
       << fmt(accum_.inverse_accuracy / n);
  } else {
    os << ",,";
  }
  return os.str();
}

std::string Trainer::csv_text() const {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : csv_rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

void Trainer::write_manifest() const {
  if (config_.out_dir.empty()) return;
  fs::create_directories(config_.out_dir);
  json m{{"version", kVersion},
         {"seed", config_.seed},
         {"arm", arm_name(config_.arm)},
         {"config", config_.to_json()},
         {"state_dim", index_->state_dim()},
         {"action_dim", index_->action_dim()},
         {"user_act_dim", index_->user_act_dim()},
         {"csv_header", kCsvHeader}};
  if (rnd_) m["rnd_target_checksum"] = rnd_->target_checksum();
  if (encoder_) m["utterance_projection_checksum"] = encoder_->checksum();
  write_file(fs::path(config_.out_dir) / "manifest.json", m.dump(2) + "\n");
}

void Trainer::write_outputs(bool with_checkpoint, std::int64_t boundary) {
  if (config_.out_dir.empty()) return;
  const fs::path dir(config_.out_dir);
  fs::create_directories(dir);
  write_file(dir / "metrics.csv", csv_text());
  if (!with_checkpoint) return;
  fs::create_directories(dir / "checkpoints");
  const fs::path ckpt = dir / "checkpoints" / ("step_" + std::to_string(boundary) + ".json");
  write_file(ckpt, checkpoint_json().dump());
  written_checkpoints_.push_back(ckpt);
  if (config_.keep_checkpoints > 0) {
    while (written_checkpoints_.size() > static_cast<std::size_t>(config_.keep_checkpoints)) {
      fs::remove(written_checkpoints_.front());
      written_checkpoints_.erase(written_checkpoints_.begin());
    }
  }
}

void Trainer::write_diagnostic(const std::string& what) const {
  if (config_.out_dir.empty()) return;
  json d{{"error", what},
         {"step", step_count_},
         {"episode", episode_count_},
         {"actor_loss", last_batch_.ppo.actor_loss},
         {"critic_loss", last_batch_.ppo.critic_loss},
         {"mean_ratio", last_batch_.ppo.mean_ratio},
         {"mean_r_int", last_batch_.mean_r_int}};
  if (rnd_) d["eta"] = rnd_->eta();
  if (last_batch_.predictor_loss) d["predictor_loss"] = *last_batch_.predictor_loss;
  try {
    fs::create_directories(config_.out_dir);
    write_file(fs::path(config_.out_dir) / "diagnostic.json", d.dump(2) + "\n");
  } catch (const std::exception&) {
    // The original error matters more than a failed dump.
  }
}

void Trainer::run() {
  write_manifest();
  if (!config_.out_dir.empty() && csv_rows_.empty()) write_outputs(false, 0);
  try {
    while (iterate()) {
    }
  } catch (const Error& e) {
    write_diagnostic(e.what());
    throw;
  }
}

json Trainer::checkpoint_json() const {
  json a = {{"actor_loss", accum_.actor_loss},
            {"critic_loss", accum_.critic_loss},
            {"ratio", accum_.ratio},
            {"clip", accum_.clip},
            {"r_int", accum_.r_int},
            {"eta", accum_.eta},
            {"predictor_loss", accum_.predictor_loss},
            {"forward_loss", accum_.forward_loss},
            {"inverse_loss", accum_.inverse_loss},
            {"inverse_accuracy", accum_.inverse_accuracy},
            {"batches", accum_.batches}};
  json j{{"format", kCheckpointFormat},
         {"version", kVersion},
         {"config", config_.to_json()},
         {"ontology", world_->ontology.to_json()},
         {"step_count", step_count_},
         {"episode_count", episode_count_},
         {"next_eval", next_eval_},
         {"rng", rng_.serialize()},
         {"agent", agent_.to_json()},
         {"ic_pretrained", ic_pretrained_},
         {"accum", a},
         {"csv_rows", csv_rows_}};
  if (rnd_) j["rnd"] = rnd_->to_json();
  if (ic_) j["ic"] = ic_->to_json();
  return j;
}

Trainer Trainer::from_checkpoint(const json& j, std::optional<std::string> out_dir) {
  if (j.value("format", 0) != kCheckpointFormat) throw StateError("unsupported checkpoint format");
  Trainer t;
  t.config_ = RunConfig::from_json(j.at("config"));
  if (out_dir) t.config_.out_dir = *out_dir;
  t.world_ = world_from(Ontology::from_json(j.at("ontology")), t.config_.database_seed);
  t.init_modules();
  t.step_count_ = j.at("step_count").get<std::int64_t>();
  t.episode_count_ = j.at("episode_count").get<std::int64_t>();
  t.next_eval_ = j.at("next_eval").get<std::int64_t>();
  t.rng_.deserialize(j.at("rng").get<std::string>());
  t.agent_ = ppo::PpoAgent::from_json(j.at("agent"));
  t.ic_pretrained_ = j.at("ic_pretrained").get<bool>();
  const json& a = j.at("accum");
  t.accum_.actor_loss = a.at("actor_loss");
  t.accum_.critic_loss = a.at("critic_loss");
  t.accum_.ratio = a.at("ratio");
  t.accum_.clip = a.at("clip");
  t.accum_.r_int = a.at("r_int");
  t.accum_.eta = a.at("eta");
  t.accum_.predictor_loss = a.at("predictor_loss");
  t.accum_.forward_loss = a.at("forward_loss");
  t.accum_.inverse_loss = a.at("inverse_loss");
  t.accum_.inverse_accuracy = a.at("inverse_accuracy");
  t.accum_.batches = a.at("batches");
  t.csv_rows_ = j.at("csv_rows").get<std::vector<std::string>>();
  if (j.contains("rnd")) t.rnd_ = rnd::RndModel::from_json(j.at("rnd"));
  if (j.contains("ic")) t.ic_ = icm::IcModel::from_json(j.at("ic"));
  if (t.uses_rnd() != t.rnd_.has_value() || t.uses_ic() != t.ic_.has_value()) {
    throw StateError("checkpoint modules do not match its arm");
  }
  return t;
}

Trainer Trainer::resume(const fs::path& checkpoint, std::optional<std::string> out_dir) {
  return from_checkpoint(read_json_file(checkpoint), std::move(out_dir));
}

}  // namespace imdial
