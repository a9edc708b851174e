// Command-line front end: train, evaluate, variance-study, dump-layout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imdial/error.hpp"
#include "imdial/harness.hpp"
#include "imdial/version.hpp"

using namespace imdial;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path);
  return json::parse(in);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw ArgumentError("empty list: " + text);
  return out;
}

json metrics_json(const Metrics& m) {
  json j{{"complete_rate", m.complete_rate}, {"success_rate", m.success_rate},
         {"n_dialogues", m.n_dialogues},     {"n_bookable", m.n_bookable},
         {"avg_turns", m.avg_turns},         {"avg_return", m.avg_return}};
  j["book_rate"] = m.book_rate ? json(*m.book_rate) : json(nullptr);
  return j;
}

struct PolicySource {
  std::string checkpoint;
  std::string policy = "actor";
  std::string ontology;
  std::uint64_t database_seed = 0;
};

// World, env config and policy for evaluate / variance-study.
struct Loaded {
  std::shared_ptr<const World> world;
  EnvConfig env;
  std::unique_ptr<IndexMap> index;
  std::unique_ptr<DialoguePolicy> policy;
};

Loaded load_policy(const PolicySource& src) {
  Loaded l;
  if (!src.checkpoint.empty()) {
    Trainer t = Trainer::resume(src.checkpoint, std::string());
    l.world = t.world();
    l.env = t.config().env;
    l.index = std::make_unique<IndexMap>(t.index());
    if (src.policy == "actor") {
      l.policy = std::make_unique<ActorPolicy>(t.agent().actor(), *l.index);
      return l;
    }
  } else {
    RunConfig rc;
    rc.ontology_path = src.ontology;
    rc.database_seed = src.database_seed;
    l.world = make_world(rc);
    l.index = std::make_unique<IndexMap>(l.world->ontology, l.env.max_turns,
                                         l.env.user.max_acts_per_turn);
  }
  if (src.policy == "oracle") {
    l.policy = std::make_unique<OraclePolicy>(l.env.user.max_acts_per_turn);
  } else if (src.policy == "empty") {
    l.policy = std::make_unique<EmptyPolicy>();
  } else if (src.policy == "random") {
    l.policy = std::make_unique<RandomPolicy>(*l.index);
  } else {
    throw ArgumentError("policy '" + src.policy + "' needs --checkpoint or is unknown");
  }
  return l;
}

void add_policy_options(CLI::App* cmd, PolicySource& src) {
  cmd->add_option("--checkpoint", src.checkpoint, "Trainer checkpoint (actor policy)");
  cmd->add_option("--policy", src.policy, "actor | oracle | empty | random")
      ->check(CLI::IsMember({"actor", "oracle", "empty", "random"}));
  cmd->add_option("--ontology", src.ontology, "Ontology JSON for non-actor policies");
  cmd->add_option("--database-seed", src.database_seed, "Entity database seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic-motivation dialogue policy training"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train one arm (or a seed sweep)");
  std::string arm = "ppo", config_path, out_dir = "runs/run", resume_path, seeds_text, ontology;
  std::int64_t steps = 0, eval_interval = 0;
  std::uint64_t seed = 0;
  int n_eval = 0, keep = -1;
  bool log_episodes = false;
  train->add_option("--arm", arm, "ppo | ppo+rnd-das | ppo+rnd-utt | ppo+ic-das | ppo+ic-utt");
  train->add_option("--steps", steps, "Total environment steps (default 200000)");
  train->add_option("--seed", seed, "Run seed");
  train->add_option("--seeds", seeds_text, "Comma-separated seeds; runs go to <out>/seed_<S>");
  train->add_option("--config", config_path, "JSON config overrides");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--eval-interval", eval_interval, "Steps between evaluations");
  train->add_option("--n-eval", n_eval, "Dialogues per evaluation");
  train->add_option("--ontology", ontology, "Ontology JSON");
  train->add_option("--keep-checkpoints", keep, "Checkpoints to keep (0 = all)");
  train->add_flag("--log-episodes", log_episodes, "Write episodes.jsonl");
  train->add_option("--resume", resume_path, "Continue from a checkpoint");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Greedy evaluation of a policy");
  PolicySource eval_src;
  int eval_n = 1000;
  std::uint64_t eval_seed = 0;
  add_policy_options(evaluate, eval_src);
  evaluate->add_option("--n-eval", eval_n, "Dialogues");
  evaluate->add_option("--seed", eval_seed, "Evaluation seed");

  // variance-study
  auto* variance = app.add_subcommand("variance-study", "Success-rate spread versus n_eval");
  PolicySource var_src;
  std::string n_list = "50,100,200,500,1000,2000", var_out;
  int repeats = 20;
  std::uint64_t var_seed = 0;
  add_policy_options(variance, var_src);
  variance->add_option("--n-eval", n_list, "Comma-separated n_eval values");
  variance->add_option("--repeats", repeats, "Repeats per n_eval");
  variance->add_option("--seed", var_seed, "Study seed");
  variance->add_option("--out", var_out, "CSV path (stdout when omitted)");

  // dump-layout
  auto* layout = app.add_subcommand("dump-layout", "Print state and action layouts as JSON");
  std::string layout_ontology;
  int max_turns = 40;
  layout->add_option("--ontology", layout_ontology, "Ontology JSON (default built-in)");
  layout->add_option("--max-turns", max_turns, "Dialogue length limit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!resume_path.empty()) {
        Trainer t = Trainer::resume(resume_path,
                                    train->count("--out") ? std::optional<std::string>(out_dir)
                                                          : std::nullopt);
        t.run();
        std::cout << "resumed run finished at step " << t.step_count() << "\n";
        return 0;
      }
      json j = config_path.empty() ? json::object() : load_json(config_path);
      j["arm"] = arm;
      if (steps > 0) j["total_steps"] = steps;
      if (eval_interval > 0) j["eval_interval"] = eval_interval;
      if (n_eval > 0) j["n_eval"] = n_eval;
      if (!ontology.empty()) j["ontology_path"] = ontology;
      if (keep >= 0) j["keep_checkpoints"] = keep;
      if (log_episodes) j["log_episodes"] = true;
      std::vector<std::uint64_t> seeds;
      if (!seeds_text.empty()) {
        for (int s : parse_int_list(seeds_text)) seeds.push_back(static_cast<std::uint64_t>(s));
      } else {
        seeds.push_back(train->count("--seed") ? seed : j.value("seed", std::uint64_t{0}));
      }
      for (std::uint64_t s : seeds) {
        json run = j;
        run["seed"] = s;
        run["out_dir"] = seeds_text.empty() ? out_dir : out_dir + "/seed_" + std::to_string(s);
        Trainer t(RunConfig::from_json(run));
        t.run();
        std::cout << arm_name(t.config().arm) << " seed " << s << ": " << t.csv_rows().size()
                  << " evaluations written to " << t.config().out_dir << "\n";
      }
    } else if (*evaluate) {
      Loaded l = load_policy(eval_src);
      const Metrics m = analyze(*l.policy, l.world, l.env, eval_n, eval_seed);
      std::cout << metrics_json(m).dump(2) << "\n";
    } else if (*variance) {
      Loaded l = load_policy(var_src);
      const auto rows =
          eval_variance_study(*l.policy, l.world, l.env, parse_int_list(n_list), repeats, var_seed);
      const std::string csv = variance_csv(rows);
      if (var_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream(var_out) << csv;
      }
    } else if (*layout) {
      RunConfig rc;
      rc.ontology_path = layout_ontology;
      const auto world = make_world(rc);
      IndexMap index(world->ontology, max_turns);
      std::cout << index.layout_json().dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
