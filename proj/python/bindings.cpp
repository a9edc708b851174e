#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "imdial/env.hpp"
#include "imdial/error.hpp"
#include "imdial/harness.hpp"
#include "imdial/policies.hpp"
#include "imdial/ppo.hpp"
#include "imdial/version.hpp"
#include "imdial/vectorize.hpp"

namespace py = pybind11;
using namespace imdial;

namespace {

using ActTuple = std::tuple<std::string, std::string, std::string, std::string>;

ActSet to_acts(const std::vector<ActTuple>& acts) {
  ActSet out;
  for (const auto& [intent, domain, slot, value] : acts) {
    out.insert(DialogueAct{parse_intent(intent), domain, slot, value});
  }
  return out;
}

std::vector<ActTuple> from_acts(const ActSet& acts) {
  std::vector<ActTuple> out;
  for (const auto& a : acts) {
    out.emplace_back(std::string(intent_name(a.intent)), a.domain, a.slot, a.value);
  }
  return out;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["complete_rate"] = m.complete_rate;
  d["success_rate"] = m.success_rate;
  d["book_rate"] = m.book_rate ? py::cast(*m.book_rate) : py::none();
  d["n_dialogues"] = m.n_dialogues;
  d["avg_turns"] = m.avg_turns;
  d["avg_return"] = m.avg_return;
  return d;
}

std::unique_ptr<DialoguePolicy> scripted_policy(const std::string& name, const IndexMap& index) {
  if (name == "oracle") return std::make_unique<OraclePolicy>();
  if (name == "empty") return std::make_unique<EmptyPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>(index);
  throw ArgumentError("unknown policy '" + name + "' (oracle, empty, random)");
}

// Owns its world, index and environment so Python sees one object.
class PyEnv {
 public:
  explicit PyEnv(std::uint64_t database_seed, int max_turns)
      : world_(World::make_default(database_seed)), index_(world_->ontology),
        env_(world_, [&] {
          EnvConfig c;
          c.max_turns = max_turns;
          return c;
        }()) {}

  Eigen::VectorXd reset(std::uint64_t seed) { return index_.encode_state(env_.reset(seed)); }

  py::tuple step(const std::vector<ActTuple>& acts) {
    const StepResult r = env_.step(to_acts(acts));
    return py::make_tuple(index_.encode_state(r.next_state), r.extrinsic_reward, r.done, r.success,
                          from_acts(r.system_acts), from_acts(r.user_acts));
  }

  py::tuple step_vector(const Eigen::VectorXd& bits) {
    return step(from_acts(index_.decode_action(bits)));
  }

  std::vector<ActTuple> opening() const { return from_acts(env_.log().opening); }
  std::string episode_json() const { return env_.log().to_json().dump(); }
  int state_dim() const { return index_.state_dim(); }
  int action_dim() const { return index_.action_dim(); }
  std::string layout_json() const { return index_.layout_json().dump(); }

  py::dict analyze(const std::string& policy, int n_eval, std::uint64_t seed) {
    auto p = scripted_policy(policy, index_);
    return metrics_dict(imdial::analyze(*p, world_, env_.config(), n_eval, seed));
  }

 private:
  std::shared_ptr<const World> world_;
  IndexMap index_;
  Environment env_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dialogue policy learning with intrinsic rewards";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<Error>(m, "ImdialError");

  py::class_<PyEnv>(m, "Environment")
      .def(py::init<std::uint64_t, int>(), py::arg("database_seed") = 0, py::arg("max_turns") = 40)
      .def("reset", &PyEnv::reset, py::arg("seed"), "Start a dialogue; returns the state vector.")
      .def("step", &PyEnv::step, py::arg("acts"),
           "Step with (intent, domain, slot, value) tuples. Returns (state, reward, done, success, "
           "system_acts, user_acts).")
      .def("step_vector", &PyEnv::step_vector, py::arg("bits"))
      .def("opening", &PyEnv::opening)
      .def("episode_json", &PyEnv::episode_json)
      .def("analyze", &PyEnv::analyze, py::arg("policy"), py::arg("n_eval"), py::arg("seed") = 0)
      .def_property_readonly("state_dim", &PyEnv::state_dim)
      .def_property_readonly("action_dim", &PyEnv::action_dim)
      .def("layout_json", &PyEnv::layout_json);

  m.def(
      "compute_gae",
      [](const std::vector<double>& r, const std::vector<double>& v, double gamma, double lambda) {
        auto g = ppo::compute_gae(r, v, gamma, lambda);
        return py::make_tuple(g.advantages, g.targets);
      },
      py::arg("rewards"), py::arg("values"), py::arg("gamma") = 0.99, py::arg("lam") = 0.95);
  m.def(
      "clipped_surrogate_loss",
      [](const std::vector<double>& n, const std::vector<double>& o, const std::vector<double>& a,
         double eps) { return ppo::clipped_surrogate_loss(n, o, a, eps); },
      py::arg("new_log_probs"), py::arg("old_log_probs"), py::arg("advantages"), py::arg("eps") = 0.1);
  m.def(
      "compute_metrics",
      [](const std::vector<std::tuple<bool, bool, bool, bool>>& outcomes) {
        std::vector<EpisodeLog> logs;
        for (const auto& [c, s, b, k] : outcomes) {
          EpisodeLog l;
          l.outcome = {c, s, b, k};
          logs.push_back(l);
        }
        return metrics_dict(compute_metrics(logs));
      },
      py::arg("outcomes"), "Outcomes are (completed, successful, bookable, booked) tuples.");
  m.def("arms", [] {
    std::vector<std::string> out;
    for (Arm a : all_arms()) out.emplace_back(arm_name(a));
    return out;
  });

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const std::string& config_json) {
             return Trainer(RunConfig::from_json(nlohmann::json::parse(config_json)));
           }),
           py::arg("config_json") = "{}")
      .def_static(
          "resume",
          [](const std::string& path, std::optional<std::string> out_dir) {
            return Trainer::resume(path, std::move(out_dir));
          },
          py::arg("checkpoint"), py::arg("out_dir") = py::none())
      .def("run", &Trainer::run, py::call_guard<py::gil_scoped_release>())
      .def("iterate", &Trainer::iterate)
      .def("finished", &Trainer::finished)
      .def(
          "evaluate",
          [](const Trainer& t, int n, std::optional<std::uint64_t> seed) {
            return metrics_dict(t.evaluate(n, seed.value_or(t.eval_seed())));
          },
          py::arg("n_eval"), py::arg("seed") = py::none())
      .def("csv_text", &Trainer::csv_text)
      .def("checkpoint_json", [](const Trainer& t) { return t.checkpoint_json().dump(); })
      .def("config_json", [](const Trainer& t) { return t.config().to_json().dump(); })
      .def_property_readonly("step_count", &Trainer::step_count)
      .def_property_readonly("episode_count", &Trainer::episode_count);
}
