#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "argseek/abduction.hpp"
#include "argseek/data.hpp"
#include "argseek/ddqn.hpp"
#include "argseek/env.hpp"
#include "argseek/error.hpp"
#include "argseek/harness.hpp"
#include "argseek/kb.hpp"
#include "argseek/mlp.hpp"
#include "argseek/strategies.hpp"

namespace py = pybind11;
using namespace argseek;

namespace {

AbductionConfig make_config(double obs_cost, int max_depth, std::size_t max_universe) {
  AbductionConfig c;
  c.obs_cost = obs_cost;
  c.max_depth = max_depth;
  c.max_universe = max_universe;
  c.validate();
  return c;
}

py::dict proof_dict(const ProofStructure& p, const std::vector<Rule>& rules) {
  py::dict labels;
  for (const auto& [atom, j] : p.labels)
    labels[py::str(atom)] = j.is_assume() ? py::object(py::none()) : py::object(py::int_(j.rule));
  py::dict out;
  out["labels"] = labels;
  out["charges"] = p.charges;
  out["total_cost"] = p.total_cost;
  out["assumptions"] = p.assumptions();
  out["text"] = render_proof(p, rules);
  return out;
}

py::dict rationality_dict(const Rationality& r) {
  py::dict d;
  d["e_alpha"] = r.e_alpha;
  d["e_k"] = r.e_k;
  d["e_joint"] = r.e_joint;
  d["raw"] = r.raw;
  d["norm"] = r.norm;
  return d;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["avg_score"] = m.avg_score;
  d["stderr"] = m.stderr_score;
  d["completed"] = m.completed;
  d["completed_total"] = m.completed_total;
  d["avg_steps"] = m.avg_steps;
  d["episodes"] = m.episodes_evaluated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_argseek, m) {
  m.doc() = "Abductive rationality and information-seeking dialogue agents";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Rule>(m, "Rule")
      .def(py::init(&parse_rule), py::arg("text"))
      .def_property_readonly("premises", &Rule::premises)
      .def_property_readonly("conclusion", &Rule::conclusion)
      .def_property_readonly("weights", &Rule::premise_weights)
      .def("__str__", &render_rule)
      .def("__repr__", [](const Rule& r) { return "Rule('" + render_rule(r) + "')"; })
      .def("__eq__", [](const Rule& a, const Rule& b) { return a == b; });

  m.def("parse_rule", &parse_rule, py::arg("text"));

  py::class_<Explainer>(m, "Explainer")
      .def(py::init([](std::vector<Rule> rules, double obs_cost, int max_depth, std::size_t max_universe) {
             return Explainer(std::move(rules), make_config(obs_cost, max_depth, max_universe));
           }),
           py::arg("rules"), py::arg("obs_cost") = 10.0, py::arg("max_depth") = 6,
           py::arg("max_universe") = 64)
      .def("explain", [](const Explainer& ex, const std::set<Atom>& obs) {
             return proof_dict(ex.explain(obs), ex.rules());
           }, py::arg("observations"))
      .def("rationality", [](const Explainer& ex, const std::set<Atom>& facts, const Atom& claim) {
             return rationality_dict(rationality(ex, facts, claim));
           }, py::arg("facts"), py::arg("claim"))
      .def("argument", [](const Explainer& ex, const std::set<Atom>& facts, const Atom& claim) {
             Argument a = construct_argument(ex, facts, claim);
             py::dict d;
             d["claim"] = a.claim;
             d["support_facts"] = a.support_facts;
             d["support_rules"] = a.support_rules;
             d["assumptions"] = a.assumptions;
             d["rationality_raw"] = a.rationality_raw;
             d["rationality_norm"] = a.rationality_norm;
             return d;
           }, py::arg("facts"), py::arg("claim"));

  m.def("brute_force_cost", [](const std::set<Atom>& obs, const std::vector<Rule>& rules) {
          return brute_force_explain(obs, rules).total_cost;
        }, py::arg("observations"), py::arg("rules"));

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("atoms", &Dataset::atoms)
      .def_readonly("rules", &Dataset::rules)
      .def_property_readonly("claim", [](const Dataset& d) { return d.manifest.claim; })
      .def_property_readonly("train_count", [](const Dataset& d) { return d.manifest.train_count; })
      .def_property_readonly("knowledge", [](const Dataset& d) {
        std::vector<std::set<Atom>> out;
        for (const auto& k : d.ka) out.push_back(k.facts);
        return out;
      })
      .def("save", [](const Dataset& d, const std::string& dir) { return save_dataset(d, dir); },
           py::arg("directory"));

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("generate", [](std::size_t facts, std::size_t rules, std::size_t ka, std::size_t ka_size,
                        std::size_t train, std::uint64_t seed) {
          GenParams p;
          p.n_facts = facts;
          p.n_rules = rules;
          p.ka_count = ka;
          p.ka_size = ka_size;
          p.train_count = train;
          p.seed = seed;
          return generate_synthetic(p);
        }, py::arg("facts") = 122, py::arg("rules") = 72, py::arg("ka") = 550,
        py::arg("ka_size") = 20, py::arg("train") = 500, py::arg("seed") = 0);

  py::class_<Mlp>(m, "Network")
      .def_readonly("layer_dims", &Mlp::layer_dims)
      .def("forward", [](const Mlp& n, const std::vector<double>& x) {
             Eigen::VectorXd q = n.forward(x);
             return std::vector<double>(q.data(), q.data() + q.size());
           }, py::arg("x"))
      .def("save", &save_model_file, py::arg("path"));
  m.def("load_network", &load_model_file, py::arg("path"));

  m.def("train", [](const Dataset& d, std::size_t episodes, std::uint64_t seed) {
          DialogueEnv env(d.scenario());
          Hyperparams hp;
          hp.episodes = episodes;
          hp.seed = seed;
          std::optional<TrainResult> res;
          {
            py::gil_scoped_release unlock;
            res = train_ddqn(env, d.train_set(), hp);
          }
          return py::make_tuple(res->online, res->episode_rewards);
        }, py::arg("dataset"), py::arg("episodes") = 1000, py::arg("seed") = 0);

  m.def("evaluate", [](const Dataset& d, const std::string& strategy, std::vector<std::uint64_t> seeds,
                        std::vector<Mlp> networks, int t_limit) {
          Scenario s = d.scenario();
          if (t_limit > 0) s.t_limit = t_limit;
          DialogueEnv env(s);
          Strategy kind = parse_strategy(strategy);
          std::map<std::uint64_t, std::shared_ptr<const Mlp>> models;
          if (kind == Strategy::Ddqn) {
            if (networks.size() != seeds.size())
              throw ValidationError("ddqn evaluation needs one network per seed");
            for (std::size_t i = 0; i < seeds.size(); ++i)
              models[seeds[i]] = std::make_shared<const Mlp>(networks[i]);
          }
          QuestionerFactory make = [&](std::uint64_t seed) {
            return make_questioner(kind, env, kind == Strategy::Ddqn ? models.at(seed) : nullptr);
          };
          Metrics met;
          {
            py::gil_scoped_release unlock;
            met = evaluate(env, make, d.test_set(), seeds);
          }
          return metrics_dict(met);
        }, py::arg("dataset"), py::arg("strategy"), py::arg("seeds"),
        py::arg("networks") = std::vector<Mlp>{}, py::arg("t_limit") = 0);

  py::class_<EnvState>(m, "State")
      .def_readonly("asked", &EnvState::asked)
      .def_readonly("collected", &EnvState::collected)
      .def_readonly("rationality", &EnvState::rationality)
      .def_readonly("step", &EnvState::step)
      .def_readonly("facts", &EnvState::kq_facts)
      .def("features", &featurize)
      .def("legal_actions", &legal_actions);

  py::class_<DialogueEnv>(m, "DialogueEnv")
      .def(py::init([](const Dataset& d) { return DialogueEnv(d.scenario()); }), py::arg("dataset"))
      .def_property_readonly("candidates", [](const DialogueEnv& e) { return e.scenario().candidate_facts; })
      .def_property_readonly("feature_dim", &DialogueEnv::feature_dim)
      .def("reset", [](const DialogueEnv& e, const std::set<Atom>& ka) {
             return e.reset(KnowledgeBase{ka, {}});
           }, py::arg("knowledge"))
      .def("step", [](const DialogueEnv& e, const EnvState& s, ActionIndex a, const std::set<Atom>& ka) {
             StepResult r = e.step(s, a, KnowledgeBase{ka, {}});
             return py::make_tuple(r.state, r.reward, r.done, r.answered);
           }, py::arg("state"), py::arg("action"), py::arg("knowledge"));
}
