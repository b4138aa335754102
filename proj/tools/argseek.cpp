// argseek: dataset generation, training, evaluation and abduction queries.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "argseek/abduction.hpp"
#include "argseek/data.hpp"
#include "argseek/ddqn.hpp"
#include "argseek/error.hpp"
#include "argseek/harness.hpp"
#include "argseek/mlp.hpp"
#include "argseek/strategies.hpp"
#include "argseek/text.hpp"

using namespace argseek;

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("ARGSEEK_SEED");
  if (!env || !*env) return 0;
  auto v = text::parse_int(env);
  if (!v || *v < 0) throw ValidationError("ARGSEEK_SEED must be a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> out;
  for (auto part : text::split(list, ',')) {
    auto v = text::parse_int(text::trim(part));
    if (!v || *v < 0) throw ValidationError("bad seed '" + std::string(part) + "'");
    out.push_back(static_cast<std::uint64_t>(*v));
  }
  if (out.empty()) throw ValidationError("no seeds given");
  return out;
}

std::vector<std::string> parse_list(const std::string& list) {
  std::vector<std::string> out;
  for (auto part : text::split(list, ','))
    if (auto t = text::trim(part); !t.empty()) out.emplace_back(t);
  return out;
}

std::string model_path_for(const std::string& pattern, std::uint64_t seed) {
  std::string p = pattern;
  const std::string key = "{seed}";
  for (auto at = p.find(key); at != std::string::npos; at = p.find(key))
    p.replace(at, key.size(), std::to_string(seed));
  return p;
}

struct Common {
  std::string data;
  std::string model;
  std::string seeds;
  int t_limit = 0;  // 0 keeps the manifest value
  std::size_t workers = 1;
};

Scenario load_scenario(const Dataset& d, int t_limit) {
  Scenario s = d.scenario();
  if (t_limit > 0) s.t_limit = t_limit;
  s.validate();
  return s;
}

QuestionerFactory factory_for(Strategy kind, const DialogueEnv& env, const std::string& model) {
  if (kind != Strategy::Ddqn)
    return [kind, &env](std::uint64_t) { return make_questioner(kind, env); };
  if (model.empty()) throw ValidationError("--model is required for the ddqn strategy");
  auto cache = std::make_shared<std::map<std::uint64_t, std::shared_ptr<const Mlp>>>();
  return [&env, model, cache](std::uint64_t seed) {
    auto& slot = (*cache)[seed];
    if (!slot) slot = std::make_shared<const Mlp>(load_model_file(model_path_for(model, seed)));
    return make_questioner(Strategy::Ddqn, env, slot);
  };
}

int run(int argc, char** argv) {
  CLI::App app{"Information-seeking dialogue agents with abductive rationality"};
  app.require_subcommand(1);
  const std::string seed_default = std::to_string(default_seed());

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  GenParams gp;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--facts", gp.n_facts, "Number of facts, including the claim")->capture_default_str();
  gen->add_option("--rules", gp.n_rules, "Number of rules")->capture_default_str();
  gen->add_option("--max-premises", gp.max_premises, "Premises per rule at most")->capture_default_str();
  gen->add_option("--ka", gp.ka_count, "Number of answerer knowledge bases")->capture_default_str();
  gen->add_option("--ka-size", gp.ka_size, "Facts per answerer knowledge base")->capture_default_str();
  gen->add_option("--train", gp.train_count, "Training knowledge bases")->capture_default_str();
  gen->add_option("--seed", gp.seed, "Generator seed")->default_str(seed_default);
  gp.seed = default_seed();

  // train
  auto* train = app.add_subcommand("train", "Train DDQN questioners");
  Hyperparams hp;
  hp.seed = default_seed();
  Common tr;
  std::string curve_out;
  train->add_option("--data", tr.data, "Dataset directory or manifest")->required();
  train->add_option("--episodes", hp.episodes, "Training episodes")->capture_default_str();
  train->add_option("--seed", hp.seed, "Training seed")->default_str(seed_default);
  train->add_option("--seeds", tr.seeds, "Comma-separated seeds; --out should contain {seed}");
  train->add_option("--out", tr.model, "Model file ({seed} is replaced by the seed)")->required();
  train->add_option("--lr", hp.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--t-limit", tr.t_limit, "Override the manifest's T_limit");
  train->add_option("--curve", curve_out, "Write per-episode rewards as CSV");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate questioners on the test split");
  Common ec;
  std::string ev_strategy = "ddqn";
  ev->add_option("--data", ec.data, "Dataset directory or manifest")->required();
  ev->add_option("--strategy", ev_strategy, "random, dfs, bfs or ddqn (comma list allowed)")->capture_default_str();
  ev->add_option("--model", ec.model, "Model file ({seed} is replaced by the seed)");
  ev->add_option("--seeds", ec.seeds, "Comma-separated seeds")->default_str(seed_default);
  ev->add_option("--t-limit", ec.t_limit, "Override the manifest's T_limit");
  ev->add_option("--workers", ec.workers, "Episode worker threads")->capture_default_str();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Completed dialogues for T_limit = 1..N");
  Common sc;
  std::string sw_strategy = "random,dfs,bfs,ddqn";
  int max_t = 10;
  sw->add_option("--data", sc.data, "Dataset directory or manifest")->required();
  sw->add_option("--strategy", sw_strategy, "Comma list of strategies")->capture_default_str();
  sw->add_option("--model", sc.model, "Model file ({seed} is replaced by the seed)");
  sw->add_option("--seeds", sc.seeds, "Comma-separated seeds")->default_str(seed_default);
  sw->add_option("--max-tlimit", max_t, "Largest T_limit")->capture_default_str();
  sw->add_option("--workers", sc.workers, "Episode worker threads")->capture_default_str();

  // transcript
  auto* ts = app.add_subcommand("transcript", "Print one dialogue turn by turn");
  Common tc;
  std::string ts_strategy = "ddqn";
  std::size_t ka_index = 0;
  std::uint64_t ts_seed = default_seed();
  ts->add_option("--data", tc.data, "Dataset directory or manifest")->required();
  ts->add_option("--model", tc.model, "Model file ({seed} is replaced by the seed)");
  ts->add_option("--strategy", ts_strategy, "random, dfs, bfs or ddqn")->capture_default_str();
  ts->add_option("--ka", ka_index, "Index of the answerer knowledge file")->required();
  ts->add_option("--seed", ts_seed, "Seed")->default_str(seed_default);
  ts->add_option("--t-limit", tc.t_limit, "Override the manifest's T_limit");

  // abduce
  auto* ab = app.add_subcommand("abduce", "Rationality of an argument for a claim");
  std::string ab_data, ab_facts, ab_claim;
  ab->add_option("--data", ab_data, "Dataset directory or manifest")->required();
  ab->add_option("--facts", ab_facts, "Comma-separated facts known to the questioner");
  ab->add_option("--claim", ab_claim, "Claim (defaults to the manifest's claim)");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    Dataset d = generate_synthetic(gp);
    std::cout << save_dataset(d, gen_out) << '\n';
    return 0;
  }

  if (*train) {
    Dataset d = load_dataset(tr.data);
    DialogueEnv env(load_scenario(d, tr.t_limit));
    auto pool = d.train_set();
    std::vector<std::uint64_t> seeds = tr.seeds.empty() ? std::vector<std::uint64_t>{hp.seed}
                                                        : parse_seeds(tr.seeds);
    if (seeds.size() > 1 && tr.model.find("{seed}") == std::string::npos)
      throw ValidationError("--out must contain {seed} when training several seeds");
    std::ofstream curve;
    if (!curve_out.empty()) {
      curve.open(curve_out);
      if (!curve) throw IoError("cannot write " + curve_out);
      curve << "seed,episode,reward\n";
    }
    for (auto seed : seeds) {
      Hyperparams h = hp;
      h.seed = seed;
      TrainResult res = train_ddqn(env, pool, h);
      std::string path = model_path_for(tr.model, seed);
      save_model_file(res.online, path);
      if (curve)
        for (std::size_t i = 0; i < res.episode_rewards.size(); ++i)
          curve << seed << ',' << i << ',' << text::shortest(res.episode_rewards[i]) << '\n';
      std::cout << path << '\n';
    }
    return 0;
  }

  if (*ev) {
    Dataset d = load_dataset(ec.data);
    DialogueEnv env(load_scenario(d, ec.t_limit));
    auto seeds = parse_seeds(ec.seeds.empty() ? seed_default : ec.seeds);
    auto test = d.test_set();
    std::cout << metrics_csv_header();
    for (const auto& name : parse_list(ev_strategy)) {
      auto m = evaluate(env, factory_for(parse_strategy(name), env, ec.model), test, seeds, ec.workers);
      std::cout << metrics_csv_row(name, m);
    }
    return 0;
  }

  if (*sw) {
    Dataset d = load_dataset(sc.data);
    DialogueEnv env(load_scenario(d, 0));
    auto seeds = parse_seeds(sc.seeds.empty() ? seed_default : sc.seeds);
    auto test = d.test_set();
    std::cout << "t_limit,strategy,completed\n";
    std::map<std::string, std::vector<SweepRow>> rows;
    auto names = parse_list(sw_strategy);
    for (const auto& name : names)
      rows[name] = sweep_tlimit(env, factory_for(parse_strategy(name), env, sc.model), test, seeds,
                                max_t, sc.workers);
    for (int t = 0; t < max_t; ++t)
      for (const auto& name : names)
        std::cout << rows[name][static_cast<std::size_t>(t)].t_limit << ',' << name << ','
                  << text::shortest(rows[name][static_cast<std::size_t>(t)].completed) << '\n';
    return 0;
  }

  if (*ts) {
    Dataset d = load_dataset(tc.data);
    DialogueEnv env(load_scenario(d, tc.t_limit));
    if (ka_index >= d.ka.size())
      throw ValidationError("--ka " + std::to_string(ka_index) + " is out of range (dataset has " +
                            std::to_string(d.ka.size()) + ")");
    auto q = factory_for(parse_strategy(ts_strategy), env, tc.model)(ts_seed);
    Rng rng = episode_rng(ts_seed, ka_index);
    EpisodeLog log = run_episode(env, *q, d.ka[ka_index], rng);
    std::cout << render_transcript(log, d.questions);
    std::cout << (log.success ? "argument completed" : "argument not completed") << " after "
              << log.steps.size() << " questions, reward " << text::shortest(log.total_reward) << '\n';
    return 0;
  }

  if (*ab) {
    Dataset d = load_dataset(ab_data);
    Atom claim = ab_claim.empty() ? d.manifest.claim : ab_claim;
    std::set<Atom> universe(d.atoms.begin(), d.atoms.end());
    if (!universe.count(claim)) throw ValidationError("unknown claim '" + claim + "'");
    std::set<Atom> facts;
    for (const auto& f : parse_list(ab_facts)) {
      if (!universe.count(f)) throw ValidationError("unknown fact '" + f + "'");
      facts.insert(f);
    }
    Explainer ex(d.rules, d.manifest.abduction);
    Rationality r = rationality(ex, facts, claim);
    Argument arg = construct_argument(ex, facts, claim);
    auto join = [](const std::set<Atom>& s) {
      std::string out;
      for (const auto& a : s) out += (out.empty() ? "" : ",") + a;
      return out;
    };
    std::cout << "E_alpha = " << text::shortest(r.e_alpha) << '\n'
              << "E_k = " << text::shortest(r.e_k) << '\n'
              << "E_joint = " << text::shortest(r.e_joint) << '\n'
              << "R = " << text::shortest(r.raw) << '\n'
              << "R_norm = " << text::shortest(r.norm) << '\n'
              << "support_facts = " << join(arg.support_facts) << '\n'
              << "assumptions = " << join(arg.assumptions) << '\n';
    std::set<Atom> joint = facts;
    joint.insert(claim);
    std::cout << "proof:\n" << render_proof(ex.explain(joint), d.rules);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "argseek: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "argseek: unexpected error: " << e.what() << '\n';
    return 1;
  }
}
