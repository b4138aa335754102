#include "argseek/strategies.hpp"

#include <algorithm>

#include "argseek/ddqn.hpp"
#include "argseek/error.hpp"

namespace argseek {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Dfs: return "dfs";
    case Strategy::Bfs: return "bfs";
    case Strategy::Ddqn: return "ddqn";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "random") return Strategy::Random;
  if (name == "dfs") return Strategy::Dfs;
  if (name == "bfs") return Strategy::Bfs;
  if (name == "ddqn") return Strategy::Ddqn;
  throw ValidationError("unknown strategy '" + name + "' (expected random, dfs, bfs or ddqn)");
}

ActionIndex random_next(const std::vector<ActionIndex>& legal, Rng& rng) {
  if (legal.empty()) throw ContractError("no legal action left");
  return legal[uniform_index(rng, legal.size())];
}

TraversalState::TraversalState(Strategy kind, std::shared_ptr<const FactGraph> graph, Atom claim,
                               const std::vector<Atom>& candidates)
    : kind_(kind), graph_(std::move(graph)) {
  if (kind != Strategy::Dfs && kind != Strategy::Bfs)
    throw ContractError("traversal state is only defined for dfs and bfs");
  for (ActionIndex i = 0; i < candidates.size(); ++i) index_.emplace(candidates[i], i);
  visited_.insert(claim);
  if (!graph_->contains(claim)) return;
  if (kind == Strategy::Dfs) {
    stack_.push_back(claim);
    return;
  }
  std::set<Atom> seen{claim};
  std::vector<Atom> frontier{claim};
  while (!frontier.empty()) {
    std::vector<Atom> layer;
    for (const auto& u : frontier)
      for (const auto& v : graph_->neighbors(u))
        if (seen.insert(v).second) layer.push_back(v);
    std::sort(layer.begin(), layer.end());
    if (!layer.empty()) layers_.push_back(layer);
    frontier = std::move(layer);
  }
}

namespace {

bool is_legal(const std::vector<ActionIndex>& legal, ActionIndex a) {
  return std::binary_search(legal.begin(), legal.end(), a);
}

}  // namespace

ActionIndex dfs_next(TraversalState& t, const std::vector<ActionIndex>& legal, Rng& rng) {
  if (legal.empty()) throw ContractError("no legal action left");
  while (!t.stack_.empty()) {
    std::vector<Atom> open;
    for (const auto& v : t.graph_->neighbors(t.stack_.back())) {
      if (t.visited_.count(v)) continue;
      auto it = t.index_.find(v);
      if (it == t.index_.end() || !is_legal(legal, it->second)) continue;
      open.push_back(v);
    }
    if (open.empty()) {
      t.stack_.pop_back();
      continue;
    }
    const Atom& pick = open[uniform_index(rng, open.size())];
    t.visited_.insert(pick);
    t.stack_.push_back(pick);
    return t.index_.at(pick);
  }
  return random_next(legal, rng);
}

ActionIndex bfs_next(TraversalState& t, const std::vector<ActionIndex>& legal, Rng& rng) {
  if (legal.empty()) throw ContractError("no legal action left");
  for (; t.layer_ < t.layers_.size(); ++t.layer_) {
    std::vector<Atom> open;
    for (const auto& v : t.layers_[t.layer_]) {
      if (t.visited_.count(v)) continue;
      auto it = t.index_.find(v);
      if (it == t.index_.end() || !is_legal(legal, it->second)) continue;
      open.push_back(v);
    }
    if (open.empty()) continue;
    const Atom& pick = open[uniform_index(rng, open.size())];
    t.visited_.insert(pick);
    return t.index_.at(pick);
  }
  return random_next(legal, rng);
}

namespace {

class RandomQuestioner : public Questioner {
 public:
  ActionIndex next(const EnvState& state, Rng& rng) override {
    return random_next(legal_actions(state), rng);
  }
};

class TraversalQuestioner : public Questioner {
 public:
  TraversalQuestioner(Strategy kind, std::shared_ptr<const FactGraph> graph, const Scenario& s)
      : kind_(kind), graph_(std::move(graph)), claim_(s.claim), candidates_(s.candidate_facts) {}

  void begin_episode() override { state_.emplace(kind_, graph_, claim_, candidates_); }

  ActionIndex next(const EnvState& state, Rng& rng) override {
    if (!state_) begin_episode();
    auto legal = legal_actions(state);
    return kind_ == Strategy::Dfs ? dfs_next(*state_, legal, rng) : bfs_next(*state_, legal, rng);
  }

 private:
  Strategy kind_;
  std::shared_ptr<const FactGraph> graph_;
  Atom claim_;
  std::vector<Atom> candidates_;
  std::optional<TraversalState> state_;
};

class GreedyQuestioner : public Questioner {
 public:
  explicit GreedyQuestioner(std::shared_ptr<const Mlp> model) : model_(std::move(model)) {}
  ActionIndex next(const EnvState& state, Rng&) override {
    return masked_argmax(model_->forward(featurize(state)), legal_actions(state));
  }

 private:
  std::shared_ptr<const Mlp> model_;
};

}  // namespace

std::unique_ptr<Questioner> make_questioner(Strategy kind, const DialogueEnv& env,
                                            std::shared_ptr<const Mlp> model) {
  const Scenario& s = env.scenario();
  switch (kind) {
    case Strategy::Random:
      return std::make_unique<RandomQuestioner>();
    case Strategy::Dfs:
    case Strategy::Bfs: {
      std::set<Atom> atoms(s.atom_universe.begin(), s.atom_universe.end());
      auto graph = std::make_shared<const FactGraph>(build_fact_graph(s.rules, atoms));
      return std::make_unique<TraversalQuestioner>(kind, std::move(graph), s);
    }
    case Strategy::Ddqn:
      if (!model) throw ContractError("the ddqn strategy needs a trained model");
      if (model->input_dim() != static_cast<int>(env.feature_dim()) ||
          model->output_dim() != static_cast<int>(env.num_actions()))
        throw ValidationError("model shape does not match the scenario (" +
                              std::to_string(model->input_dim()) + " -> " +
                              std::to_string(model->output_dim()) + ")");
      return std::make_unique<GreedyQuestioner>(std::move(model));
  }
  throw ContractError("unknown strategy");
}

}  // namespace argseek
