#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "argseek/env.hpp"
#include "argseek/kb.hpp"
#include "argseek/mlp.hpp"
#include "argseek/random.hpp"

namespace argseek {

enum class Strategy { Random, Dfs, Bfs, Ddqn };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

ActionIndex random_next(const std::vector<ActionIndex>& legal, Rng& rng);

// Graph walk state for the DFS/BFS baselines. The claim is the start node and
// is never asked; facts outside its component are reached by random fallback.
class TraversalState {
 public:
  TraversalState(Strategy kind, std::shared_ptr<const FactGraph> graph, Atom claim,
                 const std::vector<Atom>& candidates);

  Strategy kind() const { return kind_; }
  const std::set<Atom>& visited() const { return visited_; }

 private:
  friend ActionIndex dfs_next(TraversalState&, const std::vector<ActionIndex>&, Rng&);
  friend ActionIndex bfs_next(TraversalState&, const std::vector<ActionIndex>&, Rng&);

  Strategy kind_;
  std::shared_ptr<const FactGraph> graph_;
  std::map<Atom, ActionIndex> index_;
  std::set<Atom> visited_;
  std::vector<Atom> stack_;                  // DFS path from the claim
  std::vector<std::vector<Atom>> layers_;    // BFS distance layers, claim excluded
  std::size_t layer_ = 0;
};

ActionIndex dfs_next(TraversalState& t, const std::vector<ActionIndex>& legal, Rng& rng);
ActionIndex bfs_next(TraversalState& t, const std::vector<ActionIndex>& legal, Rng& rng);

// A questioner policy for one episode at a time.
class Questioner {
 public:
  virtual ~Questioner() = default;
  virtual void begin_episode() {}
  virtual ActionIndex next(const EnvState& state, Rng& rng) = 0;
};

// `model` is required for Strategy::Ddqn (greedy, masked) and ignored otherwise.
std::unique_ptr<Questioner> make_questioner(Strategy kind, const DialogueEnv& env,
                                            std::shared_ptr<const Mlp> model = nullptr);

}  // namespace argseek
