#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "argseek/env.hpp"
#include "argseek/mlp.hpp"

namespace argseek {

struct Hyperparams {
  double gamma = 0.95;
  double eps_start = 0.1;
  double eps_end = 0.01;
  std::size_t eps_anneal_actions = 2000;
  std::size_t episodes = 1000;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 10000;
  std::size_t target_sync_every = 100;  // gradient updates
  std::vector<int> hidden = {50, 50};
  std::uint64_t seed = 0;

  void validate() const;
};

// Linear from eps_start at 0 actions to eps_end at eps_anneal_actions, then flat.
double epsilon_at(const Hyperparams& hp, std::size_t actions_taken);

// Highest Q among legal actions; ties go to the lowest index.
ActionIndex masked_argmax(const Eigen::VectorXd& q, const std::vector<ActionIndex>& legal);

// Double DQN regression target: the online net picks a*, the target net scores it.
double ddqn_target(const Transition& t, const Mlp& online, const Mlp& target, double gamma);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  // Distinct indices, uniformly chosen.
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

struct TrainResult {
  Mlp online;
  std::vector<double> episode_rewards;
  std::size_t updates = 0;
};

// Episodes draw a knowledge base uniformly from `pool`. Every environment step
// pushes one transition and, once the buffer holds a batch, performs one update.
TrainResult train_ddqn(const DialogueEnv& env, const std::vector<KnowledgeBase>& pool,
                       const Hyperparams& hp);

}  // namespace argseek
