#include "argseek/ddqn.hpp"
#include "argseek/error.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace argseek;

namespace {

// Output layer only; bias carries the Q-values regardless of input.
Mlp constant_net(std::vector<double> q) {
  Mlp net = Mlp::zeros({1, static_cast<int>(q.size())});
  for (std::size_t i = 0; i < q.size(); ++i) net.biases[0](static_cast<Eigen::Index>(i)) = q[i];
  return net;
}

}  // namespace

TEST_CASE("epsilon schedule") {
  Hyperparams hp;
  CHECK(epsilon_at(hp, 0) == 0.1);
  CHECK(epsilon_at(hp, 1000) == doctest::Approx(0.055));
  CHECK(epsilon_at(hp, 2000) == 0.01);
  CHECK(epsilon_at(hp, 50000) == 0.01);
  for (std::size_t a = 1; a < 2000; a += 97) CHECK(epsilon_at(hp, a) < epsilon_at(hp, a - 1));
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  hp.eps_end = 0.5;
  CHECK_THROWS_AS(hp.validate(), ValidationError);
  hp = {};
  hp.gamma = 1.5;
  CHECK_THROWS_AS(hp.validate(), ValidationError);
}

TEST_CASE("masked argmax") {
  Eigen::VectorXd q(3);
  q << 2, 5, 3;
  CHECK(masked_argmax(q, {0, 2}) == 2);
  CHECK(masked_argmax(q, {0}) == 0);
  CHECK(masked_argmax(q, {0, 1, 2}) == 1);
  Eigen::VectorXd ties = Eigen::VectorXd::Constant(4, 1.0);
  CHECK(masked_argmax(ties, {3, 1, 2}) == 1);
  Eigen::VectorXd shifted = q.array() + 100.0;
  CHECK(masked_argmax(shifted, {0, 2}) == 2);
  CHECK_THROWS_AS(masked_argmax(q, {}), ContractError);
}

TEST_CASE("double DQN targets") {
  Mlp online = constant_net({2, 5, 3});
  Mlp target = constant_net({7, 9, 4});
  Transition t{{0.0}, 0, -1.0, {0.0}, false, {0, 2}};
  CHECK(std::abs(ddqn_target(t, online, target, 0.95) - 2.8) < 1e-12);

  t.legal_next = {0};
  CHECK(std::abs(ddqn_target(t, online, target, 0.95) - (-1.0 + 0.95 * 7)) < 1e-12);

  Transition terminal{{0.0}, 0, 99.0, {0.0}, true, {}};
  CHECK(ddqn_target(terminal, online, target, 0.95) == 99.0);

  Transition broken{{0.0}, 0, -1.0, {0.0}, false, {}};
  CHECK_THROWS_AS(ddqn_target(broken, online, target, 0.95), ContractError);
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push({{double(i)}, 0, 0.0, {}, true, {}});
  CHECK(buf.size() == 3);
  std::set<double> held;
  for (std::size_t i = 0; i < buf.size(); ++i) held.insert(buf[i].s[0]);
  CHECK(held == std::set<double>{2, 3, 4});

  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    auto idx = buf.sample(3, rng);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 3);
  }
  CHECK_THROWS_AS(buf.sample(4, rng), ContractError);
}

TEST_CASE("training with zero episodes returns the initial network") {
  auto s = Scenario::make("q1", testing::two_rule_atoms(), testing::two_rule_rules());
  DialogueEnv env(s);
  Hyperparams hp;
  hp.episodes = 0;
  hp.seed = 4;
  auto res = train_ddqn(env, {KnowledgeBase{}}, hp);
  CHECK(res.episode_rewards.empty());
  CHECK(res.updates == 0);
  CHECK(res.online.layer_dims == std::vector<int>{9, 50, 50, 4});
  CHECK_THROWS_AS(train_ddqn(env, {}, hp), ContractError);
}

TEST_CASE("training is deterministic in the seed") {
  auto s = Scenario::make("q1", testing::two_rule_atoms(), testing::two_rule_rules());
  s.t_limit = 4;
  DialogueEnv env(s);
  std::vector<KnowledgeBase> pool{KnowledgeBase{{"q2", "q4", "q5"}, {}},
                                  KnowledgeBase{{"q4", "q5"}, {}}};
  Hyperparams hp;
  hp.episodes = 60;
  hp.hidden = {8};
  hp.batch_size = 8;
  hp.seed = 17;
  auto a = train_ddqn(env, pool, hp);
  auto b = train_ddqn(env, pool, hp);
  CHECK(a.episode_rewards == b.episode_rewards);
  CHECK(a.online.weights.back() == b.online.weights.back());
  CHECK(a.updates > 0);
  hp.seed = 18;
  auto c = train_ddqn(env, pool, hp);
  CHECK(c.online.weights.back() != a.online.weights.back());
}
