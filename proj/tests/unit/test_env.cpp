#include <random>

#include "argseek/env.hpp"
#include "argseek/error.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace argseek;

namespace {

DialogueEnv two_rule_env(int t_limit = 10) {
  auto s = Scenario::make("q1", testing::two_rule_atoms(), testing::two_rule_rules());
  s.t_limit = t_limit;
  return DialogueEnv(s);
}

std::size_t idx(const DialogueEnv& env, const Atom& a) { return *env.action_of(a); }

}  // namespace

TEST_CASE("scenario construction and validation") {
  auto s = Scenario::make("q1", testing::two_rule_atoms(), testing::two_rule_rules());
  CHECK(s.candidate_facts == std::vector<Atom>{"q2", "q3", "q4", "q5"});
  s.t_limit = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.t_limit = 10;
  s.theta_r = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.theta_r = 0.7;
  s.candidate_facts.push_back("q1");
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK_THROWS_AS(Scenario::make("zz", testing::two_rule_atoms(), {}), ValidationError);
}

TEST_CASE("reset starts from empty knowledge") {
  auto env = two_rule_env();
  KnowledgeBase ka{{"q4", "q5"}, {}};
  auto s = env.reset(ka);
  CHECK(s.asked == std::vector<std::uint8_t>(4, 0));
  CHECK(s.collected == std::vector<std::uint8_t>(4, 0));
  CHECK(s.rationality == 0.0);
  CHECK(s.step == 0);
  CHECK(s.kq_facts.empty());
  CHECK(env.feature_dim() == 9);

  KnowledgeBase bad{{"nope"}, {}};
  CHECK_THROWS_AS(env.reset(bad), ValidationError);
  KnowledgeBase claim_known{{"q1"}, {}};
  CHECK_THROWS_AS(env.reset(claim_known), ValidationError);
}

TEST_CASE("legal actions") {
  auto env = two_rule_env();
  auto s = env.reset({});
  CHECK(legal_actions(s) == std::vector<ActionIndex>{0, 1, 2, 3});
  s = env.step(s, 1, {}).state;
  CHECK(legal_actions(s) == std::vector<ActionIndex>{0, 2, 3});
  s.asked.assign(4, 1);
  CHECK(legal_actions(s).empty());
}

TEST_CASE("answerer echoes known facts only") {
  KnowledgeBase ka{{"q5"}, {}};
  CHECK(answer("q5", ka) == std::optional<Atom>("q5"));
  CHECK_FALSE(answer("q2", ka).has_value());
  CHECK_FALSE(answer("q5", KnowledgeBase{}).has_value());
}

TEST_CASE("featurize") {
  EnvState s;
  s.asked = {0, 0, 0, 1};
  s.collected = {0, 0, 0, 1};
  s.rationality = 0.4;
  CHECK(featurize(s) == std::vector<double>{0, 0, 0, 1, 0, 0, 0, 1, 0.4});
}

TEST_CASE("a dialogue that reaches the threshold") {
  auto env = two_rule_env();
  KnowledgeBase ka{{"q2", "q4", "q5"}, {}};
  auto s = env.reset(ka);

  auto r1 = env.step(s, idx(env, "q4"), ka);
  CHECK(r1.answered == std::optional<Atom>("q4"));
  CHECK(r1.r_norm == doctest::Approx(0.4));
  CHECK(r1.reward == -1.0);
  CHECK_FALSE(r1.done);

  auto r2 = env.step(r1.state, idx(env, "q3"), ka);
  CHECK_FALSE(r2.answered.has_value());
  CHECK(r2.state.collected == r1.state.collected);
  CHECK(r2.state.rationality == r1.state.rationality);
  CHECK(r2.reward == -1.0);

  auto r3 = env.step(r2.state, idx(env, "q5"), ka);
  CHECK(r3.r_norm == doctest::Approx(0.6));
  CHECK_FALSE(r3.done);

  auto r4 = env.step(r3.state, idx(env, "q2"), ka);
  CHECK(r4.r_norm == doctest::Approx(0.7));
  CHECK(r4.reward == 99.0);
  CHECK(r4.done);
  CHECK(r4.success);

  // Independent recomputation from the questioner's knowledge.
  KnowledgeBase kq{r4.state.kq_facts, testing::two_rule_rules()};
  CHECK(rationality(kq, "q1").norm == r4.state.rationality);

  CHECK_THROWS_AS(env.step(r4.state, idx(env, "q2"), ka), ContractError);
  CHECK_THROWS_AS(env.step(r4.state, 17, ka), ContractError);
}

TEST_CASE("time limit and exhaustion end the episode") {
  auto env = two_rule_env(2);
  auto s = env.reset({});
  auto r = env.step(s, 0, {});
  CHECK_FALSE(r.done);
  r = env.step(r.state, 1, {});
  CHECK(r.done);
  CHECK_FALSE(r.success);

  auto wide = env.with_t_limit(50);
  s = wide.reset({});
  for (ActionIndex a = 0; a < 4; ++a) {
    r = wide.step(s, a, {});
    s = r.state;
  }
  CHECK(r.done);
  CHECK(s.step == 4);
}

TEST_CASE("random episodes keep the accounting invariants") {
  auto env = two_rule_env(3);
  std::mt19937_64 rng(7);
  std::vector<Atom> cands = env.scenario().candidate_facts;
  for (int ep = 0; ep < 200; ++ep) {
    KnowledgeBase ka;
    for (const auto& c : cands)
      if (rng() % 2) ka.facts.insert(c);
    auto s = env.reset(ka);
    double total = 0.0;
    bool success = false;
    while (true) {
      auto legal = legal_actions(s);
      auto a = legal[rng() % legal.size()];
      auto r = env.step(s, a, ka);
      total += r.reward;
      for (std::size_t i = 0; i < 4; ++i) CHECK(r.state.collected[i] <= r.state.asked[i]);
      KnowledgeBase kq{r.state.kq_facts, testing::two_rule_rules()};
      CHECK(rationality(kq, "q1").norm == r.state.rationality);
      s = r.state;
      if (r.done) {
        success = r.success;
        break;
      }
    }
    CHECK(s.step <= 3);
    CHECK(total == 100.0 * success - 1.0 * s.step);
  }
}
