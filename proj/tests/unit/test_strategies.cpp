#include <algorithm>

#include "argseek/error.hpp"
#include "argseek/strategies.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace argseek;

namespace {

// c - a, c - b, b - d, plus an isolated fact f.
Scenario star_scenario() {
  std::vector<Rule> rules{parse_rule("a & b -> c"), parse_rule("d -> b")};
  auto s = Scenario::make("c", {"a", "b", "c", "d", "f"}, rules);
  s.t_limit = 10;
  return s;
}

std::vector<Atom> play(Strategy kind, const DialogueEnv& env, Rng& rng) {
  auto q = make_questioner(kind, env);
  q->begin_episode();
  auto s = env.reset({});
  std::vector<Atom> order;
  while (true) {
    auto a = q->next(s, rng);
    order.push_back(env.scenario().candidate_facts[a]);
    auto r = env.step(s, a, {});
    s = r.state;
    if (r.done) break;
  }
  return order;
}

std::size_t pos(const std::vector<Atom>& v, const Atom& a) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), a) - v.begin());
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {Strategy::Random, Strategy::Dfs, Strategy::Bfs, Strategy::Ddqn})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("greedy"), ValidationError);
}

TEST_CASE("random choice") {
  Rng rng(1);
  CHECK(random_next({7}, rng) == 7);
  CHECK_THROWS_AS(random_next({}, rng), ContractError);
  std::vector<ActionIndex> legal(121);
  for (std::size_t i = 0; i < legal.size(); ++i) legal[i] = i;
  Rng r1(42), r2(42);
  CHECK(random_next(legal, r1) == random_next(legal, r2));
}

TEST_CASE("dfs follows a branch before backtracking") {
  DialogueEnv env(star_scenario());
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    auto order = play(Strategy::Dfs, env, rng);
    REQUIRE(order.size() == 4);
    CHECK(order.back() == "f");
    if (order.front() == "a") {
      CHECK(order == std::vector<Atom>{"a", "b", "d", "f"});
    } else {
      CHECK(order == std::vector<Atom>{"b", "d", "a", "f"});
    }
  }
}

TEST_CASE("bfs exhausts a depth before the next") {
  DialogueEnv env(star_scenario());
  std::set<Atom> firsts;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    auto order = play(Strategy::Bfs, env, rng);
    CHECK(pos(order, "d") > pos(order, "a"));
    CHECK(pos(order, "d") > pos(order, "b"));
    CHECK(order.back() == "f");
    firsts.insert(order.front());
  }
  CHECK(firsts == std::set<Atom>{"a", "b"});
}

TEST_CASE("single neighbor is asked first") {
  auto s = Scenario::make("c", {"a", "c", "x", "y"}, {parse_rule("a -> c"), parse_rule("x -> y")});
  DialogueEnv env(s);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r1(seed), r2(seed);
    CHECK(play(Strategy::Bfs, env, r1).front() == "a");
    CHECK(play(Strategy::Dfs, env, r2).front() == "a");
  }
}

TEST_CASE("isolated claim falls back to random") {
  auto s = Scenario::make("c", {"a", "b", "c"}, {parse_rule("a -> b")});
  DialogueEnv env(s);
  std::set<Atom> firsts;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    firsts.insert(play(Strategy::Dfs, env, rng).front());
  }
  CHECK(firsts == std::set<Atom>{"a", "b"});
}

TEST_CASE("every strategy asks each fact at most once") {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 60; ++i) {
    auto inst = testing::random_instance(gen, 9, 7);
    auto s = Scenario::make(inst.atoms.front(), inst.atoms, inst.rules);
    s.t_limit = static_cast<int>(s.candidate_facts.size());
    DialogueEnv env(s);
    for (auto kind : {Strategy::Random, Strategy::Dfs, Strategy::Bfs}) {
      Rng rng(static_cast<std::uint64_t>(i));
      auto order = play(kind, env, rng);
      std::set<Atom> uniq(order.begin(), order.end());
      CHECK(uniq.size() == order.size());
      CHECK(order.size() == s.candidate_facts.size());
    }
  }
}

TEST_CASE("bfs asks disconnected facts only after the claim's component") {
  std::mt19937_64 gen(9);
  for (int i = 0; i < 60; ++i) {
    auto inst = testing::random_instance(gen, 9, 5);
    auto s = Scenario::make(inst.atoms.front(), inst.atoms, inst.rules);
    s.t_limit = static_cast<int>(s.candidate_facts.size());
    DialogueEnv env(s);
    std::set<Atom> atoms(inst.atoms.begin(), inst.atoms.end());
    auto graph = build_fact_graph(inst.rules, atoms);
    std::set<Atom> comp{s.claim};
    std::vector<Atom> todo{s.claim};
    while (!todo.empty()) {
      Atom u = todo.back();
      todo.pop_back();
      for (const auto& v : graph.neighbors(u))
        if (comp.insert(v).second) todo.push_back(v);
    }
    Rng rng(static_cast<std::uint64_t>(i));
    auto order = play(Strategy::Bfs, env, rng);
    std::size_t in_comp = comp.size() - 1;
    for (std::size_t k = 0; k < order.size(); ++k)
      CHECK((k < in_comp) == (comp.count(order[k]) == 1));
  }
}

TEST_CASE("ddqn questioner needs a matching model") {
  DialogueEnv env(star_scenario());
  CHECK_THROWS_AS(make_questioner(Strategy::Ddqn, env), ContractError);
  auto wrong = std::make_shared<const Mlp>(Mlp::zeros({3, 2}));
  CHECK_THROWS_AS(make_questioner(Strategy::Ddqn, env, wrong), ValidationError);
  auto zero = std::make_shared<const Mlp>(Mlp::zeros({9, 4}));
  auto q = make_questioner(Strategy::Ddqn, env, zero);
  Rng rng(0);
  CHECK(q->next(env.reset({}), rng) == 0);
}
