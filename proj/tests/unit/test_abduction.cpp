#include <random>

#include "argseek/abduction.hpp"
#include "argseek/error.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace argseek;
using testing::two_rule_rules;

TEST_CASE("explain: assuming the claim beats backchaining through l1") {
  auto proof = explain({"q1"}, two_rule_rules());
  CHECK(proof.total_cost == 10.0);
  CHECK(proof.assumptions() == std::set<Atom>{"q1"});
  CHECK(brute_force_explain({"q1"}, two_rule_rules()).total_cost == 10.0);
}

TEST_CASE("explain: shared premise unifies at the cheaper charge") {
  auto proof = explain({"q1", "q3", "q4"}, two_rule_rules());
  CHECK(proof.total_cost == 12.0);
  CHECK(proof.assumptions() == std::set<Atom>{"q2", "q4", "q5"});
  CHECK(proof.labels.at("q1") == Justification::by_rule(0));
  CHECK(proof.labels.at("q3") == Justification::by_rule(1));
  CHECK(proof.charges.at("q2") == doctest::Approx(4.0));
  CHECK(proof.charges.at("q4") == doctest::Approx(4.0));
  CHECK(proof.charges.at("q5") == doctest::Approx(4.0));

  auto oracle = brute_force_explain({"q1", "q3", "q4"}, two_rule_rules());
  CHECK(oracle.total_cost == 12.0);
  CHECK(oracle.labels == proof.labels);
}

TEST_CASE("explain: nothing to explain") {
  auto proof = explain({}, two_rule_rules());
  CHECK(proof.labels.empty());
  CHECK(proof.total_cost == 0.0);
}

TEST_CASE("explain: no rules means every observation is assumed") {
  auto proof = explain({"a", "b"}, {});
  CHECK(proof.total_cost == 20.0);
  auto oracle = brute_force_explain({"a"}, {});
  CHECK(oracle.total_cost == 10.0);
  CHECK(oracle.labels.at("a").is_assume());
}

TEST_CASE("explain: max_depth bounds the backchaining chain") {
  // Cheap chain a <- b <- c; each step halves the charge.
  std::vector<Rule> rules{parse_rule("b -> a :: 0.5"), parse_rule("c -> b :: 0.5")};
  AbductionConfig cfg;
  cfg.max_depth = 0;
  CHECK(explain({"a"}, rules, cfg).total_cost == 10.0);
  cfg.max_depth = 1;
  CHECK(explain({"a"}, rules, cfg).total_cost == 5.0);
  cfg.max_depth = 2;
  CHECK(explain({"a"}, rules, cfg).total_cost == 2.5);
  CHECK(brute_force_explain({"a"}, rules, cfg).total_cost == 2.5);
}

TEST_CASE("explain: cyclic rules are labeled acyclically") {
  std::vector<Rule> rules{parse_rule("b -> a :: 0.5"), parse_rule("a -> b :: 0.5"),
                          parse_rule("c -> b :: 0.5")};
  auto proof = explain({"a", "b"}, rules);
  auto oracle = brute_force_explain({"a", "b"}, rules);
  CHECK(proof.total_cost == oracle.total_cost);
  // a via b, b via c: c carries 10 * 0.5 * 0.5
  CHECK(proof.total_cost == 2.5);
}

TEST_CASE("explain: universe cap") {
  std::vector<Rule> rules;
  for (int i = 0; i < 10; ++i)
    rules.push_back(parse_rule("x" + std::to_string(i + 1) + " -> x" + std::to_string(i)));
  AbductionConfig cfg;
  cfg.max_universe = 5;
  CHECK_THROWS_AS(explain({"x0"}, rules, cfg), ResourceError);
  cfg.max_depth = 3;
  CHECK_NOTHROW(explain({"x0"}, rules, cfg));
}

TEST_CASE("brute force refuses large universes") {
  std::vector<Rule> rules;
  for (int i = 0; i < 20; ++i)
    rules.push_back(parse_rule("y" + std::to_string(i) + " -> root"));
  AbductionConfig cfg;
  cfg.max_universe = 100;
  CHECK_THROWS_AS(brute_force_explain({"root"}, rules, cfg), ResourceError);
  CHECK(explain({"root"}, rules, cfg).total_cost == 10.0);
}

TEST_CASE("config validation") {
  AbductionConfig cfg;
  cfg.obs_cost = 0.0;
  CHECK_THROWS_AS(explain({"a"}, {}, cfg), ValidationError);
  cfg.obs_cost = 1.0;
  cfg.max_depth = -1;
  CHECK_THROWS_AS(explain({"a"}, {}, cfg), ValidationError);
}

TEST_CASE("explain matches the brute-force oracle on random instances") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 300; ++i) {
    auto inst = testing::random_instance(rng);
    auto fast = explain(inst.observations, inst.rules);
    auto slow = brute_force_explain(inst.observations, inst.rules);
    INFO("instance " << i);
    REQUIRE(fast.total_cost == slow.total_cost);
    CHECK(fast.assumptions() == slow.assumptions());
  }
}

TEST_CASE("cost properties on random instances") {
  std::mt19937_64 rng(99);
  AbductionConfig cfg;
  for (int i = 0; i < 200; ++i) {
    auto inst = testing::random_instance(rng);
    Explainer ex(inst.rules, cfg);
    auto proof = ex.explain(inst.observations);
    CHECK(proof.total_cost >= 0.0);
    CHECK(proof.total_cost <= cfg.obs_cost * static_cast<double>(inst.observations.size()) + 1e-9);

    // Closure, and total = sum of assumed charges.
    double sum = 0.0;
    for (const auto& [atom, j] : proof.labels) {
      if (j.is_assume()) {
        sum += proof.charges.at(atom);
        continue;
      }
      CHECK(inst.rules[j.rule].conclusion() == atom);
      for (const auto& p : inst.rules[j.rule].premises()) CHECK(proof.labels.count(p) == 1);
    }
    CHECK(proof.total_cost == doctest::Approx(sum).epsilon(1e-9));

    // Repeated calls (warm memo) and a fresh explainer agree.
    CHECK(ex.explain(inst.observations).total_cost == proof.total_cost);
    CHECK(explain(inst.observations, inst.rules).labels == proof.labels);

    // Dropping a rule never makes the explanation cheaper.
    if (!inst.rules.empty()) {
      auto fewer = inst.rules;
      fewer.pop_back();
      CHECK(explain(inst.observations, fewer).total_cost >= proof.total_cost - 1e-9);
    }
  }
}

TEST_CASE("rationality of the two-rule argument") {
  KnowledgeBase kq{{"q3", "q4"}, two_rule_rules()};
  auto r = rationality(kq, "q1");
  CHECK(r.e_alpha == 10.0);
  CHECK(r.e_k == 20.0);
  CHECK(r.e_joint == 12.0);
  CHECK(r.raw == 18.0);
  CHECK(r.norm == 0.6);
}

TEST_CASE("rationality with empty knowledge is zero") {
  KnowledgeBase kq{{}, two_rule_rules()};
  auto r = rationality(kq, "q1");
  CHECK(r.e_k == 0.0);
  CHECK(r.e_joint == r.e_alpha);
  CHECK(r.raw == 0.0);
  CHECK(r.norm == 0.0);
}

TEST_CASE("rationality when the claim is already known") {
  KnowledgeBase kq{{"q1", "q3"}, two_rule_rules()};
  auto r = rationality(kq, "q1");
  CHECK(r.e_joint == r.e_k);
  CHECK(r.raw == r.e_alpha);
  CHECK(r.norm == doctest::Approx(r.e_alpha / (r.e_alpha + r.e_k)));
}

TEST_CASE("normalized rationality never exceeds one") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto inst = testing::random_instance(rng);
    const Atom& claim = inst.atoms.front();
    KnowledgeBase kq{inst.observations, inst.rules};
    auto r = rationality(kq, claim);
    CHECK(r.norm <= 1.0);
    KnowledgeBase empty{{}, inst.rules};
    CHECK(rationality(empty, claim).norm == 0.0);
  }
}

TEST_CASE("construct_argument recovers facts, assumptions and rules") {
  KnowledgeBase kq{{"q3", "q4"}, two_rule_rules()};
  auto arg = construct_argument(kq, "q1");
  CHECK(arg.claim == "q1");
  CHECK(arg.support_facts == std::set<Atom>{"q3", "q4"});
  CHECK(arg.assumptions == std::set<Atom>{"q2", "q5"});
  CHECK(arg.support_rules == std::set<std::size_t>{0, 1});
  CHECK(arg.rationality_norm == 0.6);
}

TEST_CASE("construct_argument degenerate cases") {
  SUBCASE("claim already known") {
    KnowledgeBase kq{{"q1"}, two_rule_rules()};
    auto arg = construct_argument(kq, "q1");
    CHECK(arg.support_facts == std::set<Atom>{"q1"});
    CHECK(arg.assumptions.empty());
    CHECK(arg.support_rules.empty());
  }
  SUBCASE("isolated claim") {
    KnowledgeBase kq{{}, {parse_rule("a -> b")}};
    auto arg = construct_argument(kq, "z");
    CHECK(arg.support_facts.empty());
    CHECK(arg.assumptions.empty());
    CHECK(arg.rationality_norm == 0.0);
  }
  SUBCASE("facts outside the claim's component are not support") {
    KnowledgeBase kq{{"q4", "x"}, {parse_rule("q2 & q4 & q5 -> q1"), parse_rule("y -> x")}};
    auto arg = construct_argument(kq, "q1");
    CHECK(arg.support_facts.count("x") == 0);
  }
}

TEST_CASE("render_proof lists atom, label and charge") {
  auto proof = explain({"q1", "q3", "q4"}, two_rule_rules());
  auto text = render_proof(proof, two_rule_rules());
  CHECK(text.find("q1\tRULE(q2 & q4 & q5 -> q1 :: 1.2)\t10\n") != std::string::npos);
  CHECK(text.find("q5\tASSUME\t4") != std::string::npos);
}
