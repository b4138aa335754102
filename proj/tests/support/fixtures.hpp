#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "argseek/kb.hpp"

namespace argseek::testing {

// Rules of the two-rule argument used throughout the docs:
//   l1: q2 & q4 & q5 -> q1    l2: q2 -> q3
inline std::vector<Rule> two_rule_rules() {
  return {parse_rule("q2 & q4 & q5 -> q1 :: 1.2"), parse_rule("q2 -> q3")};
}

inline std::vector<Atom> two_rule_atoms() { return {"q1", "q2", "q3", "q4", "q5"}; }

struct RandomInstance {
  std::vector<Atom> atoms;
  std::vector<Rule> rules;
  std::set<Atom> observations;
};

// Small random propositional instance; rule graphs may contain cycles.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_atoms = 8,
                                      std::size_t max_rules = 6) {
  static const double kWeights[] = {0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 2.4};
  RandomInstance inst;
  std::uniform_int_distribution<std::size_t> n_atoms(2, max_atoms);
  std::size_t n = n_atoms(rng);
  for (std::size_t i = 0; i < n; ++i) inst.atoms.push_back("a" + std::to_string(i));
  std::uniform_int_distribution<std::size_t> n_rules(0, max_rules);
  std::uniform_int_distribution<std::size_t> pick_atom(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_w(0, std::size(kWeights) - 1);
  std::size_t target = n_rules(rng);
  for (std::size_t r = 0; r < target; ++r) {
    std::size_t concl = pick_atom(rng);
    std::uniform_int_distribution<std::size_t> arity(1, std::min<std::size_t>(3, n - 1));
    std::size_t k = arity(rng);
    std::set<std::size_t> prem;
    while (prem.size() < k) {
      auto p = pick_atom(rng);
      if (p != concl) prem.insert(p);
    }
    std::vector<Atom> premises;
    for (auto p : prem) premises.push_back(inst.atoms[p]);
    std::shuffle(premises.begin(), premises.end(), rng);
    inst.rules.push_back(Rule::uniform(premises, inst.atoms[concl], kWeights[pick_w(rng)]));
  }
  dedupe_rules(inst.rules);
  std::uniform_int_distribution<std::size_t> n_obs(0, std::min<std::size_t>(4, n));
  std::size_t k = n_obs(rng);
  while (inst.observations.size() < k) inst.observations.insert(inst.atoms[pick_atom(rng)]);
  return inst;
}

}  // namespace argseek::testing
