#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace argseek {

// Ground propositional atom. Ids are opaque; display text lives in questions.tsv.
using Atom = std::string;

inline constexpr double kDefaultRuleWeight = 1.2;

// Throws ValidationError unless `id` is a usable atom identifier.
void validate_atom_id(std::string_view id);

// Weighted Horn rule p_1 & ... & p_n -> q.
//
// Each premise carries a positive cost multiplier. Rules read from text always
// split a declared total weight uniformly; the declared total is kept so that
// rendering reproduces the source text exactly.
class Rule {
 public:
  Rule(std::vector<Atom> premises, Atom conclusion, std::vector<double> premise_weights);

  static Rule uniform(std::vector<Atom> premises, Atom conclusion,
                      double total_weight = kDefaultRuleWeight);

  const std::vector<Atom>& premises() const { return premises_; }
  const Atom& conclusion() const { return conclusion_; }
  const std::vector<double>& premise_weights() const { return weights_; }
  std::size_t arity() const { return premises_.size(); }

  // Declared total weight for uniformly split rules, nullopt otherwise.
  std::optional<double> declared_total() const { return declared_total_; }

  // Identity ignores premise order and weights.
  std::pair<std::set<Atom>, Atom> identity() const;

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.premises_ == b.premises_ && a.conclusion_ == b.conclusion_ &&
           a.weights_ == b.weights_;
  }

 private:
  std::vector<Atom> premises_;
  Atom conclusion_;
  std::vector<double> weights_;
  std::optional<double> declared_total_;
};

// Syntax: `a & b & c -> q` with optional `:: W` (total weight, split evenly)
// or `:: w1,w2,w3` (one weight per premise).
Rule parse_rule(std::string_view line);
std::string render_rule(const Rule& rule);

struct KnowledgeBase {
  std::set<Atom> facts;
  std::vector<Rule> rules;
};

// Removes rules whose identity repeats an earlier rule. Returns the number dropped.
std::size_t dedupe_rules(std::vector<Rule>& rules);

// Throws ValidationError if a rule mentions an atom outside `universe`.
void check_rules_against(const std::vector<Rule>& rules, const std::set<Atom>& universe);

struct FactsFile {
  std::vector<Atom> atoms;  // file order, duplicates removed
  std::size_t duplicates = 0;
};

struct RulesFile {
  std::vector<Rule> rules;  // file order, duplicates removed
  std::size_t duplicates = 0;
};

// Line-oriented readers. Blank lines and `#` comments are skipped. Parse
// errors carry `source:line:` prefixes.
FactsFile parse_facts_text(std::string_view text, std::string_view source = "<facts>");
RulesFile parse_rules_text(std::string_view text, std::string_view source = "<rules>");

// Undirected graph over facts: p_i -- q for every premise of every rule.
class FactGraph {
 public:
  FactGraph() = default;

  const std::set<Atom>& nodes() const { return nodes_; }
  const std::set<Atom>& neighbors(const Atom& a) const;
  bool contains(const Atom& a) const { return nodes_.count(a) != 0; }
  std::size_t edge_count() const;

  friend FactGraph build_fact_graph(const std::vector<Rule>& rules,
                                    const std::set<Atom>& atoms);

 private:
  std::set<Atom> nodes_;
  std::map<Atom, std::set<Atom>> adjacency_;
};

FactGraph build_fact_graph(const std::vector<Rule>& rules, const std::set<Atom>& atoms);

}  // namespace argseek
