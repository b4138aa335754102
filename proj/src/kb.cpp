#include "argseek/kb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "argseek/error.hpp"
#include "argseek/text.hpp"

namespace argseek {

void validate_atom_id(std::string_view id) {
  if (id.empty()) throw ValidationError("empty atom id");
  for (char c : id) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '&' || c == '#' || c == ',')
      throw ValidationError("atom id contains a reserved character: '" + std::string(id) + "'");
  }
  if (id.find("->") != std::string_view::npos || id.find("::") != std::string_view::npos)
    throw ValidationError("atom id contains a reserved token: '" + std::string(id) + "'");
}

Rule::Rule(std::vector<Atom> premises, Atom conclusion, std::vector<double> premise_weights)
    : premises_(std::move(premises)),
      conclusion_(std::move(conclusion)),
      weights_(std::move(premise_weights)) {
  if (premises_.empty()) throw ValidationError("rule has no premises");
  if (weights_.size() != premises_.size())
    throw ValidationError("rule weight count does not match premise count");
  validate_atom_id(conclusion_);
  std::set<Atom> seen;
  for (const auto& p : premises_) {
    validate_atom_id(p);
    if (p == conclusion_) throw ValidationError("rule conclusion '" + p + "' is also a premise");
    if (!seen.insert(p).second) throw ValidationError("rule repeats premise '" + p + "'");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("rule weights must be positive");
  }
}

Rule Rule::uniform(std::vector<Atom> premises, Atom conclusion, double total_weight) {
  if (!(total_weight > 0.0) || !std::isfinite(total_weight))
    throw ValidationError("rule weight must be positive");
  const std::size_t n = premises.size();
  std::vector<double> w(n, n == 0 ? 0.0 : total_weight / static_cast<double>(n));
  Rule r(std::move(premises), std::move(conclusion), std::move(w));
  r.declared_total_ = total_weight;
  return r;
}

std::pair<std::set<Atom>, Atom> Rule::identity() const {
  return {std::set<Atom>(premises_.begin(), premises_.end()), conclusion_};
}

Rule parse_rule(std::string_view line) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError(why + ": '" + std::string(text::trim(line)) + "'");
  };
  std::string_view body = text::trim(line);
  std::optional<std::string_view> weight_text;
  if (auto pos = body.find("::"); pos != std::string_view::npos) {
    weight_text = text::trim(body.substr(pos + 2));
    body = text::trim(body.substr(0, pos));
  }
  auto arrow = body.find("->");
  if (arrow == std::string_view::npos) throw fail("missing '->'");
  auto lhs = text::trim(body.substr(0, arrow));
  auto rhs = text::trim(body.substr(arrow + 2));
  if (lhs.empty()) throw fail("empty premise list");
  if (rhs.empty()) throw fail("empty conclusion");

  std::vector<Atom> premises;
  for (auto part : text::split(lhs, '&')) {
    auto p = text::trim(part);
    if (p.empty()) throw fail("empty premise");
    premises.emplace_back(p);
  }
  try {
    if (!weight_text) return Rule::uniform(std::move(premises), Atom(rhs));
    if (weight_text->find(',') == std::string_view::npos) {
      auto w = text::parse_double(*weight_text);
      if (!w) throw fail("bad weight");
      if (!(*w > 0.0)) throw fail("non-positive weight");
      return Rule::uniform(std::move(premises), Atom(rhs), *w);
    }
    std::vector<double> weights;
    for (auto part : text::split(*weight_text, ',')) {
      auto w = text::parse_double(part);
      if (!w) throw fail("bad weight");
      if (!(*w > 0.0)) throw fail("non-positive weight");
      weights.push_back(*w);
    }
    return Rule(std::move(premises), Atom(rhs), std::move(weights));
  } catch (const ValidationError& e) {
    throw fail(e.what());
  }
}

std::string render_rule(const Rule& rule) {
  std::string out;
  for (std::size_t i = 0; i < rule.premises().size(); ++i) {
    if (i) out += " & ";
    out += rule.premises()[i];
  }
  out += " -> ";
  out += rule.conclusion();
  out += " :: ";
  if (auto total = rule.declared_total()) {
    out += text::shortest(*total);
  } else {
    for (std::size_t i = 0; i < rule.premise_weights().size(); ++i) {
      if (i) out += ",";
      out += text::shortest(rule.premise_weights()[i]);
    }
  }
  return out;
}

std::size_t dedupe_rules(std::vector<Rule>& rules) {
  std::set<std::pair<std::set<Atom>, Atom>> seen;
  std::vector<Rule> kept;
  kept.reserve(rules.size());
  for (auto& r : rules) {
    if (seen.insert(r.identity()).second) kept.push_back(std::move(r));
  }
  std::size_t dropped = rules.size() - kept.size();
  rules = std::move(kept);
  return dropped;
}

void check_rules_against(const std::vector<Rule>& rules, const std::set<Atom>& universe) {
  for (const auto& r : rules) {
    if (!universe.count(r.conclusion()))
      throw ValidationError("rule '" + render_rule(r) + "' references unknown atom '" +
                            r.conclusion() + "'");
    for (const auto& p : r.premises()) {
      if (!universe.count(p))
        throw ValidationError("rule '" + render_rule(r) + "' references unknown atom '" + p +
                              "'");
    }
  }
}

namespace {

template <typename Fn>
void for_each_content_line(std::string_view text, std::string_view source, Fn&& fn) {
  std::size_t lineno = 0;
  for (auto raw : text::split(text, '\n')) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      fn(line);
    } catch (const Error& e) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

FactsFile parse_facts_text(std::string_view text, std::string_view source) {
  FactsFile out;
  std::set<Atom> seen;
  for_each_content_line(text, source, [&](std::string_view line) {
    validate_atom_id(line);
    if (seen.insert(Atom(line)).second) {
      out.atoms.emplace_back(line);
    } else {
      ++out.duplicates;
    }
  });
  return out;
}

RulesFile parse_rules_text(std::string_view text, std::string_view source) {
  RulesFile out;
  for_each_content_line(text, source,
                        [&](std::string_view line) { out.rules.push_back(parse_rule(line)); });
  out.duplicates = dedupe_rules(out.rules);
  return out;
}

const std::set<Atom>& FactGraph::neighbors(const Atom& a) const {
  static const std::set<Atom> kEmpty;
  auto it = adjacency_.find(a);
  return it == adjacency_.end() ? kEmpty : it->second;
}

std::size_t FactGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [_, adj] : adjacency_) twice += adj.size();
  return twice / 2;
}

FactGraph build_fact_graph(const std::vector<Rule>& rules, const std::set<Atom>& atoms) {
  check_rules_against(rules, atoms);
  FactGraph g;
  g.nodes_ = atoms;
  for (const auto& a : atoms) g.adjacency_[a];
  for (const auto& r : rules) {
    for (const auto& p : r.premises()) {
      g.adjacency_[p].insert(r.conclusion());
      g.adjacency_[r.conclusion()].insert(p);
    }
  }
  return g;
}

}  // namespace argseek
