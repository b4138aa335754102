// Exhaustive reference for explain(): enumerate every labeling of the
// relevant atoms, keep the valid ones, take the cheapest.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>

#include "argseek/abduction.hpp"
#include "argseek/error.hpp"

namespace argseek {

namespace {

constexpr std::size_t kMaxLabelings = 20'000'000;

struct Candidate {
  double cost;
  std::vector<Atom> assumed;  // sorted
  std::map<Atom, Justification> labels;
};

bool strictly_cheaper(double a, double b) { return a < b - 1e-9 * std::max(1.0, std::abs(b)); }

bool preferred(const Candidate& a, const Candidate& b) {
  if (strictly_cheaper(a.cost, b.cost)) return true;
  if (strictly_cheaper(b.cost, a.cost)) return false;
  if (a.assumed.size() != b.assumed.size()) return a.assumed.size() < b.assumed.size();
  return a.assumed < b.assumed;
}

}  // namespace

ProofStructure brute_force_explain(const std::set<Atom>& observations,
                                   const std::vector<Rule>& rules,
                                   const AbductionConfig& config) {
  config.validate();
  std::map<Atom, std::vector<std::size_t>> deriving;
  for (std::size_t r = 0; r < rules.size(); ++r) deriving[rules[r].conclusion()].push_back(r);

  std::map<Atom, int> dist;
  std::deque<Atom> queue;
  for (const auto& o : observations) {
    dist[o] = 0;
    queue.push_back(o);
  }
  while (!queue.empty()) {
    Atom a = queue.front();
    queue.pop_front();
    if (dist[a] >= config.max_depth) continue;
    for (auto r : deriving[a])
      for (const auto& p : rules[r].premises())
        if (!dist.count(p)) {
          dist[p] = dist[a] + 1;
          queue.push_back(p);
        }
  }
  if (dist.size() > kBruteForceMaxAtoms)
    throw ResourceError("brute force refuses " + std::to_string(dist.size()) + " atoms (limit " +
                        std::to_string(kBruteForceMaxAtoms) + ")");

  std::vector<Atom> atoms;
  for (const auto& [a, _] : dist) atoms.push_back(a);
  const std::size_t n = atoms.size();
  std::vector<std::vector<Justification>> options(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    options[i].push_back(Justification::assume());
    for (auto r : deriving[atoms[i]]) {
      bool inside = std::all_of(rules[r].premises().begin(), rules[r].premises().end(),
                                [&](const Atom& p) { return dist.count(p) != 0; });
      if (inside) options[i].push_back(Justification::by_rule(r));
    }
    total *= options[i].size();
    if (total > kMaxLabelings) throw ResourceError("brute force labeling space too large");
  }

  std::map<Atom, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos[atoms[i]] = i;

  std::vector<std::size_t> pick(n, 0);
  std::optional<Candidate> best;
  const double inf = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < total; ++iter) {
    // Needed atoms: the closure of the observations under chosen rules.
    std::vector<char> needed(n, 0);
    std::vector<std::size_t> stack;
    for (const auto& o : observations) {
      needed[pos[o]] = 1;
      stack.push_back(pos[o]);
    }
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      const auto& j = options[u][pick[u]];
      if (j.is_assume()) continue;
      for (const auto& p : rules[j.rule].premises()) {
        auto v = pos[p];
        if (!needed[v]) {
          needed[v] = 1;
          stack.push_back(v);
        }
      }
    }

    // Kahn over needed atoms; a leftover atom means a cycle.
    std::vector<int> indeg(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (!needed[u] || options[u][pick[u]].is_assume()) continue;
      for (const auto& p : rules[options[u][pick[u]].rule].premises()) ++indeg[pos[p]];
    }
    std::vector<std::size_t> order;
    std::size_t needed_count = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!needed[u]) continue;
      ++needed_count;
      if (indeg[u] == 0) order.push_back(u);
    }
    for (std::size_t h = 0; h < order.size(); ++h) {
      auto u = order[h];
      const auto& j = options[u][pick[u]];
      if (j.is_assume()) continue;
      for (const auto& p : rules[j.rule].premises())
        if (--indeg[pos[p]] == 0) order.push_back(pos[p]);
    }

    bool valid = order.size() == needed_count;
    if (valid) {
      std::vector<int> depth(n, -1);
      std::vector<double> charge(n, inf);
      for (const auto& o : observations) {
        depth[pos[o]] = 0;
        charge[pos[o]] = config.obs_cost;
      }
      for (auto u : order) {
        const auto& j = options[u][pick[u]];
        if (j.is_assume()) continue;
        if (depth[u] >= config.max_depth) {
          valid = false;
          break;
        }
        const auto& rule = rules[j.rule];
        for (std::size_t i = 0; i < rule.premises().size(); ++i) {
          auto v = pos[rule.premises()[i]];
          depth[v] = std::max(depth[v], depth[u] + 1);
          charge[v] = std::min(charge[v], charge[u] * rule.premise_weights()[i]);
        }
      }
      if (valid) {
        Candidate c;
        double sum = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
          if (!needed[u]) continue;
          const auto& j = options[u][pick[u]];
          c.labels[atoms[u]] = j;
          if (j.is_assume()) {
            sum += charge[u];
            c.assumed.push_back(atoms[u]);
          }
        }
        c.cost = sum;
        if (!best || preferred(c, *best)) best = std::move(c);
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (++pick[i] < options[i].size()) break;
      pick[i] = 0;
    }
  }

  ProofStructure proof;
  if (!best) return proof;
  proof.labels = best->labels;
  // Charges of the winning labeling, recomputed by fixed-point relaxation.
  for (const auto& [a, _] : proof.labels)
    proof.charges[a] = observations.count(a) ? config.obs_cost : inf;
  for (std::size_t round = 0; round <= n; ++round) {
    for (const auto& [a, j] : proof.labels) {
      if (j.is_assume()) continue;
      const auto& rule = rules[j.rule];
      for (std::size_t i = 0; i < rule.premises().size(); ++i) {
        auto& c = proof.charges[rule.premises()[i]];
        c = std::min(c, proof.charges[a] * rule.premise_weights()[i]);
      }
    }
  }
  for (auto& [_, c] : proof.charges) c = round_cost(c);
  proof.total_cost = round_cost(best->cost);
  return proof;
}

}  // namespace argseek
