#include "argseek/abduction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "argseek/error.hpp"
#include "argseek/text.hpp"

namespace argseek {

void AbductionConfig::validate() const {
  if (!(obs_cost > 0.0) || !std::isfinite(obs_cost))
    throw ValidationError("obs_cost must be positive");
  if (max_depth < 0) throw ValidationError("max_depth must be non-negative");
}

std::set<Atom> ProofStructure::assumptions() const {
  std::set<Atom> out;
  for (const auto& [atom, j] : labels)
    if (j.is_assume()) out.insert(atom);
  return out;
}

std::set<std::size_t> ProofStructure::used_rules() const {
  std::set<std::size_t> out;
  for (const auto& [atom, j] : labels)
    if (!j.is_assume()) out.insert(j.rule);
  return out;
}

double round_cost(double cost) { return std::nearbyint(cost * 1e9) / 1e9; }

std::string render_proof(const ProofStructure& proof, const std::vector<Rule>& rules) {
  std::string out;
  for (const auto& [atom, j] : proof.labels) {
    out += atom;
    out += '\t';
    if (j.is_assume()) {
      out += "ASSUME";
    } else {
      out += "RULE(" + render_rule(rules.at(j.rule)) + ")";
    }
    out += '\t';
    auto it = proof.charges.find(atom);
    out += text::shortest(it == proof.charges.end() ? 0.0 : it->second);
    out += '\n';
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNoDepth = std::numeric_limits<int>::min() / 2;
constexpr int kAssumeLabel = -1;
constexpr int kUnset = -2;
constexpr std::size_t kMemoCap = 400000;
constexpr std::size_t kBlockEnumerationCap = 1u << 18;

bool cost_less(double a, double b) { return a < b - 1e-9 * std::max(1.0, std::abs(b)); }

struct Entry {
  int atom;
  double charge;
  int depth;
  friend bool operator==(const Entry&, const Entry&) = default;
};

struct FrontierHash {
  std::size_t operator()(const std::vector<Entry>& f) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (const auto& e : f) {
      std::uint64_t bits;
      std::memcpy(&bits, &e.charge, sizeof bits);
      mix(static_cast<std::uint64_t>(e.atom));
      mix(bits);
      mix(static_cast<std::uint64_t>(e.depth));
    }
    return static_cast<std::size_t>(h);
  }
};

struct Solution;
using SolutionPtr = std::shared_ptr<const Solution>;

struct Solution {
  double cost = 0.0;
  std::vector<int> assumed;                     // sorted atom indices
  std::vector<std::pair<int, int>> labels;      // (atom, rule or kAssumeLabel)
  std::vector<SolutionPtr> children;
};

// Lower cost wins; ties go to fewer assumptions, then the lexicographically
// smallest assumption set (atom indices follow atom-id order).
bool better(const Solution& a, const Solution& b) {
  if (cost_less(a.cost, b.cost)) return true;
  if (cost_less(b.cost, a.cost)) return false;
  if (a.assumed.size() != b.assumed.size()) return a.assumed.size() < b.assumed.size();
  return a.assumed < b.assumed;
}

struct Choice {
  double immediate = 0.0;
  std::vector<int> assumed;
  std::vector<std::pair<int, int>> labels;
  std::vector<Entry> outputs;  // premises in later blocks
};

std::vector<Entry> merge_frontier(const std::vector<Entry>& a, std::vector<Entry> b) {
  std::sort(b.begin(), b.end(), [](const Entry& x, const Entry& y) { return x.atom < y.atom; });
  std::vector<Entry> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].atom < b[j].atom)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].atom < a[i].atom) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].atom, std::min(a[i].charge, b[j].charge),
                     std::max(a[i].depth, b[j].depth)});
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<int> merge_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::atomic<std::size_t> g_negative_events{0};

}  // namespace

struct Explainer::Impl {
  struct CompiledRule {
    int conclusion;
    std::vector<int> premises;
    std::vector<double> weights;
  };

  std::vector<Rule> rules;
  AbductionConfig config;

  std::vector<std::string> names;  // sorted
  std::unordered_map<std::string, int> index;
  std::vector<CompiledRule> compiled;
  std::vector<std::vector<int>> concluding;  // atom -> rules deriving it
  std::vector<int> block_of;                 // atom -> block position (conclusions first)
  std::vector<std::vector<int>> blocks;
  std::vector<std::vector<std::uint64_t>> reach;  // descendants, including self
  std::size_t words = 1;

  mutable std::mutex mu;
  mutable std::unordered_map<std::vector<Entry>, SolutionPtr, FrontierHash> memo;

  Impl(std::vector<Rule> rs, AbductionConfig cfg) : rules(std::move(rs)), config(cfg) {
    config.validate();
    std::set<std::string> all;
    for (const auto& r : rules) {
      all.insert(r.conclusion());
      all.insert(r.premises().begin(), r.premises().end());
    }
    names.assign(all.begin(), all.end());
    for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], static_cast<int>(i));
    concluding.assign(names.size(), {});
    for (std::size_t r = 0; r < rules.size(); ++r) {
      CompiledRule c;
      c.conclusion = index.at(rules[r].conclusion());
      for (const auto& p : rules[r].premises()) c.premises.push_back(index.at(p));
      c.weights = rules[r].premise_weights();
      concluding[c.conclusion].push_back(static_cast<int>(r));
      compiled.push_back(std::move(c));
    }
    build_blocks();
    build_reach();
  }

  // Tarjan; emits components sinks-first, so the list is reversed afterwards.
  void build_blocks() {
    const int n = static_cast<int>(names.size());
    std::vector<std::vector<int>> succ(n);
    for (const auto& c : compiled)
      for (int p : c.premises) succ[c.conclusion].push_back(p);
    for (auto& s : succ) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    std::vector<int> idx(n, -1), low(n, 0), stack;
    std::vector<char> on_stack(n, 0);
    int counter = 0;
    std::vector<std::vector<int>> emitted;
    std::function<void(int)> strong = [&](int v) {
      idx[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      for (int w : succ[v]) {
        if (idx[w] < 0) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      }
      if (low[v] == idx[v]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        emitted.push_back(std::move(comp));
      }
    };
    for (int v = 0; v < n; ++v)
      if (idx[v] < 0) strong(v);
    blocks.assign(emitted.rbegin(), emitted.rend());
    block_of.assign(n, 0);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int a : blocks[b]) block_of[a] = static_cast<int>(b);
  }

  void build_reach() {
    words = std::max<std::size_t>(1, (names.size() + 63) / 64);
    reach.assign(names.size(), std::vector<std::uint64_t>(words, 0));
    for (std::size_t b = blocks.size(); b-- > 0;) {
      std::vector<std::uint64_t> bits(words, 0);
      for (int a : blocks[b]) {
        bits[a / 64] |= 1ull << (a % 64);
        for (int r : concluding[a])
          for (int p : compiled[r].premises)
            if (block_of[p] != static_cast<int>(b))
              for (std::size_t w = 0; w < words; ++w) bits[w] |= reach[p][w];
      }
      for (int a : blocks[b]) reach[a] = bits;
    }
  }

  bool overlaps(int a, int b) const {
    for (std::size_t w = 0; w < words; ++w)
      if (reach[a][w] & reach[b][w]) return true;
    return false;
  }

  // Partitions a frontier into groups that cannot influence each other.
  std::vector<std::vector<Entry>> split(const std::vector<Entry>& frontier) const {
    const std::size_t k = frontier.size();
    std::vector<std::size_t> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (find(i) != find(j) && overlaps(frontier[i].atom, frontier[j].atom))
          parent[find(j)] = find(i);
    std::vector<std::vector<Entry>> groups;
    std::vector<long> slot(k, -1);
    for (std::size_t i = 0; i < k; ++i) {
      auto root = find(i);
      if (slot[root] < 0) {
        slot[root] = static_cast<long>(groups.size());
        groups.emplace_back();
      }
      groups[slot[root]].push_back(frontier[i]);
    }
    return groups;
  }

  std::vector<Choice> enumerate_singleton(const Entry& e) const {
    std::vector<Choice> out;
    Choice assume;
    assume.immediate = e.charge;
    assume.assumed = {e.atom};
    assume.labels = {{e.atom, kAssumeLabel}};
    out.push_back(std::move(assume));
    if (e.depth >= config.max_depth) return out;
    for (int r : concluding[e.atom]) {
      Choice c;
      c.labels = {{e.atom, r}};
      const auto& rule = compiled[r];
      for (std::size_t i = 0; i < rule.premises.size(); ++i)
        c.outputs.push_back({rule.premises[i], e.charge * rule.weights[i], e.depth + 1});
      out.push_back(std::move(c));
    }
    return out;
  }

  // Labels a strongly connected block as a unit: every closed, acyclic,
  // depth-feasible labeling of the needed block atoms becomes one choice.
  std::vector<Choice> enumerate_block(int b, const std::vector<Entry>& in_block) const {
    const auto& atoms = blocks[b];
    if (atoms.size() == 1) return enumerate_singleton(in_block.front());

    const std::size_t m = atoms.size();
    auto local = [&](int atom) {
      return static_cast<std::size_t>(std::lower_bound(atoms.begin(), atoms.end(), atom) -
                                      atoms.begin());
    };
    std::vector<double> charge0(m, kInf);
    std::vector<int> depth0(m, kNoDepth);
    std::vector<int> needed(m, 0);
    for (const auto& e : in_block) {
      auto i = local(e.atom);
      charge0[i] = e.charge;
      depth0[i] = e.depth;
      needed[i] = 1;
    }
    std::vector<int> label(m, kUnset);
    std::vector<Choice> out;
    std::size_t leaves = 0;

    auto evaluate = [&]() {
      if (++leaves > kBlockEnumerationCap)
        throw ResourceError("strongly connected rule block too large to enumerate");
      std::vector<int> indeg(m, 0);
      for (std::size_t u = 0; u < m; ++u) {
        if (label[u] < 0) continue;
        for (int p : compiled[label[u]].premises)
          if (block_of[p] == b) ++indeg[local(p)];
      }
      std::vector<std::size_t> order;
      for (std::size_t u = 0; u < m; ++u)
        if (label[u] != kUnset && indeg[u] == 0) order.push_back(u);
      for (std::size_t h = 0; h < order.size(); ++h) {
        auto u = order[h];
        if (label[u] < 0) continue;
        for (int p : compiled[label[u]].premises)
          if (block_of[p] == b && --indeg[local(p)] == 0) order.push_back(local(p));
      }
      std::size_t labeled = 0;
      for (std::size_t u = 0; u < m; ++u) labeled += label[u] != kUnset;
      if (order.size() != labeled) return;  // cyclic use of rules

      std::vector<double> charge = charge0;
      std::vector<int> depth = depth0;
      std::map<int, Entry> outputs;
      for (auto u : order) {
        if (label[u] < 0) continue;
        if (depth[u] >= config.max_depth) return;
        const auto& rule = compiled[label[u]];
        for (std::size_t i = 0; i < rule.premises.size(); ++i) {
          int p = rule.premises[i];
          double c = charge[u] * rule.weights[i];
          int d = depth[u] + 1;
          if (block_of[p] == b) {
            auto lp = local(p);
            charge[lp] = std::min(charge[lp], c);
            depth[lp] = std::max(depth[lp], d);
          } else {
            auto [it, fresh] = outputs.try_emplace(p, Entry{p, c, d});
            if (!fresh) {
              it->second.charge = std::min(it->second.charge, c);
              it->second.depth = std::max(it->second.depth, d);
            }
          }
        }
      }
      Choice choice;
      for (std::size_t u = 0; u < m; ++u) {
        if (label[u] == kUnset) continue;
        choice.labels.emplace_back(atoms[u], label[u]);
        if (label[u] == kAssumeLabel) {
          choice.immediate += charge[u];
          choice.assumed.push_back(atoms[u]);
        }
      }
      for (auto& [_, e] : outputs) choice.outputs.push_back(e);
      out.push_back(std::move(choice));
    };

    std::function<void()> rec = [&]() {
      std::size_t pick = m;
      for (std::size_t u = 0; u < m; ++u)
        if (needed[u] && label[u] == kUnset) {
          pick = u;
          break;
        }
      if (pick == m) {
        evaluate();
        return;
      }
      label[pick] = kAssumeLabel;
      rec();
      for (int r : concluding[atoms[pick]]) {
        label[pick] = r;
        std::vector<std::size_t> marked;
        for (int p : compiled[r].premises) {
          if (block_of[p] != b) continue;
          auto lp = local(p);
          if (!needed[lp]) {
            needed[lp] = 1;
            marked.push_back(lp);
          }
        }
        rec();
        for (auto lp : marked) needed[lp] = 0;
      }
      label[pick] = kUnset;
    };
    rec();
    return out;
  }

  SolutionPtr solve_group(const std::vector<Entry>& group) const {
    if (auto it = memo.find(group); it != memo.end()) return it->second;

    int b = block_of[group.front().atom];
    for (const auto& e : group) b = std::min(b, block_of[e.atom]);
    std::vector<Entry> in_block, rest;
    for (const auto& e : group) (block_of[e.atom] == b ? in_block : rest).push_back(e);

    std::shared_ptr<Solution> best;
    auto exceeds_best = [&](double running) {
      return best && cost_less(best->cost, running);
    };
    for (auto& choice : enumerate_block(b, in_block)) {
      double running = choice.immediate;
      if (exceeds_best(running)) continue;
      auto next = merge_frontier(rest, std::move(choice.outputs));
      auto cand = std::make_shared<Solution>();
      cand->assumed = choice.assumed;
      bool pruned = false;
      for (const auto& sub : split(next)) {
        auto s = solve_group(sub);
        running += s->cost;
        if (exceeds_best(running)) {
          pruned = true;
          break;
        }
        cand->assumed = merge_sorted(cand->assumed, s->assumed);
        cand->children.push_back(std::move(s));
      }
      if (pruned) continue;
      cand->cost = running;
      cand->labels = std::move(choice.labels);
      if (!best || better(*cand, *best)) best = std::move(cand);
    }
    memo.emplace(group, best);
    return best;
  }

  std::size_t relevant_count(const std::vector<int>& observed) const {
    std::vector<int> dist(names.size(), -1);
    std::deque<int> queue;
    for (int a : observed) {
      dist[a] = 0;
      queue.push_back(a);
    }
    std::size_t count = observed.size();
    while (!queue.empty()) {
      int a = queue.front();
      queue.pop_front();
      if (dist[a] >= config.max_depth) continue;
      for (int r : concluding[a])
        for (int p : compiled[r].premises)
          if (dist[p] < 0) {
            dist[p] = dist[a] + 1;
            ++count;
            queue.push_back(p);
          }
    }
    return count;
  }

  ProofStructure explain(const std::set<Atom>& observations) const {
    std::lock_guard lock(mu);
    if (memo.size() > kMemoCap) memo.clear();

    std::vector<int> observed;
    std::vector<Atom> isolated;  // observed atoms no rule mentions
    for (const auto& o : observations) {
      auto it = index.find(o);
      if (it == index.end()) {
        isolated.push_back(o);
      } else {
        observed.push_back(it->second);
      }
    }
    if (relevant_count(observed) + isolated.size() > config.max_universe)
      throw ResourceError("abduction universe exceeds max_universe (" +
                          std::to_string(config.max_universe) + ")");

    std::map<int, int> labels;
    std::vector<Entry> frontier;
    for (int a : observed) frontier.push_back({a, config.obs_cost, 0});
    std::vector<const Solution*> pending;
    std::vector<SolutionPtr> keep;
    for (const auto& g : split(frontier)) {
      keep.push_back(solve_group(g));
      pending.push_back(keep.back().get());
    }
    while (!pending.empty()) {
      const Solution* s = pending.back();
      pending.pop_back();
      for (const auto& [atom, lab] : s->labels) labels[atom] = lab;
      for (const auto& c : s->children) pending.push_back(c.get());
    }

    // Recompute charges from the labeling, parents before premises.
    std::vector<double> charge(names.size(), kInf);
    std::map<int, int> indeg;
    for (const auto& [atom, lab] : labels) indeg.emplace(atom, 0);
    for (const auto& [atom, lab] : labels)
      if (lab >= 0)
        for (int p : compiled[lab].premises) ++indeg[p];
    for (int a : observed) charge[a] = config.obs_cost;
    std::vector<int> order;
    for (const auto& [atom, d] : indeg)
      if (d == 0) order.push_back(atom);
    for (std::size_t h = 0; h < order.size(); ++h) {
      int u = order[h];
      int lab = labels[u];
      if (lab < 0) continue;
      const auto& rule = compiled[lab];
      for (std::size_t i = 0; i < rule.premises.size(); ++i) {
        int p = rule.premises[i];
        charge[p] = std::min(charge[p], charge[u] * rule.weights[i]);
        if (--indeg[p] == 0) order.push_back(p);
      }
    }

    ProofStructure proof;
    double total = 0.0;
    for (const auto& [atom, lab] : labels) {
      proof.labels[names[atom]] =
          lab < 0 ? Justification::assume() : Justification::by_rule(static_cast<std::size_t>(lab));
      proof.charges[names[atom]] = round_cost(charge[atom]);
      if (lab < 0) total += charge[atom];
    }
    for (const auto& a : isolated) {
      proof.labels[a] = Justification::assume();
      proof.charges[a] = config.obs_cost;
      total += config.obs_cost;
    }
    proof.total_cost = round_cost(total);
    return proof;
  }
};

Explainer::Explainer(std::vector<Rule> rules, AbductionConfig config)
    : impl_(std::make_unique<Impl>(std::move(rules), config)) {}
Explainer::~Explainer() = default;
Explainer::Explainer(Explainer&&) noexcept = default;
Explainer& Explainer::operator=(Explainer&&) noexcept = default;

ProofStructure Explainer::explain(const std::set<Atom>& observations) const {
  return impl_->explain(observations);
}
const std::vector<Rule>& Explainer::rules() const { return impl_->rules; }
const AbductionConfig& Explainer::config() const { return impl_->config; }
std::size_t Explainer::memo_entries() const {
  std::lock_guard lock(impl_->mu);
  return impl_->memo.size();
}

ProofStructure explain(const std::set<Atom>& observations, const std::vector<Rule>& rules,
                       const AbductionConfig& config) {
  return Explainer(rules, config).explain(observations);
}

Rationality rationality_from_costs(double e_alpha, double e_k, double e_joint) {
  Rationality r;
  r.e_alpha = e_alpha;
  r.e_k = e_k;
  r.e_joint = e_joint;
  r.raw = round_cost(e_alpha + e_k - e_joint);
  double denom = e_alpha + e_k;
  r.norm = denom > 0.0 ? r.raw / denom : 0.0;
  if (r.raw < 0.0) {
    if (g_negative_events.fetch_add(1) == 0)
      std::clog << "argseek: warning: negative rationality observed (raw=" << r.raw
                << "); values are reported unclamped\n";
  }
  return r;
}

std::size_t negative_rationality_events() { return g_negative_events.load(); }

Rationality rationality(const Explainer& explainer, const std::set<Atom>& kq_facts,
                        const Atom& claim) {
  double e_alpha = explainer.explain({claim}).total_cost;
  double e_k = explainer.explain(kq_facts).total_cost;
  std::set<Atom> joint = kq_facts;
  joint.insert(claim);
  double e_joint = explainer.explain(joint).total_cost;
  return rationality_from_costs(e_alpha, e_k, e_joint);
}

Rationality rationality(const KnowledgeBase& kq, const Atom& claim,
                        const AbductionConfig& config) {
  return rationality(Explainer(kq.rules, config), kq.facts, claim);
}

Argument construct_argument(const Explainer& explainer, const std::set<Atom>& kq_facts,
                            const Atom& claim) {
  std::set<Atom> joint = kq_facts;
  joint.insert(claim);
  ProofStructure proof = explainer.explain(joint);

  std::map<Atom, std::vector<Atom>> adj;
  for (const auto& [atom, j] : proof.labels) {
    adj[atom];
    if (j.is_assume()) continue;
    for (const auto& p : explainer.rules()[j.rule].premises()) {
      adj[atom].push_back(p);
      adj[p].push_back(atom);
    }
  }
  std::set<Atom> component{claim};
  std::vector<Atom> todo{claim};
  while (!todo.empty()) {
    Atom a = todo.back();
    todo.pop_back();
    for (const auto& n : adj[a])
      if (component.insert(n).second) todo.push_back(n);
  }

  Argument arg;
  arg.claim = claim;
  for (const auto& a : component) {
    auto it = proof.labels.find(a);
    if (it == proof.labels.end()) continue;
    if (kq_facts.count(a)) arg.support_facts.insert(a);
    if (it->second.is_assume()) {
      if (!kq_facts.count(a) && a != claim) arg.assumptions.insert(a);
    } else {
      arg.support_rules.insert(it->second.rule);
    }
  }

  double e_alpha = explainer.explain({claim}).total_cost;
  double e_k = explainer.explain(kq_facts).total_cost;
  Rationality r = rationality_from_costs(e_alpha, e_k, proof.total_cost);
  arg.rationality_raw = r.raw;
  arg.rationality_norm = r.norm;
  return arg;
}

Argument construct_argument(const KnowledgeBase& kq, const Atom& claim,
                            const AbductionConfig& config) {
  return construct_argument(Explainer(kq.rules, config), kq.facts, claim);
}

}  // namespace argseek
