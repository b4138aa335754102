#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "argseek/kb.hpp"

namespace argseek {

// Cost scale and search bounds for weighted abduction.
struct AbductionConfig {
  double obs_cost = 10.0;          // charge carried by every observed atom
  int max_depth = 6;               // longest backchaining chain from an observation
  std::size_t max_universe = 64;   // cap on atoms backward-reachable from the observations

  void validate() const;
};

// How an atom of a proof structure is accounted for.
struct Justification {
  static constexpr std::size_t kAssume = static_cast<std::size_t>(-1);

  std::size_t rule = kAssume;  // index into the rule list, or kAssume

  static Justification assume() { return {}; }
  static Justification by_rule(std::size_t r) { return Justification{r}; }
  bool is_assume() const { return rule == kAssume; }

  friend bool operator==(const Justification&, const Justification&) = default;
};

// A labeling of every needed atom as assumed or derived by a rule.
//
// Charges flow from observations down through premise weights; an atom
// reached along several paths keeps the cheapest charge. Only assumed
// atoms are paid for.
struct ProofStructure {
  std::map<Atom, Justification> labels;
  std::map<Atom, double> charges;
  double total_cost = 0.0;

  std::set<Atom> assumptions() const;
  std::set<std::size_t> used_rules() const;
};

// Costs are reported on a 1e-9 grid so that mathematically equal structures
// compare equal regardless of summation order.
double round_cost(double cost);

// `atom<TAB>ASSUME|RULE(<rule>)<TAB>charge` rows in atom order.
std::string render_proof(const ProofStructure& proof, const std::vector<Rule>& rules);

// Minimum-cost explainer bound to one rule set.
//
// The search walks atoms in topological order of the rule graph (strongly
// connected components are labeled as a unit), splits the open frontier into
// independent groups whose descendant sets do not overlap, and solves each
// group by branch and bound over justification choices. Group solutions are
// memoized across calls, so repeated queries against the same rules get
// cheaper. Calls are serialized internally; one explainer may be shared.
class Explainer {
 public:
  explicit Explainer(std::vector<Rule> rules, AbductionConfig config = {});
  ~Explainer();
  Explainer(Explainer&&) noexcept;
  Explainer& operator=(Explainer&&) noexcept;

  ProofStructure explain(const std::set<Atom>& observations) const;

  const std::vector<Rule>& rules() const;
  const AbductionConfig& config() const;
  std::size_t memo_entries() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ProofStructure explain(const std::set<Atom>& observations, const std::vector<Rule>& rules,
                       const AbductionConfig& config = {});

inline constexpr std::size_t kBruteForceMaxAtoms = 14;

// Exhaustive enumeration of labelings. Independent of Explainer; refuses
// (ResourceError) when more than kBruteForceMaxAtoms atoms are relevant.
ProofStructure brute_force_explain(const std::set<Atom>& observations,
                                   const std::vector<Rule>& rules,
                                   const AbductionConfig& config = {});

struct Rationality {
  double e_alpha = 0.0;
  double e_k = 0.0;
  double e_joint = 0.0;
  double raw = 0.0;   // e_alpha + e_k - e_joint
  double norm = 0.0;  // raw / (e_alpha + e_k), 0 when the denominator is 0
};

Rationality rationality(const KnowledgeBase& kq, const Atom& claim,
                        const AbductionConfig& config = {});
// Same, reusing an explainer built over kq.rules.
Rationality rationality(const Explainer& explainer, const std::set<Atom>& kq_facts,
                        const Atom& claim);
Rationality rationality_from_costs(double e_alpha, double e_k, double e_joint);

// Number of rationality evaluations that produced raw < 0 (logged once).
std::size_t negative_rationality_events();

struct Argument {
  Atom claim;
  std::set<Atom> support_facts;
  std::set<std::size_t> support_rules;  // indices into the questioner's rules
  std::set<Atom> assumptions;
  double rationality_raw = 0.0;
  double rationality_norm = 0.0;
};

Argument construct_argument(const KnowledgeBase& kq, const Atom& claim,
                            const AbductionConfig& config = {});
Argument construct_argument(const Explainer& explainer, const std::set<Atom>& kq_facts,
                            const Atom& claim);

}  // namespace argseek
