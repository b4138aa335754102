#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "argseek/abduction.hpp"
#include "argseek/kb.hpp"

namespace argseek {

using ActionIndex = std::size_t;

// Slack used when comparing normalized rationality against the threshold.
inline constexpr double kThresholdSlack = 1e-9;

// Episode configuration for one claim.
struct Scenario {
  Atom claim;
  std::vector<Atom> atom_universe;
  std::vector<Atom> candidate_facts;  // universe minus the claim, universe order
  std::vector<Rule> rules;            // handed to the questioner at reset
  double theta_r = 0.7;
  int t_limit = 10;
  double r_goal = 100.0;
  double r_time = -1.0;
  AbductionConfig abduction;

  // Builds candidate_facts from the universe and validates everything.
  static Scenario make(Atom claim, std::vector<Atom> universe, std::vector<Rule> rules);
  void validate() const;
};

// Questioner state. `asked` and `collected` are indexed by candidate fact.
struct EnvState {
  std::vector<std::uint8_t> asked;
  std::vector<std::uint8_t> collected;
  double rationality = 0.0;      // normalized
  double rationality_raw = 0.0;
  int step = 0;
  std::set<Atom> kq_facts;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  std::optional<Atom> answered;
  double r_raw = 0.0;
  double r_norm = 0.0;
};

struct Transition {
  std::vector<double> s;
  ActionIndex a = 0;
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
  std::vector<ActionIndex> legal_next;
};

std::vector<ActionIndex> legal_actions(const EnvState& state);

// Answerer simulator: echoes the query when it is known, otherwise "I don't know".
std::optional<Atom> answer(const Atom& query, const KnowledgeBase& ka);

// [asked | collected | rationality]; length 2 * |candidates| + 1.
std::vector<double> featurize(const EnvState& state);

// The dialogue MDP for one scenario. Rationality values are cached per
// collected-fact set; the cache is internally synchronized.
class DialogueEnv {
 public:
  explicit DialogueEnv(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  std::size_t num_actions() const { return scenario_.candidate_facts.size(); }
  std::size_t feature_dim() const { return 2 * num_actions() + 1; }
  std::optional<ActionIndex> action_of(const Atom& fact) const;

  EnvState reset(const KnowledgeBase& ka) const;
  StepResult step(const EnvState& state, ActionIndex action, const KnowledgeBase& ka) const;

  Rationality evaluate(const std::set<Atom>& kq_facts) const;
  bool goal_reached(double rationality_norm) const {
    return rationality_norm >= scenario_.theta_r - kThresholdSlack;
  }
  const Explainer& explainer() const { return *explainer_; }

  // Same scenario with a different turn budget, sharing caches.
  DialogueEnv with_t_limit(int t_limit) const;

 private:
  struct Cache {
    std::mutex mu;
    std::optional<double> e_alpha;
    std::map<std::set<Atom>, Rationality> by_facts;
  };

  DialogueEnv(Scenario scenario, std::shared_ptr<const Explainer> explainer,
              std::shared_ptr<Cache> cache);
  void check_ka(const KnowledgeBase& ka) const;

  Scenario scenario_;
  std::map<Atom, ActionIndex> action_index_;
  std::shared_ptr<const Explainer> explainer_;
  std::shared_ptr<Cache> cache_;
};

}  // namespace argseek
