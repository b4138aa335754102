#include "argseek/env.hpp"

#include <algorithm>
#include <cmath>

#include "argseek/error.hpp"

namespace argseek {

Scenario Scenario::make(Atom claim, std::vector<Atom> universe, std::vector<Rule> rules) {
  Scenario s;
  s.claim = std::move(claim);
  s.atom_universe = std::move(universe);
  for (const auto& a : s.atom_universe)
    if (a != s.claim) s.candidate_facts.push_back(a);
  s.rules = std::move(rules);
  s.validate();
  return s;
}

void Scenario::validate() const {
  std::set<Atom> universe(atom_universe.begin(), atom_universe.end());
  if (universe.size() != atom_universe.size())
    throw ValidationError("atom universe contains duplicates");
  if (!universe.count(claim)) throw ValidationError("claim '" + claim + "' is not in the universe");
  std::set<Atom> cands(candidate_facts.begin(), candidate_facts.end());
  if (cands.size() != candidate_facts.size())
    throw ValidationError("candidate facts contain duplicates");
  if (cands.count(claim)) throw ValidationError("the claim cannot be a candidate fact");
  for (const auto& c : candidate_facts)
    if (!universe.count(c)) throw ValidationError("candidate '" + c + "' is not in the universe");
  check_rules_against(rules, universe);
  if (t_limit < 1) throw ValidationError("t_limit must be at least 1");
  if (!(theta_r > 0.0 && theta_r <= 1.0)) throw ValidationError("theta_R must lie in (0, 1]");
  if (!std::isfinite(r_goal) || !std::isfinite(r_time))
    throw ValidationError("rewards must be finite");
  abduction.validate();
}

std::vector<ActionIndex> legal_actions(const EnvState& state) {
  std::vector<ActionIndex> out;
  for (ActionIndex i = 0; i < state.asked.size(); ++i)
    if (!state.asked[i]) out.push_back(i);
  return out;
}

std::optional<Atom> answer(const Atom& query, const KnowledgeBase& ka) {
  if (ka.facts.count(query)) return query;
  return std::nullopt;
}

std::vector<double> featurize(const EnvState& state) {
  std::vector<double> x;
  x.reserve(state.asked.size() + state.collected.size() + 1);
  for (auto v : state.asked) x.push_back(v);
  for (auto v : state.collected) x.push_back(v);
  x.push_back(state.rationality);
  return x;
}

DialogueEnv::DialogueEnv(Scenario scenario)
    : DialogueEnv(std::move(scenario), nullptr, std::make_shared<Cache>()) {}

DialogueEnv::DialogueEnv(Scenario scenario, std::shared_ptr<const Explainer> explainer,
                         std::shared_ptr<Cache> cache)
    : scenario_(std::move(scenario)), explainer_(std::move(explainer)), cache_(std::move(cache)) {
  scenario_.validate();
  for (ActionIndex i = 0; i < scenario_.candidate_facts.size(); ++i)
    action_index_.emplace(scenario_.candidate_facts[i], i);
  if (!explainer_) explainer_ = std::make_shared<Explainer>(scenario_.rules, scenario_.abduction);
}

DialogueEnv DialogueEnv::with_t_limit(int t_limit) const {
  Scenario s = scenario_;
  s.t_limit = t_limit;
  return DialogueEnv(std::move(s), explainer_, cache_);
}

std::optional<ActionIndex> DialogueEnv::action_of(const Atom& fact) const {
  auto it = action_index_.find(fact);
  if (it == action_index_.end()) return std::nullopt;
  return it->second;
}

void DialogueEnv::check_ka(const KnowledgeBase& ka) const {
  for (const auto& f : ka.facts)
    if (!action_index_.count(f))
      throw ValidationError("answerer knowledge references '" + f +
                            "', which is not a candidate fact");
}

Rationality DialogueEnv::evaluate(const std::set<Atom>& kq_facts) const {
  {
    std::lock_guard lock(cache_->mu);
    if (auto it = cache_->by_facts.find(kq_facts); it != cache_->by_facts.end())
      return it->second;
  }
  Rationality r;
  if (kq_facts.empty()) {
    r = rationality_from_costs(0.0, 0.0, 0.0);
  } else {
    std::optional<double> e_alpha;
    {
      std::lock_guard lock(cache_->mu);
      e_alpha = cache_->e_alpha;
    }
    if (!e_alpha) e_alpha = explainer_->explain({scenario_.claim}).total_cost;
    double e_k = explainer_->explain(kq_facts).total_cost;
    std::set<Atom> joint = kq_facts;
    joint.insert(scenario_.claim);
    double e_joint = explainer_->explain(joint).total_cost;
    r = rationality_from_costs(*e_alpha, e_k, e_joint);
    std::lock_guard lock(cache_->mu);
    cache_->e_alpha = e_alpha;
  }
  std::lock_guard lock(cache_->mu);
  cache_->by_facts.emplace(kq_facts, r);
  return r;
}

EnvState DialogueEnv::reset(const KnowledgeBase& ka) const {
  check_ka(ka);
  EnvState s;
  s.asked.assign(num_actions(), 0);
  s.collected.assign(num_actions(), 0);
  return s;
}

StepResult DialogueEnv::step(const EnvState& state, ActionIndex action,
                             const KnowledgeBase& ka) const {
  if (state.asked.size() != num_actions())
    throw ContractError("state does not belong to this environment");
  if (action >= num_actions()) throw ContractError("action index out of range");
  if (state.asked[action]) throw ContractError("fact has already been asked");

  StepResult out;
  out.state = state;
  EnvState& s = out.state;
  s.asked[action] = 1;
  s.step += 1;
  const Atom& query = scenario_.candidate_facts[action];
  out.answered = answer(query, ka);
  if (out.answered) {
    s.collected[action] = 1;
    s.kq_facts.insert(*out.answered);
    Rationality r = evaluate(s.kq_facts);
    s.rationality = r.norm;
    s.rationality_raw = r.raw;
  }
  out.r_raw = s.rationality_raw;
  out.r_norm = s.rationality;
  out.success = goal_reached(s.rationality);
  out.reward = scenario_.r_time + (out.success ? scenario_.r_goal : 0.0);
  bool exhausted = std::find(s.asked.begin(), s.asked.end(), 0) == s.asked.end();
  out.done = out.success || s.step >= scenario_.t_limit || exhausted;
  return out;
}

}  // namespace argseek
