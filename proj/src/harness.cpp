#include "argseek/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "argseek/error.hpp"
#include "argseek/text.hpp"

namespace argseek {

namespace {

constexpr std::uint64_t kEvalTag = 0x6576616c;

struct EpisodeOutcome {
  bool success = false;
  int steps = 0;
};

// Runs fn(job) for job in [0, n) on up to `workers` threads; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i, w);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

Rng episode_rng(std::uint64_t seed, std::size_t episode) { return stream_rng(seed, episode, kEvalTag); }

EpisodeLog run_episode(const DialogueEnv& env, Questioner& q, const KnowledgeBase& ka, Rng& rng) {
  EpisodeLog log;
  q.begin_episode();
  EnvState state = env.reset(ka);
  while (true) {
    ActionIndex a = q.next(state, rng);
    StepResult r = env.step(state, a, ka);
    log.steps.push_back({r.state.step, env.scenario().candidate_facts[a], r.answered, r.r_raw,
                         r.r_norm, r.reward});
    log.total_reward += r.reward;
    state = std::move(r.state);
    if (r.done) {
      log.success = r.success;
      break;
    }
  }
  return log;
}

Metrics evaluate(const DialogueEnv& env, const QuestionerFactory& make,
                 const std::vector<KnowledgeBase>& test, const std::vector<std::uint64_t>& seeds,
                 std::size_t workers) {
  if (test.empty()) throw ContractError("evaluation needs at least one test knowledge base");
  if (seeds.empty()) throw ContractError("evaluation needs at least one seed");
  const std::size_t n = test.size();
  std::vector<EpisodeOutcome> outcomes(n * seeds.size());

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    std::vector<std::unique_ptr<Questioner>> qs;
    qs.push_back(make(seeds[s]));
    std::size_t w = std::max<std::size_t>(1, std::min(workers, n));
    for (std::size_t k = 1; k < w; ++k) qs.push_back(make(seeds[s]));
    parallel_for(n, w, [&](std::size_t i, std::size_t worker) {
      Rng rng = episode_rng(seeds[s], i);
      EpisodeLog log = run_episode(env, *qs[worker], test[i], rng);
      outcomes[s * n + i] = {log.success, static_cast<int>(log.steps.size())};
    });
  }

  const Scenario& sc = env.scenario();
  Metrics m;
  std::vector<double> scores;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    SeedMetrics sm;
    sm.seed = seeds[s];
    std::size_t steps = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = outcomes[s * n + i];
      sm.completed += o.success;
      steps += static_cast<std::size_t>(o.steps);
    }
    sm.avg_score = (sc.r_goal * static_cast<double>(sm.completed) +
                    sc.r_time * static_cast<double>(steps)) /
                   static_cast<double>(n);
    sm.avg_steps = static_cast<double>(steps) / static_cast<double>(n);
    m.completed_total += sm.completed;
    m.total_steps += steps;
    scores.push_back(sm.avg_score);
    m.per_seed.push_back(sm);
  }
  m.episodes_evaluated = n * seeds.size();
  const double episodes = static_cast<double>(m.episodes_evaluated);
  m.avg_score = (sc.r_goal * static_cast<double>(m.completed_total) +
                 sc.r_time * static_cast<double>(m.total_steps)) /
                episodes;
  m.avg_steps = static_cast<double>(m.total_steps) / episodes;
  m.completed = static_cast<double>(m.completed_total) / static_cast<double>(seeds.size());
  if (scores.size() > 1) {
    double mean = 0.0;
    for (double v : scores) mean += v;
    mean /= static_cast<double>(scores.size());
    double ss = 0.0;
    for (double v : scores) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(scores.size() - 1));
    m.stderr_score = sd / std::sqrt(static_cast<double>(scores.size()));
  }
  return m;
}

std::vector<SweepRow> sweep_tlimit(const DialogueEnv& env, const QuestionerFactory& make,
                                   const std::vector<KnowledgeBase>& test,
                                   const std::vector<std::uint64_t>& seeds, int max_t_limit,
                                   std::size_t workers) {
  if (max_t_limit < 1) throw ContractError("the sweep needs a maximum T_limit of at least 1");
  std::vector<SweepRow> rows;
  for (int t = 1; t <= max_t_limit; ++t)
    rows.push_back({t, evaluate(env.with_t_limit(t), make, test, seeds, workers).completed});
  return rows;
}

std::string metrics_csv_header() { return "strategy,avg_score,stderr,completed,avg_steps\n"; }

std::string metrics_csv_row(const std::string& strategy, const Metrics& m) {
  return strategy + "," + text::shortest(m.avg_score) + "," + text::shortest(m.stderr_score) + "," +
         text::shortest(m.completed) + "," + text::shortest(m.avg_steps) + "\n";
}

std::string render_transcript(const EpisodeLog& log, const std::map<Atom, QuestionText>& questions) {
  std::vector<std::array<std::string, 4>> rows{{"step", "questioner", "answerer", "rationality"}};
  for (const auto& s : log.steps) {
    auto it = questions.find(s.asked);
    std::string q = it != questions.end() ? it->second.question : s.asked;
    std::string a = "I do not know.";
    if (s.answered) {
      auto at = questions.find(*s.answered);
      a = at != questions.end() ? at->second.answer : *s.answered;
    }
    rows.push_back({std::to_string(s.step), q, a, text::fixed(s.r_norm, 3)});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) {
      out << r[c];
      if (c + 1 < 4) out << std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace argseek
