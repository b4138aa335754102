#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "argseek/data.hpp"
#include "argseek/env.hpp"
#include "argseek/strategies.hpp"

namespace argseek {

struct StepRecord {
  int step = 0;
  Atom asked;
  std::optional<Atom> answered;
  double r_raw = 0.0;
  double r_norm = 0.0;
  double reward = 0.0;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  bool success = false;
  double total_reward = 0.0;
};

EpisodeLog run_episode(const DialogueEnv& env, Questioner& q, const KnowledgeBase& ka, Rng& rng);

// RNG stream for evaluation episode `episode` under `seed`.
Rng episode_rng(std::uint64_t seed, std::size_t episode);

// Builds the questioner used for one seed (for ddqn: that seed's model).
using QuestionerFactory = std::function<std::unique_ptr<Questioner>(std::uint64_t seed)>;

struct SeedMetrics {
  std::uint64_t seed = 0;
  double avg_score = 0.0;
  std::size_t completed = 0;
  double avg_steps = 0.0;
};

struct Metrics {
  double avg_score = 0.0;     // over every evaluated episode
  double stderr_score = 0.0;  // standard error of the per-seed scores
  double completed = 0.0;     // completed dialogues per seed (mean)
  std::size_t completed_total = 0;
  std::size_t total_steps = 0;
  double avg_steps = 0.0;
  std::size_t episodes_evaluated = 0;
  std::vector<SeedMetrics> per_seed;
};

// One episode per (seed, test knowledge base). Episodes may run on `workers`
// threads; results are reduced in episode order, so output never depends on it.
Metrics evaluate(const DialogueEnv& env, const QuestionerFactory& make,
                 const std::vector<KnowledgeBase>& test, const std::vector<std::uint64_t>& seeds,
                 std::size_t workers = 1);

struct SweepRow {
  int t_limit = 0;
  double completed = 0.0;  // per-seed mean
};

std::vector<SweepRow> sweep_tlimit(const DialogueEnv& env, const QuestionerFactory& make,
                                   const std::vector<KnowledgeBase>& test,
                                   const std::vector<std::uint64_t>& seeds, int max_t_limit,
                                   std::size_t workers = 1);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& strategy, const Metrics& m);

// Turn-by-turn table; atoms without question text are shown by id.
std::string render_transcript(const EpisodeLog& log, const std::map<Atom, QuestionText>& questions);

}  // namespace argseek
