#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "argseek/abduction.hpp"
#include "argseek/env.hpp"
#include "argseek/kb.hpp"

namespace argseek {

// `manifest.txt`: `key = value` lines. Paths are relative to the manifest.
struct DatasetManifest {
  std::string facts_file = "facts.txt";
  std::string rules_file = "rules.txt";
  std::string ka_dir = "ka";
  std::string questions_file = "questions.tsv";  // optional file
  Atom claim;
  double theta_r = 0.7;
  int t_limit = 10;
  double r_goal = 100.0;
  double r_time = -1.0;
  std::size_t train_count = 0;
  AbductionConfig abduction;
};

DatasetManifest parse_manifest(const std::string& text, const std::string& source = "<manifest>");
std::string render_manifest(const DatasetManifest& m);

struct QuestionText {
  std::string question;
  std::string answer;
};

struct LoadReport {
  std::size_t duplicate_facts = 0;
  std::size_t duplicate_rules = 0;
  std::size_t duplicate_ka_facts = 0;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Atom> atoms;    // includes the claim
  std::vector<Rule> rules;
  std::vector<KnowledgeBase> ka;  // answerer knowledge, facts only
  std::map<Atom, QuestionText> questions;
  LoadReport report;

  Scenario scenario() const;
  std::vector<KnowledgeBase> train_set() const;
  std::vector<KnowledgeBase> test_set() const;
  // Throws ValidationError when the pieces are inconsistent.
  void validate() const;
};

// `path` may name the manifest or the directory holding manifest.txt.
Dataset load_dataset(const std::string& path);
// Writes every file and returns the manifest path.
std::string save_dataset(const Dataset& d, const std::string& directory);

std::map<Atom, QuestionText> parse_questions(const std::string& text,
                                             const std::string& source = "<questions>");
std::string render_questions(const std::map<Atom, QuestionText>& q);

struct GenParams {
  std::size_t n_facts = 122;  // including the claim
  std::size_t n_rules = 72;
  std::size_t max_premises = 3;
  std::size_t ka_count = 550;
  std::size_t ka_size = 20;
  std::size_t train_count = 500;
  std::uint64_t seed = 0;
  std::size_t layers = 3;      // below the claim
  double layer_ratio = 2.5;    // geometric growth of layer sizes
  // Per-premise weight choices for rules concluding atoms at depth 0, 1, 2, ...
  // The last list is reused for deeper layers.
  std::vector<std::vector<double>> premise_weights = {{0.4, 0.6}, {0.4, 0.6}, {0.4, 0.6}};

  void validate() const;
};

// Layered rule tree rooted at the claim plus uniformly sampled answerer
// knowledge. A pure function of the parameters.
Dataset generate_synthetic(const GenParams& params);

}  // namespace argseek
