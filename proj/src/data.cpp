#include "argseek/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "argseek/error.hpp"
#include "argseek/random.hpp"
#include "argseek/text.hpp"

namespace fs = std::filesystem;

namespace argseek {

namespace {

constexpr std::uint64_t kGenTag = 0x67656e;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("failed writing " + p.string());
}

template <typename T>
T manifest_number(std::string_view value, const std::string& where) {
  if constexpr (std::is_floating_point_v<T>) {
    auto v = text::parse_double(value);
    if (!v) throw ParseError(where + ": expected a number, got '" + std::string(value) + "'");
    return *v;
  } else {
    auto v = text::parse_int(value);
    if (!v || *v < 0) throw ParseError(where + ": expected a non-negative integer, got '" +
                                       std::string(value) + "'");
    return static_cast<T>(*v);
  }
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text_in, const std::string& source) {
  DatasetManifest m;
  bool have_claim = false;
  std::size_t lineno = 0;
  for (auto raw : text::split(text_in, '\n')) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    std::string key(text::trim(line.substr(0, eq)));
    auto value = text::trim(line.substr(eq + 1));
    if (key == "facts") m.facts_file = value;
    else if (key == "rules") m.rules_file = value;
    else if (key == "ka_dir") m.ka_dir = value;
    else if (key == "questions") m.questions_file = value;
    else if (key == "claim") { m.claim = value; have_claim = true; }
    else if (key == "theta_R") m.theta_r = manifest_number<double>(value, where);
    else if (key == "t_limit") m.t_limit = manifest_number<int>(value, where);
    else if (key == "r_goal") m.r_goal = manifest_number<double>(value, where);
    else if (key == "r_time") m.r_time = manifest_number<double>(value, where);
    else if (key == "train_count") m.train_count = manifest_number<std::size_t>(value, where);
    else if (key == "obs_cost") m.abduction.obs_cost = manifest_number<double>(value, where);
    else if (key == "max_depth") m.abduction.max_depth = manifest_number<int>(value, where);
    else if (key == "max_universe") m.abduction.max_universe = manifest_number<std::size_t>(value, where);
    else throw ParseError(where + ": unknown manifest key '" + key + "'");
  }
  if (!have_claim || m.claim.empty()) throw ParseError(source + ": manifest has no claim");
  return m;
}

std::string render_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "facts = " << m.facts_file << '\n'
      << "rules = " << m.rules_file << '\n'
      << "ka_dir = " << m.ka_dir << '\n'
      << "questions = " << m.questions_file << '\n'
      << "claim = " << m.claim << '\n'
      << "theta_R = " << text::shortest(m.theta_r) << '\n'
      << "t_limit = " << m.t_limit << '\n'
      << "r_goal = " << text::shortest(m.r_goal) << '\n'
      << "r_time = " << text::shortest(m.r_time) << '\n'
      << "train_count = " << m.train_count << '\n'
      << "obs_cost = " << text::shortest(m.abduction.obs_cost) << '\n'
      << "max_depth = " << m.abduction.max_depth << '\n'
      << "max_universe = " << m.abduction.max_universe << '\n';
  return out.str();
}

std::map<Atom, QuestionText> parse_questions(const std::string& text_in, const std::string& source) {
  std::map<Atom, QuestionText> out;
  std::size_t lineno = 0;
  for (auto raw : text::split(text_in, '\n')) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (text::trim(raw).empty() || text::trim(raw).front() == '#') continue;
    auto cols = text::split(raw, '\t');
    if (cols.size() != 3)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected atom, question and answer separated by tabs");
    out[Atom(text::trim(cols[0]))] = {std::string(cols[1]), std::string(cols[2])};
  }
  return out;
}

std::string render_questions(const std::map<Atom, QuestionText>& q) {
  std::string out;
  for (const auto& [atom, t] : q) out += atom + "\t" + t.question + "\t" + t.answer + "\n";
  return out;
}

Scenario Dataset::scenario() const {
  Scenario s = Scenario::make(manifest.claim, atoms, rules);
  s.theta_r = manifest.theta_r;
  s.t_limit = manifest.t_limit;
  s.r_goal = manifest.r_goal;
  s.r_time = manifest.r_time;
  s.abduction = manifest.abduction;
  s.validate();
  return s;
}

std::vector<KnowledgeBase> Dataset::train_set() const {
  return {ka.begin(), ka.begin() + static_cast<std::ptrdiff_t>(manifest.train_count)};
}

std::vector<KnowledgeBase> Dataset::test_set() const {
  return {ka.begin() + static_cast<std::ptrdiff_t>(manifest.train_count), ka.end()};
}

void Dataset::validate() const {
  std::set<Atom> universe(atoms.begin(), atoms.end());
  if (universe.size() != atoms.size()) throw ValidationError("duplicate atoms in the dataset");
  if (!universe.count(manifest.claim))
    throw ValidationError("claim '" + manifest.claim + "' is not listed in the facts file");
  check_rules_against(rules, universe);
  if (manifest.train_count > ka.size())
    throw ValidationError("train_count " + std::to_string(manifest.train_count) + " exceeds the " +
                          std::to_string(ka.size()) + " answerer knowledge files");
  for (std::size_t i = 0; i < ka.size(); ++i)
    for (const auto& f : ka[i].facts) {
      if (!universe.count(f))
        throw ValidationError("ka/" + std::to_string(i) + ".txt: unknown atom '" + f + "'");
      if (f == manifest.claim)
        throw ValidationError("ka/" + std::to_string(i) + ".txt: contains the claim");
    }
  scenario();
}

Dataset load_dataset(const std::string& path) {
  fs::path manifest_path = path;
  if (fs::is_directory(manifest_path)) manifest_path /= "manifest.txt";
  if (!fs::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
  const fs::path root = manifest_path.parent_path();

  Dataset d;
  d.manifest = parse_manifest(read_file(manifest_path), manifest_path.string());

  const fs::path facts_path = root / d.manifest.facts_file;
  auto facts = parse_facts_text(read_file(facts_path), facts_path.string());
  d.atoms = std::move(facts.atoms);
  d.report.duplicate_facts = facts.duplicates;

  const fs::path rules_path = root / d.manifest.rules_file;
  auto rules = parse_rules_text(read_file(rules_path), rules_path.string());
  d.rules = std::move(rules.rules);
  d.report.duplicate_rules = rules.duplicates;

  const fs::path ka_root = root / d.manifest.ka_dir;
  if (!fs::is_directory(ka_root)) throw IoError("answerer knowledge directory not found: " + ka_root.string());
  std::map<long long, fs::path> files;
  for (const auto& entry : fs::directory_iterator(ka_root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    auto idx = text::parse_int(entry.path().stem().string());
    if (!idx || *idx < 0) continue;
    files.emplace(*idx, entry.path());
  }
  long long expect = 0;
  for (const auto& [idx, p] : files) {
    if (idx != expect)
      throw ValidationError("answerer knowledge files must be numbered 0.." +
                            std::to_string(files.size() - 1) + "; missing " +
                            std::to_string(expect) + ".txt");
    ++expect;
    auto kf = parse_facts_text(read_file(p), p.string());
    d.report.duplicate_ka_facts += kf.duplicates;
    d.ka.push_back({std::set<Atom>(kf.atoms.begin(), kf.atoms.end()), {}});
  }

  const fs::path q_path = root / d.manifest.questions_file;
  if (!d.manifest.questions_file.empty() && fs::exists(q_path))
    d.questions = parse_questions(read_file(q_path), q_path.string());

  d.validate();
  return d;
}

std::string save_dataset(const Dataset& d, const std::string& directory) {
  d.validate();
  const fs::path root = directory;
  std::error_code ec;
  fs::create_directories(root / d.manifest.ka_dir, ec);
  if (ec) throw IoError("cannot create " + (root / d.manifest.ka_dir).string() + ": " + ec.message());

  std::string facts;
  for (const auto& a : d.atoms) facts += a + "\n";
  write_file(root / d.manifest.facts_file, facts);

  std::string rules;
  for (const auto& r : d.rules) rules += render_rule(r) + "\n";
  write_file(root / d.manifest.rules_file, rules);

  // Stale files from a larger earlier dataset would break the numbering.
  for (const auto& entry : fs::directory_iterator(root / d.manifest.ka_dir))
    if (entry.path().extension() == ".txt" && text::parse_int(entry.path().stem().string()))
      fs::remove(entry.path());
  for (std::size_t i = 0; i < d.ka.size(); ++i) {
    std::string body;
    for (const auto& f : d.ka[i].facts) body += f + "\n";
    write_file(root / d.manifest.ka_dir / (std::to_string(i) + ".txt"), body);
  }

  if (!d.questions.empty() && !d.manifest.questions_file.empty())
    write_file(root / d.manifest.questions_file, render_questions(d.questions));

  fs::path manifest = root / "manifest.txt";
  write_file(manifest, render_manifest(d.manifest));
  return manifest.string();
}

void GenParams::validate() const {
  if (n_facts < 2) throw ValidationError("need at least two facts (the claim and one more)");
  if (ka_count == 0) throw ValidationError("ka_count must be positive");
  if (ka_size > n_facts - 1) throw ValidationError("ka_size exceeds the number of askable facts");
  if (train_count >= ka_count) throw ValidationError("train_count must be below ka_count");
  if (max_premises == 0) throw ValidationError("max_premises must be positive");
  if (layers == 0) throw ValidationError("at least one layer below the claim is required");
  if (!(layer_ratio > 0.0)) throw ValidationError("layer_ratio must be positive");
  if (premise_weights.empty()) throw ValidationError("premise weight choices are empty");
  for (const auto& choices : premise_weights) {
    if (choices.empty()) throw ValidationError("premise weight choices are empty");
    for (double w : choices)
      if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("premise weights must be positive");
  }
}

namespace {

// Largest-remainder split of `total` proportionally to `shares`, each part >= 1.
std::vector<std::size_t> split_counts(std::size_t total, const std::vector<double>& shares) {
  std::vector<std::size_t> out(shares.size(), 1);
  std::size_t left = total - shares.size();
  double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    double exact = static_cast<double>(left) * shares[i] / sum;
    auto whole = static_cast<std::size_t>(std::floor(exact));
    out[i] += whole;
    used += whole;
    rem.emplace_back(-(exact - static_cast<double>(whole)), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t k = 0; used < left; ++k, ++used) ++out[rem[k % rem.size()].second];
  return out;
}

}  // namespace

Dataset generate_synthetic(const GenParams& p) {
  p.validate();
  Rng rng = stream_rng(p.seed, 0, kGenTag);

  const std::size_t askable = p.n_facts - 1;
  const std::size_t depth = std::min(p.layers, askable);
  std::vector<double> shares;
  for (std::size_t i = 0; i < depth; ++i) shares.push_back(std::pow(p.layer_ratio, static_cast<double>(i)));
  auto sizes = split_counts(askable, shares);

  const int width = static_cast<int>(std::to_string(askable).size());
  std::vector<std::vector<Atom>> layers{{"claim"}};
  std::size_t next_id = 1;
  for (auto n : sizes) {
    std::vector<Atom> layer;
    for (std::size_t k = 0; k < n; ++k, ++next_id) {
      std::string id = std::to_string(next_id);
      layer.push_back("f" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id);
    }
    layers.push_back(std::move(layer));
  }

  // Every non-claim atom is a premise of exactly one rule, so the rules form a
  // tree under the claim. Rules per layer transition lie in
  // [ceil(|next| / max_premises), |next|].
  std::vector<std::size_t> lo, hi;
  for (std::size_t i = 0; i < depth; ++i) {
    std::size_t next = layers[i + 1].size();
    lo.push_back((next + p.max_premises - 1) / p.max_premises);
    hi.push_back(next);
  }
  const std::size_t min_rules = std::accumulate(lo.begin(), lo.end(), std::size_t{0});
  const std::size_t max_rules = std::accumulate(hi.begin(), hi.end(), std::size_t{0});
  if (p.n_rules < min_rules || p.n_rules > max_rules)
    throw ValidationError("n_rules must lie in [" + std::to_string(min_rules) + ", " +
                          std::to_string(max_rules) + "] for these layer sizes");
  std::vector<std::size_t> per(depth);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    per[i] = std::clamp(layers[i].size(), lo[i], hi[i]);
    assigned += per[i];
  }
  // Move toward n_rules one rule at a time, favouring the widest transitions.
  while (assigned != p.n_rules) {
    std::size_t best = depth;
    double best_room = -1.0;
    for (std::size_t i = 0; i < depth; ++i) {
      bool can = assigned < p.n_rules ? per[i] < hi[i] : per[i] > lo[i];
      if (!can) continue;
      double room = assigned < p.n_rules
                        ? static_cast<double>(hi[i]) / static_cast<double>(per[i] + 1)
                        : static_cast<double>(per[i]) / static_cast<double>(lo[i]);
      if (room > best_room) best_room = room, best = i;
    }
    if (assigned < p.n_rules) ++per[best], ++assigned;
    else --per[best], --assigned;
  }

  Dataset d;
  for (const auto& layer : layers) d.atoms.insert(d.atoms.end(), layer.begin(), layer.end());
  for (std::size_t i = 0; i < depth; ++i) {
    const auto& parents = layers[i];
    std::vector<Atom> children = layers[i + 1];
    std::shuffle(children.begin(), children.end(), rng);

    std::vector<std::size_t> group(per[i], 1);
    std::size_t extra = children.size() - per[i];
    while (extra > 0) {
      std::size_t g = uniform_index(rng, group.size());
      if (group[g] < p.max_premises) ++group[g], --extra;
    }
    std::vector<Atom> heads;
    for (std::size_t r = 0; r < per[i]; ++r)
      heads.push_back(r < parents.size() ? parents[r] : parents[uniform_index(rng, parents.size())]);
    std::shuffle(heads.begin(), heads.end(), rng);

    const auto& choices = p.premise_weights[std::min(i, p.premise_weights.size() - 1)];
    std::size_t at = 0;
    for (std::size_t r = 0; r < per[i]; ++r) {
      std::vector<Atom> premises(children.begin() + static_cast<std::ptrdiff_t>(at),
                                 children.begin() + static_cast<std::ptrdiff_t>(at + group[r]));
      at += group[r];
      std::sort(premises.begin(), premises.end());
      double w = choices[uniform_index(rng, choices.size())];
      double total = std::round(w * static_cast<double>(premises.size()) * 1e6) / 1e6;
      d.rules.push_back(Rule::uniform(std::move(premises), heads[r], total));
    }
  }

  std::vector<Atom> askable_atoms(d.atoms.begin() + 1, d.atoms.end());
  for (std::size_t k = 0; k < p.ka_count; ++k) {
    std::vector<Atom> pick;
    std::sample(askable_atoms.begin(), askable_atoms.end(), std::back_inserter(pick), p.ka_size, rng);
    d.ka.push_back({std::set<Atom>(pick.begin(), pick.end()), {}});
  }

  for (const auto& a : d.atoms)
    d.questions[a] = {"Is it the case that " + a + "?", "Yes, " + a + " holds."};

  d.manifest.claim = "claim";
  d.manifest.train_count = p.train_count;
  d.manifest.abduction.max_universe = std::max<std::size_t>(64, 2 * p.n_facts);
  d.validate();
  return d;
}

}  // namespace argseek
