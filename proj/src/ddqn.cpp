#include "argseek/ddqn.hpp"

#include <algorithm>
#include <cmath>

#include "argseek/error.hpp"

namespace argseek {

namespace {

constexpr std::uint64_t kTrainTag = 0x7472616e;

Eigen::MatrixXd stack_columns(const std::vector<const std::vector<double>*>& xs, int dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k)
    m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(xs[k]->data(), dim);
  return m;
}

}  // namespace

void Hyperparams::validate() const {
  if (!(0.0 <= eps_end && eps_end <= eps_start && eps_start <= 1.0))
    throw ValidationError("epsilon schedule needs 0 <= eps_end <= eps_start <= 1");
  if (!(0.0 <= gamma && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  if (replay_capacity < batch_size) throw ValidationError("replay capacity is below the batch size");
  if (target_sync_every == 0) throw ValidationError("target sync period must be positive");
  for (int h : hidden)
    if (h < 1) throw ValidationError("hidden layer sizes must be positive");
}

double epsilon_at(const Hyperparams& hp, std::size_t actions_taken) {
  if (actions_taken >= hp.eps_anneal_actions) return hp.eps_end;
  double frac = static_cast<double>(actions_taken) / static_cast<double>(hp.eps_anneal_actions);
  return hp.eps_start + (hp.eps_end - hp.eps_start) * frac;
}

ActionIndex masked_argmax(const Eigen::VectorXd& q, const std::vector<ActionIndex>& legal) {
  if (legal.empty()) throw ContractError("argmax over an empty legal set");
  ActionIndex best = legal.front();
  for (ActionIndex a : legal) {
    if (a >= static_cast<ActionIndex>(q.size())) throw ContractError("legal action out of range");
    if (q(static_cast<Eigen::Index>(a)) > q(static_cast<Eigen::Index>(best)) ||
        (q(static_cast<Eigen::Index>(a)) == q(static_cast<Eigen::Index>(best)) && a < best))
      best = a;
  }
  return best;
}

double ddqn_target(const Transition& t, const Mlp& online, const Mlp& target, double gamma) {
  if (t.done) return t.r;
  if (t.legal_next.empty()) throw ContractError("non-terminal transition without legal actions");
  ActionIndex a = masked_argmax(online.forward(t.s_next), t.legal_next);
  return t.r + gamma * target.forward(t.s_next)(static_cast<Eigen::Index>(a));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 14));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > items_.size()) throw ContractError("sample larger than the replay buffer");
  std::vector<std::size_t> out;
  out.reserve(n);
  while (out.size() < n) {
    std::size_t i = uniform_index(rng, items_.size());
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

TrainResult train_ddqn(const DialogueEnv& env, const std::vector<KnowledgeBase>& pool,
                       const Hyperparams& hp) {
  hp.validate();
  if (pool.empty()) throw ContractError("training pool is empty");
  Rng rng = stream_rng(hp.seed, 0, kTrainTag);

  std::vector<int> dims{static_cast<int>(env.feature_dim())};
  dims.insert(dims.end(), hp.hidden.begin(), hp.hidden.end());
  dims.push_back(static_cast<int>(env.num_actions()));

  TrainResult result{Mlp::init(dims, rng), {}, 0};
  Mlp& online = result.online;
  Mlp target = online;
  Adam opt(online, hp.learning_rate);
  ReplayBuffer replay(hp.replay_capacity);
  std::size_t actions = 0;
  const int in_dim = dims.front();

  for (std::size_t ep = 0; ep < hp.episodes; ++ep) {
    const KnowledgeBase& ka = pool[uniform_index(rng, pool.size())];
    EnvState state = env.reset(ka);
    double total = 0.0;
    while (true) {
      auto legal = legal_actions(state);
      auto x = featurize(state);
      ActionIndex a;
      if (uniform01(rng) < epsilon_at(hp, actions))
        a = legal[uniform_index(rng, legal.size())];
      else
        a = masked_argmax(online.forward(x), legal);
      ++actions;

      StepResult step = env.step(state, a, ka);
      total += step.reward;
      replay.push({std::move(x), a, step.reward, featurize(step.state), step.done,
                   legal_actions(step.state)});

      if (replay.size() >= hp.batch_size) {
        auto idx = replay.sample(hp.batch_size, rng);
        std::vector<const std::vector<double>*> next;
        for (auto i : idx) next.push_back(&replay[i].s_next);
        Eigen::MatrixXd s_next = stack_columns(next, in_dim);
        Eigen::MatrixXd q_online = online.forward_batch(s_next);
        Eigen::MatrixXd q_target = target.forward_batch(s_next);

        std::vector<Sample> batch;
        batch.reserve(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const Transition& t = replay[idx[k]];
          double y = t.r;
          if (!t.done) {
            auto col = static_cast<Eigen::Index>(k);
            ActionIndex star = masked_argmax(q_online.col(col), t.legal_next);
            y += hp.gamma * q_target(static_cast<Eigen::Index>(star), col);
          }
          batch.push_back({t.s, t.a, y});
        }
        opt.step(online, mlp_gradients(online, batch));
        if (++result.updates % hp.target_sync_every == 0) target = online;
      }

      state = std::move(step.state);
      if (step.done) break;
    }
    result.episode_rewards.push_back(total);
  }
  return result;
}

}  // namespace argseek
