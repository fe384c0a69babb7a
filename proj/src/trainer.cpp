#include "uavcover/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>

#include "uavcover/errors.hpp"

namespace uavcover {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  ring_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    ring_.push_back(std::move(t));
    ++size_;
  } else {
    ring_[head_] = std::move(t);
  }
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ConfigError("replay index out of range");
  if (size_ < capacity_) return ring_[i];
  return ring_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(int batch_size,
                                                    Rng& rng) const {
  if (size_ == 0 || batch_size < 1) {
    throw EmptyBatch("cannot sample " + std::to_string(batch_size) +
                     " transitions from a buffer of " +
                     std::to_string(size_));
  }
  const std::size_t k =
      std::min(static_cast<std::size_t>(batch_size), size_);
  std::vector<std::size_t> indices(size_);
  for (std::size_t i = 0; i < size_; ++i) indices[i] = i;
  std::vector<const Transition*> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(size_ - i)));
    std::swap(indices[i], indices[j]);
    out.push_back(&at(indices[i]));
  }
  return out;
}

Trainer make_trainer(const ScenarioConfig& config, Scheme scheme,
                     std::uint64_t seed) {
  validate(config);
  const int obs_dim = observation_dim(config.num_agents, config.num_users,
                                      config.num_non_agents);
  Trainer t;
  t.scheme = scheme;
  t.config = config;
  t.actor = make_policy_network(obs_dim, config.hidden_width,
                                config.dense_layers, kActionCount,
                                mix_seed(seed, 101));
  t.critic = make_critic_network(obs_dim, config.hidden_width,
                                 config.dense_layers, kActionCount,
                                 mix_seed(seed, 202));
  t.target_actor = t.actor;
  t.target_critic = t.critic;
  t.actor_adam = make_adam(t.actor, config.actor_learning_rate);
  t.critic_adam = make_adam(t.critic, config.learning_rate);
  t.epsilon_schedule = EpsilonSchedule{config.epsilon_initial,
                                       config.epsilon_anneal,
                                       config.epsilon_floor};
  return t;
}

double bellman_target(double reward, const Eigen::VectorXd& next_obs,
                      bool done, const Network& target_actor,
                      const Network& target_critic, double discount) {
  if (discount < 0.0 || discount >= 1.0) {
    throw ConfigError("discount must lie in [0, 1)");
  }
  if (done) return reward;
  const PolicyKind kind[] = {PolicyKind::Dnn};
  const Eigen::MatrixXd dist =
      commnet_forward(target_actor, next_obs, kind, 1);
  const int best = argmax_index(dist.col(0));
  const Eigen::VectorXd q = forward(target_critic, next_obs);
  return reward + discount * q[best];
}

namespace {

struct FlatBatch {
  Eigen::MatrixXd states;       // obs_dim x (B*M)
  Eigen::MatrixXd next_states;  // obs_dim x (B*M)
  Eigen::VectorXd rewards;      // B*M
  std::vector<int> actions;     // B*M
  std::vector<bool> done;       // B*M (per transition, repeated)
  std::vector<PolicyKind> kinds;
  int group_size = 0;
};

FlatBatch flatten(std::span<const Transition* const> batch,
                  const Trainer& trainer) {
  if (batch.empty()) throw EmptyBatch("empty minibatch");
  const int m = trainer.config.num_agents;
  const auto cols =
      static_cast<Eigen::Index>(batch.size()) * static_cast<Eigen::Index>(m);
  const Eigen::Index obs_dim = batch.front()->states.rows();

  FlatBatch flat;
  flat.group_size = m;
  flat.states.resize(obs_dim, cols);
  flat.next_states.resize(obs_dim, cols);
  flat.rewards.resize(cols);
  flat.actions.reserve(static_cast<std::size_t>(cols));
  flat.done.reserve(static_cast<std::size_t>(cols));
  flat.kinds.reserve(static_cast<std::size_t>(cols));

  Eigen::Index col = 0;
  for (const Transition* t : batch) {
    if (t->states.rows() != obs_dim || t->states.cols() != m ||
        t->next_states.rows() != obs_dim || t->next_states.cols() != m ||
        static_cast<int>(t->actions.size()) != m || t->rewards.size() != m) {
      throw ShapeMismatch("transition arity does not match the scenario");
    }
    const auto kinds = scheme_kinds(trainer.scheme, m, t->leader_index);
    for (int a = 0; a < m; ++a, ++col) {
      flat.states.col(col) = t->states.col(a);
      flat.next_states.col(col) = t->next_states.col(a);
      flat.rewards[col] = t->rewards[a];
      flat.actions.push_back(static_cast<int>(t->actions[static_cast<std::size_t>(a)]));
      flat.done.push_back(t->done);
      flat.kinds.push_back(kinds[static_cast<std::size_t>(a)]);
    }
  }
  return flat;
}

}  // namespace

double critic_update(std::span<const Transition* const> batch,
                     Trainer& trainer) {
  FlatBatch flat = flatten(batch, trainer);
  const Eigen::Index cols = flat.states.cols();

  // Bellman targets from the frozen target pair.
  const Eigen::MatrixXd next_dist = commnet_forward(
      trainer.target_actor, flat.next_states, flat.kinds, flat.group_size);
  const Eigen::MatrixXd next_q =
      forward(trainer.target_critic, flat.next_states);
  Eigen::VectorXd targets(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (flat.done[static_cast<std::size_t>(j)]) {
      targets[j] = flat.rewards[j];
    } else {
      const int best = argmax_index(next_dist.col(j));
      targets[j] = flat.rewards[j] + trainer.config.discount * next_q(best, j);
    }
  }

  ForwardTape tape;
  const Eigen::MatrixXd q = forward(trainer.critic, flat.states, &tape);
  double loss = 0.0;
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), cols);
  const double inv = 1.0 / static_cast<double>(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const int a = flat.actions[static_cast<std::size_t>(j)];
    const double diff = q(a, j) - targets[j];
    loss += diff * diff * inv;
    dq(a, j) = 2.0 * diff * inv;
  }

  NetGrads grads = backward(trainer.critic, tape, dq);
  clip_global_norm(grads, trainer.config.grad_clip_norm);
  adam_step(trainer.critic, grads, trainer.critic_adam);
  return loss;
}

double actor_update(std::span<const Transition* const> batch,
                    Trainer& trainer) {
  FlatBatch flat = flatten(batch, trainer);
  const Eigen::Index cols = flat.states.cols();

  const Eigen::MatrixXd q = forward(trainer.critic, flat.states);
  JointTape tape;
  const Eigen::MatrixXd dist = commnet_forward(
      trainer.actor, flat.states, flat.kinds, flat.group_size, &tape);

  const double inv = 1.0 / static_cast<double>(cols);
  const double beta = trainer.config.entropy_weight;
  // J = E[<pi, Q>] + beta * H(pi). The entropy term pins the stationary
  // point at pi ~ exp(Q / beta) instead of a simplex vertex: near-tied
  // Q rows stay stochastic, so identically observed agents keep breaking
  // symmetry instead of freezing onto one shared action.
  const double objective =
      ((dist.array() * q.array()).sum() -
       beta * (dist.array() * dist.array().log()).sum()) *
      inv;

  // Descend -J: dJ/dpi = Q - beta * (log pi + 1), sign-flipped here.
  const Eigen::MatrixXd dout =
      ((-q.array() + beta * (dist.array().log() + 1.0)) * inv).matrix();
  NetGrads grads = commnet_backward(trainer.actor, tape, dout);
  clip_global_norm(grads, trainer.config.grad_clip_norm);
  adam_step(trainer.actor, grads, trainer.actor_adam);
  return objective;
}

void target_sync(Trainer& trainer, int period) {
  if (period < 1) throw ConfigError("sync period must be >= 1");
  if (trainer.update_count % period == 0) {
    trainer.target_actor = trainer.actor;
    trainer.target_critic = trainer.critic;
  }
}

void write_metrics_csv(std::span<const EpisodeMetrics> metrics,
                       int num_agents, std::ostream& out) {
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "episode,scheme,total_reward_mean";
  for (int m = 0; m < num_agents; ++m) out << ",total_reward_agent" << m;
  out << ",critic_loss,epsilon,support_rate_mean,omega_mean\n";
  for (const auto& rec : metrics) {
    out << rec.episode << "," << scheme_name(rec.scheme) << ","
        << fmt(rec.total_reward_mean);
    for (int m = 0; m < num_agents; ++m) {
      out << ","
          << fmt(m < rec.total_reward_per_agent.size()
                     ? rec.total_reward_per_agent[m]
                     : 0.0);
    }
    out << "," << fmt(rec.critic_loss) << "," << fmt(rec.epsilon_value) << ","
        << fmt(rec.support_rate_mean) << "," << fmt(rec.omega_mean) << "\n";
  }
}

TrainResult train(const ScenarioConfig& config, Scheme scheme, int episodes,
                  std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  Environment env(config);
  TrainResult result{make_trainer(config, scheme, seed), {}};
  Trainer& trainer = result.trainer;
  ReplayBuffer buffer(static_cast<std::size_t>(config.buffer_capacity));
  Rng explore_rng(mix_seed(seed, 11));
  Rng sample_rng(mix_seed(seed, 13));
  const int m = config.num_agents;

  result.metrics.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    Eigen::MatrixXd obs = env.reset(mix_seed(seed, 1000 + static_cast<std::uint64_t>(ep)));
    const int leader = env.state().leader_index();
    const auto kinds = scheme_kinds(scheme, m, leader);

    Eigen::VectorXd totals = Eigen::VectorXd::Zero(m);
    double omega_sum = 0.0;
    double support_sum = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    int steps = 0;

    while (!env.done()) {
      const double eps = epsilon(trainer.epsilon_schedule,
                                 trainer.update_count);
      const Eigen::MatrixXd dist =
          commnet_forward(trainer.actor, obs, kinds, m);
      const std::vector<int> chosen = sample_actions(dist, eps, explore_rng);
      std::vector<Action> actions(chosen.size());
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        actions[i] = static_cast<Action>(chosen[i]);
      }
      auto step = env.step(actions);

      Transition t;
      t.states = obs;
      t.actions = actions;
      t.rewards.resize(m);
      for (int a = 0; a < m; ++a) {
        t.rewards[a] = step.rewards[static_cast<std::size_t>(a)].r_total;
      }
      t.next_states = step.observations;
      t.done = step.done;
      t.leader_index = leader;
      buffer.push(std::move(t));

      for (int a = 0; a < m; ++a) {
        totals[a] += step.rewards[static_cast<std::size_t>(a)].r_total;
      }
      omega_sum += step.omega;
      support_sum += step.support;
      ++steps;
      obs = std::move(step.observations);

      if (buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
        const auto batch = buffer.sample(config.batch_size, sample_rng);
        loss_sum += critic_update(batch, trainer);
        trainer.critic_update_count += 1;
        ++loss_count;
        if (steps % config.update_period == 0) {
          actor_update(batch, trainer);
          trainer.update_count += 1;
          target_sync(trainer, config.target_sync_period);
        }
      }
    }

    EpisodeMetrics rec;
    rec.episode = ep;
    rec.scheme = scheme;
    rec.total_reward_per_agent = totals;
    rec.total_reward_mean = m > 0 ? totals.mean() : 0.0;
    rec.critic_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    rec.epsilon_value = epsilon(trainer.epsilon_schedule,
                                trainer.update_count);
    rec.support_rate_mean = steps > 0 ? support_sum / steps : 0.0;
    rec.omega_mean = steps > 0 ? omega_sum / steps : 0.0;
    result.metrics.push_back(std::move(rec));
  }
  return result;
}

}  // namespace uavcover
