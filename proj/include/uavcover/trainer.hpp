#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "uavcover/config.hpp"
#include "uavcover/environment.hpp"
#include "uavcover/net.hpp"
#include "uavcover/policy.hpp"
#include "uavcover/rng.hpp"

namespace uavcover {

/// One joint step of all M agents. `leader_index` pins the episode's
/// leader so a replayed sample reconstructs the same per-agent policy
/// kinds it was collected under.
struct Transition {
  Eigen::MatrixXd states;       // obs_dim x M
  std::vector<Action> actions;  // M
  Eigen::VectorXd rewards;      // M, total reward per agent
  Eigen::MatrixXd next_states;  // obs_dim x M
  bool done = false;
  int leader_index = 0;
};

/// Fixed-capacity FIFO ring with uniform without-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  /// i-th oldest stored transition, 0 = oldest.
  const Transition& at(std::size_t i) const;

  /// Uniform sample of min(batch_size, size) distinct transitions.
  /// Pointers stay valid until the next push. Throws EmptyBatch when the
  /// buffer is empty or batch_size < 1.
  std::vector<const Transition*> sample(int batch_size, Rng& rng) const;

 private:
  std::vector<Transition> ring_;
  std::size_t capacity_;
  std::size_t head_ = 0;  // next insert slot
  std::size_t size_ = 0;
};

/// Shared actor/critic pair with target copies and Adam state.
struct Trainer {
  Scheme scheme = Scheme::Proposed;
  ScenarioConfig config;
  Network actor;
  Network critic;
  Network target_actor;
  Network target_critic;
  AdamState actor_adam;
  AdamState critic_adam;
  EpsilonSchedule epsilon_schedule;
  long long update_count = 0;         // actor updates; drives epsilon + sync
  long long critic_update_count = 0;  // per-step critic fits, diagnostics
};

Trainer make_trainer(const ScenarioConfig& config, Scheme scheme,
                     std::uint64_t seed);

/// y = r if done, else r + discount * Q_target(next, argmax of the target
/// actor's distribution at next). Single-agent view (communication zeroed).
double bellman_target(double reward, const Eigen::VectorXd& next_obs,
                      bool done, const Network& target_actor,
                      const Network& target_critic, double discount);

/// Regresses the critic's taken-action outputs to Bellman targets (MSE),
/// one clipped Adam step. Returns the pre-update loss.
double critic_update(std::span<const Transition* const> batch,
                     Trainer& trainer);

/// Ascends the expected critic value under the actor's distributions,
/// one clipped Adam step on the sign-flipped gradient; the critic is read
/// but not modified. Returns the pre-update objective.
double actor_update(std::span<const Transition* const> batch,
                    Trainer& trainer);

/// Hard-copies online parameters into the targets whenever
/// update_count % period == 0.
void target_sync(Trainer& trainer, int period);

struct EpisodeMetrics {
  int episode = 0;
  Scheme scheme = Scheme::Proposed;
  double total_reward_mean = 0.0;
  Eigen::VectorXd total_reward_per_agent;
  double critic_loss = 0.0;  // mean over the episode's updates, 0 if none
  double epsilon_value = 0.0;
  double support_rate_mean = 0.0;
  double omega_mean = 0.0;
};

/// Header: episode,scheme,total_reward_mean,total_reward_agent<i>...,
/// critic_loss,epsilon,support_rate_mean,omega_mean. Doubles print with
/// 17 significant digits so equal runs produce byte-equal files.
void write_metrics_csv(std::span<const EpisodeMetrics> metrics,
                       int num_agents, std::ostream& out);

struct TrainResult {
  Trainer trainer;
  std::vector<EpisodeMetrics> metrics;
};

/// Full training loop: per step, actions drawn from the actor's softmax
/// (eps-uniform exploration mixed in), one env step, one buffered
/// transition. Once the buffer holds a batch, every step samples a
/// minibatch and updates the critic; the actor takes a delayed update on
/// that step's minibatch every update_period steps (default once per
/// 40-step episode), which is also the epsilon tick and the sync clock.
/// Targets hard-sync every target_sync_period actor updates. The delay
/// lets the critic's action ranking settle before the softmax commits to
/// it; a fresh softmax
/// chasing a cold critic locks onto an arbitrary action and the vanishing
/// policy gradient cannot undo it. Deterministic per (config, scheme,
/// episodes, seed).
TrainResult train(const ScenarioConfig& config, Scheme scheme, int episodes,
                  std::uint64_t seed);

}  // namespace uavcover
