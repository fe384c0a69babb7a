#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>
#include <vector>

#include "doctest.h"
#include "uavcover/errors.hpp"
#include "uavcover/trainer.hpp"

using namespace uavcover;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig c;
  c.num_agents = 2;
  c.num_users = 3;
  c.num_non_agents = 1;
  c.episode_steps = 5;
  c.hidden_width = 8;
  c.dense_layers = 3;
  c.batch_size = 4;
  c.buffer_capacity = 16;
  c.update_period = 1;  // the 5-step horizon never reaches the default 40
  c.target_sync_period = 10;
  c.episodes = 3;
  return c;
}

Transition tagged_transition(double tag) {
  Transition t;
  t.states = Eigen::MatrixXd::Zero(2, 2);
  t.actions = {Action::MoveXPlus, Action::MoveYPlus};
  t.rewards = Eigen::Vector2d(tag, tag);
  t.next_states = Eigen::MatrixXd::Zero(2, 2);
  return t;
}

std::vector<Transition> random_batch(const ScenarioConfig& config, int count,
                                     std::uint64_t seed) {
  const int obs_dim = observation_dim(config.num_agents, config.num_users,
                                      config.num_non_agents);
  Rng rng(seed);
  std::vector<Transition> batch;
  for (int i = 0; i < count; ++i) {
    Transition t;
    t.states.resize(obs_dim, config.num_agents);
    t.next_states.resize(obs_dim, config.num_agents);
    for (Eigen::Index j = 0; j < t.states.size(); ++j) {
      t.states.data()[j] = rng.uniform(-1.0, 1.0);
      t.next_states.data()[j] = rng.uniform(-1.0, 1.0);
    }
    for (int m = 0; m < config.num_agents; ++m) {
      t.actions.push_back(static_cast<Action>(rng.uniform_int(kActionCount)));
    }
    t.rewards = Eigen::VectorXd::Zero(config.num_agents);
    for (int m = 0; m < config.num_agents; ++m) {
      t.rewards[m] = rng.uniform(-2.0, 20.0);
    }
    t.done = rng.uniform() < 0.2;
    t.leader_index = rng.uniform_int(config.num_agents);
    batch.push_back(std::move(t));
  }
  return batch;
}

std::vector<const Transition*> pointers(const std::vector<Transition>& v) {
  std::vector<const Transition*> p;
  for (const auto& t : v) p.push_back(&t);
  return p;
}

}  // namespace

TEST_CASE("replay buffer is a fifo ring") {
  ReplayBuffer buffer(3);
  CHECK(buffer.size() == 0);
  CHECK(buffer.capacity() == 3);
  for (int i = 1; i <= 5; ++i) {
    buffer.push(tagged_transition(static_cast<double>(i)));
  }
  CHECK(buffer.size() == 3);
  CHECK(buffer.at(0).rewards[0] == 3.0);  // oldest survivor
  CHECK(buffer.at(1).rewards[0] == 4.0);
  CHECK(buffer.at(2).rewards[0] == 5.0);
}

TEST_CASE("replay sampling is without replacement and uniform") {
  ReplayBuffer buffer(10);
  for (int i = 0; i < 10; ++i) {
    buffer.push(tagged_transition(static_cast<double>(i)));
  }
  Rng rng(17);

  SUBCASE("distinct samples") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto sample = buffer.sample(4, rng);
      REQUIRE(sample.size() == 4);
      for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
          CHECK(sample[i] != sample[j]);
        }
      }
    }
  }
  SUBCASE("batch larger than contents returns everything") {
    const auto sample = buffer.sample(32, rng);
    CHECK(sample.size() == 10);
  }
  SUBCASE("long-run frequencies are flat") {
    int counts[10] = {};
    const int trials = 20000;
    for (int trial = 0; trial < trials; ++trial) {
      const auto sample = buffer.sample(1, rng);
      counts[static_cast<int>(sample[0]->rewards[0])] += 1;
    }
    for (int i = 0; i < 10; ++i) {
      CHECK(static_cast<double>(counts[i]) / trials ==
            doctest::Approx(0.1).epsilon(0.15));
    }
  }
  SUBCASE("error paths") {
    ReplayBuffer empty(4);
    Rng r(1);
    CHECK_THROWS_AS(empty.sample(1, r), EmptyBatch);
    CHECK_THROWS_AS(buffer.sample(0, rng), EmptyBatch);
  }
}

TEST_CASE("fresh trainers start with synchronized targets") {
  const ScenarioConfig config = tiny_config();
  const Trainer trainer = make_trainer(config, Scheme::Proposed, 42);
  REQUIRE(trainer.actor.layers.size() == 3);
  REQUIRE(trainer.critic.layers.size() == 3);
  for (std::size_t l = 0; l < trainer.actor.layers.size(); ++l) {
    CHECK(trainer.actor.layers[l].weights ==
          trainer.target_actor.layers[l].weights);
    CHECK(trainer.critic.layers[l].weights ==
          trainer.target_critic.layers[l].weights);
  }
  // actor and critic are distinct draws
  CHECK(trainer.actor.layers[0].weights != trainer.critic.layers[0].weights);
  CHECK(trainer.update_count == 0);
  CHECK(trainer.scheme == Scheme::Proposed);
  const int obs_dim = observation_dim(config.num_agents, config.num_users,
                                      config.num_non_agents);
  CHECK(trainer.actor.input_dim() == obs_dim);
  CHECK(trainer.actor.output_dim() == kActionCount);
  CHECK(trainer.critic.input_dim() == obs_dim);
  CHECK(trainer.critic.output_dim() == kActionCount);
  CHECK(trainer.actor_adam.learning_rate == config.actor_learning_rate);
  CHECK(trainer.critic_adam.learning_rate == config.learning_rate);

  // same seed reproduces the draw
  const Trainer again = make_trainer(config, Scheme::Proposed, 42);
  CHECK(again.actor.layers[0].weights == trainer.actor.layers[0].weights);
}

TEST_CASE("bellman target bootstraps through the target networks") {
  const ScenarioConfig config = tiny_config();
  const Trainer trainer = make_trainer(config, Scheme::Comp2, 5);
  const int obs_dim = trainer.actor.input_dim();
  Rng rng(33);
  Eigen::VectorXd next_obs(obs_dim);
  for (Eigen::Index i = 0; i < next_obs.size(); ++i) {
    next_obs[i] = rng.uniform(-1.0, 1.0);
  }

  // oracle: greedy action from the target actor (no communication), then
  // the target critic's value at that action
  const std::vector<PolicyKind> solo{PolicyKind::Dnn};
  const Eigen::MatrixXd dist =
      commnet_forward(trainer.target_actor, next_obs, solo, 1);
  const int greedy = argmax_index(dist.col(0));
  const Eigen::VectorXd q = forward(trainer.target_critic, next_obs);
  const double expected = 1.5 + config.discount * q[greedy];

  CHECK(bellman_target(1.5, next_obs, false, trainer.target_actor,
                       trainer.target_critic, config.discount) ==
        doctest::Approx(expected).epsilon(1e-12));
  // terminal transitions do not bootstrap
  CHECK(bellman_target(1.5, next_obs, true, trainer.target_actor,
                       trainer.target_critic, config.discount) == 1.5);
  CHECK_THROWS_AS(bellman_target(1.5, next_obs, false, trainer.target_actor,
                                 trainer.target_critic, 1.5),
                  ConfigError);
}

TEST_CASE("critic updates reduce the bellman error") {
  const ScenarioConfig config = tiny_config();
  Trainer trainer = make_trainer(config, Scheme::Proposed, 7);
  const auto batch = random_batch(config, 8, 21);
  const auto ptrs = pointers(batch);

  const double first = critic_update(ptrs, trainer);
  CHECK(first > 0.0);
  double prev = first;
  for (int i = 0; i < 20; ++i) {
    const double loss = critic_update(ptrs, trainer);
    prev = loss;
  }
  CHECK(prev < first);  // repeated steps on a fixed batch fit it

  CHECK_THROWS_AS(
      critic_update(std::vector<const Transition*>{}, trainer), EmptyBatch);
}

TEST_CASE("actor updates raise the expected critic value") {
  const ScenarioConfig config = tiny_config();
  Trainer trainer = make_trainer(config, Scheme::Comp1, 9);
  const auto batch = random_batch(config, 8, 22);
  const auto ptrs = pointers(batch);

  const double first = actor_update(ptrs, trainer);
  double last = first;
  for (int i = 0; i < 20; ++i) {
    last = actor_update(ptrs, trainer);
  }
  CHECK(last > first);

  CHECK_THROWS_AS(actor_update(std::vector<const Transition*>{}, trainer),
                  EmptyBatch);
}

TEST_CASE("per-transition leaders rebuild the collection-time kinds") {
  // proposed scheme: replay must work even when the two transitions in a
  // batch were collected under different leaders
  const ScenarioConfig config = tiny_config();
  Trainer trainer = make_trainer(config, Scheme::Proposed, 13);
  auto batch = random_batch(config, 4, 23);
  batch[0].leader_index = 0;
  batch[1].leader_index = 1;
  const auto ptrs = pointers(batch);
  const double loss = critic_update(ptrs, trainer);
  CHECK(loss > 0.0);
  CHECK(actor_update(ptrs, trainer) != 0.0);
}

TEST_CASE("target sync copies on schedule") {
  const ScenarioConfig config = tiny_config();
  Trainer trainer = make_trainer(config, Scheme::Proposed, 11);
  const auto batch = random_batch(config, 6, 31);
  critic_update(pointers(batch), trainer);
  CHECK(trainer.critic.layers[0].weights !=
        trainer.target_critic.layers[0].weights);

  trainer.update_count = 7;  // not a multiple of the period
  target_sync(trainer, 10);
  CHECK(trainer.critic.layers[0].weights !=
        trainer.target_critic.layers[0].weights);

  trainer.update_count = 20;
  target_sync(trainer, 10);
  for (std::size_t l = 0; l < trainer.critic.layers.size(); ++l) {
    CHECK(trainer.critic.layers[l].weights ==
          trainer.target_critic.layers[l].weights);
    CHECK(trainer.actor.layers[l].weights ==
          trainer.target_actor.layers[l].weights);
  }
  CHECK_THROWS_AS(target_sync(trainer, 0), ConfigError);
}

TEST_CASE("metrics csv has a stable machine-readable header") {
  std::vector<EpisodeMetrics> metrics(1);
  metrics[0].episode = 0;
  metrics[0].scheme = Scheme::Comp1;
  metrics[0].total_reward_mean = 1.5;
  metrics[0].total_reward_per_agent = Eigen::Vector2d(1.0, 2.0);
  metrics[0].critic_loss = 0.25;
  metrics[0].epsilon_value = 0.3;
  metrics[0].support_rate_mean = 0.5;
  metrics[0].omega_mean = 0.125;

  std::ostringstream out;
  write_metrics_csv(metrics, 2, out);
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header ==
        "episode,scheme,total_reward_mean,total_reward_agent0,"
        "total_reward_agent1,critic_loss,epsilon,support_rate_mean,"
        "omega_mean");
  CHECK(row == "0,comp1,1.5,1,2,0.25,0.29999999999999999,0.5,0.125");
}

TEST_CASE("no updates happen before the buffer holds a batch") {
  ScenarioConfig config = tiny_config();
  config.episode_steps = 3;
  config.batch_size = 32;  // larger than one episode's transitions
  config.buffer_capacity = 64;
  const auto result = train(config, Scheme::Proposed, 1, 4);
  CHECK(result.trainer.update_count == 0);
  CHECK(result.trainer.critic_update_count == 0);
  REQUIRE(result.metrics.size() == 1);
  CHECK(result.metrics[0].critic_loss == 0.0);
  CHECK(result.metrics[0].epsilon_value == doctest::Approx(0.3));

  // fresh targets still equal the online nets: nothing moved
  for (std::size_t l = 0; l < result.trainer.actor.layers.size(); ++l) {
    CHECK(result.trainer.actor.layers[l].weights ==
          result.trainer.target_actor.layers[l].weights);
  }
}

TEST_CASE("updates follow the configured cadences") {
  // horizon is fixed at episode_steps (no early exits) and batch_size 1
  // warms the buffer on the first step, so both counters are exact: the
  // critic updates every warm step, the actor only on steps divisible by
  // update_period
  ScenarioConfig config = tiny_config();
  config.batch_size = 1;

  SUBCASE("period 1 keeps actor and critic in lockstep") {
    config.update_period = 1;
    const auto r = train(config, Scheme::Comp2, 2, 6);
    CHECK(r.trainer.update_count == 2 * config.episode_steps);
    CHECK(r.trainer.critic_update_count == 2 * config.episode_steps);
  }
  SUBCASE("period 2 delays the actor to even steps") {
    config.update_period = 2;
    const auto r = train(config, Scheme::Comp2, 3, 6);
    CHECK(r.trainer.update_count == 3 * (config.episode_steps / 2));
    CHECK(r.trainer.critic_update_count == 3 * config.episode_steps);
  }
  SUBCASE("period equal to the horizon updates the actor once per episode") {
    config.update_period = config.episode_steps;
    const auto r = train(config, Scheme::Comp2, 4, 6);
    CHECK(r.trainer.update_count == 4);
    CHECK(r.trainer.critic_update_count == 4 * config.episode_steps);
  }
  SUBCASE("period past the horizon never updates the actor") {
    config.update_period = config.episode_steps + 1;
    const auto r = train(config, Scheme::Comp2, 2, 6);
    CHECK(r.trainer.update_count == 0);
    CHECK(r.trainer.critic_update_count == 2 * config.episode_steps);
  }
  SUBCASE("period must be positive") {
    config.update_period = 0;
    CHECK_THROWS_AS(validate(config), ConfigError);
  }
}

TEST_CASE("training is deterministic per seed and scheme") {
  const ScenarioConfig config = tiny_config();
  const auto a = train(config, Scheme::Proposed, 3, 1234);
  const auto b = train(config, Scheme::Proposed, 3, 1234);
  REQUIRE(a.metrics.size() == 3);
  REQUIRE(b.metrics.size() == 3);
  for (std::size_t e = 0; e < a.metrics.size(); ++e) {
    CHECK(a.metrics[e].total_reward_mean == b.metrics[e].total_reward_mean);
    CHECK(a.metrics[e].critic_loss == b.metrics[e].critic_loss);
    CHECK(a.metrics[e].support_rate_mean == b.metrics[e].support_rate_mean);
    CHECK(a.metrics[e].omega_mean == b.metrics[e].omega_mean);
  }
  for (std::size_t l = 0; l < a.trainer.actor.layers.size(); ++l) {
    CHECK(a.trainer.actor.layers[l].weights ==
          b.trainer.actor.layers[l].weights);
    CHECK(a.trainer.critic.layers[l].weights ==
          b.trainer.critic.layers[l].weights);
  }
  CHECK(a.trainer.update_count == b.trainer.update_count);
  CHECK(a.trainer.update_count > 0);  // the tiny config does update

  const auto c = train(config, Scheme::Proposed, 3, 1235);
  CHECK(a.trainer.actor.layers[0].weights !=
        c.trainer.actor.layers[0].weights);

  // epsilon anneals as updates accumulate
  CHECK(a.metrics.back().epsilon_value < 0.3);
  CHECK(a.metrics.back().epsilon_value ==
        doctest::Approx(epsilon(a.trainer.epsilon_schedule,
                                a.trainer.update_count)));
}
