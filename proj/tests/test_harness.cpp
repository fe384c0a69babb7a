#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "uavcover/config.hpp"
#include "uavcover/errors.hpp"
#include "uavcover/eval.hpp"
#include "uavcover/flops.hpp"
#include "uavcover/trace.hpp"

using namespace uavcover;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "uavcover_harness_test";
  fs::create_directories(dir);
  return dir;
}

ScenarioConfig small_world() {
  ScenarioConfig c;
  c.num_agents = 2;
  c.num_users = 5;
  c.num_non_agents = 1;
  c.episode_steps = 6;
  c.hidden_width = 8;
  c.dense_layers = 3;
  return c;
}

Network small_actor(const ScenarioConfig& c, std::uint64_t seed = 50) {
  return make_policy_network(
      observation_dim(c.num_agents, c.num_users, c.num_non_agents),
      c.hidden_width, c.dense_layers, kActionCount, seed);
}

}  // namespace

TEST_CASE("scenario configs round-trip through the key/value file") {
  const fs::path path = temp_dir() / "roundtrip.cfg";

  SUBCASE("defaults") {
    ScenarioConfig config;
    save_scenario(config, path.string());
    CHECK(load_scenario(path.string()) == config);
  }
  SUBCASE("modified values and symbolic energy") {
    ScenarioConfig config;
    config.field_size = 1000.0;
    config.non_agent_ring = 400.0;  // must fit the shrunken field
    config.num_agents = 3;
    config.num_users = 7;
    config.episode_steps = 12;
    config.resolutions = ResolutionSet({480, 960, 1920, 3840});
    config.malfunction_prob = 0.125;
    config.energy.delta = 80.0;
    config.energy.zeta = 0.05;
    config.energy.altitude = 120.0;
    config.energy.lift_power = 25.0;
    config.rho_u = 2.5;
    config.discount = 0.9;
    config.epsilon_floor = 0.05;
    config.seed = 987654321;
    config.eval_seed_stride = 3;
    save_scenario(config, path.string());
    CHECK(load_scenario(path.string()) == config);
  }
}

TEST_CASE("config parsing accepts comments and rejects junk") {
  const fs::path dir = temp_dir();

  SUBCASE("comments, blanks, partial keys") {
    const fs::path path = dir / "partial.cfg";
    std::ofstream(path) << "# scenario tweaks\n"
                        << "\n"
                        << "num_agents = 6   # more drones\n"
                        << "  field_size=1800\n"
                        << "resolutions = 720, 2160\n";
    const ScenarioConfig config = load_scenario(path.string());
    CHECK(config.num_agents == 6);
    CHECK(config.field_size == 1800.0);
    CHECK(config.resolutions == ResolutionSet({720, 2160}));
    CHECK(config.num_users == 25);  // untouched default
  }
  SUBCASE("unknown key") {
    const fs::path path = dir / "unknown.cfg";
    std::ofstream(path) << "warp_speed = 9\n";
    CHECK_THROWS_AS(load_scenario(path.string()), ConfigError);
  }
  SUBCASE("malformed number") {
    const fs::path path = dir / "bad.cfg";
    std::ofstream(path) << "field_size = twelve\n";
    CHECK_THROWS_AS(load_scenario(path.string()), ConfigError);
  }
  SUBCASE("trailing garbage on a value") {
    const fs::path path = dir / "bad2.cfg";
    std::ofstream(path) << "num_agents = 4x\n";
    CHECK_THROWS_AS(load_scenario(path.string()), ConfigError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_scenario((dir / "missing.cfg").string()), IoError);
  }
}

TEST_CASE("cross-field validation") {
  ScenarioConfig c;
  validate(c);  // defaults are coherent

  SUBCASE("batch larger than buffer") {
    c.buffer_capacity = 8;
    c.batch_size = 32;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("epsilon floor above start") {
    c.epsilon_floor = 0.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("cell larger than field") {
    c.cell_size = 5000.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("discount of one diverges") {
    c.discount = 1.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("no agents") {
    c.num_agents = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("single dense layer") {
    c.dense_layers = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  SUBCASE("spawn ring outside the field") {
    c.non_agent_ring = 1300.0;  // > field/2
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
}

TEST_CASE("derived config quantities") {
  ScenarioConfig c;
  CHECK(c.energy_norm() == doctest::Approx(175.32));
  CHECK(c.max_radius() == 600.0);
  CHECK(c.grid().cells_per_side() == 480);
}

TEST_CASE("fnv1a matches the reference vectors") {
  CHECK(fnv1a_bytes("", 0) == 14695981039346656037ULL);
  CHECK(fnv1a_bytes("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a_bytes("foobar", 6) == 0x85944171f73967e8ULL);

  const fs::path path = temp_dir() / "hash.bin";
  std::ofstream(path, std::ios::binary) << "foobar";
  CHECK(fnv1a_file(path.string()) == 0x85944171f73967e8ULL);
  CHECK_THROWS_AS(fnv1a_file((temp_dir() / "missing.bin").string()), IoError);
}

TEST_CASE("assignment extraction from an association matrix") {
  AssociationMatrix assoc = AssociationMatrix::Zero(3, 4);
  assoc(1, 0) = 1;
  assoc(2, 2) = 1;
  const auto assignment = assignment_of(assoc);
  REQUIRE(assignment.size() == 4);
  CHECK(assignment[0] == 1);
  CHECK(assignment[1] == -1);
  CHECK(assignment[2] == 2);
  CHECK(assignment[3] == -1);
}

TEST_CASE("greedy rollouts are reproducible and fully recorded") {
  const ScenarioConfig config = small_world();
  const Network actor = small_actor(config);

  const RolloutResult a = run_episode(actor, config, Scheme::Proposed, 42, {});
  const RolloutResult b = run_episode(actor, config, Scheme::Proposed, 42, {});
  CHECK(a.trace == b.trace);
  CHECK(a.support_mean == b.support_mean);
  CHECK(a.omega_mean == b.omega_mean);
  CHECK(a.total_reward_per_agent == b.total_reward_per_agent);

  CHECK(a.trace.steps.size() == 6);
  CHECK(a.trace.num_agents == 2);
  CHECK(a.trace.users.size() == 5);
  CHECK(a.trace.leader_index >= 0);
  CHECK(a.trace.leader_index < 2);
  CHECK(a.total_reward_per_agent.size() == 2);
  for (std::size_t t = 0; t < a.trace.steps.size(); ++t) {
    const auto& step = a.trace.steps[t];
    CHECK(step.time_step == static_cast<int>(t) + 1);
    CHECK(step.agents.size() == 2);
    CHECK(step.non_agents.size() == 1);
    CHECK(step.assignment.size() == 5);
    CHECK(step.rewards.size() == 2);
  }

  // a different layout seed gives a different world
  const RolloutResult c = run_episode(actor, config, Scheme::Proposed, 43, {});
  CHECK_FALSE(a.trace.users == c.trace.users);
}

TEST_CASE("the dynamics seed only steers the failure stream") {
  ScenarioConfig config = small_world();
  config.episode_steps = 30;
  config.malfunction_prob = 0.2;
  const Network actor = small_actor(config);

  const RolloutResult frozen1 =
      run_episode(actor, config, Scheme::Comp2, 7, 1001);
  const RolloutResult frozen2 =
      run_episode(actor, config, Scheme::Comp2, 7, 1001);
  CHECK(frozen1.trace == frozen2.trace);
  // same layout either way
  const RolloutResult other =
      run_episode(actor, config, Scheme::Comp2, 7, 2002);
  CHECK(frozen1.trace.users == other.trace.users);
  CHECK(frozen1.trace.leader_index == other.trace.leader_index);
}

TEST_CASE("traces round-trip through jsonl") {
  const ScenarioConfig config = small_world();
  const Network actor = small_actor(config);
  const RolloutResult rollout =
      run_episode(actor, config, Scheme::Comp1, 3, {});

  const fs::path path = temp_dir() / "episode.jsonl";
  write_trace(rollout.trace, path.string());
  const EpisodeTrace back = read_trace(path.string());
  CHECK(back == rollout.trace);

  // line structure: one header plus one line per step
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1 + static_cast<int>(rollout.trace.steps.size()));
}

TEST_CASE("a zero-step episode still has a valid header-only trace") {
  ScenarioConfig config = small_world();
  config.episode_steps = 0;
  const Network actor = small_actor(config);
  const RolloutResult rollout =
      run_episode(actor, config, Scheme::Comp2, 5, {});
  CHECK(rollout.trace.steps.empty());

  const fs::path path = temp_dir() / "header_only.jsonl";
  write_trace(rollout.trace, path.string());
  const EpisodeTrace back = read_trace(path.string());
  CHECK(back == rollout.trace);
}

TEST_CASE("trace reading rejects malformed input") {
  const fs::path dir = temp_dir();
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_trace((dir / "absent.jsonl").string()), IoError);
  }
  SUBCASE("garbage") {
    const fs::path path = dir / "garbage.jsonl";
    std::ofstream(path) << "not json at all\n";
    CHECK_THROWS_AS(read_trace(path.string()), IoError);
  }
  SUBCASE("wrong schema version") {
    const fs::path path = dir / "future.jsonl";
    std::ofstream(path) << "{\"schema_version\": 999}\n";
    CHECK_THROWS_AS(read_trace(path.string()), IoError);
  }
}

TEST_CASE("evaluation is deterministic, parallel merge included") {
  const ScenarioConfig config = small_world();
  const Network actor = small_actor(config);

  const EvalReport a = evaluate(actor, config, Scheme::Proposed, 6, 11, 1);
  const EvalReport b = evaluate(actor, config, Scheme::Proposed, 6, 11, 1);
  CHECK(a.iterations == 6);
  CHECK(a.support_rate_mean == b.support_rate_mean);
  CHECK(a.support_rate_std == b.support_rate_std);
  CHECK(a.omega_mean == b.omega_mean);
  CHECK(a.total_reward_mean == b.total_reward_mean);
  CHECK(a.users_per_uav_mean == b.users_per_uav_mean);
  CHECK(a.support_rate_per_step == b.support_rate_per_step);
  CHECK(a.resolution_step_mean == b.resolution_step_mean);

  CHECK(a.users_per_uav_mean.size() == 3);      // M + K
  CHECK(a.support_rate_per_step.size() == 6);   // T
  CHECK(a.resolution_step_mean.rows() == 6);
  CHECK(a.resolution_step_mean.cols() == 2);
  CHECK(a.support_rate_mean >= 0.0);
  CHECK(a.support_rate_mean <= 1.0);
  CHECK(a.omega_mean >= 0.0);
  CHECK(a.omega_mean <= 1.0);
  // resolution means live between the lowest and highest pixel values
  CHECK(a.resolution_step_mean.minCoeff() >= 720.0);
  CHECK(a.resolution_step_mean.maxCoeff() <= 2160.0);
}

TEST_CASE("a zero stride freezes the failure stream across iterations") {
  ScenarioConfig config = small_world();
  config.malfunction_prob = 0.3;
  const Network actor = small_actor(config);
  const EvalReport frozen = evaluate(actor, config, Scheme::Comp2, 5, 21, 0);
  CHECK(frozen.support_rate_std == 0.0);
  CHECK(frozen.omega_std == 0.0);
}

TEST_CASE("incompatible checkpoints are rejected") {
  const ScenarioConfig config = small_world();
  check_actor_compatible(small_actor(config), config);

  // wrong observation width
  const Network narrow = make_policy_network(10, 8, 3, kActionCount, 1);
  CHECK_THROWS_AS(check_actor_compatible(narrow, config), CheckpointMismatch);
  CHECK_THROWS_AS(evaluate(narrow, config, Scheme::Comp2, 2, 1, 1),
                  CheckpointMismatch);

  // wrong action count
  const Network short_head = make_policy_network(
      observation_dim(2, 5, 1), 8, 3, 4, 1);
  CHECK_THROWS_AS(check_actor_compatible(short_head, config),
                  CheckpointMismatch);

  // no room for the communication input
  Network plain;
  const int obs = observation_dim(2, 5, 1);
  plain.layers.push_back(
      {Eigen::MatrixXd::Zero(8, obs), Eigen::VectorXd::Zero(8),
       Activation::Relu});
  plain.layers.push_back({Eigen::MatrixXd::Zero(kActionCount, 8),
                          Eigen::VectorXd::Zero(kActionCount),
                          Activation::Softmax});
  CHECK_THROWS_AS(check_actor_compatible(plain, config), CheckpointMismatch);
}

TEST_CASE("flops report composes the per-policy costs") {
  const FlopsReport report = flops_report(ScenarioConfig{});
  CHECK(report.commnet_cost == 82984);
  CHECK(report.dnn_cost == 81704);
  CHECK(report.num_agents == 4);
  CHECK(report.proposed == 328096);  // C + 3 D
  CHECK(report.comp1 == 331936);     // 4 C
  CHECK(report.comp2 == 326816);     // 4 D

  const FlopsReport composed = compose_flops(222521, 181369, 4);
  CHECK(composed.proposed == 766628);
  CHECK(composed.comp1 == 890084);
  CHECK(composed.comp2 == 725476);

  CHECK_THROWS_AS(compose_flops(100, 200, 0), ConfigError);

  std::ostringstream out;
  print_flops(report, out);
  CHECK(out.str().find("82984") != std::string::npos);
  CHECK(out.str().find("328096") != std::string::npos);
}

TEST_CASE("manifests serialize every provenance field") {
  RunManifest manifest;
  manifest.command = "train";
  manifest.config_path = "scenario.cfg";
  manifest.config_hash = 0xdeadbeefULL;
  manifest.scheme = "proposed";
  manifest.episodes = 2000;
  manifest.seed = 7;
  manifest.checkpoint_path = "actor.net";
  manifest.checkpoint_hash = 42;

  const fs::path path = temp_dir() / "manifest.json";
  write_manifest(manifest, path.string());

  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  CHECK(j.at("schema_version").get<int>() == 1);
  CHECK(j.at("command").get<std::string>() == "train");
  CHECK(j.at("config_path").get<std::string>() == "scenario.cfg");
  CHECK(j.at("config_fnv1a").get<std::uint64_t>() == 0xdeadbeefULL);
  CHECK(j.at("scheme").get<std::string>() == "proposed");
  CHECK(j.at("episodes").get<int>() == 2000);
  CHECK(j.at("seed").get<std::uint64_t>() == 7);
  CHECK(j.at("checkpoint_path").get<std::string>() == "actor.net");
  CHECK(j.at("checkpoint_fnv1a").get<std::uint64_t>() == 42);
  CHECK(j.at("format_versions").at("checkpoint").get<int>() == 1);
  CHECK(j.at("format_versions").at("trace").get<int>() == 1);
}
