#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavcover/config.hpp"
#include "uavcover/errors.hpp"
#include "uavcover/eval.hpp"
#include "uavcover/flops.hpp"
#include "uavcover/net.hpp"
#include "uavcover/policy.hpp"
#include "uavcover/trace.hpp"
#include "uavcover/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string scheme = "proposed";
  bool scheme_given = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
};

uavcover::ScenarioConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return uavcover::ScenarioConfig{};
  return uavcover::load_scenario(path);
}

void write_trainer_sidecar(const uavcover::Trainer& trainer, int episodes,
                           std::uint64_t seed, const fs::path& path) {
  json j{{"schema_version", 1},
         {"scheme", std::string(uavcover::scheme_name(trainer.scheme))},
         {"update_count", trainer.update_count},
         {"critic_update_count", trainer.critic_update_count},
         {"epsilon", uavcover::epsilon(trainer.epsilon_schedule,
                                       trainer.update_count)},
         {"episodes", episodes},
         {"seed", seed},
         {"num_agents", trainer.config.num_agents},
         {"obs_dim", trainer.actor.input_dim()}};
  std::ofstream out(path);
  if (!out) throw uavcover::IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Scheme priority: explicit flag, then the trainer sidecar next to the
// checkpoint, then "proposed".
uavcover::Scheme resolve_scheme(const CommonArgs& args,
                                const std::string& checkpoint_path) {
  if (args.scheme_given || checkpoint_path.empty()) {
    return uavcover::parse_scheme(args.scheme);
  }
  const fs::path sidecar =
      fs::path(checkpoint_path).parent_path() / "trainer.json";
  std::ifstream in(sidecar);
  if (in) {
    try {
      json j;
      in >> j;
      return uavcover::parse_scheme(j.at("scheme").get<std::string>());
    } catch (...) {
      // fall through to the flag default
    }
  }
  return uavcover::parse_scheme(args.scheme);
}

int run_train(const CommonArgs& args, int episodes, bool episodes_given) {
  uavcover::ScenarioConfig config = load_config_or_default(args.config_path);
  const std::uint64_t seed = args.seed_given ? args.seed : config.seed;
  const int n_episodes = episodes_given ? episodes : config.episodes;
  const uavcover::Scheme scheme = uavcover::parse_scheme(args.scheme);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  auto result = uavcover::train(config, scheme, n_episodes, seed);

  {
    std::ofstream csv(out / "metrics.csv");
    if (!csv) {
      throw uavcover::IoError("cannot write " + (out / "metrics.csv").string());
    }
    uavcover::write_metrics_csv(result.metrics, config.num_agents, csv);
  }
  uavcover::save_network(result.trainer.actor, (out / "actor.net").string());
  uavcover::save_network(result.trainer.critic, (out / "critic.net").string());
  uavcover::save_network(result.trainer.target_actor,
                         (out / "target_actor.net").string());
  uavcover::save_network(result.trainer.target_critic,
                         (out / "target_critic.net").string());
  write_trainer_sidecar(result.trainer, n_episodes, seed,
                        out / "trainer.json");

  uavcover::RunManifest manifest;
  manifest.command = "train";
  manifest.config_path = args.config_path;
  manifest.config_hash =
      args.config_path.empty() ? 0 : uavcover::fnv1a_file(args.config_path);
  manifest.scheme = args.scheme;
  manifest.episodes = n_episodes;
  manifest.seed = seed;
  manifest.checkpoint_path = (out / "actor.net").string();
  manifest.checkpoint_hash =
      uavcover::fnv1a_file((out / "actor.net").string());
  uavcover::write_manifest(manifest, (out / "manifest.json").string());

  const auto& last = result.metrics.back();
  std::cout << "trained " << n_episodes << " episodes ("
            << uavcover::scheme_name(scheme) << ", seed " << seed << ")\n"
            << "final episode mean reward: " << last.total_reward_mean
            << ", support rate: " << last.support_rate_mean
            << ", epsilon: " << last.epsilon_value << "\n"
            << "outputs in " << out.string() << "\n";
  return 0;
}

int run_eval(const CommonArgs& args, const std::string& checkpoint,
             int iterations, int stride, bool stride_given) {
  uavcover::ScenarioConfig config = load_config_or_default(args.config_path);
  const std::uint64_t seed = args.seed_given ? args.seed : config.seed;
  const int eff_stride = stride_given ? stride : config.eval_seed_stride;
  const uavcover::Scheme scheme = resolve_scheme(args, checkpoint);

  const uavcover::Network actor = uavcover::load_network(checkpoint);
  const uavcover::EvalReport report = uavcover::evaluate(
      actor, config, scheme, iterations, seed, eff_stride);

  std::cout << "scheme: " << uavcover::scheme_name(scheme) << ", seed "
            << seed << ", stride " << eff_stride << "\n";
  uavcover::print_eval(report, std::cout);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  {
    json j{{"iterations", report.iterations},
           {"support_rate_mean", report.support_rate_mean},
           {"support_rate_std", report.support_rate_std},
           {"omega_mean", report.omega_mean},
           {"omega_std", report.omega_std},
           {"total_reward_mean", report.total_reward_mean}};
    j["users_per_uav_mean"] = json::array();
    for (Eigen::Index r = 0; r < report.users_per_uav_mean.size(); ++r) {
      j["users_per_uav_mean"].push_back(report.users_per_uav_mean[r]);
    }
    j["support_rate_per_step"] = json::array();
    for (Eigen::Index t = 0; t < report.support_rate_per_step.size(); ++t) {
      j["support_rate_per_step"].push_back(report.support_rate_per_step[t]);
    }
    j["resolution_step_mean"] = json::array();
    for (Eigen::Index t = 0; t < report.resolution_step_mean.rows(); ++t) {
      json row = json::array();
      for (Eigen::Index a = 0; a < report.resolution_step_mean.cols(); ++a) {
        row.push_back(report.resolution_step_mean(t, a));
      }
      j["resolution_step_mean"].push_back(std::move(row));
    }
    std::ofstream f(out / "eval.json");
    if (!f) throw uavcover::IoError("cannot write " + (out / "eval.json").string());
    f << j.dump(2) << "\n";
  }

  uavcover::RunManifest manifest;
  manifest.command = "eval";
  manifest.config_path = args.config_path;
  manifest.config_hash =
      args.config_path.empty() ? 0 : uavcover::fnv1a_file(args.config_path);
  manifest.scheme = std::string(uavcover::scheme_name(scheme));
  manifest.iterations = iterations;
  manifest.seed = seed;
  manifest.seed_stride = eff_stride;
  manifest.checkpoint_path = checkpoint;
  manifest.checkpoint_hash = uavcover::fnv1a_file(checkpoint);
  uavcover::write_manifest(manifest, (out / "manifest.json").string());
  return 0;
}

int run_flops(const CommonArgs& args) {
  uavcover::ScenarioConfig config = load_config_or_default(args.config_path);
  const uavcover::FlopsReport report = uavcover::flops_report(config);
  uavcover::print_flops(report, std::cout);

  fs::create_directories(args.out_dir);
  uavcover::RunManifest manifest;
  manifest.command = "flops";
  manifest.config_path = args.config_path;
  manifest.config_hash =
      args.config_path.empty() ? 0 : uavcover::fnv1a_file(args.config_path);
  uavcover::write_manifest(manifest,
                           (fs::path(args.out_dir) / "manifest.json").string());
  return 0;
}

int run_trace(const CommonArgs& args, const std::string& checkpoint) {
  uavcover::ScenarioConfig config = load_config_or_default(args.config_path);
  const std::uint64_t seed = args.seed_given ? args.seed : config.seed;
  const uavcover::Scheme scheme = resolve_scheme(args, checkpoint);

  const uavcover::Network actor = uavcover::load_network(checkpoint);
  const uavcover::RolloutResult rollout =
      uavcover::run_episode(actor, config, scheme, seed, std::nullopt);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  const fs::path trace_path = out / "trace.jsonl";
  uavcover::write_trace(rollout.trace, trace_path.string());

  uavcover::RunManifest manifest;
  manifest.command = "trace";
  manifest.config_path = args.config_path;
  manifest.config_hash =
      args.config_path.empty() ? 0 : uavcover::fnv1a_file(args.config_path);
  manifest.scheme = std::string(uavcover::scheme_name(scheme));
  manifest.seed = seed;
  manifest.checkpoint_path = checkpoint;
  manifest.checkpoint_hash = uavcover::fnv1a_file(checkpoint);
  uavcover::write_manifest(manifest, (out / "manifest.json").string());

  std::cout << "wrote " << rollout.trace.steps.size() << " step records to "
            << trace_path.string() << "\n"
            << "episode support rate: " << rollout.support_mean << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-uav surveillance simulator and trainer"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, flops_args, trace_args;
  int episodes = 0;
  int iterations = 25;
  int stride = 1;
  std::string eval_checkpoint, trace_checkpoint;

  auto* train_cmd =
      app.add_subcommand("train", "train a scheme on a scenario");
  train_cmd->add_option("--config", train_args.config_path,
                        "scenario config file");
  train_cmd->add_option("--scheme", train_args.scheme,
                        "proposed | comp1 | comp2");
  auto* episodes_opt =
      train_cmd->add_option("--episodes", episodes, "episodes to train");
  auto* train_seed_opt =
      train_cmd->add_option("--seed", train_args.seed, "run seed");
  train_cmd->add_option("--out", train_args.out_dir, "output directory")
      ->required();

  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate a trained actor checkpoint");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "actor checkpoint")
      ->required();
  eval_cmd->add_option("--config", eval_args.config_path,
                       "scenario config file");
  eval_cmd->add_option("--iterations", iterations, "evaluation episodes");
  auto* eval_seed_opt =
      eval_cmd->add_option("--seed", eval_args.seed, "layout seed");
  auto* eval_scheme_opt = eval_cmd->add_option(
      "--scheme", eval_args.scheme, "override the checkpoint's scheme");
  auto* stride_opt = eval_cmd->add_option(
      "--stride", stride, "malfunction-stream stride across iterations");
  eval_cmd->add_option("--out", eval_args.out_dir,
                       "directory for eval.json and the manifest");

  auto* flops_cmd =
      app.add_subcommand("flops", "per-policy and per-scheme FLOPS");
  flops_cmd->add_option("--config", flops_args.config_path,
                        "scenario config file");
  flops_cmd->add_option("--out", flops_args.out_dir,
                        "directory for the manifest");

  auto* trace_cmd =
      app.add_subcommand("trace", "write one greedy episode as JSONL");
  trace_cmd->add_option("--checkpoint", trace_checkpoint, "actor checkpoint")
      ->required();
  trace_cmd->add_option("--config", trace_args.config_path,
                        "scenario config file");
  auto* trace_seed_opt =
      trace_cmd->add_option("--seed", trace_args.seed, "layout seed");
  auto* trace_scheme_opt = trace_cmd->add_option(
      "--scheme", trace_args.scheme, "override the checkpoint's scheme");
  trace_cmd->add_option("--out", trace_args.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      train_args.seed_given = train_seed_opt->count() > 0;
      return run_train(train_args, episodes, episodes_opt->count() > 0);
    }
    if (eval_cmd->parsed()) {
      eval_args.seed_given = eval_seed_opt->count() > 0;
      eval_args.scheme_given = eval_scheme_opt->count() > 0;
      return run_eval(eval_args, eval_checkpoint, iterations, stride,
                      stride_opt->count() > 0);
    }
    if (flops_cmd->parsed()) {
      return run_flops(flops_args);
    }
    if (trace_cmd->parsed()) {
      trace_args.seed_given = trace_seed_opt->count() > 0;
      trace_args.scheme_given = trace_scheme_opt->count() > 0;
      return run_trace(trace_args, trace_checkpoint);
    }
  } catch (const uavcover::Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Error"}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  }
  return 0;
}
