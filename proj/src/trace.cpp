#include "uavcover/trace.hpp"

#include <fstream>

#include "json.hpp"
#include "uavcover/errors.hpp"
#include "uavcover/net.hpp"

namespace uavcover {

namespace {

using nlohmann::json;

json agent_to_json(const AgentState& a) {
  return json{{"id", a.id},
              {"x", a.position.x()},
              {"y", a.position.y()},
              {"res", a.resolution_index},
              {"e_b", a.energy.e_b},
              {"e_c", a.energy.e_c},
              {"battery", a.energy.battery_remaining},
              {"operating", a.operating},
              {"leader", a.is_leader}};
}

AgentState agent_from_json(const json& j) {
  AgentState a;
  a.id = j.at("id").get<int>();
  a.position = Position(j.at("x").get<double>(), j.at("y").get<double>());
  a.resolution_index = j.at("res").get<int>();
  a.energy.e_b = j.at("e_b").get<double>();
  a.energy.e_c = j.at("e_c").get<double>();
  a.energy.battery_remaining = j.at("battery").get<double>();
  a.operating = j.at("operating").get<bool>();
  a.is_leader = j.at("leader").get<bool>();
  return a;
}

json non_agent_to_json(const NonAgentState& n) {
  return json{{"id", n.id},
              {"x", n.position.x()},
              {"y", n.position.y()},
              {"res", n.resolution_index},
              {"malfunctioned", n.malfunctioned}};
}

NonAgentState non_agent_from_json(const json& j) {
  NonAgentState n;
  n.id = j.at("id").get<int>();
  n.position = Position(j.at("x").get<double>(), j.at("y").get<double>());
  n.resolution_index = j.at("res").get<int>();
  n.malfunctioned = j.at("malfunctioned").get<bool>();
  return n;
}

json reward_to_json(const RewardBreakdown& r) {
  return json{{"r_e", r.r_e},
              {"r_c", r.r_c},
              {"r_u", r.r_u},
              {"r_total", r.r_total},
              {"omega", r.omega}};
}

RewardBreakdown reward_from_json(const json& j) {
  RewardBreakdown r;
  r.r_e = j.at("r_e").get<double>();
  r.r_c = j.at("r_c").get<double>();
  r.r_u = j.at("r_u").get<double>();
  r.r_total = j.at("r_total").get<double>();
  r.omega = j.at("omega").get<double>();
  return r;
}

}  // namespace

std::vector<int> assignment_of(const AssociationMatrix& assoc) {
  std::vector<int> out(static_cast<std::size_t>(assoc.cols()), -1);
  for (Eigen::Index n = 0; n < assoc.cols(); ++n) {
    for (Eigen::Index r = 0; r < assoc.rows(); ++r) {
      if (assoc(r, n) != 0) {
        out[static_cast<std::size_t>(n)] = static_cast<int>(r);
        break;
      }
    }
  }
  return out;
}

void write_trace(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open trace file for writing: " + path);

  json header{{"schema_version", trace.schema_version},
              {"field_size", trace.field_size},
              {"num_agents", trace.num_agents},
              {"num_users", trace.num_users},
              {"num_non_agents", trace.num_non_agents},
              {"episode_steps", trace.episode_steps},
              {"resolutions", trace.resolutions},
              {"leader_index", trace.leader_index}};
  json users = json::array();
  for (const auto& u : trace.users) {
    users.push_back(
        json{{"id", u.id}, {"x", u.position.x()}, {"y", u.position.y()}});
  }
  header["users"] = std::move(users);
  out << header.dump() << "\n";

  for (const auto& step : trace.steps) {
    json rec{{"t", step.time_step},
             {"assignment", step.assignment},
             {"omega", step.omega},
             {"support", step.support}};
    json agents = json::array();
    for (const auto& a : step.agents) agents.push_back(agent_to_json(a));
    rec["agents"] = std::move(agents);
    json nas = json::array();
    for (const auto& n : step.non_agents) nas.push_back(non_agent_to_json(n));
    rec["non_agents"] = std::move(nas);
    json rewards = json::array();
    for (const auto& r : step.rewards) rewards.push_back(reward_to_json(r));
    rec["rewards"] = std::move(rewards);
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("trace write failed: " + path);
}

EpisodeTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("trace file is empty: " + path);
  }
  EpisodeTrace trace;
  try {
    const json header = json::parse(line);
    trace.schema_version = header.at("schema_version").get<int>();
    if (trace.schema_version != kTraceSchemaVersion) {
      throw IoError("unsupported trace schema version in " + path);
    }
    trace.field_size = header.at("field_size").get<double>();
    trace.num_agents = header.at("num_agents").get<int>();
    trace.num_users = header.at("num_users").get<int>();
    trace.num_non_agents = header.at("num_non_agents").get<int>();
    trace.episode_steps = header.at("episode_steps").get<int>();
    trace.resolutions = header.at("resolutions").get<std::vector<int>>();
    trace.leader_index = header.at("leader_index").get<int>();
    for (const auto& u : header.at("users")) {
      UserState user;
      user.id = u.at("id").get<int>();
      user.position =
          Position(u.at("x").get<double>(), u.at("y").get<double>());
      trace.users.push_back(user);
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      StepTrace step;
      step.time_step = rec.at("t").get<int>();
      step.assignment = rec.at("assignment").get<std::vector<int>>();
      step.omega = rec.at("omega").get<double>();
      step.support = rec.at("support").get<double>();
      for (const auto& a : rec.at("agents")) {
        step.agents.push_back(agent_from_json(a));
      }
      for (const auto& n : rec.at("non_agents")) {
        step.non_agents.push_back(non_agent_from_json(n));
      }
      for (const auto& r : rec.at("rewards")) {
        step.rewards.push_back(reward_from_json(r));
      }
      trace.steps.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed trace " + path + ": " + e.what());
  }
  return trace;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j{{"schema_version", 1},
         {"command", manifest.command},
         {"config_path", manifest.config_path},
         {"config_fnv1a", manifest.config_hash},
         {"scheme", manifest.scheme},
         {"episodes", manifest.episodes},
         {"iterations", manifest.iterations},
         {"seed", manifest.seed},
         {"seed_stride", manifest.seed_stride},
         {"checkpoint_path", manifest.checkpoint_path},
         {"checkpoint_fnv1a", manifest.checkpoint_hash},
         {"format_versions",
          json{{"checkpoint", kCheckpointVersion},
               {"trace", kTraceSchemaVersion}}}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("manifest write failed: " + path);
}

}  // namespace uavcover
