#include "uavcover/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "uavcover/errors.hpp"

namespace uavcover {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad integer value for " + key + ": '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad unsigned value for " + key + ": '" + value + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_int(key, trim(item)));
  }
  if (out.empty()) {
    throw ConfigError("empty list for " + key);
  }
  return out;
}

void apply_key(ScenarioConfig& c, const std::string& key,
               const std::string& value) {
  if (key == "field_size") c.field_size = parse_double(key, value);
  else if (key == "num_agents") c.num_agents = parse_int(key, value);
  else if (key == "num_users") c.num_users = parse_int(key, value);
  else if (key == "num_non_agents") c.num_non_agents = parse_int(key, value);
  else if (key == "episode_steps") c.episode_steps = parse_int(key, value);
  else if (key == "alpha") c.alpha = parse_double(key, value);
  else if (key == "beta") c.beta = parse_double(key, value);
  else if (key == "resolutions")
    c.resolutions = ResolutionSet(parse_int_list(key, value));
  else if (key == "base_radius") c.base_radius = parse_double(key, value);
  else if (key == "cell_size") c.cell_size = parse_double(key, value);
  else if (key == "omega_threshold")
    c.omega_threshold = parse_double(key, value);
  else if (key == "malfunction_prob")
    c.malfunction_prob = parse_double(key, value);
  else if (key == "non_agent_ring")
    c.non_agent_ring = parse_double(key, value);
  else if (key == "battery_capacity")
    c.battery_capacity = parse_double(key, value);
  else if (key == "hover_power") c.energy.hover_power = parse_double(key, value);
  else if (key == "fly_power") c.energy.fly_power = parse_double(key, value);
  else if (key == "surveil_power_max")
    c.energy.surveil_power_max = parse_double(key, value);
  else if (key == "step_minutes")
    c.energy.step_minutes = parse_double(key, value);
  else if (key == "energy_delta") c.energy.delta = parse_double(key, value);
  else if (key == "energy_zeta") c.energy.zeta = parse_double(key, value);
  else if (key == "energy_altitude")
    c.energy.altitude = parse_double(key, value);
  else if (key == "energy_lift_power")
    c.energy.lift_power = parse_double(key, value);
  else if (key == "rho_e1") c.rho_e1 = parse_double(key, value);
  else if (key == "rho_e2") c.rho_e2 = parse_double(key, value);
  else if (key == "rho_c") c.rho_c = parse_double(key, value);
  else if (key == "rho_u") c.rho_u = parse_double(key, value);
  else if (key == "discount") c.discount = parse_double(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
  else if (key == "actor_learning_rate")
    c.actor_learning_rate = parse_double(key, value);
  else if (key == "entropy_weight")
    c.entropy_weight = parse_double(key, value);
  else if (key == "batch_size") c.batch_size = parse_int(key, value);
  else if (key == "buffer_capacity")
    c.buffer_capacity = parse_int(key, value);
  else if (key == "update_period")
    c.update_period = parse_int(key, value);
  else if (key == "target_sync_period")
    c.target_sync_period = parse_int(key, value);
  else if (key == "hidden_width") c.hidden_width = parse_int(key, value);
  else if (key == "dense_layers") c.dense_layers = parse_int(key, value);
  else if (key == "epsilon_initial")
    c.epsilon_initial = parse_double(key, value);
  else if (key == "epsilon_anneal")
    c.epsilon_anneal = parse_double(key, value);
  else if (key == "epsilon_floor") c.epsilon_floor = parse_double(key, value);
  else if (key == "grad_clip_norm")
    c.grad_clip_norm = parse_double(key, value);
  else if (key == "episodes") c.episodes = parse_int(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "eval_iterations")
    c.eval_iterations = parse_int(key, value);
  else if (key == "eval_seed_stride")
    c.eval_seed_stride = parse_int(key, value);
  else throw ConfigError("unknown config key: " + key);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  ScenarioConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + " of " + path +
                        " is not 'key = value': '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + " of " + path +
                        " has an empty key or value");
    }
    apply_key(config, key, value);
  }
  validate(config);
  return config;
}

void save_scenario(const ScenarioConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open config file for writing: " + path);
  out << "# surveillance scenario\n";
  out << "field_size = " << fmt_double(c.field_size) << "\n";
  out << "num_agents = " << c.num_agents << "\n";
  out << "num_users = " << c.num_users << "\n";
  out << "num_non_agents = " << c.num_non_agents << "\n";
  out << "episode_steps = " << c.episode_steps << "\n";
  out << "alpha = " << fmt_double(c.alpha) << "\n";
  out << "beta = " << fmt_double(c.beta) << "\n";
  out << "resolutions = ";
  for (std::size_t i = 0; i < c.resolutions.pixels().size(); ++i) {
    if (i) out << ",";
    out << c.resolutions.pixels()[i];
  }
  out << "\n";
  out << "base_radius = " << fmt_double(c.base_radius) << "\n";
  out << "cell_size = " << fmt_double(c.cell_size) << "\n";
  out << "omega_threshold = " << fmt_double(c.omega_threshold) << "\n";
  out << "malfunction_prob = " << fmt_double(c.malfunction_prob) << "\n";
  out << "non_agent_ring = " << fmt_double(c.non_agent_ring) << "\n";
  out << "battery_capacity = " << fmt_double(c.battery_capacity) << "\n";
  out << "hover_power = " << fmt_double(c.energy.hover_power) << "\n";
  out << "fly_power = " << fmt_double(c.energy.fly_power) << "\n";
  out << "surveil_power_max = " << fmt_double(c.energy.surveil_power_max)
      << "\n";
  out << "step_minutes = " << fmt_double(c.energy.step_minutes) << "\n";
  if (c.energy.delta) out << "energy_delta = " << fmt_double(*c.energy.delta) << "\n";
  if (c.energy.zeta) out << "energy_zeta = " << fmt_double(*c.energy.zeta) << "\n";
  if (c.energy.altitude)
    out << "energy_altitude = " << fmt_double(*c.energy.altitude) << "\n";
  if (c.energy.lift_power)
    out << "energy_lift_power = " << fmt_double(*c.energy.lift_power) << "\n";
  out << "rho_e1 = " << fmt_double(c.rho_e1) << "\n";
  out << "rho_e2 = " << fmt_double(c.rho_e2) << "\n";
  out << "rho_c = " << fmt_double(c.rho_c) << "\n";
  out << "rho_u = " << fmt_double(c.rho_u) << "\n";
  out << "discount = " << fmt_double(c.discount) << "\n";
  out << "learning_rate = " << fmt_double(c.learning_rate) << "\n";
  out << "actor_learning_rate = " << fmt_double(c.actor_learning_rate) << "\n";
  out << "entropy_weight = " << fmt_double(c.entropy_weight) << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "buffer_capacity = " << c.buffer_capacity << "\n";
  out << "update_period = " << c.update_period << "\n";
  out << "target_sync_period = " << c.target_sync_period << "\n";
  out << "hidden_width = " << c.hidden_width << "\n";
  out << "dense_layers = " << c.dense_layers << "\n";
  out << "epsilon_initial = " << fmt_double(c.epsilon_initial) << "\n";
  out << "epsilon_anneal = " << fmt_double(c.epsilon_anneal) << "\n";
  out << "epsilon_floor = " << fmt_double(c.epsilon_floor) << "\n";
  out << "grad_clip_norm = " << fmt_double(c.grad_clip_norm) << "\n";
  out << "episodes = " << c.episodes << "\n";
  out << "seed = " << c.seed << "\n";
  out << "eval_iterations = " << c.eval_iterations << "\n";
  out << "eval_seed_stride = " << c.eval_seed_stride << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void validate(const ScenarioConfig& c) {
  if (!(c.field_size > 0.0)) throw ConfigError("field_size must be positive");
  if (c.num_agents < 1) throw ConfigError("num_agents must be >= 1");
  if (c.num_users < 1) throw ConfigError("num_users must be >= 1");
  if (c.num_non_agents < 0) throw ConfigError("num_non_agents must be >= 0");
  if (c.episode_steps < 0) throw ConfigError("episode_steps must be >= 0");
  if (!(c.alpha > 0.0) || !(c.beta > 0.0)) {
    throw ConfigError("alpha and beta must be positive");
  }
  if (!(c.base_radius > 0.0)) throw ConfigError("base_radius must be positive");
  if (!(c.cell_size > 0.0) || c.cell_size > c.field_size) {
    throw ConfigError("cell_size must lie in (0, field_size]");
  }
  if (c.omega_threshold < 0.0 || c.omega_threshold > 1.0) {
    throw ConfigError("omega_threshold must lie in [0, 1]");
  }
  if (c.malfunction_prob < 0.0 || c.malfunction_prob > 1.0) {
    throw ConfigError("malfunction_prob must lie in [0, 1]");
  }
  if (c.non_agent_ring < 0.0 || c.non_agent_ring > c.field_size / 2.0) {
    throw ConfigError("non_agent_ring must lie in [0, field_size/2]");
  }
  if (!(c.battery_capacity > 0.0)) {
    throw ConfigError("battery_capacity must be positive");
  }
  validate(c.energy);
  if (!(c.energy_norm() > 0.0)) {
    throw ConfigError("per-step energy draw must be positive");
  }
  if (c.rho_e1 < 0.0 || c.rho_e2 < 0.0 || c.rho_c < 0.0 || c.rho_u < 0.0) {
    throw ConfigError("reward coefficients must be non-negative");
  }
  if (c.discount < 0.0 || c.discount >= 1.0) {
    throw ConfigError("discount must lie in [0, 1)");
  }
  if (!(c.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(c.entropy_weight >= 0.0)) {
    throw ConfigError("entropy_weight must be non-negative");
  }
  if (!(c.actor_learning_rate > 0.0)) {
    throw ConfigError("actor_learning_rate must be positive");
  }
  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (c.buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (c.buffer_capacity < c.batch_size) {
    throw ConfigError("buffer_capacity must be >= batch_size");
  }
  if (c.update_period < 1) throw ConfigError("update_period must be >= 1");
  if (c.target_sync_period < 1) {
    throw ConfigError("target_sync_period must be >= 1");
  }
  if (c.hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (c.dense_layers < 2) throw ConfigError("dense_layers must be >= 2");
  if (c.epsilon_initial < 0.0 || c.epsilon_initial > 1.0) {
    throw ConfigError("epsilon_initial must lie in [0, 1]");
  }
  if (c.epsilon_anneal < 0.0) throw ConfigError("epsilon_anneal must be >= 0");
  if (c.epsilon_floor < 0.0 || c.epsilon_floor > c.epsilon_initial) {
    throw ConfigError("epsilon_floor must lie in [0, epsilon_initial]");
  }
  if (!(c.grad_clip_norm > 0.0)) {
    throw ConfigError("grad_clip_norm must be positive");
  }
  if (c.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (c.eval_iterations < 1) throw ConfigError("eval_iterations must be >= 1");
  if (c.eval_seed_stride < 0) {
    throw ConfigError("eval_seed_stride must be >= 0");
  }
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path);
  std::uint64_t hash = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

}  // namespace uavcover
