#include "metacure/cli/experiment.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "metacure/common/errors.hpp"

namespace metacure::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs a nonnegative integer, got '" +
                      value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs a number, got '" + value + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config: key '" + key + "' has an empty list entry");
    out.push_back(parse_size(key, item));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' needs a list");
  return out;
}

}  // namespace

envkit::EnvFamily parse_env_family(const std::string& tag) {
  if (tag == "point-robot-sparse") return envkit::EnvFamily::PointRobotSparse;
  if (tag == "point-robot-sparse-noise")
    return envkit::EnvFamily::PointRobotSparseNoise;
  if (tag == "tabular") return envkit::EnvFamily::TabularBandit;
  throw ConfigError("config: unknown env_family '" + tag + "'");
}

std::string env_family_tag(envkit::EnvFamily family) {
  switch (family) {
    case envkit::EnvFamily::PointRobotSparse:
      return "point-robot-sparse";
    case envkit::EnvFamily::PointRobotSparseNoise:
      return "point-robot-sparse-noise";
    case envkit::EnvFamily::TabularBandit:
      return "tabular";
  }
  throw ConfigError("config: unhandled env family");
}

void ExperimentConfig::validate() const {
  train.validate();
  if (heatmap_grid_n == 0)
    throw ConfigError("config: heatmap_grid_n must be positive");
  if (heatmap_probe_tasks == 0)
    throw ConfigError("config: heatmap_probe_tasks must be positive");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig ec;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> keys = {
      {"seed", [&](const std::string& k, const std::string& v) { ec.seed = parse_u64(k, v); }},
      {"out_dir", [&](const std::string&, const std::string& v) { ec.out_dir = v; }},
      {"checkpoint_interval",
       [&](const std::string& k, const std::string& v) { ec.checkpoint_interval = parse_size(k, v); }},
      {"heatmap_grid_n",
       [&](const std::string& k, const std::string& v) { ec.heatmap_grid_n = parse_size(k, v); }},
      {"heatmap_probe_tasks",
       [&](const std::string& k, const std::string& v) { ec.heatmap_probe_tasks = parse_size(k, v); }},
      {"env_family",
       [&](const std::string&, const std::string& v) { ec.train.family = parse_env_family(v); }},
      {"tabular_family",
       [&](const std::string&, const std::string& v) { ec.train.tabular_family = v; }},
      {"variant",
       [&](const std::string&, const std::string& v) { ec.train.variant = metaloop::parse_variant(v); }},
      {"n_train_tasks",
       [&](const std::string& k, const std::string& v) { ec.train.n_train_tasks = parse_size(k, v); }},
      {"n_test_tasks",
       [&](const std::string& k, const std::string& v) { ec.train.n_test_tasks = parse_size(k, v); }},
      {"episodes_per_trial",
       [&](const std::string& k, const std::string& v) { ec.train.episodes_per_trial = parse_size(k, v); }},
      {"horizon",
       [&](const std::string& k, const std::string& v) { ec.train.horizon = parse_size(k, v); }},
      {"env_step_budget",
       [&](const std::string& k, const std::string& v) { ec.train.env_step_budget = parse_size(k, v); }},
      {"steps_per_iteration",
       [&](const std::string& k, const std::string& v) { ec.train.steps_per_iteration = parse_size(k, v); }},
      {"eval_interval",
       [&](const std::string& k, const std::string& v) { ec.train.eval_interval = parse_size(k, v); }},
      {"eval_trials",
       [&](const std::string& k, const std::string& v) { ec.train.eval_trials = parse_size(k, v); }},
      {"z_dim",
       [&](const std::string& k, const std::string& v) { ec.train.z_dim = parse_size(k, v); }},
      {"encoder_hidden",
       [&](const std::string& k, const std::string& v) { ec.train.encoder_hidden = parse_size_list(k, v); }},
      {"predictor_hidden",
       [&](const std::string& k, const std::string& v) { ec.train.predictor_hidden = parse_size_list(k, v); }},
      {"policy_hidden",
       [&](const std::string& k, const std::string& v) { ec.train.policy_hidden = parse_size_list(k, v); }},
      {"q_hidden",
       [&](const std::string& k, const std::string& v) { ec.train.q_hidden = parse_size_list(k, v); }},
      {"lr", [&](const std::string& k, const std::string& v) { ec.train.lr = parse_double(k, v); }},
      {"batch_size",
       [&](const std::string& k, const std::string& v) { ec.train.batch_size = parse_size(k, v); }},
      {"context_batch_size",
       [&](const std::string& k, const std::string& v) { ec.train.context_batch_size = parse_size(k, v); }},
      {"reencode_batch_size",
       [&](const std::string& k, const std::string& v) { ec.train.reencode_batch_size = parse_size(k, v); }},
      {"gamma",
       [&](const std::string& k, const std::string& v) { ec.train.gamma = parse_double(k, v); }},
      {"tau", [&](const std::string& k, const std::string& v) { ec.train.tau = parse_double(k, v); }},
      {"alpha",
       [&](const std::string& k, const std::string& v) { ec.train.alpha = parse_double(k, v); }},
      {"beta_kl",
       [&](const std::string& k, const std::string& v) { ec.train.beta_kl = parse_double(k, v); }},
      {"lambda",
       [&](const std::string& k, const std::string& v) { ec.train.lambda = parse_double(k, v); }},
      {"replay_capacity",
       [&](const std::string& k, const std::string& v) { ec.train.replay_capacity = parse_size(k, v); }},
      {"workers",
       [&](const std::string& k, const std::string& v) { ec.train.workers = parse_size(k, v); }},
  };

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line[0] == ';') continue;
    if (line[0] == '[') {
      if (line.back() != ']')
        throw ConfigError("config: line " + std::to_string(lineno) +
                          ": unterminated section header");
      continue;  // sections only organize the file
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
    const auto it = keys.find(key);
    if (it == keys.end())
      throw ConfigError("config: unknown key '" + key + "' (line " +
                        std::to_string(lineno) + ")");
    if (!seen.insert(key).second)
      throw ConfigError("config: duplicate key '" + key + "' (line " +
                        std::to_string(lineno) + ")");
    it->second(key, value);
  }
  return ec;
}

ConfigFile load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ConfigFile cf;
  cf.raw_text = buf.str();
  cf.config = parse_experiment_config(cf.raw_text);
  return cf;
}

}  // namespace metacure::cli
