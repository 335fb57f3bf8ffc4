#include "metacure/cli/run_dir.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "metacure/common/errors.hpp"

namespace metacure::cli {

namespace fs = std::filesystem;

RunDirectory RunDirectory::create(const fs::path& root, const std::string& config_text,
                                  bool overwrite) {
  std::error_code ec;
  if (fs::exists(root)) {
    if (!fs::is_directory(root))
      throw ConfigError("run dir: '" + root.string() + "' exists and is not a directory");
    if (!fs::is_empty(root, ec)) {
      if (!overwrite)
        throw ConfigError("run dir: '" + root.string() +
                          "' is not empty; pass --overwrite to replace it");
      fs::remove_all(root);
    }
  }
  fs::create_directories(root);
  RunDirectory dir(root);
  {
    std::ofstream out(dir.config_path(), std::ios::binary);
    if (!out) throw ConfigError("run dir: cannot write " + dir.config_path().string());
    out << config_text;
  }
  fs::create_directories(dir.checkpoints_dir());
  fs::create_directories(dir.heatmaps_dir());
  return dir;
}

RunDirectory RunDirectory::open(const fs::path& root) {
  RunDirectory dir(root);
  if (!fs::exists(dir.config_path()))
    throw ConfigError("run dir: no config snapshot at " + dir.config_path().string());
  return dir;
}

fs::path RunDirectory::checkpoint_path(const std::string& id) const {
  if (id == "early" || id == "final") return checkpoints_dir() / (id + ".bin");
  if (!id.empty() &&
      std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); }))
    return checkpoints_dir() / ("ckpt_" + id + ".bin");
  throw ConfigError("checkpoint id must be 'early', 'final', or an iteration number, got '" +
                    id + "'");
}

void write_run_info(const fs::path& path, const RunInfo& info) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("run dir: cannot write " + path.string());
  out << "seed = " << info.seed << "\n"
      << "workers = " << info.workers << "\n"
      << "variant = " << info.variant << "\n"
      << "planned_iterations = " << info.planned_iterations << "\n";
}

RunInfo read_run_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("run dir: cannot read " + path.string());
  RunInfo info;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "seed") info.seed = std::stoull(value);
      else if (key == "workers") info.workers = std::stoul(value);
      else if (key == "variant") info.variant = value;
      else if (key == "planned_iterations") info.planned_iterations = std::stoul(value);
    } catch (const std::exception&) {
      throw ConfigError("run dir: bad value for '" + key + "' in " + path.string());
    }
  }
  return info;
}

}  // namespace metacure::cli
