#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace metacure::cli {

// One experiment's on-disk layout:
//   <root>/config.ini     verbatim copy of the input config, written first
//   <root>/run.txt        effective seed/workers/variant and the iteration plan
//   <root>/metrics.csv    one row per training iteration
//   <root>/report.txt     evaluation stanzas, appended per invocation
//   <root>/checkpoints/   ckpt_<iteration>.bin plus early.bin / final.bin
//   <root>/heatmaps/      value grids and their renderings
class RunDirectory {
 public:
  // Creates the layout. An existing nonempty directory is an error unless
  // `overwrite` is set, in which case it is replaced wholesale. Nothing is
  // created until those checks pass, and the config snapshot is the first
  // write into the fresh directory.
  static RunDirectory create(const std::filesystem::path& root,
                             const std::string& config_text, bool overwrite);

  // Opens an existing layout; throws ConfigError when the snapshot is absent.
  static RunDirectory open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path config_path() const { return root_ / "config.ini"; }
  std::filesystem::path run_info_path() const { return root_ / "run.txt"; }
  std::filesystem::path metrics_path() const { return root_ / "metrics.csv"; }
  std::filesystem::path report_path() const { return root_ / "report.txt"; }
  std::filesystem::path checkpoints_dir() const { return root_ / "checkpoints"; }
  std::filesystem::path heatmaps_dir() const { return root_ / "heatmaps"; }

  // "early", "final", or a decimal iteration number.
  std::filesystem::path checkpoint_path(const std::string& id) const;

 private:
  explicit RunDirectory(std::filesystem::path root) : root_(std::move(root)) {}
  std::filesystem::path root_;
};

// Effective settings of a completed or in-progress run, for commands that
// rebuild the trainer later.
struct RunInfo {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string variant;  // effective tag, which an ablation override may set
  std::size_t planned_iterations = 0;
};

void write_run_info(const std::filesystem::path& path, const RunInfo& info);
RunInfo read_run_info(const std::filesystem::path& path);

}  // namespace metacure::cli
