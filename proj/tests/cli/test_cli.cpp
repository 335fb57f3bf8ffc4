// End-to-end checks of the command-line binary: every subcommand is spawned
// as a child process and judged on exit code, output, and the files it leaves
// behind.
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

CmdResult run_cmd(const std::string& args) {
  const std::string cmd = std::string(METACURE_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult res;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

// Fresh directory path under the system temp root; removed up front so each
// test starts clean even after a crashed earlier run.
fs::path temp_run_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("metacure_cli_" + tag + "_" + std::to_string(getpid()));
  fs::remove_all(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

const char* kMetricsHeader =
    "iteration,env_steps,pred_meta,pred_task,kl,explorer_critic,explorer_policy,"
    "exploiter_critic,exploiter_policy,mean_intrinsic,mean_exploration_reward,"
    "eval_return,eval_success";

}  // namespace

TEST_CASE("train: produces the full run layout and exits 0") {
  const fs::path dir = temp_run_dir("layout");
  const CmdResult r =
      run_cmd("train --config " SMOKE_CONFIG " --out " + dir.string());
  CHECK(r.exit_code == 0);
  INFO(r.output);

  CHECK(fs::exists(dir / "config.ini"));
  CHECK(fs::exists(dir / "run.txt"));
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "checkpoints" / "early.bin"));
  CHECK(fs::exists(dir / "checkpoints" / "final.bin"));

  // The snapshot is the input config byte for byte, comments included.
  CHECK(read_file(dir / "config.ini") == read_file(SMOKE_CONFIG));

  const auto metrics = lines_of(read_file(dir / "metrics.csv"));
  REQUIRE(metrics.size() == 6);  // header + one row per iteration
  CHECK(metrics[0] == kMetricsHeader);
  CHECK(metrics[1].substr(0, 2) == "1,");
  CHECK(metrics[5].substr(0, 2) == "5,");
  // Smoke schedule evaluates on iterations 2 and 4 plus the final one.
  CHECK(metrics[1].substr(metrics[1].size() - 2) == ",,");
  CHECK(metrics[2].substr(metrics[2].size() - 2) != ",,");

  const std::string run_info = read_file(dir / "run.txt");
  CHECK(run_info.find("variant = full") != std::string::npos);
  CHECK(run_info.find("seed = 1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("train: refuses a nonempty directory unless --overwrite") {
  const fs::path dir = temp_run_dir("overwrite");
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + dir.string())
              .exit_code == 0);

  const CmdResult again =
      run_cmd("train --config " SMOKE_CONFIG " --out " + dir.string());
  CHECK(again.exit_code == 2);
  CHECK(again.output.find("--overwrite") != std::string::npos);

  const CmdResult forced = run_cmd("train --config " SMOKE_CONFIG " --out " +
                                   dir.string() + " --overwrite");
  CHECK(forced.exit_code == 0);
  fs::remove_all(dir);
}

TEST_CASE("train: missing config exits 2 and names the path") {
  const CmdResult r = run_cmd("train --config /no/such/config.ini --out /tmp/x");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/no/such/config.ini") != std::string::npos);
}

TEST_CASE("train: unknown config key exits 2 and leaves no run directory") {
  const fs::path dir = temp_run_dir("badkey");
  const fs::path cfg = dir.string() + ".ini";
  std::ofstream(cfg) << "env_family = point-robot-sparse\nnot_a_key = 3\n";

  const CmdResult r =
      run_cmd("train --config " + cfg.string() + " --out " + dir.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("not_a_key") != std::string::npos);
  CHECK(!fs::exists(dir));
  fs::remove(cfg);
}

TEST_CASE("train: identical config and seed give byte-identical metrics") {
  const fs::path a = temp_run_dir("det_a");
  const fs::path b = temp_run_dir("det_b");
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + a.string())
              .exit_code == 0);
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + b.string())
              .exit_code == 0);
  CHECK(read_file(a / "metrics.csv") == read_file(b / "metrics.csv"));

  // A different seed must actually change the log.
  const fs::path c = temp_run_dir("det_c");
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + c.string() +
                  " --seed 2")
              .exit_code == 0);
  CHECK(read_file(a / "metrics.csv") != read_file(c / "metrics.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("eval: reports per-task rows, appends to the run report, repeats exactly") {
  const fs::path dir = temp_run_dir("eval");
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + dir.string())
              .exit_code == 0);

  const CmdResult first = run_cmd("eval --out " + dir.string());
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("checkpoint=final") != std::string::npos);
  CHECK(first.output.find("task,trial,final_return,success") != std::string::npos);
  CHECK(first.output.find("mean_final_return,") != std::string::npos);
  CHECK(first.output.find("success_rate,") != std::string::npos);

  const CmdResult second = run_cmd("eval --out " + dir.string());
  CHECK(second.exit_code == 0);
  CHECK(first.output == second.output);

  // Each invocation appends one copy of the printed stanza to report.txt.
  const std::string report = read_file(dir / "report.txt");
  CHECK(count_occurrences(report, "mean_final_return,") == 2);
  CHECK(report.find(first.output) != std::string::npos);

  // Numbered checkpoints are addressable; absent ones are a usage error.
  CHECK(run_cmd("eval --out " + dir.string() + " --checkpoint 2").exit_code == 0);
  const CmdResult missing =
      run_cmd("eval --out " + dir.string() + " --checkpoint 3");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("ckpt_3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("heatmap: writes grid files with axis headers and standalone figures") {
  const fs::path dir = temp_run_dir("heatmap");
  REQUIRE(run_cmd("train --config " SMOKE_CONFIG " --out " + dir.string())
              .exit_code == 0);

  const CmdResult r = run_cmd("heatmap --out " + dir.string());
  CHECK(r.exit_code == 0);

  for (const char* name : {"intrinsic_final", "prediction_error_final"}) {
    const fs::path csv = dir / "heatmaps" / (std::string(name) + ".csv");
    const fs::path svg = dir / "heatmaps" / (std::string(name) + ".svg");
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(svg));
    CHECK(r.output.find(csv.string()) != std::string::npos);
    CHECK(r.output.find(svg.string()) != std::string::npos);

    // grid_n = 3 in the smoke config: a header row plus three value rows,
    // each row labelled, the header starting with the axis-corner cell.
    const auto rows = lines_of(read_file(csv));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].substr(0, 4) == "y/x,");
    for (std::size_t i = 0; i < rows.size(); ++i)
      CHECK(std::count(rows[i].begin(), rows[i].end(), ',') == 3);

    const std::string fig = read_file(svg);
    CHECK(fig.substr(0, 4) == "<svg");
    CHECK(fig.find("http://www.w3.org/2000/svg") != std::string::npos);
    // Self-contained: no external fetches.
    CHECK(fig.find("href") == std::string::npos);
    CHECK(fig.find("url(") == std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("oracle: clean pass, and the corrupted constant is caught") {
  const CmdResult ok = run_cmd("oracle --instances 5 --seed 3");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("worst-case diff") != std::string::npos);
  CHECK(ok.output.find("all instances satisfy the identity") != std::string::npos);

  const CmdResult bad = run_cmd("oracle --instances 5 --seed 3 --test-corrupt-const");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("VIOLATION") != std::string::npos);
}

TEST_CASE("gradcheck: all seven loss families pass, sign flip fails") {
  const CmdResult ok = run_cmd("gradcheck --draws 2 --seed 5");
  CHECK(ok.exit_code == 0);
  CHECK(count_occurrences(ok.output, "pass ") == 7);
  CHECK(ok.output.find("all gradients match finite differences") != std::string::npos);

  const CmdResult bad = run_cmd("gradcheck --draws 1 --seed 5 --test-flip-sign");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("ablate: tags are validated and recorded in the run info") {
  const CmdResult bad = run_cmd("ablate bogus --config " SMOKE_CONFIG " --out /tmp/x");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("bogus") != std::string::npos);

  const fs::path dir = temp_run_dir("ablate");
  const CmdResult r = run_cmd("ablate no-intrinsic --config " SMOKE_CONFIG
                              " --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(read_file(dir / "run.txt").find("variant = no-intrinsic") !=
        std::string::npos);

  // The recorded variant drives later commands: eval must reopen it cleanly.
  CHECK(run_cmd("eval --out " + dir.string()).exit_code == 0);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cmd("").exit_code == 2);             // missing subcommand
  CHECK(run_cmd("train").exit_code == 2);        // missing required --config
  CHECK(run_cmd("no-such-command").exit_code == 2);
  CHECK(run_cmd("--help").exit_code == 0);
}
