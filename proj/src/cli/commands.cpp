#include "metacure/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "metacure/agents/sac.hpp"
#include "metacure/cli/experiment.hpp"
#include "metacure/cli/run_dir.hpp"
#include "metacure/cli/svg.hpp"
#include "metacure/common/errors.hpp"
#include "metacure/common/log.hpp"
#include "metacure/curiosity/predictors.hpp"
#include "metacure/inference/encoder.hpp"
#include "metacure/metaloop/trainer.hpp"
#include "metacure/numkit/finite_diff.hpp"
#include "metacure/oracle/exact.hpp"

namespace metacure::cli {

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigFailure = 2;
constexpr int kNumericFailure = 3;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  }
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Rebuilds the trainer a run directory describes and loads one checkpoint.
struct ReopenedRun {
  ExperimentConfig config;
  RunInfo info;
  std::unique_ptr<metaloop::Trainer> trainer;
  std::string checkpoint_id;
};

ReopenedRun reopen_run(const RunDirectory& dir, const std::string& checkpoint_id) {
  ReopenedRun run;
  run.config = load_experiment_config(dir.config_path()).config;
  run.info = read_run_info(dir.run_info_path());
  run.config.train.variant = metaloop::parse_variant(run.info.variant);
  run.config.validate();

  const auto ckpt = dir.checkpoint_path(checkpoint_id);
  if (!std::filesystem::exists(ckpt))
    throw ConfigError("checkpoint not found: " + ckpt.string());

  run.trainer = std::make_unique<metaloop::Trainer>(run.config.train, run.info.seed);
  run.trainer->nets().load(ckpt);
  run.checkpoint_id = checkpoint_id;
  return run;
}

void write_grid_csv(const std::filesystem::path& path, std::size_t n,
                    const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "y/x";
  for (std::size_t ix = 0; ix < n; ++ix) out << ',' << g17(xs[ix]);
  out << '\n';
  for (std::size_t iy = 0; iy < n; ++iy) {
    out << g17(ys[iy]);
    for (std::size_t ix = 0; ix < n; ++ix) out << ',' << g17(values[iy * n + ix]);
    out << '\n';
  }
}

void print_eval_report(std::ostream& os, const metaloop::EvalReport& rep,
                       const std::string& checkpoint_id, std::uint64_t eval_seed,
                       std::size_t trials) {
  os << "evaluation: checkpoint=" << checkpoint_id << " eval_seed=" << eval_seed
     << " trials_per_task=" << trials << "\n";
  os << "task,trial,final_return,success\n";
  char buf[96];
  for (const auto& row : rep.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g,%d\n", row.task, row.trial,
                  row.final_return, row.success ? 1 : 0);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean_final_return,%.10g\n", rep.mean_final_return);
  os << buf;
  std::snprintf(buf, sizeof buf, "success_rate,%.10g\n", rep.success_rate);
  os << buf;
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  return guarded([&]() -> int {
    ConfigFile cf = load_experiment_config(args.config_path);
    ExperimentConfig ec = cf.config;
    if (args.seed) ec.seed = *args.seed;
    if (args.workers) ec.train.workers = *args.workers;
    if (!args.variant_override.empty())
      ec.train.variant = metaloop::parse_variant(args.variant_override);
    const std::string out = args.out_dir.empty() ? ec.out_dir : args.out_dir;
    if (out.empty())
      throw ConfigError("config: no output directory; set out_dir or pass --out");
    ec.validate();

    // Build everything fallible before touching the filesystem, so a
    // validation failure leaves no partial run directory behind.
    metaloop::Trainer trainer(ec.train, ec.seed);
    const std::size_t planned = trainer.planned_iterations();
    const std::size_t early_iter = std::max<std::size_t>(1, planned / 5);
    const std::size_t ckpt_interval = ec.checkpoint_interval > 0
                                          ? ec.checkpoint_interval
                                          : ec.train.eval_interval;

    RunDirectory dir = RunDirectory::create(out, cf.raw_text, args.overwrite);
    RunInfo info;
    info.seed = ec.seed;
    info.workers = ec.train.workers;
    info.variant = metaloop::variant_tag(ec.train.variant);
    info.planned_iterations = planned;
    write_run_info(dir.run_info_path(), info);

    std::ofstream metrics(dir.metrics_path(), std::ios::binary);
    if (!metrics) throw ConfigError("cannot write " + dir.metrics_path().string());
    metaloop::Trainer::write_metrics_header(metrics);

    log_info("training " + info.variant + " for " + std::to_string(planned) +
             " iterations into " + dir.root().string());
    for (std::size_t k = 1; k <= planned; ++k) {
      const metaloop::IterationStats st = trainer.run_iteration();
      metaloop::Trainer::write_metrics_row(metrics, st);
      metrics.flush();

      const bool scheduled = ckpt_interval > 0 && k % ckpt_interval == 0;
      if (scheduled || k == early_iter || k == planned)
        trainer.nets().save(dir.checkpoint_path(std::to_string(k)));
      if (k == early_iter) trainer.nets().save(dir.checkpoint_path("early"));
      if (k == planned) trainer.nets().save(dir.checkpoint_path("final"));

      if (st.evaluated) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "iteration %zu/%zu: env_steps=%zu eval_return=%.6g "
                      "success_rate=%.6g",
                      k, planned, st.env_steps, st.eval_return, st.eval_success);
        log_info(buf);
      } else {
        log_debug("iteration " + std::to_string(k) + "/" + std::to_string(planned));
      }
    }
    log_info("run complete: " + dir.root().string());
    return kOk;
  });
}

int cmd_eval(const EvalArgs& args) {
  return guarded([&]() -> int {
    RunDirectory dir = RunDirectory::open(args.run_dir);
    ReopenedRun run = reopen_run(dir, args.checkpoint);
    const std::uint64_t eval_seed = args.seed.value_or(run.info.seed);
    const std::size_t trials = run.config.train.eval_trials;

    const metaloop::EvalReport rep = run.trainer->evaluate(trials, eval_seed);
    print_eval_report(std::cout, rep, run.checkpoint_id, eval_seed, trials);

    std::ofstream report(dir.report_path(), std::ios::binary | std::ios::app);
    if (!report) throw ConfigError("cannot write " + dir.report_path().string());
    print_eval_report(report, rep, run.checkpoint_id, eval_seed, trials);
    return kOk;
  });
}

int cmd_heatmap(const HeatmapArgs& args) {
  return guarded([&]() -> int {
    RunDirectory dir = RunDirectory::open(args.run_dir);
    ReopenedRun run = reopen_run(dir, args.checkpoint);

    const metaloop::HeatmapGrid grid = run.trainer->intrinsic_heatmap(
        run.config.heatmap_grid_n, run.config.heatmap_probe_tasks);

    const auto base = dir.heatmaps_dir();
    const auto gap_csv = base / ("intrinsic_" + run.checkpoint_id + ".csv");
    const auto err_csv = base / ("prediction_error_" + run.checkpoint_id + ".csv");
    const auto gap_svg = base / ("intrinsic_" + run.checkpoint_id + ".svg");
    const auto err_svg = base / ("prediction_error_" + run.checkpoint_id + ".svg");
    write_grid_csv(gap_csv, grid.n, grid.xs, grid.ys, grid.gap);
    write_grid_csv(err_csv, grid.n, grid.xs, grid.ys, grid.meta_err);
    write_heatmap_svg(gap_svg, grid.n, grid.xs, grid.ys, grid.gap,
                      "prediction gap, checkpoint " + run.checkpoint_id);
    write_heatmap_svg(err_svg, grid.n, grid.xs, grid.ys, grid.meta_err,
                      "belief prediction error, checkpoint " + run.checkpoint_id);

    std::cout << "wrote " << gap_csv.string() << "\n"
              << "wrote " << err_csv.string() << "\n"
              << "wrote " << gap_svg.string() << "\n"
              << "wrote " << err_svg.string() << "\n";
    return kOk;
  });
}

namespace {

void describe_oracle_instance(std::ostream& os, const envkit::TabularFamily& fam,
                              std::size_t index, std::uint64_t seed) {
  os << "  reproduce with: seed=" << seed << " instance_index=" << index << "\n";
  os << "  states=" << fam.n_states() << " actions=" << fam.n_actions()
     << " tasks=" << fam.n_tasks() << " horizon=" << fam.horizon() << "\n";
  os << "  prior:";
  for (double p : fam.prior()) os << ' ' << g17(p);
  os << "\n";
  for (std::size_t t = 0; t < fam.n_tasks(); ++t) {
    os << "  task " << t << " init:";
    for (std::size_t s = 0; s < fam.n_states(); ++s) os << ' ' << g17(fam.init_prob(t, s));
    os << "\n";
    for (std::size_t s = 0; s < fam.n_states(); ++s)
      for (std::size_t a = 0; a < fam.n_actions(); ++a) {
        os << "    (s=" << s << ",a=" << a << "):";
        for (const auto& o : fam.exact_model(t, s, a))
          os << " (r=" << g17(o.reward) << ",s2=" << o.next_state
             << ",p=" << g17(o.prob) << ")";
        os << "\n";
      }
  }
}

}  // namespace

int cmd_oracle(const OracleArgs& args) {
  return guarded([&]() -> int {
    if (args.instances == 0)
      throw ConfigError("oracle: --instances must be at least 1");
    if (args.corrupt_const)
      std::cerr << "negative control: corrupting the constant term\n";

    numkit::Rng rng = numkit::Rng::stream(args.seed, "oracle-cli");
    double worst = 0.0;
    std::size_t worst_index = 0;
    bool all_pass = true;

    for (std::size_t i = 0; i < args.instances; ++i) {
      const envkit::TabularFamily fam = envkit::random_family(rng);

      // A task-blind policy that still reacts to the context, so the
      // decomposition is exercised away from the i.i.d. special case.
      std::vector<std::vector<double>> base(fam.n_states()),
          shift(fam.n_states());
      for (std::size_t s = 0; s < fam.n_states(); ++s)
        for (std::size_t a = 0; a < fam.n_actions(); ++a) {
          base[s].push_back(rng.uniform(-1.0, 1.0));
          shift[s].push_back(rng.uniform(-1.0, 1.0));
        }
      const oracle::TabularPolicy policy =
          [&base, &shift](const oracle::TabContext& ctx, std::size_t s) {
            const double swing = static_cast<double>(ctx.steps.size() % 2);
            std::vector<double> probs(base[s].size());
            double total = 0.0;
            for (std::size_t a = 0; a < probs.size(); ++a) {
              probs[a] = std::exp(base[s][a] + 0.5 * swing * shift[s][a]);
              total += probs[a];
            }
            for (double& p : probs) p /= total;
            return probs;
          };

      const oracle::DecompositionReport rep =
          oracle::verify_decomposition(fam, policy, fam.horizon());
      const double rhs = rep.rhs() + (args.corrupt_const ? 1e-3 : 0.0);
      const double diff = std::abs(rep.mutual_information - rhs);

      char buf[160];
      std::snprintf(buf, sizeof buf, "instance %zu: lhs=%.15e rhs=%.15e diff=%.3e\n",
                    i, rep.mutual_information, rhs, diff);
      std::cout << buf;

      if (diff > worst) {
        worst = diff;
        worst_index = i;
      }
      if (!(diff < 1e-9)) {
        all_pass = false;
        std::cout << "VIOLATION at instance " << i << ":\n";
        describe_oracle_instance(std::cout, fam, i, args.seed);
      }
    }

    char buf[128];
    std::snprintf(buf, sizeof buf, "worst-case diff = %.3e (instance %zu of %zu)\n",
                  worst, worst_index, args.instances);
    std::cout << buf;
    std::cout << (all_pass ? "all instances satisfy the identity\n"
                           : "identity violated\n");
    return all_pass ? kOk : kCheckFailure;
  });
}

namespace {

using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::ParamStore;
using numkit::Rng;

Array rand_mat(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
               double hi = 1.0) {
  Array m({rows, cols});
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
  return m;
}

Array rand_normals(std::size_t rows, std::size_t cols, Rng& rng) {
  Array m({rows, cols});
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal();
  return m;
}

struct FamilyOutcome {
  explicit FamilyOutcome(std::string family_name) : name(std::move(family_name)) {}
  std::string name;
  double worst_rel = 0.0;
  std::string worst_coord;
  double analytic = 0.0;
  double numeric = 0.0;
  bool pass = true;
};

// One draw: builds the loss graph, backpropagates, optionally negates the
// analytic gradients (the negative-control hook), and compares them against
// central differences of the same frozen-input loss.
void check_draw(FamilyOutcome& fam, ParamStore& store,
                const std::function<double(bool)>& loss,
                bool flip_sign, double tolerance) {
  store.zero_grads();  // losses sharing this store may already have written here
  loss(true);          // forward + backward, filling analytic gradients
  if (flip_sign)
    store.for_each([](const std::string&, numkit::ParamStore::Entry& e) {
      for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] = -e.grad[i];
    });
  const auto numeric =
      numkit::finite_diff_grad([&loss](ParamStore&) { return loss(false); }, store);
  const numkit::GradCompareResult cmp = numkit::compare_gradients(store, numeric);
  if (cmp.max_rel > fam.worst_rel) {
    fam.worst_rel = cmp.max_rel;
    fam.worst_coord = cmp.worst_name + "[" + std::to_string(cmp.worst_index) + "]";
    fam.analytic = cmp.analytic;
    fam.numeric = cmp.numeric;
  }
  if (cmp.max_rel > tolerance) fam.pass = false;
}

}  // namespace

int cmd_gradcheck(const GradcheckArgs& args) {
  return guarded([&]() -> int {
    if (args.draws == 0) throw ConfigError("gradcheck: --draws must be at least 1");
    if (args.flip_sign)
      std::cerr << "negative control: negating analytic gradients\n";
    const double tolerance = 1e-4;
    std::vector<FamilyOutcome> outcomes;

    // Families 1-2: the two outcome-predictor losses on recorded beliefs.
    {
      FamilyOutcome belief{"belief-conditioned predictor loss"};
      FamilyOutcome task{"task-conditioned predictor loss"};
      for (std::size_t d = 0; d < args.draws; ++d) {
        Rng rng = Rng::stream(args.seed, "gradcheck", 1, d);
        const std::size_t state = 2 + rng.index(2), action = 1 + rng.index(2);
        const std::size_t z = 2 + rng.index(2), kd = 1 + rng.index(3);
        const std::size_t B = 3 + rng.index(3);
        curiosity::PredictorSpec mspec{2 * z, state, action, {6, 5}};
        curiosity::PredictorSpec tspec{kd, state, action, {6, 5}};
        ParamStore meta, taskp;
        curiosity::init_predictor(meta, "", mspec, rng);
        curiosity::init_predictor(taskp, "", tspec, rng);
        curiosity::RecordedBatch rb;
        rb.belief_rows = rand_mat(B, 2 * z, rng);
        rb.sa_rows = rand_mat(B, state + action, rng);
        rb.kappa_rows = rand_mat(B, kd, rng);
        rb.targets = rand_mat(B, 1 + state, rng);
        const auto loss = [&](bool back) {
          Graph g;
          const auto nodes = curiosity::predictor_training_loss(
              g, meta, "", mspec, taskp, "", tspec, rb);
          if (back) g.backward(nodes.total);
          return nodes.total->value()[0];
        };
        check_draw(belief, meta, loss, args.flip_sign, tolerance);
        check_draw(task, taskp, loss, args.flip_sign, tolerance);
      }
      outcomes.push_back(belief);
      outcomes.push_back(task);
    }

    // Family 3: the encoder's evidence loss — value regression through a
    // re-encoded context plus the belief's divergence from the prior.
    {
      FamilyOutcome fam{"encoder evidence loss"};
      for (std::size_t d = 0; d < args.draws; ++d) {
        Rng rng = Rng::stream(args.seed, "gradcheck", 3, d);
        const std::size_t state = 2 + rng.index(2), action = 1 + rng.index(2);
        const std::size_t z = 2 + rng.index(2), B = 3 + rng.index(2);
        const std::size_t N = 3 + rng.index(4);
        inference::EncoderSpec espec;
        espec.transition_dim = 2 * state + action + 1;
        espec.z_dim = z;
        espec.hidden = {6, 5};
        agents::QSpec qspec;
        qspec.obs_dim = state + z;
        qspec.action_dim = action;
        qspec.hidden = {6, 5};
        ParamStore enc, q;
        inference::init_encoder(enc, "", espec, rng);
        agents::init_q(q, qspec, rng);
        const Array rows = rand_mat(N, espec.transition_dim, rng);
        const Array states = rand_mat(B, state, rng);
        const Array actions = rand_mat(B, action, rng);
        const Array y = rand_mat(B, 1, rng);
        const Array eps = rand_normals(1, z, rng);
        const double beta = 0.7;
        const auto loss = [&](bool back) {
          Graph g;
          const auto post = inference::encode_segments(g, enc, "", espec, rows, {0, N});
          GraphNode* zs = inference::sample_z_graph(g, post, g.input(eps));
          GraphNode* obs = g.concat_cols(g.input(states), g.repeat_row(zs, B));
          GraphNode* oa = g.concat_cols(obs, g.input(actions));
          GraphNode* critic = agents::critic_loss_graph(g, q, qspec, oa, y);
          GraphNode* kl = inference::kl_to_prior_graph(g, post.mean, post.var);
          GraphNode* total = g.add(critic, g.affine(g.mean_all(kl), beta, 0.0));
          if (back) g.backward(total);
          return total->value()[0];
        };
        check_draw(fam, enc, loss, args.flip_sign, tolerance);
      }
      outcomes.push_back(fam);
    }

    // Families 4-7: critic and policy losses for both policies' shapes —
    // belief-vector conditioning and latent-sample conditioning.
    for (const bool latent : {false, true}) {
      FamilyOutcome critic{latent ? "exploitation critic loss"
                                  : "exploration critic loss"};
      FamilyOutcome policy{latent ? "exploitation policy loss"
                                  : "exploration policy loss"};
      for (std::size_t d = 0; d < args.draws; ++d) {
        Rng rng = Rng::stream(args.seed, "gradcheck", latent ? 6 : 4, d);
        const std::size_t state = 2 + rng.index(2), action = 1 + rng.index(2);
        const std::size_t z = 2 + rng.index(2);
        const std::size_t obs_dim = state + (latent ? z : 2 * z);
        const std::size_t B = 3 + rng.index(3);
        agents::PolicySpec pspec;
        pspec.obs_dim = obs_dim;
        pspec.action_dim = action;
        pspec.hidden = {6, 5};
        agents::QSpec qspec;
        qspec.obs_dim = obs_dim;
        qspec.action_dim = action;
        qspec.hidden = {6, 5};
        ParamStore pol, q;
        agents::init_policy(pol, "", pspec, rng);
        agents::init_q(q, qspec, rng);
        const Array oa = rand_mat(B, obs_dim + action, rng);
        const Array y = rand_mat(B, 1, rng);
        const Array obs = rand_mat(B, obs_dim, rng);
        const Array eps = rand_normals(B, action, rng);
        const auto critic_loss = [&](bool back) {
          Graph g;
          GraphNode* loss = agents::critic_loss_graph(g, q, qspec, g.input(oa), y);
          if (back) g.backward(loss);
          return loss->value()[0];
        };
        const auto policy_loss = [&](bool back) {
          Graph g;
          GraphNode* loss = agents::policy_loss_graph(g, pol, "", pspec, q, qspec,
                                                      g.input(obs), eps, 0.1);
          if (back) g.backward(loss);
          return loss->value()[0];
        };
        check_draw(critic, q, critic_loss, args.flip_sign, tolerance);
        check_draw(policy, pol, policy_loss, args.flip_sign, tolerance);
      }
      outcomes.push_back(critic);
      outcomes.push_back(policy);
    }

    bool all_pass = true;
    for (const auto& fam : outcomes) {
      char buf[256];
      if (fam.pass) {
        std::snprintf(buf, sizeof buf, "pass %s: worst relative error %.3e (%s)\n",
                      fam.name.c_str(), fam.worst_rel, fam.worst_coord.c_str());
      } else {
        std::snprintf(buf, sizeof buf,
                      "FAIL %s: worst relative error %.3e at %s "
                      "(analytic=%.9e, numeric=%.9e)\n",
                      fam.name.c_str(), fam.worst_rel, fam.worst_coord.c_str(),
                      fam.analytic, fam.numeric);
        all_pass = false;
      }
      std::cout << buf;
    }
    std::cout << (all_pass ? "all gradients match finite differences\n"
                           : "gradient check failed\n");
    return all_pass ? kOk : kCheckFailure;
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Meta-training toolkit: empowerment-style exploration on desk-scale tasks"};
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Meta-train from a config file");
  train->add_option("--config", targs.config_path, "Config file path")->required();
  train->add_option("--out", targs.out_dir, "Run directory (overrides out_dir)");
  train->add_option("--seed", targs.seed, "Seed override");
  train->add_option("--workers", targs.workers, "Collection worker override");
  train->add_flag("--overwrite", targs.overwrite, "Replace an existing run directory");

  std::string ablate_tag;
  auto* ablate = app.add_subcommand(
      "ablate", "Meta-train with one pipeline component disabled or duplicated");
  ablate->add_option("tag", ablate_tag,
                     "One of: no-intrinsic, lambda-zero, separate-buffers, "
                     "separate-encoders, no-exploiter")
      ->required();
  ablate->add_option("--config", targs.config_path, "Config file path")->required();
  ablate->add_option("--out", targs.out_dir, "Run directory (overrides out_dir)");
  ablate->add_option("--seed", targs.seed, "Seed override");
  ablate->add_option("--workers", targs.workers, "Collection worker override");
  ablate->add_flag("--overwrite", targs.overwrite, "Replace an existing run directory");

  EvalArgs eargs;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out tasks");
  eval->add_option("--out", eargs.run_dir, "Run directory")->required();
  eval->add_option("--checkpoint", eargs.checkpoint,
                   "Checkpoint id: early, final, or an iteration number");
  eval->add_option("--seed", eargs.seed, "Evaluation seed override");

  HeatmapArgs hargs;
  auto* heatmap = app.add_subcommand(
      "heatmap", "Render novelty-signal grids for a checkpoint");
  heatmap->add_option("--out", hargs.run_dir, "Run directory")->required();
  heatmap->add_option("--checkpoint", hargs.checkpoint,
                      "Checkpoint id: early, final, or an iteration number");

  OracleArgs oargs;
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Verify the information identity on random finite task families");
  oracle_cmd->add_option("--instances", oargs.instances, "Instance count");
  oracle_cmd->add_option("--seed", oargs.seed, "Instance seed");
  oracle_cmd->add_flag("--test-corrupt-const", oargs.corrupt_const)->group("");

  GradcheckArgs gargs;
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Compare every loss family's gradients to finite differences");
  gradcheck->add_option("--seed", gargs.seed, "Draw seed");
  gradcheck->add_option("--draws", gargs.draws, "Random draws per loss family");
  gradcheck->add_flag("--test-flip-sign", gargs.flip_sign)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the parse diagnostic
    return kConfigFailure;
  }

  if (train->parsed()) return cmd_train(targs);
  if (ablate->parsed()) {
    static const std::set<std::string> allowed = {
        "no-intrinsic", "lambda-zero", "separate-buffers", "separate-encoders",
        "no-exploiter"};
    if (allowed.find(ablate_tag) == allowed.end()) {
      std::cerr << "error: '" << ablate_tag << "' is not an ablation tag\n";
      return kConfigFailure;
    }
    targs.variant_override = ablate_tag;
    return cmd_train(targs);
  }
  if (eval->parsed()) return cmd_eval(eargs);
  if (heatmap->parsed()) return cmd_heatmap(hargs);
  if (oracle_cmd->parsed()) return cmd_oracle(oargs);
  if (gradcheck->parsed()) return cmd_gradcheck(gargs);
  return kConfigFailure;
}

}  // namespace metacure::cli
