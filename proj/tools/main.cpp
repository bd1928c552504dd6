// mcsadapt: offline sidelink MCS link-adaptation toolkit.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/parallel.hpp"

namespace cli = mcsadapt::cli;

namespace {

void add_model_options(CLI::App* sub, cli::ModelChoice& m) {
  sub->add_option("--kind", m.kind, "Model kind: linear, qrf, gbt or mlp");
  sub->add_option("--loss", m.loss, "Loss: quantile, mse or mae")->capture_default_str();
  sub->add_option("--tau", m.tau, "Quantile level of the quantile loss");
  sub->add_option("--model-config", m.model_config, "Frozen model config (e.g. a hyperopt result)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline sidelink MCS link-adaptation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir, trace, gps, polygons, rounds, tbs, dataset;
  app.add_option("-c,--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
  app.add_option("-o,--out", out_dir, "Output directory");
  app.add_option("--trace", trace, "Packet trace CSV");
  app.add_option("--gps", gps, "GPS CSV");
  app.add_option("--polygons", polygons, "Area polygons JSON");
  app.add_option("--rounds", rounds, "Round ranges JSON");
  app.add_option("--tbs", tbs, "TBS table CSV");
  app.add_option("--dataset", dataset, "Sweep dataset CSV");

  auto* ingest = app.add_subcommand("ingest", "Trace + GPS to sweep dataset");
  auto* stats = app.add_subcommand("stats", "RSRP densities and packet error rates");

  cli::ModelChoice train_model;
  auto* train = app.add_subcommand("train", "Fit a model on the whole dataset");
  add_model_options(train, train_model);

  cli::EvaluateOptions eval_opt;
  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-round-out goodput");
  add_model_options(evaluate, eval_opt.model);
  evaluate->add_flag("--oracle", eval_opt.oracle, "Score the oracle MCS choice");
  evaluate->add_option("--fixed-mcs", eval_opt.fixed_mcs, "Score a fixed MCS");

  cli::ModelChoice imp_model;
  auto* importance = app.add_subcommand("importance", "Permutation importance and correlation");
  add_model_options(importance, imp_model);

  cli::SweepOptions feat_opt;
  auto* sweep_features = app.add_subcommand("sweep-features", "Goodput vs number of features");
  sweep_features->add_option("--loss", feat_opt.loss, "Loss of every series")->capture_default_str();
  sweep_features->add_option("--order-from", feat_opt.order_from, "Importance ranking CSV");

  cli::SweepOptions size_opt;
  auto* sweep_samples = app.add_subcommand("sweep-samples", "Goodput vs training-set size");
  sweep_samples->add_option("--loss", size_opt.loss, "Loss of every series")->capture_default_str();
  sweep_samples->add_option("--sizes", size_opt.sizes, "Training sizes")->delimiter(',');

  cli::HyperoptOptions hp_opt;
  auto* hyperopt = app.add_subcommand("hyperopt", "Random hyperparameter search");
  add_model_options(hyperopt, hp_opt.model);
  hyperopt->add_option("--iterations", hp_opt.iterations, "Number of trials");
  hyperopt->add_option("--space", hp_opt.space, "Search space JSON");

  auto* report = app.add_subcommand("report", "Results table and artifact summary");

  cli::SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Write a synthetic drive for demos and tests");
  synth->add_option("--dir", synth_opt.dir, "Destination directory")->required();
  synth->add_option("--rounds", synth_opt.rounds, "Measurement rounds")->capture_default_str();
  synth->add_option("--sweeps", synth_opt.sweeps_per_round, "Sweeps per round")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cli::Context ctx;
    if (!config_path.empty()) ctx.config = cli::load_run_config(config_path);
    auto& c = ctx.config;
    if (seed) c.seed = *seed;
    if (!out_dir.empty()) c.output_dir = out_dir;
    if (!trace.empty()) c.trace = trace;
    if (!gps.empty()) c.gps = gps;
    if (!polygons.empty()) c.polygons = polygons;
    if (!rounds.empty()) c.rounds = rounds;
    if (!tbs.empty()) c.tbs_table = tbs;
    if (!dataset.empty()) c.dataset = dataset;
    ctx.hash = cli::config_hash(c);
    ctx.threads = mcsadapt::resolve_threads(threads);
    ctx.out = &std::cout;

    if (*ingest) return cli::cmd_ingest(ctx);
    if (*stats) return cli::cmd_stats(ctx);
    if (*train) return cli::cmd_train(ctx, train_model);
    if (*evaluate) return cli::cmd_evaluate(ctx, eval_opt);
    if (*importance) return cli::cmd_importance(ctx, imp_model);
    if (*sweep_features) return cli::cmd_sweep_features(ctx, feat_opt);
    if (*sweep_samples) return cli::cmd_sweep_samples(ctx, size_opt);
    if (*hyperopt) return cli::cmd_hyperopt(ctx, hp_opt);
    if (*report) return cli::cmd_report(ctx);
    if (*synth) return cli::cmd_synth(ctx, synth_opt);
    return 1;
  } catch (const mcsadapt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const mcsadapt::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const mcsadapt::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const mcsadapt::ContractError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const mcsadapt::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
}
