#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/evaluation.hpp"
#include "mcsadapt/geo.hpp"
#include "mcsadapt/goodput.hpp"
#include "mcsadapt/hyperopt.hpp"
#include "mcsadapt/ingest.hpp"
#include "mcsadapt/stats.hpp"
#include "mcsadapt/synthetic.hpp"

namespace mcsadapt::cli {

namespace {

using nlohmann::json;
namespace ev = mcsadapt::evaluation;

constexpr const char* kKinds[] = {"linear", "qrf", "gbt", "mlp"};
constexpr const char* kLosses[] = {"quantile", "mse", "mae"};

template <typename T>
void kv(const Context& ctx, const std::string& key, const T& value) {
  *ctx.out << key << '=' << value << '\n';
}

void kv_double(const Context& ctx, const std::string& key, double value) {
  kv(ctx, key, csv::format_double(value));
}

fs::path out_path(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.config.output_dir);
  return ctx.config.output_dir / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

void write_json(const Context& ctx, const fs::path& p, json j) {
  j["config_hash"] = ctx.hash;
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

goodput::TbsTable tbs_table(const RunConfig& c) {
  if (c.tbs_table) return goodput::load_tbs_table(require_file(c.tbs_table, "TBS table").string());
  return goodput::load_tbs_table(std::string(MCSADAPT_DATA_DIR) + "/tbs_prb48.csv");
}

fs::path dataset_path(const RunConfig& c) {
  return c.dataset ? *c.dataset : c.output_dir / "dataset.csv";
}

ingest::Dataset load_dataset(const RunConfig& c) {
  const fs::path p = dataset_path(c);
  if (!fs::exists(p)) throw ConfigError("dataset file not found: " + p.string());
  auto ds = ingest::read_dataset(p.string());
  if (ds.size() == 0) throw EmptyInputError("dataset " + p.string() + " has no samples");
  if (!c.features.empty()) ds = ds.select_features(c.features);
  return ds;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

regress::ModelConfig resolve_model(const Context& ctx, const ModelChoice& m) {
  if (!m.model_config.empty()) {
    json j = load_json_file(m.model_config);
    if (j.contains("model_config")) j = j.at("model_config");
    try {
      return regress::model_config_from_json(j);
    } catch (const json::exception& e) {
      throw ConfigError(m.model_config + ": " + e.what());
    }
  }
  if (m.kind.empty()) throw ConfigError("no model selected (use --kind or --model-config)");
  RunConfig c = ctx.config;
  if (m.tau) c.tau = *m.tau;
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  return model_config(c, regress::model_kind_from_string(m.kind), loss_kind_from_string(m.loss));
}

std::string run_name(const regress::ModelConfig& cfg) {
  return std::string(regress::to_string(cfg.kind)) + "_" + loss_kind_name(cfg.loss.kind);
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct Inputs {
  ingest::TraceParseResult trace;
  ingest::GpsParseResult gps;
  std::vector<geo::Polygon> polygons;
};

Inputs load_inputs(const RunConfig& c) {
  const auto& trace = require_file(c.trace, "trace");
  const auto& gps = require_file(c.gps, "GPS");
  if (c.polygons) require_file(c.polygons, "polygons");
  Inputs in;
  in.trace = ingest::parse_trace(trace.string(), c.schema);
  in.gps = ingest::parse_gps(gps.string());
  if (c.polygons) in.polygons = geo::load_polygons(c.polygons->string());
  if (in.trace.rejected > 0) {
    std::cerr << "warning: " << in.trace.rejected << " malformed trace rows rejected\n";
  }
  if (in.gps.rejected > 0) {
    std::cerr << "warning: " << in.gps.rejected << " malformed GPS rows rejected\n";
  }
  return in;
}

std::vector<ev::NamedLearner> sweep_learners(const Context& ctx, const std::string& loss) {
  std::vector<ev::NamedLearner> out;
  for (const auto& name : ctx.config.sweep_models) {
    const auto cfg = model_config(ctx.config, regress::model_kind_from_string(name),
                                  loss_kind_from_string(loss));
    out.push_back({run_name(cfg), ev::model_learner(cfg)});
  }
  return out;
}

std::vector<std::string> read_importance_order(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open importance ranking " + p.string());
  std::string line;
  std::getline(in, line);
  const auto header = csv::split_line(csv::trim(line));
  const auto col = std::find(header.begin(), header.end(), "feature");
  if (col == header.end()) throw SchemaError(p.string() + ": no 'feature' column");
  const auto idx = static_cast<std::size_t>(col - header.begin());
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(csv::trim(line));
    if (fields.size() <= idx) throw SchemaError(p.string() + ": short row");
    order.push_back(fields[idx]);
  }
  return order;
}

std::vector<ev::ImportanceEntry> compute_importance(const Context& ctx,
                                                    const ingest::Dataset& ds,
                                                    const regress::ModelConfig& cfg,
                                                    const goodput::TbsTable& table) {
  return ev::permutation_importance(ds, ev::model_learner(cfg), table,
                                    ctx.config.importance_repeats, ctx.config.seed, ctx.threads);
}

void write_folds_csv(const fs::path& p, const std::string& name, const ev::EvalReport& r) {
  std::vector<ev::CurvePoint> points;
  for (const auto& f : r.per_fold) {
    points.push_back({static_cast<double>(f.round_id), name, f.mean_goodput_bps, 0.0});
  }
  auto out = open_out(p);
  ev::write_curves_csv(out, points);
}

// Per-fold oracle or fixed-MCS scores, computed directly from the targets.
ev::EvalReport baseline_eval(const ingest::Dataset& ds, const goodput::TbsTable& table,
                             std::optional<int> fixed) {
  ev::EvalReport r;
  const auto folds = ev::logo_folds(ds);
  double sum = 0.0;
  for (const auto& f : folds) {
    std::vector<int> t;
    for (auto i : f.test_indices) t.push_back(ds.target_mcs[i]);
    const double bps = fixed ? goodput::static_goodput(t, *fixed, table)
                             : goodput::oracle_goodput(t, table);
    r.per_fold.push_back({f.test_round, f.train_indices.size(), f.test_indices.size(), bps});
    sum += bps;
  }
  r.aggregate_bps = sum / static_cast<double>(folds.size());
  r.predictions.assign(ds.size(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    r.predictions[i] = fixed ? *fixed : ds.target_mcs[i];
  }
  r.baseline = goodput::make_report(r.predictions, ds.target_mcs, table);
  return r;
}

}  // namespace

int cmd_ingest(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.rounds) require_file(c.rounds, "rounds");
  auto in = load_inputs(c);
  std::vector<ingest::RoundRange> rounds;
  if (c.rounds) {
    rounds = ingest::load_round_ranges(c.rounds->string());
  } else {
    if (in.trace.records.empty()) throw EmptyInputError("trace has no packets");
    rounds.push_back({0, in.trace.records.front().timestamp_ms, in.trace.records.back().timestamp_ms});
    std::cerr << "warning: no rounds file; the whole trace forms round 0\n";
  }
  auto result =
      ingest::run_pipeline(in.trace.records, in.gps.tx, in.gps.rx, in.polygons, rounds, c.pipeline);
  report_warnings(result.summary.warnings);
  if (result.dataset.size() == 0) throw EmptyInputError("ingest produced no samples");

  const auto ds_path = c.dataset ? *c.dataset : out_path(ctx, "dataset.csv");
  if (ds_path.has_parent_path()) fs::create_directories(ds_path.parent_path());
  ingest::write_dataset(ds_path.string(), result.dataset);
  json summary = ingest::to_json(result.summary);
  summary["rejected_trace_rows"] = in.trace.rejected;
  summary["rejected_gps_rows"] = in.gps.rejected;
  write_json(ctx, out_path(ctx, "ingest_summary.json"), summary);

  const auto& s = result.summary;
  kv(ctx, "packets", s.packets);
  kv(ctx, "interpolated_packets", s.interpolated_packets);
  kv(ctx, "segments", s.segments);
  kv(ctx, "sweeps", s.sweeps);
  kv(ctx, "discarded_packets", s.discarded_packets);
  kv(ctx, "dropped_before_first_fix", s.dropped_before_first_fix);
  kv(ctx, "stale_gps", s.stale_gps);
  kv(ctx, "dropped_outside_rounds", s.dropped_outside_rounds);
  kv(ctx, "samples", s.samples);
  kv(ctx, "rounds", s.rounds);
  kv(ctx, "dataset", ds_path.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_stats(const Context& ctx) {
  const auto& c = ctx.config;
  auto in = load_inputs(c);
  std::size_t interpolated = 0;
  std::vector<ingest::PacketRecord> packets;
  for (auto& seg : ingest::reconstruct_gaps(in.trace.records, c.pipeline.gaps)) {
    for (auto& p : seg) {
      interpolated += p.interpolated ? 1 : 0;
      packets.push_back(p);
    }
  }
  const auto labeled =
      stats::label_packets(packets, in.gps.tx, in.gps.rx, in.polygons, c.pipeline.gps_tolerance_ms);

  stats::KdeOptions ko;
  ko.bandwidth = c.kde_bandwidth;
  ko.grid_points = c.kde_grid_points;
  const auto kde = stats::kde_rsrp(labeled, ko);
  report_warnings(kde.warnings);
  {
    auto f = open_out(out_path(ctx, "kde_rsrp.csv"));
    stats::write_kde_csv(f, kde);
  }
  const auto per_area = stats::per_by_mcs_area(labeled);
  {
    auto f = open_out(out_path(ctx, "per_mcs_area.csv"));
    stats::write_per_csv(f, per_area);
  }
  const auto edges = stats::default_distance_edges(labeled, c.distance_bin_m);
  const auto per_dist = stats::per_by_distance(labeled, edges);
  {
    auto f = open_out(out_path(ctx, "per_distance.csv"));
    stats::write_per_csv(f, per_dist.cells);
  }
  json bw = json::object();
  for (const auto& curve : kde.curves) {
    bw[curve.group] = {{"samples", curve.samples}, {"bandwidth", curve.bandwidth}};
  }
  write_json(ctx, out_path(ctx, "stats_summary.json"),
             {{"packets", labeled.size()},
              {"interpolated_packets", interpolated},
              {"kde", bw},
              {"distance_edges", edges},
              {"unbinned_packets", per_dist.unbinned},
              {"warnings", kde.warnings}});

  kv(ctx, "packets", labeled.size());
  kv(ctx, "interpolated_packets", interpolated);
  kv(ctx, "kde_areas", kde.curves.size());
  for (const auto& curve : kde.curves) kv_double(ctx, "bandwidth." + curve.group, curve.bandwidth);
  kv(ctx, "distance_bins", edges.size() - 1);
  kv(ctx, "unbinned_packets", per_dist.unbinned);
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_train(const Context& ctx, const ModelChoice& m) {
  const auto cfg = resolve_model(ctx, m);
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);
  const auto model =
      regress::fit(cfg, ds.to_feature_matrix(), derive_seed(ctx.config.seed, "train"), ctx.threads);
  const auto pred = regress::predict(model, ds.features);
  const auto score = goodput::make_report(pred, ds.target_mcs, table);
  json j = regress::to_json(model);
  const auto p = out_path(ctx, "model_" + run_name(cfg) + ".json");
  write_json(ctx, p, j);
  kv(ctx, "model", p.generic_string());
  kv(ctx, "train_samples", ds.size());
  kv_double(ctx, "train_goodput_bps", score.mean_goodput_bps);
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_evaluate(const Context& ctx, const EvaluateOptions& opt) {
  if (opt.oracle && opt.fixed_mcs) throw ConfigError("--oracle and --fixed-mcs are exclusive");
  if (opt.fixed_mcs && (*opt.fixed_mcs < 0 || *opt.fixed_mcs > 19)) {
    throw ConfigError("--fixed-mcs must lie in [0, 19]");
  }
  std::optional<regress::ModelConfig> cfg;
  if (!opt.oracle && !opt.fixed_mcs) cfg = resolve_model(ctx, opt.model);
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);

  std::string name;
  json meta;
  if (opt.oracle) {
    name = "oracle";
    meta = {{"mode", "oracle"}};
  } else if (opt.fixed_mcs) {
    name = "static_" + std::to_string(*opt.fixed_mcs);
    meta = {{"mode", "fixed"}, {"mcs", *opt.fixed_mcs}};
  } else {
    name = run_name(*cfg);
    meta = {{"mode", "model"},
            {"kind", std::string(regress::to_string(cfg->kind))},
            {"loss", loss_kind_name(cfg->loss.kind)},
            {"model_config", regress::to_json(*cfg)}};
  }
  const auto json_path = out_path(ctx, "evaluate_" + name + ".json");

  ev::EvalReport report;
  try {
    report = cfg ? ev::evaluate_model(ds, *cfg, table, ctx.config.seed, ctx.threads)
                 : baseline_eval(ds, table, opt.fixed_mcs);
  } catch (const NumericalError& e) {
    json j = meta;
    j["status"] = "failed";
    j["error"] = e.what();
    write_json(ctx, json_path, j);
    throw;
  }
  json j = ev::to_json(report);
  for (const auto& [k, v] : meta.items()) j[k] = v;
  j["status"] = "ok";
  write_json(ctx, json_path, j);
  write_folds_csv(out_path(ctx, "evaluate_" + name + "_folds.csv"), name, report);

  kv(ctx, "run", name);
  kv(ctx, "folds", report.per_fold.size());
  kv(ctx, "samples", ds.size());
  for (const auto& f : report.per_fold) {
    kv_double(ctx, "fold." + std::to_string(f.round_id) + "_bps", f.mean_goodput_bps);
  }
  kv_double(ctx, "aggregate_bps", report.aggregate_bps);
  kv_double(ctx, "oracle_bps", report.baseline.oracle_bps);
  kv_double(ctx, "best_static_bps", report.baseline.best_static_bps);
  kv(ctx, "best_static_mcs", report.baseline.best_static_mcs);
  kv(ctx, "report", json_path.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_importance(const Context& ctx, const ModelChoice& m) {
  ModelChoice choice = m;
  if (choice.kind.empty() && choice.model_config.empty()) choice.kind = ctx.config.importance_model;
  const auto cfg = resolve_model(ctx, choice);
  if (ctx.config.importance_repeats < 1) throw ConfigError("importance_repeats must be >= 1");
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);
  const auto importance = compute_importance(ctx, ds, cfg, table);
  const auto correlation = ev::pearson_correlation(ds);
  {
    auto f = open_out(out_path(ctx, "importance.csv"));
    ev::write_importance_csv(f, importance);
  }
  {
    auto f = open_out(out_path(ctx, "correlation.csv"));
    ev::write_correlation_csv(f, correlation);
  }
  ev::EvalReport r;
  r.importance = importance;
  r.correlation = correlation;
  json full = ev::to_json(r);
  write_json(ctx, out_path(ctx, "importance.json"),
             {{"model_config", regress::to_json(cfg)},
              {"repeats", ctx.config.importance_repeats},
              {"importance", full.at("importance")},
              {"correlation", full.at("correlation")}});

  for (const auto& e : importance) kv_double(ctx, "importance." + e.feature, e.delta_bps);
  for (const auto& e : correlation) {
    kv(ctx, "correlation." + e.feature, e.r ? csv::format_double(*e.r) : "undefined");
  }
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_sweep_features(const Context& ctx, const SweepOptions& opt) {
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);
  std::vector<std::string> order;
  const fs::path ranking =
      opt.order_from.empty() ? ctx.config.output_dir / "importance.csv" : fs::path(opt.order_from);
  if (!opt.order_from.empty() && !fs::exists(ranking)) {
    throw ConfigError("importance ranking not found: " + ranking.string());
  }
  if (fs::exists(ranking)) {
    order = read_importance_order(ranking);
  } else {
    const auto cfg = model_config(ctx.config,
                                  regress::model_kind_from_string(ctx.config.importance_model),
                                  regress::LossMode::Kind::kQuantile);
    for (const auto& e : compute_importance(ctx, ds, cfg, table)) order.push_back(e.feature);
  }
  const auto learners = sweep_learners(ctx, opt.loss);
  const auto curves = ev::feature_count_sweep(ds, learners, order, table, ctx.config.seed, ctx.threads);
  const auto p = out_path(ctx, "feature_sweep.csv");
  {
    auto f = open_out(p);
    ev::write_curves_csv(f, curves);
  }
  for (const auto& c : curves) {
    kv_double(ctx, c.series + "." + csv::format_double(c.x) + "_bps", c.mean);
  }
  kv(ctx, "order", [&] {
    std::string s;
    for (const auto& n : order) s += (s.empty() ? "" : ",") + n;
    return s;
  }());
  kv(ctx, "curves", p.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_sweep_samples(const Context& ctx, const SweepOptions& opt) {
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);
  std::vector<std::size_t> sizes = opt.sizes.empty() ? ctx.config.sweep_sizes : opt.sizes;
  if (sizes.empty()) {
    std::size_t smallest = ds.size();
    for (const auto& f : ev::logo_folds(ds)) smallest = std::min(smallest, f.train_indices.size());
    for (std::size_t s = 25; s < smallest; s *= 2) sizes.push_back(s);
    sizes.push_back(smallest);
  }
  if (ctx.config.sweep_repeats < 1) throw ConfigError("sweep_repeats must be >= 1");
  const auto learners = sweep_learners(ctx, opt.loss);
  const auto curves = ev::training_size_sweep(ds, learners, sizes, table, ctx.config.seed,
                                              ctx.threads, ctx.config.sweep_repeats);
  const auto p = out_path(ctx, "size_sweep.csv");
  {
    auto f = open_out(p);
    ev::write_curves_csv(f, curves);
  }
  for (const auto& c : curves) {
    kv_double(ctx, c.series + "." + csv::format_double(c.x) + "_bps", c.mean);
  }
  kv(ctx, "curves", p.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_hyperopt(const Context& ctx, const HyperoptOptions& opt) {
  if (opt.model.kind.empty()) throw ConfigError("hyperopt needs --kind");
  const auto kind = regress::model_kind_from_string(opt.model.kind);
  const auto base = resolve_model(ctx, opt.model);
  const int n_iter = opt.iterations.value_or(ctx.config.hyperopt_iterations);
  if (n_iter < 1) throw ConfigError("hyperopt iterations must be >= 1");
  hyperopt::ParamSpace space;
  bool space_loaded = false;
  if (!opt.space.empty()) {
    space = hyperopt::load_space(opt.space);
    space_loaded = true;
  } else if (ctx.config.spaces.contains(opt.model.kind)) {
    space = hyperopt::space_from_json(ctx.config.spaces.at(opt.model.kind));
    space_loaded = true;
  }
  const auto ds = load_dataset(ctx.config);
  const auto table = tbs_table(ctx.config);
  if (!space_loaded) space = hyperopt::default_space(kind, ds.dim());

  const auto result = hyperopt::random_search(ds, kind, base.loss, space, n_iter, table,
                                              ctx.config.seed, ctx.threads);
  const std::string name = run_name(base);
  const auto log_path = out_path(ctx, "hyperopt_" + name + ".csv");
  {
    auto f = open_out(log_path);
    hyperopt::write_trial_log(f, result);
  }
  const auto& best = result.best_trial();
  const auto best_cfg = hyperopt::apply_params(kind, base.loss, best.params);
  const auto best_path = out_path(ctx, "best_" + name + ".json");
  write_json(ctx, best_path,
             {{"model_config", regress::to_json(best_cfg)},
              {"params", best.params},
              {"trial", best.trial},
              {"seed", best.seed},
              {"score_bps", *best.score_bps},
              {"space", hyperopt::to_json(space)}});
  std::size_t failed = 0;
  for (const auto& t : result.trials) failed += t.score_bps ? 0 : 1;
  for (const auto& t : result.trials) {
    if (!t.score_bps) std::cerr << "warning: trial " << t.trial << " failed: " << t.error << '\n';
  }
  kv(ctx, "trials", result.trials.size());
  kv(ctx, "failed_trials", failed);
  kv(ctx, "best_trial", best.trial);
  kv_double(ctx, "best_score_bps", *best.score_bps);
  kv(ctx, "best_params", best.params.dump());
  kv(ctx, "best_config", best_path.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  return 0;
}

int cmd_report(const Context& ctx) {
  std::vector<RunSpec> runs = ctx.config.report_runs;
  if (runs.empty()) {
    for (const char* k : kKinds) {
      for (const char* l : kLosses) {
        runs.push_back({regress::model_kind_from_string(k), loss_kind_from_string(l)});
      }
    }
  }
  std::vector<std::string> rows, cols;
  for (const char* k : kKinds) {
    for (const auto& r : runs) {
      if (regress::to_string(r.kind) == k) {
        rows.push_back(k);
        break;
      }
    }
  }
  for (const char* l : kLosses) {
    for (const auto& r : runs) {
      if (loss_kind_name(r.loss) == l) {
        cols.push_back(l);
        break;
      }
    }
  }
  std::set<std::pair<std::string, std::string>> wanted;
  for (const auto& r : runs) wanted.insert({std::string(regress::to_string(r.kind)), loss_kind_name(r.loss)});

  std::map<std::pair<std::string, std::string>, double> cells;
  std::optional<double> oracle, best_static;
  std::optional<int> best_static_mcs;
  std::size_t missing = 0;
  for (const auto& key : wanted) {
    const auto p = ctx.config.output_dir / ("evaluate_" + key.first + "_" + key.second + ".json");
    if (!fs::exists(p)) {
      ++missing;
      continue;
    }
    const json j = load_json_file(p.string());
    if (j.value("status", "") != "ok") {
      ++missing;
      continue;
    }
    cells[key] = j.at("aggregate_bps").get<double>();
    if (!oracle) {
      oracle = j.at("baseline").at("oracle_bps").get<double>();
      best_static = j.at("baseline").at("best_static_bps").get<double>();
      best_static_mcs = j.at("baseline").at("best_static_mcs").get<int>();
    }
  }

  std::ostringstream md;
  md << "# Link adaptation report\n\n";
  md << "Mean goodput (Mbit/s), leave-one-round-out.\n\n| algorithm |";
  for (const auto& c : cols) md << ' ' << c << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) md << "---|";
  md << '\n';
  std::ostringstream table_csv;
  table_csv << "algorithm,loss,aggregate_bps\n";
  for (const auto& r : rows) {
    md << "| " << r << " |";
    for (const auto& c : cols) {
      const auto it = cells.find({r, c});
      if (!wanted.count({r, c})) {
        md << " |";
        continue;
      }
      if (it == cells.end()) {
        md << " - |";
        table_csv << r << ',' << c << ",-\n";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", it->second / 1e6);
        md << ' ' << buf << " |";
        table_csv << r << ',' << c << ',' << csv::format_double(it->second) << '\n';
      }
    }
    md << '\n';
  }
  if (oracle) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "\nOracle: %.3f Mbit/s. Best static MCS %d: %.3f Mbit/s.\n",
                  *oracle / 1e6, *best_static_mcs, *best_static / 1e6);
    md << buf;
  }
  md << "\n## Artifacts\n\n";
  for (const char* a : {"kde_rsrp.csv", "per_mcs_area.csv", "per_distance.csv", "correlation.csv",
                        "importance.csv", "feature_sweep.csv", "size_sweep.csv"}) {
    md << "- " << a << (fs::exists(ctx.config.output_dir / a) ? "" : " (missing)") << '\n';
  }
  md << "\nconfig hash: " << ctx.hash << '\n';

  const auto md_path = out_path(ctx, "report.md");
  {
    auto f = open_out(md_path);
    f << md.str();
  }
  {
    auto f = open_out(out_path(ctx, "report_table.csv"));
    f << table_csv.str();
  }
  for (const auto& key : wanted) {
    const auto it = cells.find(key);
    kv(ctx, "cell." + key.first + "." + key.second,
       it == cells.end() ? std::string("missing") : csv::format_double(it->second));
  }
  kv(ctx, "missing_runs", missing);
  kv(ctx, "report", md_path.generic_string());
  kv(ctx, "config_hash", ctx.hash);
  if (missing > 0) {
    std::cerr << "error: " << missing << " of " << wanted.size()
              << " evaluation runs missing or failed; report is partial\n";
    return 2;
  }
  return 0;
}

int cmd_synth(const Context& ctx, const SynthOptions& opt) {
  if (opt.dir.empty()) throw ConfigError("synth needs --dir");
  if (opt.rounds < 1 || opt.sweeps_per_round < 1) {
    throw ConfigError("synth: rounds and sweeps must be >= 1");
  }
  synthetic::DriveOptions o;
  o.seed = ctx.config.seed;
  o.rounds = opt.rounds;
  o.sweeps_per_round = opt.sweeps_per_round;
  const auto drive = synthetic::generate_drive(o);
  fs::create_directories(opt.dir);
  synthetic::write_drive(opt.dir, drive);
  kv(ctx, "packets", drive.packets.size());
  kv(ctx, "rounds", drive.rounds.size());
  kv(ctx, "dir", fs::path(opt.dir).generic_string());
  return 0;
}

}  // namespace mcsadapt::cli
