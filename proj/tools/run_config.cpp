#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

std::optional<fs::path> opt_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() ? p : base / p;
}

json path_json(const std::optional<fs::path>& p) {
  return p ? json(p->generic_string()) : json();
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  c.raw = j;
  try {
    check_keys(j, {"paths", "ingest", "stats", "features", "tau", "models", "evaluation",
                   "hyperopt", "report", "seed"},
               "config");
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, {"trace", "gps", "polygons", "rounds", "tbs_table", "dataset", "output_dir"},
                 "paths");
      c.trace = opt_path(p, "trace", base_dir);
      c.gps = opt_path(p, "gps", base_dir);
      c.polygons = opt_path(p, "polygons", base_dir);
      c.rounds = opt_path(p, "rounds", base_dir);
      c.tbs_table = opt_path(p, "tbs_table", base_dir);
      c.dataset = opt_path(p, "dataset", base_dir);
      if (auto out = opt_path(p, "output_dir", base_dir)) c.output_dir = *out;
    }
    if (j.contains("ingest")) {
      const auto& in = j.at("ingest");
      check_keys(in, {"mcs_cycle_len", "max_gap_ms", "gps_tolerance_ms", "columns"}, "ingest");
      c.pipeline.gaps.mcs_cycle_len = in.value("mcs_cycle_len", c.pipeline.gaps.mcs_cycle_len);
      c.pipeline.gaps.max_gap_ms = in.value("max_gap_ms", c.pipeline.gaps.max_gap_ms);
      c.pipeline.gps_tolerance_ms = in.value("gps_tolerance_ms", c.pipeline.gps_tolerance_ms);
      if (in.contains("columns")) {
        const auto& col = in.at("columns");
        check_keys(col, {"timestamp_ms", "mcs", "decoded", "snr", "rsrp", "rssi", "noise_power",
                         "rx_power", "rx_gain"},
                   "ingest.columns");
        auto& s = c.schema;
        s.timestamp_ms = col.value("timestamp_ms", s.timestamp_ms);
        s.mcs = col.value("mcs", s.mcs);
        s.decoded = col.value("decoded", s.decoded);
        s.snr = col.value("snr", s.snr);
        s.rsrp = col.value("rsrp", s.rsrp);
        s.rssi = col.value("rssi", s.rssi);
        s.noise_power = col.value("noise_power", s.noise_power);
        s.rx_power = col.value("rx_power", s.rx_power);
        s.rx_gain = col.value("rx_gain", s.rx_gain);
      }
      if (c.pipeline.gaps.mcs_cycle_len < 1 || c.pipeline.gaps.max_gap_ms < 0 ||
          c.pipeline.gps_tolerance_ms < 0) {
        throw ConfigError("ingest options must be non-negative (cycle length >= 1)");
      }
    }
    if (j.contains("stats")) {
      const auto& st = j.at("stats");
      check_keys(st, {"distance_bin_m", "kde_bandwidth", "kde_grid_points"}, "stats");
      c.distance_bin_m = st.value("distance_bin_m", c.distance_bin_m);
      if (st.contains("kde_bandwidth") && !st.at("kde_bandwidth").is_null()) {
        c.kde_bandwidth = st.at("kde_bandwidth").get<double>();
      }
      c.kde_grid_points = st.value("kde_grid_points", c.kde_grid_points);
    }
    if (j.contains("features")) c.features = j.at("features").get<std::vector<std::string>>();
    c.tau = j.value("tau", c.tau);
    if (!(c.tau > 0.0 && c.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (j.contains("models")) {
      c.models = j.at("models");
      check_keys(c.models, {"linear", "qrf", "gbt", "mlp"}, "models");
    }
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      check_keys(e, {"importance_repeats", "importance_model", "sweep_models", "sweep_sizes",
                     "sweep_repeats"},
                 "evaluation");
      c.importance_repeats = e.value("importance_repeats", c.importance_repeats);
      c.importance_model = e.value("importance_model", c.importance_model);
      if (e.contains("sweep_models")) {
        c.sweep_models = e.at("sweep_models").get<std::vector<std::string>>();
      }
      if (e.contains("sweep_sizes")) {
        c.sweep_sizes = e.at("sweep_sizes").get<std::vector<std::size_t>>();
      }
      c.sweep_repeats = e.value("sweep_repeats", c.sweep_repeats);
    }
    if (j.contains("hyperopt")) {
      const auto& h = j.at("hyperopt");
      check_keys(h, {"iterations", "spaces"}, "hyperopt");
      c.hyperopt_iterations = h.value("iterations", c.hyperopt_iterations);
      if (h.contains("spaces")) c.spaces = h.at("spaces");
    }
    if (j.contains("report")) {
      const auto& r = j.at("report");
      check_keys(r, {"runs"}, "report");
      for (const auto& run : r.value("runs", json::array())) {
        c.report_runs.push_back({regress::model_kind_from_string(run.at("kind").get<std::string>()),
                                 loss_kind_from_string(run.at("loss").get<std::string>())});
      }
    }
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& m : c.sweep_models) regress::model_kind_from_string(m);
  regress::model_kind_from_string(c.importance_model);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json effective_json(const RunConfig& c) {
  json runs = json::array();
  for (const auto& r : c.report_runs) {
    runs.push_back({{"kind", std::string(regress::to_string(r.kind))}, {"loss", loss_kind_name(r.loss)}});
  }
  const auto& g = c.pipeline.gaps;
  return {{"paths",
           {{"trace", path_json(c.trace)},
            {"gps", path_json(c.gps)},
            {"polygons", path_json(c.polygons)},
            {"rounds", path_json(c.rounds)},
            {"tbs_table", path_json(c.tbs_table)},
            {"dataset", path_json(c.dataset)},
            {"output_dir", c.output_dir.generic_string()}}},
          {"ingest",
           {{"mcs_cycle_len", g.mcs_cycle_len},
            {"max_gap_ms", g.max_gap_ms},
            {"gps_tolerance_ms", c.pipeline.gps_tolerance_ms}}},
          {"stats",
           {{"distance_bin_m", c.distance_bin_m},
            {"kde_bandwidth", c.kde_bandwidth ? json(*c.kde_bandwidth) : json()},
            {"kde_grid_points", c.kde_grid_points}}},
          {"features", c.features},
          {"tau", c.tau},
          {"models", c.models},
          {"evaluation",
           {{"importance_repeats", c.importance_repeats},
            {"importance_model", c.importance_model},
            {"sweep_models", c.sweep_models},
            {"sweep_sizes", c.sweep_sizes},
            {"sweep_repeats", c.sweep_repeats}}},
          {"hyperopt", {{"iterations", c.hyperopt_iterations}, {"spaces", c.spaces}}},
          {"report", {{"runs", runs}}},
          {"seed", c.seed}};
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(effective_json(c).dump())));
  return buf;
}

regress::ModelConfig model_config(const RunConfig& c, regress::ModelKind kind,
                                  regress::LossMode::Kind loss) {
  regress::LossMode mode;
  switch (loss) {
    case regress::LossMode::Kind::kQuantile: mode = regress::LossMode::quantile(c.tau); break;
    case regress::LossMode::Kind::kMse: mode = regress::LossMode::mse(); break;
    case regress::LossMode::Kind::kMae: mode = regress::LossMode::mae(); break;
  }
  json j = to_json(regress::ModelConfig::defaults(kind, mode));
  const std::string name(regress::to_string(kind));
  if (c.models.contains(name)) {
    for (const auto& [k, v] : c.models.at(name).items()) {
      if (!j["params"].contains(k)) {
        throw ConfigError("models." + name + ": unknown hyperparameter '" + k + "'");
      }
      j["params"][k] = v;
    }
  }
  return regress::model_config_from_json(j);
}

regress::LossMode::Kind loss_kind_from_string(const std::string& s) {
  if (s == "quantile") return regress::LossMode::Kind::kQuantile;
  if (s == "mse") return regress::LossMode::Kind::kMse;
  if (s == "mae") return regress::LossMode::Kind::kMae;
  throw ConfigError("unknown loss '" + s + "' (quantile, mse or mae)");
}

std::string loss_kind_name(regress::LossMode::Kind k) {
  switch (k) {
    case regress::LossMode::Kind::kQuantile: return "quantile";
    case regress::LossMode::Kind::kMse: return "mse";
    case regress::LossMode::Kind::kMae: return "mae";
  }
  return "mse";
}

const fs::path& require_file(const std::optional<fs::path>& p, const std::string& what) {
  if (!p) throw ConfigError("no " + what + " file configured");
  if (!fs::exists(*p)) throw ConfigError(what + " file not found: " + p->string());
  return *p;
}

}  // namespace mcsadapt::cli
