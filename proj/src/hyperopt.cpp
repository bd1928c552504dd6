#include "mcsadapt/hyperopt.hpp"

#include <cmath>
#include <fstream>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/evaluation.hpp"

namespace mcsadapt::hyperopt {

namespace {

using Kind = Distribution::Kind;

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::kUniform: return "uniform";
    case Kind::kLogUniform: return "log-uniform";
    case Kind::kIntUniform: return "int-uniform";
    case Kind::kChoice: return "choice";
  }
  return "uniform";
}

Kind kind_from_name(const std::string& s) {
  if (s == "uniform") return Kind::kUniform;
  if (s == "log-uniform") return Kind::kLogUniform;
  if (s == "int-uniform") return Kind::kIntUniform;
  if (s == "choice") return Kind::kChoice;
  throw ConfigError("unknown distribution type '" + s + "'");
}

}  // namespace

void ParamSpace::validate() const {
  for (const auto& [name, d] : entries) {
    const std::string where = "parameter '" + name + "': ";
    if (d.kind == Kind::kChoice) {
      if (!d.choices.is_array() || d.choices.empty()) throw ConfigError(where + "empty choice list");
      if (name == "tau") {
        for (const auto& v : d.choices) {
          if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
            throw ConfigError(where + "tau choices must lie in (0, 1)");
          }
        }
      }
      continue;
    }
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi)) {
      throw ConfigError(where + "requires lo < hi");
    }
    if (d.kind == Kind::kLogUniform && !(d.lo > 0.0)) {
      throw ConfigError(where + "log-uniform needs lo > 0");
    }
    if (d.kind == Kind::kIntUniform && (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi))) {
      throw ConfigError(where + "int-uniform bounds must be integers");
    }
    if (name == "tau" && (d.kind == Kind::kIntUniform || !(d.lo > 0.0) || !(d.hi < 1.0))) {
      throw ConfigError(where + "tau must lie in (0, 1)");
    }
  }
}

ParamSpace space_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("search space must be a JSON object");
  ParamSpace space;
  try {
    for (const auto& [name, spec] : j.items()) {
      Distribution d;
      d.kind = kind_from_name(spec.at("type").get<std::string>());
      if (d.kind == Kind::kChoice) {
        d.choices = spec.at("values");
      } else {
        d.lo = spec.at("lo").get<double>();
        d.hi = spec.at("hi").get<double>();
      }
      space.entries.emplace(name, std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
  space.validate();
  return space;
}

nlohmann::json to_json(const ParamSpace& space) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, d] : space.entries) {
    nlohmann::json e = {{"type", std::string(kind_name(d.kind))}};
    if (d.kind == Kind::kChoice) {
      e["values"] = d.choices;
    } else if (d.kind == Kind::kIntUniform) {
      e["lo"] = static_cast<long long>(d.lo);
      e["hi"] = static_cast<long long>(d.hi);
    } else {
      e["lo"] = d.lo;
      e["hi"] = d.hi;
    }
    j[name] = e;
  }
  return j;
}

ParamSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open search space " + path);
  try {
    return space_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("search space " + path + ": " + e.what());
  }
}

nlohmann::json sample_config(const ParamSpace& space, Rng& rng) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, d] : space.entries) {
    switch (d.kind) {
      case Kind::kUniform:
        out[name] = uniform(rng, d.lo, d.hi);
        break;
      case Kind::kLogUniform:
        out[name] = std::exp(uniform(rng, std::log(d.lo), std::log(d.hi)));
        break;
      case Kind::kIntUniform: {
        const auto lo = static_cast<long long>(d.lo);
        const auto span = static_cast<std::uint64_t>(static_cast<long long>(d.hi) - lo);
        out[name] = lo + static_cast<long long>(uniform_index(rng, span));
        break;
      }
      case Kind::kChoice:
        out[name] = d.choices.at(uniform_index(rng, d.choices.size()));
        break;
    }
  }
  return out;
}

ParamSpace default_space(regress::ModelKind kind, std::size_t dim) {
  using D = Distribution;
  ParamSpace s;
  s.entries["tau"] = D::uniform(0.05, 0.5);
  switch (kind) {
    case regress::ModelKind::kGbt:
      s.entries["n_rounds"] = D::int_uniform(50, 501);
      s.entries["learning_rate"] = D::log_uniform(0.01, 0.3);
      s.entries["max_depth"] = D::int_uniform(2, 9);
      s.entries["subsample"] = D::uniform(0.5, 1.0);
      break;
    case regress::ModelKind::kQrf:
      s.entries["n_trees"] = D::int_uniform(50, 301);
      s.entries["max_depth"] = D::int_uniform(4, 21);
      s.entries["min_leaf"] = D::int_uniform(1, 51);
      s.entries["mtry"] = D::int_uniform(1, static_cast<long long>(std::max<std::size_t>(dim, 1)) + 1);
      break;
    case regress::ModelKind::kMlp:
      s.entries["n_layers"] = D::int_uniform(1, 4);
      for (const char* w : {"width_1", "width_2", "width_3"}) {
        s.entries[w] = D::choice({16, 32, 64, 128});
      }
      s.entries["activation"] = D::choice({"relu", "tanh", "sigmoid"});
      s.entries["l1"] = D::log_uniform(1e-6, 1e-2);
      s.entries["l2"] = D::log_uniform(1e-6, 1e-2);
      s.entries["learning_rate"] = D::log_uniform(1e-4, 1e-2);
      break;
    case regress::ModelKind::kLinear:
      s.entries["lr0"] = D::log_uniform(1e-3, 0.5);
      s.entries["decay"] = D::log_uniform(1e-3, 1.0);
      break;
  }
  return s;
}

regress::ModelConfig apply_params(regress::ModelKind kind, const regress::LossMode& loss,
                                  const nlohmann::json& params) {
  if (!params.is_object()) throw ConfigError("trial parameters must be an object");
  regress::LossMode l = loss;
  nlohmann::json cfg = to_json(regress::ModelConfig::defaults(kind, loss));
  nlohmann::json& p = cfg["params"];
  const bool mlp = kind == regress::ModelKind::kMlp;
  int n_layers = -1;
  std::map<int, int> widths;
  for (const auto& [name, value] : params.items()) {
    if (name == "tau") {
      if (l.kind == regress::LossMode::Kind::kQuantile) l.tau = value.get<double>();
    } else if (mlp && name == "n_layers") {
      n_layers = value.get<int>();
    } else if (mlp && name.rfind("width_", 0) == 0) {
      widths[std::stoi(name.substr(6))] = value.get<int>();
    } else if (mlp && name == "learning_rate") {
      p["adam"]["alpha"] = value;
    } else if (p.contains(name)) {
      p[name] = value;
    } else {
      throw ConfigError("'" + name + "' is not a hyperparameter of " +
                        std::string(regress::to_string(kind)));
    }
  }
  if (n_layers >= 0) {
    std::vector<int> layers;
    for (int i = 1; i <= n_layers; ++i) {
      const auto it = widths.find(i);
      layers.push_back(it != widths.end() ? it->second : 64);
    }
    p["layers"] = layers;
  }
  cfg["loss"] = regress::to_json(l);
  try {
    return regress::model_config_from_json(cfg);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t trial_seed(std::uint64_t master, int index) {
  return derive_seed(master, "trial", static_cast<std::uint64_t>(index));
}

SearchResult random_search(const ingest::Dataset& ds, regress::ModelKind kind,
                           const regress::LossMode& loss, const ParamSpace& space, int n_iter,
                           const goodput::TbsTable& table, std::uint64_t master_seed,
                           unsigned threads) {
  if (n_iter < 1) throw ConfigError("random search: n_iter must be >= 1");
  space.validate();
  SearchResult result;
  bool any = false;
  for (int i = 0; i < n_iter; ++i) {
    TrialResult t;
    t.trial = i;
    t.seed = trial_seed(master_seed, i);
    Rng rng(derive_seed(t.seed, "params"));
    t.params = sample_config(space, rng);
    try {
      const auto cfg = apply_params(kind, loss, t.params);
      t.score_bps = evaluation::evaluate_model(ds, cfg, table, t.seed, threads).aggregate_bps;
    } catch (const NumericalError& e) {
      t.error = e.what();
    } catch (const ConfigError& e) {
      t.error = e.what();
    }
    if (t.score_bps) {
      if (!any || *t.score_bps > *result.trials[result.best].score_bps) {
        result.best = static_cast<std::size_t>(i);
      }
      any = true;
    }
    result.trials.push_back(std::move(t));
  }
  if (!any) {
    throw NumericalError("random search: all " + std::to_string(n_iter) +
                         " trials failed; first error: " + result.trials.front().error);
  }
  return result;
}

void write_trial_log(std::ostream& out, const SearchResult& result) {
  out << "trial,params-json,score_bps,seed\n";
  for (const auto& t : result.trials) {
    out << t.trial << ',' << csv::quote(t.params.dump()) << ','
        << (t.score_bps ? csv::format_double(*t.score_bps) : "failed") << ',' << t.seed << '\n';
  }
}

}  // namespace mcsadapt::hyperopt
