// Property acceptance suite: runs without external data and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mcsadapt/goodput.hpp"
#include "mcsadapt/ingest.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/loss.hpp"
#include "mcsadapt/regress/mlp.hpp"
#include "mcsadapt/regress/model.hpp"
#include "mcsadapt/synthetic.hpp"

using namespace mcsadapt;
namespace fs = std::filesystem;

namespace {

// Transport block sizes (bits) for 48 PRBs at MCS 0..19, typed in from the
// standard table independently of data/tbs_prb48.csv.
constexpr std::array<long long, 20> kTbs = {1320, 1736, 2152, 2792, 3496, 4264, 4968,
                                            5992, 6712, 7480, 8504, 8504, 9528, 11064,
                                            12216, 13536, 14688, 15840, 17568, 19080};

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Suite {
 public:
  void run(int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed_ += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << name;
    if (!o.detail.empty()) std::cout << "  (" << o.detail << ")";
    std::cout << std::endl;
  }
  int failed() const { return failed_; }

 private:
  int failed_ = 0;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

goodput::TbsTable table() {
  return goodput::load_tbs_table(std::string(MCSADAPT_DATA_DIR) + "/tbs_prb48.csv");
}

Outcome pinball_identities() {
  Rng rng(7);
  double worst_half = 0.0, worst_homog = 0.0;
  int zero_violations = 0;
  for (int k = 0; k < 20000; ++k) {
    const double y = uniform(rng, -30.0, 30.0);
    const double yhat = k % 10 == 0 ? y : uniform(rng, -30.0, 30.0);
    const double tau = uniform(rng, 0.01, 0.99);
    const double c = std::exp(uniform(rng, -5.0, 5.0));
    worst_half = std::max(worst_half,
                          std::abs(regress::pinball_loss(y, yhat, 0.5) - 0.5 * std::abs(y - yhat)));
    const double l = regress::pinball_loss(y, yhat, tau);
    if ((l == 0.0) != (y == yhat) || l < 0.0) ++zero_violations;
    const double lc = regress::pinball_loss(c * y, c * yhat, tau);
    worst_homog = std::max(worst_homog, std::abs(lc - c * l) / std::max(1.0, c * l));
  }
  const bool ok = worst_half < 1e-12 && zero_violations == 0 && worst_homog < 1e-12;
  return {ok, "half-abs err " + fmt(worst_half) + ", zero-iff violations " +
                  std::to_string(zero_violations) + ", homogeneity rel err " + fmt(worst_homog)};
}

Outcome quantile_recovery() {
  constexpr std::size_t n = 1000;
  Rng rng(2024);
  std::vector<double> y(n);
  for (auto& v : y) {
    // skewed, bounded MCS-like target
    const double g = 11.0 + 5.0 * standard_normal(rng) - std::abs(4.0 * standard_normal(rng));
    v = std::clamp(std::floor(g), -1.0, 19.0);
  }
  FeatureMatrix data{Matrix(n, 3, 1.0), y};
  for (std::size_t i = 0; i < n; ++i) data.x(i, 1) = -2.5;

  double worst = 0.0;
  std::string where;
  for (double tau : {0.1, 0.25, 0.5}) {
    const double truth = regress::empirical_quantile(y, tau);
    for (auto kind : {regress::ModelKind::kLinear, regress::ModelKind::kQrf,
                      regress::ModelKind::kGbt, regress::ModelKind::kMlp}) {
      const auto cfg = regress::ModelConfig::defaults(kind, regress::LossMode::quantile(tau));
      const auto model = regress::fit(cfg, data, 99);
      // constant features: every row is the same point
      const auto preds = regress::predict(model, data.x);
      const auto [mn, mx] = std::minmax_element(preds.begin(), preds.end());
      if (*mx - *mn > 1e-9) {
        return {false, std::string(regress::to_string(kind)) + " prediction varies on constant input"};
      }
      const double err = std::abs(preds[0] - truth);
      if (err > worst) {
        worst = err;
        where = std::string(regress::to_string(kind)) + " tau=" + fmt(tau);
      }
    }
  }
  return {worst <= 0.5, "max |pred - empirical quantile| = " + fmt(worst) + " at " + where +
                            ", tolerance 0.5"};
}

Outcome goodput_enumeration() {
  const auto t = table();
  long long checked = 0, mismatches = 0, dominance = 0;
  for (int target = -1; target <= 19; ++target) {
    const double oracle = target >= 0 ? kTbs[target] * 1000.0 : 0.0;
    for (int m = 0; m <= 19; ++m) {
      const double brute = m <= target ? kTbs[m] * 1000.0 : 0.0;
      for (double off : {0.0, -0.49, 0.49}) {
        const double pred = m + off;
        const double got = goodput::sample_goodput(pred, target, t);
        ++checked;
        if (got != brute) ++mismatches;
        if (got > oracle) ++dominance;
      }
    }
    const std::vector<int> one = {target};
    if (goodput::oracle_goodput(one, t) != oracle) ++mismatches;
  }
  return {mismatches == 0 && dominance == 0,
          std::to_string(checked) + " pairs, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(dominance) + " exceed oracle"};
}

Outcome best_static() {
  const auto t = table();
  Rng rng(31337);
  int wrong = 0;
  for (int d = 0; d < 100; ++d) {
    const std::size_t n = 1 + uniform_index(rng, 400);
    const int lo = -1 + static_cast<int>(uniform_index(rng, 10));
    const int hi = lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(20 - lo)));
    std::vector<int> targets(n);
    for (auto& v : targets) v = lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    long long best_sum = -1;
    int best_m = -1;
    for (int m = 0; m < 20; ++m) {
      long long sum = 0;
      for (int v : targets) sum += m <= v ? kTbs[m] : 0;
      if (sum > best_sum) {
        best_sum = sum;
        best_m = m;
      }
    }
    const auto got = goodput::best_static_mcs(targets, t);
    const double expected_bps = static_cast<double>(best_sum) * 1000.0 / static_cast<double>(n);
    if (got.mcs != best_m || std::abs(got.bps - expected_bps) > 1e-9 * expected_bps) ++wrong;
  }
  return {wrong == 0, "100 random datasets, " + std::to_string(wrong) + " disagreements"};
}

Outcome mlp_gradient() {
  Rng data_rng(3);
  const std::size_t n = 16;
  FeatureMatrix f{Matrix(n, 4), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 4; ++j) f.x(i, j) = standard_normal(data_rng);
    f.y[i] = 3.0 + f.x(i, 0) - 2.0 * f.x(i, 2) + 0.3 * standard_normal(data_rng);
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  double worst = 0.0;
  std::size_t count = 0;
  for (auto act : {regress::Activation::kRelu, regress::Activation::kTanh,
                   regress::Activation::kSigmoid}) {
    for (const auto& loss : {regress::LossMode::mse(), regress::LossMode::quantile(0.3),
                             regress::LossMode::mae()}) {
      regress::Mlp net(4, {6, 5}, act);
      Rng rng(17);
      net.initialize(rng);
      for (double& w : net.parameters()) w += uniform(rng, -0.1, 0.1);
      std::vector<double> grad, scratch;
      net.loss_and_gradient(f.x, f.y, rows, loss, 1e-3, 1e-2, grad);
      auto params = net.parameters();
      const double eps = 1e-5;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + eps;
        const double up = net.loss_and_gradient(f.x, f.y, rows, loss, 1e-3, 1e-2, scratch);
        params[i] = orig - eps;
        const double down = net.loss_and_gradient(f.x, f.y, rows, loss, 1e-3, 1e-2, scratch);
        params[i] = orig;
        const double numeric = (up - down) / (2 * eps);
        const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-7});
        worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
        ++count;
      }
    }
  }
  return {worst < 1e-4, std::to_string(count) + " partials over 3 activations x 3 losses, max rel err " +
                            fmt(worst) + ", tolerance 1e-4"};
}

struct Proc {
  int code = -1;
  std::string out;
};

Proc run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" MCSADAPT_CLI "' " + args + " 2>/dev/null";
  Proc r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "mcsadapt_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  synthetic::DriveOptions o;
  o.seed = 5;
  o.rounds = 3;
  o.sweeps_per_round = 80;
  synthetic::write_drive((dir / "drive").string(), synthetic::generate_drive(o));
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"paths": {"trace": "drive/trace.csv", "gps": "drive/gps.csv",
               "polygons": "drive/areas.json", "rounds": "drive/rounds.json"},
               "models": {"gbt": {"n_rounds": 40}, "qrf": {"n_trees": 20},
                          "mlp": {"epochs": 5}}, "seed": 8})";
  }
  if (run_cli("-c config.json -o out ingest", dir).code != 0) return {false, "ingest failed"};
  std::size_t compared = 0;
  for (const char* kind : {"linear", "qrf", "gbt", "mlp"}) {
    std::string ref_out, ref_json;
    for (const char* threads : {"1", "1", "2", "4", "0"}) {
      const auto r = run_cli(std::string("-c config.json -o out --threads ") + threads +
                                 " evaluate --kind " + kind,
                             dir);
      if (r.code != 0) return {false, std::string(kind) + " evaluate exited " + std::to_string(r.code)};
      const auto j = slurp(dir / "out" / (std::string("evaluate_") + kind + "_quantile.json"));
      if (ref_json.empty()) {
        ref_out = r.out;
        ref_json = j;
      } else if (r.out != ref_out || j != ref_json) {
        return {false, std::string(kind) + " report differs at --threads " + threads};
      }
      ++compared;
    }
  }
  fs::remove_all(dir);
  return {true, std::to_string(compared) + " runs over 4 models at threads 1,1,2,4,all: identical"};
}

Outcome ingest_round_trip() {
  synthetic::DriveOptions o;
  o.seed = 12;
  o.rounds = 3;
  o.sweeps_per_round = 250;
  const auto drive = synthetic::generate_drive(o);
  const fs::path dir = fs::temp_directory_path() / "mcsadapt_acceptance_ingest";
  fs::remove_all(dir);
  synthetic::write_drive(dir.string(), drive);
  const auto trace = ingest::parse_trace((dir / "trace.csv").string());
  const auto gps = ingest::parse_gps((dir / "gps.csv").string());
  const auto areas = geo::load_polygons((dir / "areas.json").string());
  const auto rounds = ingest::load_round_ranges((dir / "rounds.json").string());
  const auto result = ingest::run_pipeline(trace.records, gps.tx, gps.rx, areas, rounds);
  fs::remove_all(dir);

  // brute-force aggregator over the generator's full ground truth
  std::map<std::int64_t, int> expected;
  const int cycle = o.mcs_cycle_len;
  for (std::size_t i = 0; i + cycle <= drive.truth.size(); i += cycle) {
    int best = -1;
    for (int k = 0; k < cycle; ++k) {
      if (drive.truth[i + k].decoded) best = std::max(best, drive.truth[i + k].mcs);
    }
    expected[drive.truth[i].timestamp_ms] = best;
  }
  std::size_t target_errors = 0;
  for (std::size_t i = 0; i < result.dataset.size(); ++i) {
    const auto it = expected.find(result.dataset.sweep_start_ms[i]);
    if (it == expected.end() || it->second != result.dataset.target_mcs[i]) ++target_errors;
  }

  std::map<std::int64_t, const ingest::PacketRecord*> truth;
  for (const auto& p : drive.truth) truth[p.timestamp_ms] = &p;
  const auto& rec = result.reconstructed;
  std::size_t interp = 0, interp_errors = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (!rec[i].interpolated) continue;
    std::size_t a = i, b = i;
    while (a > 0 && rec[a].interpolated) --a;
    while (b + 1 < rec.size() && rec[b].interpolated) ++b;
    if (rec[a].interpolated || rec[b].interpolated) continue;
    ++interp;
    const double f = double(rec[i].timestamp_ms - rec[a].timestamp_ms) /
                     double(rec[b].timestamp_ms - rec[a].timestamp_ms);
    const auto lerp = [&](double x0, double x1) { return x0 + f * (x1 - x0); };
    const auto near = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
    const auto t = truth.find(rec[i].timestamp_ms);
    if (t == truth.end() || rec[i].mcs != t->second->mcs || rec[i].decoded ||
        !near(rec[i].snr, lerp(rec[a].snr, rec[b].snr)) ||
        !near(rec[i].rsrp, lerp(rec[a].rsrp, rec[b].rsrp)) ||
        !near(rec[i].rssi, lerp(rec[a].rssi, rec[b].rssi)) ||
        !near(rec[i].noise_power, lerp(rec[a].noise_power, rec[b].noise_power)) ||
        !near(rec[i].rx_power, lerp(rec[a].rx_power, rec[b].rx_power))) {
      ++interp_errors;
    }
  }
  const bool ok = target_errors == 0 && interp_errors == 0 && interp > 0 &&
                  result.dataset.size() + 10 >= expected.size();
  return {ok, std::to_string(result.dataset.size()) + "/" + std::to_string(expected.size()) +
                  " sweeps, " + std::to_string(target_errors) + " target errors, " +
                  std::to_string(interp) + " interpolated packets, " +
                  std::to_string(interp_errors) + " interpolation errors"};
}

}  // namespace

int main() {
  Suite s;
  s.run(7, "pinball identities", pinball_identities);
  s.run(8, "quantile recovery on constant features", quantile_recovery);
  s.run(9, "goodput overshoot rule and oracle dominance, exhaustive", goodput_enumeration);
  s.run(10, "best static MCS vs brute force", best_static);
  s.run(11, "MLP gradient check", mlp_gradient);
  s.run(12, "evaluate reports byte-identical across runs and thread counts", determinism);
  s.run(13, "ingest round trip vs brute-force aggregator", ingest_round_trip);
  return s.failed() == 0 ? 0 : 1;
}
