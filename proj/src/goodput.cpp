#include "mcsadapt/goodput.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::goodput {

namespace {

// Modulation changes from QPSK to 16-QAM between MCS 10 and 11.
constexpr int kFirst16Qam = 11;

std::string data_lines(const TbsTable& table) {
  std::string s = "mcs,tbs_bits\n";
  for (int m = 0; m < kMcsLevels; ++m) {
    s += std::to_string(m) + "," + std::to_string(table.entries[m]) + "\n";
  }
  return s;
}

void check_nonempty(std::span<const int> targets) {
  if (targets.empty()) throw ContractError("goodput: empty dataset");
}

}  // namespace

void TbsTable::validate() const {
  for (int m = 0; m < kMcsLevels; ++m) {
    if (entries[m] <= 0) throw DataError("TBS table: entry " + std::to_string(m) + " not positive");
    const bool regime_start = m == 0 || m == kFirst16Qam;
    if (!regime_start && entries[m] < entries[m - 1]) {
      throw DataError("TBS table: entry " + std::to_string(m) + " decreases");
    }
  }
  if (entries[10] != entries[11]) {
    throw DataError("TBS table: MCS 10 and 11 must carry the same transport block");
  }
}

int mcs_to_tbs_index(int mcs) {
  if (mcs < 0 || mcs > 28) throw DomainError("I_MCS out of range: " + std::to_string(mcs));
  if (mcs <= 10) return mcs;
  if (mcs <= 20) return mcs - 1;
  return mcs - 2;
}

std::uint64_t tbs_checksum(const TbsTable& table) { return fnv1a64(data_lines(table)); }

TbsTable parse_tbs_table(std::istream& in) {
  TbsTable table;
  std::optional<std::uint64_t> expected;
  std::array<bool, kMcsLevels> seen{};
  std::string line;
  bool header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto colon = t.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = csv::trim(t.substr(1, colon - 1));
      const std::string value = csv::trim(t.substr(colon + 1));
      if (key == "source") table.source_tag = value;
      if (key == "checksum") {
        const std::string prefix = "fnv1a64:";
        if (value.rfind(prefix, 0) != 0) throw DataError("TBS table: unknown checksum kind");
        expected = std::stoull(value.substr(prefix.size()), nullptr, 16);
      }
      continue;
    }
    if (!header) {
      if (t != "mcs,tbs_bits") throw DataError("TBS table: expected header 'mcs,tbs_bits'");
      header = true;
      continue;
    }
    const auto f = csv::split_line(t);
    const auto m = f.size() == 2 ? csv::parse_int(f[0]) : std::nullopt;
    const auto bits = f.size() == 2 ? csv::parse_int(f[1]) : std::nullopt;
    if (!m || !bits || *m < 0 || *m >= kMcsLevels || seen[*m]) {
      throw DataError("TBS table: bad row '" + t + "'");
    }
    seen[*m] = true;
    table.entries[*m] = *bits;
    ++rows;
  }
  if (rows != kMcsLevels) {
    throw DataError("TBS table: expected 20 rows, found " + std::to_string(rows));
  }
  table.validate();
  if (expected && *expected != tbs_checksum(table)) {
    throw DataError("TBS table: checksum mismatch");
  }
  if (table.source_tag.empty()) table.source_tag = "unspecified";
  return table;
}

TbsTable load_tbs_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open TBS table: " + path);
  return parse_tbs_table(in);
}

std::int64_t tbs_lookup(const TbsTable& table, int mcs) {
  if (mcs < 0 || mcs >= kMcsLevels) {
    throw DomainError("MCS out of range [0, 19]: " + std::to_string(mcs));
  }
  return table.entries[mcs];
}

int rounded_mcs(double predicted) {
  const double r = std::floor(predicted + 0.5);
  return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(kMcsLevels - 1)));
}

double sample_goodput(double predicted, int target_mcs, const TbsTable& table) {
  if (!std::isfinite(predicted)) return 0.0;
  const int m = rounded_mcs(predicted);
  if (m > target_mcs) return 0.0;
  return static_cast<double>(table.entries[m]) * kTransportBlocksPerSecond;
}

GoodputScore mean_goodput(std::span<const double> predictions, std::span<const int> targets,
                          const TbsTable& table) {
  if (predictions.size() != targets.size()) {
    throw ContractError("mean_goodput: " + std::to_string(predictions.size()) +
                        " predictions for " + std::to_string(targets.size()) + " samples");
  }
  check_nonempty(targets);
  GoodputScore score;
  score.per_sample_bps.reserve(targets.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!std::isfinite(predictions[i])) ++score.non_finite;
    const double g = sample_goodput(predictions[i], targets[i], table);
    score.per_sample_bps.push_back(g);
    sum += g;
  }
  score.mean_bps = sum / static_cast<double>(targets.size());
  return score;
}

double oracle_goodput(std::span<const int> targets, const TbsTable& table) {
  check_nonempty(targets);
  double sum = 0.0;
  for (int t : targets) {
    if (t >= 0) sum += static_cast<double>(tbs_lookup(table, t)) * kTransportBlocksPerSecond;
  }
  return sum / static_cast<double>(targets.size());
}

double static_goodput(std::span<const int> targets, int mcs, const TbsTable& table) {
  check_nonempty(targets);
  const double tbs = static_cast<double>(tbs_lookup(table, mcs));
  const auto ok = std::count_if(targets.begin(), targets.end(), [&](int t) { return t >= mcs; });
  return tbs * kTransportBlocksPerSecond * static_cast<double>(ok) /
         static_cast<double>(targets.size());
}

StaticChoice best_static_mcs(std::span<const int> targets, const TbsTable& table) {
  check_nonempty(targets);
  // count of samples decodable at each level via a histogram of targets
  std::array<std::size_t, kMcsLevels + 1> at_least{};
  for (int t : targets) {
    if (t >= 0) ++at_least[std::min(t, kMcsLevels - 1)];
  }
  for (int m = kMcsLevels - 2; m >= 0; --m) at_least[m] += at_least[m + 1];
  StaticChoice best{0, -1.0};
  for (int m = 0; m < kMcsLevels; ++m) {
    const double bps = static_cast<double>(table.entries[m]) * kTransportBlocksPerSecond *
                       static_cast<double>(at_least[m]) / static_cast<double>(targets.size());
    if (bps > best.bps) best = {m, bps};
  }
  return best;
}

GoodputReport baseline_report(std::span<const int> targets, const TbsTable& table) {
  GoodputReport r;
  r.samples = targets.size();
  r.oracle_bps = oracle_goodput(targets, table);
  const auto best = best_static_mcs(targets, table);
  r.best_static_mcs = best.mcs;
  r.best_static_bps = best.bps;
  std::vector<int> decodable;
  for (int t : targets) {
    if (t >= 0) decodable.push_back(t);
  }
  r.undecodable_samples = targets.size() - decodable.size();
  if (!decodable.empty()) {
    r.oracle_decodable_bps = oracle_goodput(decodable, table);
    r.best_static_decodable_bps = best_static_mcs(decodable, table).bps;
  }
  return r;
}

GoodputReport make_report(std::span<const double> predictions, std::span<const int> targets,
                          const TbsTable& table) {
  GoodputReport r = baseline_report(targets, table);
  auto score = mean_goodput(predictions, targets, table);
  r.mean_goodput_bps = score.mean_bps;
  r.per_sample_bps = std::move(score.per_sample_bps);
  r.non_finite_predictions = score.non_finite;
  return r;
}

nlohmann::json to_json(const GoodputReport& r, bool include_per_sample) {
  nlohmann::json j = {
      {"mean_goodput_bps", r.mean_goodput_bps},
      {"oracle_bps", r.oracle_bps},
      {"best_static_mcs", r.best_static_mcs},
      {"best_static_bps", r.best_static_bps},
      {"oracle_decodable_bps", r.oracle_decodable_bps},
      {"best_static_decodable_bps", r.best_static_decodable_bps},
      {"samples", r.samples},
      {"undecodable_samples", r.undecodable_samples},
      {"non_finite_predictions", r.non_finite_predictions},
  };
  if (include_per_sample) j["per_sample_bps"] = r.per_sample_bps;
  return j;
}

}  // namespace mcsadapt::goodput
