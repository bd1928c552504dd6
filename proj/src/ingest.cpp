#include "mcsadapt/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"

namespace mcsadapt::ingest {

namespace {

int mod(long long a, int m) {
  const long long r = a % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

double lerp(double a, double b, double frac) { return a + (b - a) * frac; }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  return in;
}

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[csv::trim(header[i])] = i;
  return idx;
}

}  // namespace

std::string_view to_string(Area a) {
  switch (a) {
    case Area::kAvenue: return "avenue";
    case Area::kPark: return "park";
    case Area::kHighway: return "highway";
    case Area::kResidential: return "residential";
    case Area::kTunnel: return "tunnel";
    case Area::kUnlabeled: return "unlabeled";
  }
  return "unlabeled";
}

Area area_from_string(std::string_view s) {
  for (Area a : {Area::kAvenue, Area::kPark, Area::kHighway, Area::kResidential,
                 Area::kTunnel, Area::kUnlabeled}) {
    if (to_string(a) == s) return a;
  }
  throw DataError("unknown area name: " + std::string(s));
}

// ---- Dataset -----------------------------------------------------------------

std::vector<int> Dataset::rounds() const {
  std::set<int> s(round_id.begin(), round_id.end());
  return {s.begin(), s.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.features = Matrix(0, dim());
  for (std::size_t i : indices) {
    if (i >= size()) throw ContractError("Dataset::subset: index out of range");
    out.append(features.row(i), target_mcs[i], round_id[i], area[i], sweep_start_ms[i]);
  }
  return out;
}

Dataset Dataset::select_features(std::span<const std::string> names) const {
  std::vector<std::size_t> cols;
  for (const auto& name : names) {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw ConfigError("unknown feature: " + name);
    cols.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  Dataset out;
  out.feature_names.assign(names.begin(), names.end());
  out.features = Matrix(size(), cols.size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out.features(i, j) = features(i, cols[j]);
  }
  out.target_mcs = target_mcs;
  out.round_id = round_id;
  out.area = area;
  out.sweep_start_ms = sweep_start_ms;
  return out;
}

FeatureMatrix Dataset::to_feature_matrix(std::span<const std::size_t> indices) const {
  FeatureMatrix fm;
  fm.x = Matrix(indices.size(), dim());
  fm.y.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = features.row(indices[r]);
    std::copy(src.begin(), src.end(), fm.x.row(r).begin());
    fm.y.push_back(target_mcs[indices[r]]);
  }
  return fm;
}

FeatureMatrix Dataset::to_feature_matrix() const {
  std::vector<std::size_t> all(size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return to_feature_matrix(all);
}

void Dataset::append(std::span<const double> x, int target, int round, Area a,
                     std::int64_t start_ms) {
  if (x.size() != dim()) throw ContractError("Dataset::append: feature arity mismatch");
  if (features.cols() != dim()) features = Matrix(0, dim());
  features.append_row(x);
  target_mcs.push_back(target);
  round_id.push_back(round);
  area.push_back(a);
  sweep_start_ms.push_back(start_ms);
}

void Dataset::validate() const {
  const std::size_t n = size();
  if (round_id.size() != n || area.size() != n || sweep_start_ms.size() != n ||
      features.rows() != n || (n > 0 && features.cols() != dim())) {
    throw ContractError("Dataset: column lengths disagree");
  }
}

// ---- parsing -----------------------------------------------------------------

TraceParseResult parse_trace(std::istream& in, const TraceSchema& schema) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty()) {
    throw EmptyInputError("trace is empty");
  }
  const auto header = csv::split_line(line);
  const auto idx = header_index(header);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = idx.find(name);
    if (it == idx.end()) throw SchemaError("trace is missing column '" + name + "'");
    return it->second;
  };
  const std::size_t c_ts = column(schema.timestamp_ms);
  const std::size_t c_mcs = column(schema.mcs);
  const std::size_t c_dec = column(schema.decoded);
  const std::size_t c_snr = column(schema.snr);
  const std::size_t c_rsrp = column(schema.rsrp);
  const std::size_t c_rssi = column(schema.rssi);
  const std::size_t c_noise = column(schema.noise_power);
  const std::size_t c_rx = column(schema.rx_power);
  std::optional<std::size_t> c_gain;
  if (!schema.rx_gain.empty()) {
    if (auto it = idx.find(schema.rx_gain); it != idx.end()) c_gain = it->second;
  }

  TraceParseResult result;
  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    ++data_rows;
    const auto f = csv::split_line(line);
    auto reject = [&] {
      ++result.rejected;
      result.rejected_lines.push_back(line_no);
    };
    if (f.size() != header.size()) {
      reject();
      continue;
    }
    const auto ts = csv::parse_int(f[c_ts]);
    const auto mcs = csv::parse_int(f[c_mcs]);
    const auto dec = csv::parse_bool(f[c_dec]);
    const auto snr = csv::parse_double(f[c_snr]);
    const auto rsrp = csv::parse_double(f[c_rsrp]);
    const auto rssi = csv::parse_double(f[c_rssi]);
    const auto noise = csv::parse_double(f[c_noise]);
    const auto rx = csv::parse_double(f[c_rx]);
    std::optional<double> gain;
    if (c_gain) {
      gain = csv::parse_double(f[*c_gain]);
      if (!gain || !std::isfinite(*gain)) {
        reject();
        continue;
      }
    }
    if (!ts || !mcs || !dec || !snr || !rsrp || !rssi || !noise || !rx ||
        *mcs < 0 || *mcs > kMaxMcs || !std::isfinite(*snr) || !std::isfinite(*rsrp) ||
        !std::isfinite(*rssi) || !std::isfinite(*noise) || !std::isfinite(*rx)) {
      reject();
      continue;
    }
    PacketRecord r;
    r.timestamp_ms = *ts;
    r.mcs = static_cast<int>(*mcs);
    r.decoded = *dec;
    r.snr = *snr;
    r.rsrp = *rsrp;
    r.rssi = *rssi;
    r.noise_power = *noise;
    r.rx_power = *rx;
    r.rx_gain = gain;
    if (!result.records.empty() && r.timestamp_ms <= result.records.back().timestamp_ms) {
      throw OrderingError("trace timestamps not strictly increasing at " +
                              std::to_string(r.timestamp_ms) + " ms (line " +
                              std::to_string(line_no) + ")",
                          r.timestamp_ms);
    }
    result.records.push_back(r);
  }
  if (data_rows == 0) throw EmptyInputError("trace has a header but no rows");
  return result;
}

TraceParseResult parse_trace(const std::string& path, const TraceSchema& schema) {
  auto in = open_input(path);
  try {
    return parse_trace(in, schema);
  } catch (const OrderingError& e) {
    throw OrderingError(path + ": " + e.what(), e.offending_ms());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const EmptyInputError& e) {
    throw EmptyInputError(path + ": " + e.what());
  }
}

GpsParseResult parse_gps(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty()) {
    throw EmptyInputError("GPS file is empty");
  }
  const auto header = csv::split_line(line);
  const auto idx = header_index(header);
  auto column = [&](const char* name) -> std::size_t {
    auto it = idx.find(name);
    if (it == idx.end()) {
      throw SchemaError(std::string("GPS file is missing column '") + name + "'");
    }
    return it->second;
  };
  const std::size_t c_ts = column("timestamp_ms");
  const std::size_t c_user = column("user");
  const std::size_t c_lat = column("latitude");
  const std::size_t c_lon = column("longitude");
  const std::size_t c_vel = column("velocity");

  GpsParseResult result;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != header.size()) {
      ++result.rejected;
      continue;
    }
    const auto ts = csv::parse_int(f[c_ts]);
    const auto lat = csv::parse_double(f[c_lat]);
    const auto lon = csv::parse_double(f[c_lon]);
    const auto vel = csv::parse_double(f[c_vel]);
    std::string user = csv::trim(f[c_user]);
    std::transform(user.begin(), user.end(), user.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (!ts || !lat || !lon || !vel || !(*lat >= -90 && *lat <= 90) ||
        !(*lon >= -180 && *lon <= 180) || !(*vel >= 0) || !std::isfinite(*vel) ||
        (user != "tx" && user != "rx")) {
      ++result.rejected;
      continue;
    }
    GeoFix fix{*ts, *lat, *lon, *vel, user == "tx" ? User::kTx : User::kRx};
    (fix.user == User::kTx ? result.tx : result.rx).push_back(fix);
  }
  auto by_time = [](const GeoFix& a, const GeoFix& b) {
    return a.timestamp_ms < b.timestamp_ms;
  };
  std::stable_sort(result.tx.begin(), result.tx.end(), by_time);
  std::stable_sort(result.rx.begin(), result.rx.end(), by_time);
  return result;
}

GpsParseResult parse_gps(const std::string& path) {
  auto in = open_input(path);
  return parse_gps(in);
}

// ---- reconstruction ----------------------------------------------------------

std::vector<Segment> reconstruct_gaps(std::span<const PacketRecord> records,
                                      const GapOptions& options) {
  if (options.mcs_cycle_len < 1) throw ConfigError("mcs_cycle_len must be >= 1");
  if (options.max_gap_ms < 0) throw ConfigError("max_gap_ms must be >= 0");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp_ms <= records[i - 1].timestamp_ms) {
      throw OrderingError("records not strictly increasing at " +
                              std::to_string(records[i].timestamp_ms) + " ms",
                          records[i].timestamp_ms);
    }
  }
  std::vector<Segment> segments;
  if (records.empty()) return segments;
  const int cycle = options.mcs_cycle_len;

  auto filler = [&](const PacketRecord& src, std::int64_t t, int mcs) {
    PacketRecord r = src;
    r.timestamp_ms = t;
    r.mcs = mcs;
    r.decoded = false;
    r.interpolated = true;
    return r;
  };

  Segment cur;
  const PacketRecord& first = records.front();
  if (options.span_start_ms) {
    const std::int64_t start = *options.span_start_ms;
    if (start > first.timestamp_ms) {
      throw ContractError("span_start_ms lies after the first record");
    }
    if (first.timestamp_ms - start <= options.max_gap_ms) {
      for (std::int64_t t = start; t < first.timestamp_ms; ++t) {
        cur.push_back(filler(first, t, mod(first.mcs - (first.timestamp_ms - t), cycle)));
      }
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const PacketRecord& r = records[i];
    if (i > 0) {
      const PacketRecord& prev = records[i - 1];
      const std::int64_t missing = r.timestamp_ms - prev.timestamp_ms - 1;
      if (missing > options.max_gap_ms) {
        segments.push_back(std::move(cur));
        cur.clear();
      } else {
        for (std::int64_t k = 1; k <= missing; ++k) {
          const double frac = static_cast<double>(k) / static_cast<double>(missing + 1);
          PacketRecord f = filler(prev, prev.timestamp_ms + k, mod(prev.mcs + k, cycle));
          f.snr = lerp(prev.snr, r.snr, frac);
          f.rsrp = lerp(prev.rsrp, r.rsrp, frac);
          f.rssi = lerp(prev.rssi, r.rssi, frac);
          f.noise_power = lerp(prev.noise_power, r.noise_power, frac);
          f.rx_power = lerp(prev.rx_power, r.rx_power, frac);
          if (prev.rx_gain && r.rx_gain) {
            f.rx_gain = lerp(*prev.rx_gain, *r.rx_gain, frac);
          } else {
            f.rx_gain.reset();
          }
          cur.push_back(f);
        }
      }
    }
    cur.push_back(r);
  }

  const PacketRecord& last = records.back();
  if (options.span_end_ms) {
    const std::int64_t end = *options.span_end_ms;
    if (end < last.timestamp_ms) throw ContractError("span_end_ms lies before the last record");
    if (end - last.timestamp_ms <= options.max_gap_ms) {
      for (std::int64_t t = last.timestamp_ms + 1; t <= end; ++t) {
        cur.push_back(filler(last, t, mod(last.mcs + (t - last.timestamp_ms), cycle)));
      }
    }
  }
  segments.push_back(std::move(cur));
  return segments;
}

AggregateResult aggregate_sweeps(std::span<const PacketRecord> records, int mcs_cycle_len) {
  if (mcs_cycle_len < 1) throw ConfigError("mcs_cycle_len must be >= 1");
  const std::size_t len = static_cast<std::size_t>(mcs_cycle_len);
  AggregateResult result;
  std::size_t i = 0;
  while (i < records.size()) {
    bool complete = records[i].mcs == 0 && i + len <= records.size();
    for (std::size_t k = 1; complete && k < len; ++k) {
      const auto& r = records[i + k];
      complete = r.mcs == static_cast<int>(k) &&
                 r.timestamp_ms == records[i].timestamp_ms + static_cast<std::int64_t>(k);
    }
    if (!complete) {
      ++result.discarded_packets;
      ++i;
      continue;
    }
    SweepSample s;
    s.features.fill(std::numeric_limits<double>::quiet_NaN());
    s.sweep_start_ms = records[i].timestamp_ms;
    double snr = 0, rx = 0, rssi = 0, rsrp = 0, noise = 0, gain = 0;
    bool has_gain = true;
    for (std::size_t k = 0; k < len; ++k) {
      const auto& r = records[i + k];
      if (r.decoded) s.target_mcs = std::max(s.target_mcs, r.mcs);
      snr += r.snr;
      rx += r.rx_power;
      rssi += r.rssi;
      rsrp += r.rsrp;
      noise += r.noise_power;
      if (r.rx_gain) {
        gain += *r.rx_gain;
      } else {
        has_gain = false;
      }
    }
    const double n = static_cast<double>(len);
    s.features[kSnr] = snr / n;
    s.features[kRxPower] = rx / n;
    s.features[kRssi] = rssi / n;
    s.features[kRsrp] = rsrp / n;
    s.features[kNoisePower] = noise / n;
    if (has_gain) s.features[kRxGain] = gain / n;
    result.samples.push_back(s);
    i += len;
  }
  if (result.samples.empty()) {
    result.warnings.push_back("no complete MCS sweep found in " +
                              std::to_string(records.size()) + " packets");
  }
  return result;
}

// ---- GPS merge -----------------------------------------------------------------

FixMatch match_fix(std::span<const GeoFix> fixes, std::int64_t t, std::int64_t tol) {
  auto it = std::lower_bound(fixes.begin(), fixes.end(), t,
                             [](const GeoFix& f, std::int64_t v) { return f.timestamp_ms < v; });
  const GeoFix* after = it != fixes.end() ? &*it : nullptr;
  const GeoFix* before = it != fixes.begin() ? &*std::prev(it) : nullptr;
  const GeoFix* nearest = nullptr;
  std::int64_t best = 0;
  if (before) {
    nearest = before;
    best = t - before->timestamp_ms;
  }
  if (after && (!nearest || after->timestamp_ms - t < best)) {
    nearest = after;
    best = after->timestamp_ms - t;
  }
  if (nearest && best <= tol) return {nearest, false};
  if (before) return {before, true};
  return {};
}

MergeResult merge_gps(std::span<const SweepSample> samples, std::span<const GeoFix> fixes_tx,
                      std::span<const GeoFix> fixes_rx, std::int64_t tolerance_ms) {
  if (fixes_tx.empty()) throw ConfigError("no GPS fixes for the TX user");
  if (fixes_rx.empty()) throw ConfigError("no GPS fixes for the RX user");
  auto sorted = [](std::span<const GeoFix> f) {
    return std::is_sorted(f.begin(), f.end(), [](const GeoFix& a, const GeoFix& b) {
      return a.timestamp_ms < b.timestamp_ms;
    });
  };
  if (!sorted(fixes_tx) || !sorted(fixes_rx)) {
    throw ContractError("merge_gps: fixes must be sorted by timestamp");
  }
  MergeResult result;
  for (const SweepSample& s : samples) {
    const FixMatch tx = match_fix(fixes_tx, s.sweep_start_ms, tolerance_ms);
    const FixMatch rx = match_fix(fixes_rx, s.sweep_start_ms, tolerance_ms);
    if (!tx.fix || !rx.fix) {
      ++result.dropped_before_first_fix;
      continue;
    }
    SweepSample out = s;
    out.features[kLatTx] = tx.fix->latitude;
    out.features[kLonTx] = tx.fix->longitude;
    out.features[kSpeedTx] = tx.fix->velocity;
    out.features[kLatRx] = rx.fix->latitude;
    out.features[kLonRx] = rx.fix->longitude;
    out.features[kSpeedRx] = rx.fix->velocity;
    out.features[kDistance] = geo::haversine_distance(
        {tx.fix->latitude, tx.fix->longitude}, {rx.fix->latitude, rx.fix->longitude});
    out.gps_stale = tx.stale || rx.stale;
    if (out.gps_stale) ++result.stale;
    result.samples.push_back(out);
  }
  return result;
}

std::vector<SweepSample> label_areas(std::span<const SweepSample> samples,
                                     std::span<const geo::Polygon> polygons) {
  std::vector<Area> areas;
  areas.reserve(polygons.size());
  for (const auto& p : polygons) areas.push_back(area_from_string(p.name));
  std::vector<SweepSample> out(samples.begin(), samples.end());
  for (auto& s : out) {
    s.area = Area::kUnlabeled;
    const geo::LatLon pos{s.features[kLatRx], s.features[kLonRx]};
    if (!std::isfinite(pos.lat) || !std::isfinite(pos.lon)) continue;
    for (std::size_t i = 0; i < polygons.size(); ++i) {
      if (geo::contains(polygons[i], pos)) {
        s.area = areas[i];
        break;
      }
    }
  }
  return out;
}

// ---- rounds ------------------------------------------------------------------

std::vector<RoundRange> parse_round_ranges(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("round boundaries: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rounds") || !doc["rounds"].is_array()) {
    throw ConfigError("round boundaries: expected an object with a 'rounds' array");
  }
  std::vector<RoundRange> out;
  int pos = 0;
  for (const auto& r : doc["rounds"]) {
    if (!r.is_object() || !r.contains("start_ms") || !r.contains("end_ms")) {
      throw ConfigError("round boundaries: each round needs start_ms and end_ms");
    }
    RoundRange rr;
    rr.id = r.value("id", pos);
    rr.start_ms = r["start_ms"].get<std::int64_t>();
    rr.end_ms = r["end_ms"].get<std::int64_t>();
    out.push_back(rr);
    ++pos;
  }
  return out;
}

std::vector<RoundRange> load_round_ranges(const std::string& path) {
  auto in = open_input(path);
  return parse_round_ranges(in);
}

SplitResult split_rounds(std::span<const SweepSample> samples,
                         std::span<const RoundRange> boundaries) {
  std::vector<RoundRange> ranges(boundaries.begin(), boundaries.end());
  std::sort(ranges.begin(), ranges.end(),
            [](const RoundRange& a, const RoundRange& b) { return a.start_ms < b.start_ms; });
  std::set<int> ids;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].start_ms > ranges[i].end_ms) {
      throw ConfigError("round " + std::to_string(ranges[i].id) + " ends before it starts");
    }
    if (!ids.insert(ranges[i].id).second) {
      throw ConfigError("duplicate round id " + std::to_string(ranges[i].id));
    }
    if (i > 0 && ranges[i].start_ms <= ranges[i - 1].end_ms) {
      throw ConfigError("rounds " + std::to_string(ranges[i - 1].id) + " and " +
                        std::to_string(ranges[i].id) + " overlap");
    }
  }

  SplitResult result;
  std::vector<std::pair<const SweepSample*, int>> kept;
  for (const auto& s : samples) {
    auto it = std::upper_bound(
        ranges.begin(), ranges.end(), s.sweep_start_ms,
        [](std::int64_t t, const RoundRange& r) { return t < r.start_ms; });
    if (it == ranges.begin() || s.sweep_start_ms > std::prev(it)->end_ms) {
      ++result.dropped;
      continue;
    }
    kept.emplace_back(&s, std::prev(it)->id);
  }

  std::vector<std::size_t> cols;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const bool finite = std::all_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::isfinite(k.first->features[f]);
    });
    if (finite) cols.push_back(f);
  }
  Dataset& ds = result.dataset;
  for (std::size_t f : cols) ds.feature_names.emplace_back(kFeatureNames[f]);
  ds.features = Matrix(0, cols.size());
  std::vector<double> row(cols.size());
  for (const auto& [s, id] : kept) {
    for (std::size_t j = 0; j < cols.size(); ++j) row[j] = s->features[cols[j]];
    ds.append(row, s->target_mcs, id, s->area, s->sweep_start_ms);
  }
  return result;
}

// ---- dataset file --------------------------------------------------------------

void write_dataset(std::ostream& out, const Dataset& ds) {
  ds.validate();
  for (const auto& name : ds.feature_names) out << csv::quote(name) << ',';
  out << "target_mcs,round_id,area,sweep_start_ms\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out << csv::format_double(v) << ',';
    out << ds.target_mcs[i] << ',' << ds.round_id[i] << ',' << to_string(ds.area[i]) << ','
        << ds.sweep_start_ms[i] << '\n';
  }
}

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file: " + path);
  write_dataset(out, ds);
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty()) {
    throw EmptyInputError("dataset file is empty");
  }
  const auto header = csv::split_line(line);
  std::optional<std::size_t> c_target, c_round, c_area, c_start;
  std::vector<std::size_t> feature_cols;
  Dataset ds;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = csv::trim(header[i]);
    if (name == "target_mcs") c_target = i;
    else if (name == "round_id") c_round = i;
    else if (name == "area") c_area = i;
    else if (name == "sweep_start_ms") c_start = i;
    else {
      feature_cols.push_back(i);
      ds.feature_names.push_back(name);
    }
  }
  if (!c_target || !c_round) {
    throw SchemaError("dataset file needs target_mcs and round_id columns");
  }
  ds.features = Matrix(0, feature_cols.size());
  std::vector<double> row(feature_cols.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_line(line);
    auto fail = [&](const std::string& why) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != header.size()) fail("wrong field count");
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto v = csv::parse_double(f[feature_cols[j]]);
      if (!v || !std::isfinite(*v)) fail("non-numeric feature '" + ds.feature_names[j] + "'");
      row[j] = *v;
    }
    const auto target = csv::parse_int(f[*c_target]);
    const auto round = csv::parse_int(f[*c_round]);
    if (!target || *target < kNothingDecoded || *target > kMaxMcs) fail("bad target_mcs");
    if (!round) fail("bad round_id");
    Area a = Area::kUnlabeled;
    if (c_area) a = area_from_string(csv::trim(f[*c_area]));
    std::int64_t start = 0;
    if (c_start) {
      const auto s = csv::parse_int(f[*c_start]);
      if (!s) fail("bad sweep_start_ms");
      start = *s;
    }
    ds.append(row, static_cast<int>(*target), static_cast<int>(*round), a, start);
  }
  return ds;
}

Dataset read_dataset(const std::string& path) {
  auto in = open_input(path);
  return read_dataset(in);
}


// ---- full pipeline -------------------------------------------------------------

PipelineResult run_pipeline(std::span<const PacketRecord> packets,
                            std::span<const GeoFix> fixes_tx, std::span<const GeoFix> fixes_rx,
                            std::span<const geo::Polygon> polygons,
                            std::span<const RoundRange> rounds, const PipelineOptions& options) {
  PipelineResult r;
  PipelineSummary& sum = r.summary;
  sum.packets = packets.size();
  const auto segments = reconstruct_gaps(packets, options.gaps);
  sum.segments = segments.size();
  std::vector<SweepSample> samples;
  for (const auto& seg : segments) {
    for (const auto& p : seg) {
      if (p.interpolated) ++sum.interpolated_packets;
      r.reconstructed.push_back(p);
    }
    auto agg = aggregate_sweeps(seg, options.gaps.mcs_cycle_len);
    sum.discarded_packets += agg.discarded_packets;
    for (auto& w : agg.warnings) sum.warnings.push_back(std::move(w));
    samples.insert(samples.end(), agg.samples.begin(), agg.samples.end());
  }
  sum.sweeps = samples.size();
  const MergeResult merged = merge_gps(samples, fixes_tx, fixes_rx, options.gps_tolerance_ms);
  sum.dropped_before_first_fix = merged.dropped_before_first_fix;
  sum.stale_gps = merged.stale;
  const auto labeled = label_areas(merged.samples, polygons);
  SplitResult split = split_rounds(labeled, rounds);
  sum.dropped_outside_rounds = split.dropped;
  r.dataset = std::move(split.dataset);
  sum.samples = r.dataset.size();
  sum.rounds = r.dataset.rounds().size();
  return r;
}

nlohmann::json to_json(const PipelineSummary& s) {
  return {{"packets", s.packets},
          {"interpolated_packets", s.interpolated_packets},
          {"segments", s.segments},
          {"sweeps", s.sweeps},
          {"discarded_packets", s.discarded_packets},
          {"dropped_before_first_fix", s.dropped_before_first_fix},
          {"stale_gps", s.stale_gps},
          {"dropped_outside_rounds", s.dropped_outside_rounds},
          {"samples", s.samples},
          {"rounds", s.rounds},
          {"warnings", s.warnings}};
}

}  // namespace mcsadapt::ingest
