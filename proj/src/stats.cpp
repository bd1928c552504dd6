#include "mcsadapt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"

namespace mcsadapt::stats {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

std::string format_edge(double v) { return csv::format_double(v); }

PerCell make_cell(std::string group, int mcs, std::size_t tx, std::size_t ok) {
  PerCell c{std::move(group), mcs, tx, ok, std::nullopt};
  if (tx > 0) c.per = 1.0 - static_cast<double>(ok) / static_cast<double>(tx);
  return c;
}

}  // namespace

std::vector<LabeledPacket> label_packets(std::span<const ingest::PacketRecord> records,
                                         std::span<const ingest::GeoFix> fixes_tx,
                                         std::span<const ingest::GeoFix> fixes_rx,
                                         std::span<const geo::Polygon> polygons,
                                         std::int64_t tolerance_ms) {
  std::vector<ingest::Area> areas;
  for (const auto& p : polygons) areas.push_back(ingest::area_from_string(p.name));
  std::vector<LabeledPacket> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    LabeledPacket p;
    p.mcs = r.mcs;
    p.decoded = r.decoded && !r.interpolated;
    p.interpolated = r.interpolated;
    p.rsrp = r.rsrp;
    p.distance_m = std::numeric_limits<double>::quiet_NaN();
    const auto tx = ingest::match_fix(fixes_tx, r.timestamp_ms, tolerance_ms);
    const auto rx = ingest::match_fix(fixes_rx, r.timestamp_ms, tolerance_ms);
    if (rx.fix) {
      const geo::LatLon pos{rx.fix->latitude, rx.fix->longitude};
      for (std::size_t i = 0; i < polygons.size(); ++i) {
        if (geo::contains(polygons[i], pos)) {
          p.area = areas[i];
          break;
        }
      }
      if (tx.fix) {
        p.distance_m = geo::haversine_distance({tx.fix->latitude, tx.fix->longitude}, pos);
      }
    }
    out.push_back(p);
  }
  return out;
}

double scott_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw ContractError("scott_bandwidth: need at least two samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> grid) {
  if (samples.empty()) throw ContractError("gaussian_kde: no samples");
  if (!(bandwidth > 0.0)) throw DomainError("gaussian_kde: bandwidth must be positive");
  std::vector<double> out(grid.size(), 0.0);
  const double norm = kInvSqrt2Pi / (bandwidth * static_cast<double>(samples.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double v : samples) {
      const double u = (grid[g] - v) / bandwidth;
      s += std::exp(-0.5 * u * u);
    }
    out[g] = s * norm;
  }
  return out;
}

KdeResult kde_rsrp(std::span<const LabeledPacket> packets, const KdeOptions& options) {
  if (options.grid_points < 2) throw ConfigError("KDE: grid_points must be >= 2");
  if (options.bandwidth && !(*options.bandwidth > 0.0)) {
    throw ConfigError("KDE: bandwidth must be positive");
  }
  std::map<ingest::Area, std::vector<double>> groups;
  for (const auto& p : packets) {
    if (!p.interpolated && std::isfinite(p.rsrp)) groups[p.area].push_back(p.rsrp);
  }
  KdeResult result;
  struct Pending {
    ingest::Area area;
    const std::vector<double>* values;
    double bw;
  };
  std::vector<Pending> pending;
  for (const auto& [area, values] : groups) {
    if (values.size() < 2) {
      result.warnings.push_back("area " + std::string(ingest::to_string(area)) +
                                " has fewer than 2 packets; skipped");
      continue;
    }
    double bw = options.bandwidth ? *options.bandwidth : scott_bandwidth(values);
    if (!(bw > 0.0)) {
      result.warnings.push_back("area " + std::string(ingest::to_string(area)) +
                                " has constant RSRP; bandwidth set to 1");
      bw = 1.0;
    }
    pending.push_back({area, &values, bw});
  }
  if (pending.empty()) return result;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_bw = 0.0;
  for (const auto& p : pending) {
    const auto [mn, mx] = std::minmax_element(p.values->begin(), p.values->end());
    lo = std::min(lo, *mn);
    hi = std::max(hi, *mx);
    max_bw = std::max(max_bw, p.bw);
  }
  lo -= 3.0 * max_bw;
  hi += 3.0 * max_bw;
  std::vector<double> grid(options.grid_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  for (const auto& p : pending) {
    result.curves.push_back({std::string(ingest::to_string(p.area)), p.values->size(), p.bw, grid,
                             gaussian_kde(*p.values, p.bw, grid)});
  }
  return result;
}

std::vector<PerCell> per_by_mcs_area(std::span<const LabeledPacket> packets) {
  std::map<std::pair<ingest::Area, int>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& p : packets) {
    auto& c = counts[{p.area, p.mcs}];
    ++c.first;
    if (p.decoded && !p.interpolated) ++c.second;
  }
  std::vector<PerCell> out;
  for (const auto& [key, c] : counts) {
    out.push_back(make_cell(std::string(ingest::to_string(key.first)), key.second, c.first, c.second));
  }
  return out;
}

DistancePer per_by_distance(std::span<const LabeledPacket> packets,
                            std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw ConfigError("distance bins need at least two edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw ConfigError("distance bin edges must be strictly increasing");
    }
  }
  const std::size_t bins = bin_edges.size() - 1;
  std::set<int> mcs_seen;
  for (const auto& p : packets) mcs_seen.insert(p.mcs);
  std::map<std::pair<std::size_t, int>, std::pair<std::size_t, std::size_t>> counts;
  DistancePer result;
  for (const auto& p : packets) {
    const double d = p.distance_m;
    if (!std::isfinite(d) || d < bin_edges.front() || d > bin_edges.back()) {
      ++result.unbinned;
      continue;
    }
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), d);
    std::size_t bin = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
    if (bin >= bins) bin = bins - 1;
    auto& c = counts[{bin, p.mcs}];
    ++c.first;
    if (p.decoded && !p.interpolated) ++c.second;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const std::string group = format_edge(bin_edges[b]) + "-" + format_edge(bin_edges[b + 1]);
    for (int m : mcs_seen) {
      const auto it = counts.find({b, m});
      const auto c = it == counts.end() ? std::pair<std::size_t, std::size_t>{0, 0} : it->second;
      result.cells.push_back(make_cell(group, m, c.first, c.second));
    }
  }
  return result;
}

std::vector<double> default_distance_edges(std::span<const LabeledPacket> packets, double width) {
  if (!(width > 0.0)) throw ConfigError("distance bin width must be positive");
  double max_d = 0.0;
  for (const auto& p : packets) {
    if (std::isfinite(p.distance_m)) max_d = std::max(max_d, p.distance_m);
  }
  std::vector<double> edges = {0.0};
  do {
    edges.push_back(edges.back() + width);
  } while (edges.back() < max_d);
  return edges;
}

void write_kde_csv(std::ostream& out, const KdeResult& kde) {
  out << "area,grid,density\n";
  for (const auto& c : kde.curves) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      out << c.group << ',' << csv::format_double(c.grid[i]) << ','
          << csv::format_double(c.density[i]) << '\n';
    }
  }
}

void write_per_csv(std::ostream& out, std::span<const PerCell> cells) {
  out << "group,mcs,transmissions,decodes,per\n";
  for (const auto& c : cells) {
    out << csv::quote(c.group) << ',' << c.mcs << ',' << c.transmissions << ',' << c.decodes << ','
        << (c.per ? csv::format_double(*c.per) : "undefined") << '\n';
  }
}

}  // namespace mcsadapt::stats
