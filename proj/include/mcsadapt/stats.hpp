#pragma once

// Descriptive statistics of a drive test: RSRP densities per area and packet
// error rates per MCS, area and distance.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcsadapt/geo.hpp"
#include "mcsadapt/ingest.hpp"

namespace mcsadapt::stats {

/// A reconstructed packet with the context of its position.
struct LabeledPacket {
  int mcs = 0;
  bool decoded = false;
  bool interpolated = false;
  double rsrp = 0.0;
  ingest::Area area = ingest::Area::kUnlabeled;
  double distance_m = 0.0;  // NaN when no fix precedes the packet
};

/// Positions each packet with the GPS fix rule of the sweep merge and labels
/// its area from the RX position.
std::vector<LabeledPacket> label_packets(std::span<const ingest::PacketRecord> records,
                                         std::span<const ingest::GeoFix> fixes_tx,
                                         std::span<const ingest::GeoFix> fixes_rx,
                                         std::span<const geo::Polygon> polygons,
                                         std::int64_t tolerance_ms = 1000);

/// n^(-1/5) times the sample standard deviation.
double scott_bandwidth(std::span<const double> samples);

/// Gaussian kernel density of `samples` evaluated at `grid`.
std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> grid);

struct KdeOptions {
  std::optional<double> bandwidth;  // Scott's rule per area when unset
  std::size_t grid_points = 256;
};

struct DensityCurve {
  std::string group;
  std::size_t samples = 0;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

struct KdeResult {
  std::vector<DensityCurve> curves;
  std::vector<std::string> warnings;
};

/// RSRP density per area over real (non-interpolated) packets. All areas share
/// one grid spanning the data padded by three bandwidths. Areas with fewer
/// than two packets are skipped with a warning.
KdeResult kde_rsrp(std::span<const LabeledPacket> packets, const KdeOptions& options = {});

struct PerCell {
  std::string group;
  int mcs = 0;
  std::size_t transmissions = 0;
  std::size_t decodes = 0;
  std::optional<double> per;  // nullopt when there were no transmissions
};

/// PER per (area, mcs); interpolated packets count as failed transmissions.
std::vector<PerCell> per_by_mcs_area(std::span<const LabeledPacket> packets);

struct DistancePer {
  std::vector<PerCell> cells;
  /// Packets without a distance or outside the bin edges.
  std::size_t unbinned = 0;
};

/// PER per (distance bin, mcs). Bins are [e_i, e_i+1), the last one closed.
/// Every bin gets a cell for every MCS seen. Throws ConfigError unless the
/// edges are at least two and strictly increasing.
DistancePer per_by_distance(std::span<const LabeledPacket> packets,
                            std::span<const double> bin_edges);

/// Edges 0, width, 2 width, ... up to the first edge at or above the largest
/// finite distance.
std::vector<double> default_distance_edges(std::span<const LabeledPacket> packets,
                                           double width = 25.0);

void write_kde_csv(std::ostream& out, const KdeResult& kde);
void write_per_csv(std::ostream& out, std::span<const PerCell> cells);

}  // namespace mcsadapt::stats
