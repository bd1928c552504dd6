#pragma once

// Synthetic drive-test data: a sidelink MCS sweep between two vehicles with
// distance-driven path loss, per-area offsets, shadowing and per-packet fading.

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcsadapt/geo.hpp"
#include "mcsadapt/ingest.hpp"

namespace mcsadapt::synthetic {

struct DriveOptions {
  std::uint64_t seed = 1;
  int rounds = 3;
  int sweeps_per_round = 400;
  int mcs_cycle_len = ingest::kMcsCycle;
  double min_distance_m = 20.0;
  double max_distance_m = 400.0;
  /// Rate of change of the TX-RX distance.
  double relative_speed_mps = 40.0;
  double tx_speed_mps = 12.0;
  double shadowing_db = 3.0;
  double fading_mcs = 0.7;
  bool with_rx_gain = true;
  std::int64_t round_gap_ms = 30000;
  geo::LatLon origin{52.52, 13.405};
};

struct DriveTrace {
  /// What a receiver capture sees: decoded packets only.
  std::vector<ingest::PacketRecord> packets;
  /// Every transmission with its true decode outcome.
  std::vector<ingest::PacketRecord> truth;
  std::vector<ingest::GeoFix> tx;
  std::vector<ingest::GeoFix> rx;
  std::vector<ingest::RoundRange> rounds;
  std::vector<geo::Polygon> areas;
};

DriveTrace generate_drive(const DriveOptions& options);

void write_trace_csv(std::ostream& out, std::span<const ingest::PacketRecord> packets);
void write_gps_csv(std::ostream& out, std::span<const ingest::GeoFix> tx,
                   std::span<const ingest::GeoFix> rx);
void write_polygons_json(std::ostream& out, std::span<const geo::Polygon> polygons);
void write_rounds_json(std::ostream& out, std::span<const ingest::RoundRange> rounds);

/// Writes trace.csv, gps.csv, areas.json and rounds.json into `dir`.
void write_drive(const std::string& dir, const DriveTrace& trace);

struct TabularOptions {
  std::uint64_t seed = 1;
  int rounds = 4;
  int per_round = 60;
  /// Columns of pure noise appended after the informative "signal" column.
  int noise_features = 1;
  double label_noise = 1.0;
};

/// Dataset with one informative column "signal" (target roughly signal / 1.6)
/// and `noise_features` columns "noise0", "noise1", ... of U(0, 1).
ingest::Dataset make_tabular(const TabularOptions& options);

}  // namespace mcsadapt::synthetic
