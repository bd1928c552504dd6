#pragma once

// Drive-test trace ingestion: per-packet traces become per-sweep supervised
// samples with GPS context, area labels and round ids.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcsadapt/geo.hpp"
#include "mcsadapt/matrix.hpp"

namespace mcsadapt::ingest {

inline constexpr int kMaxMcs = 19;
inline constexpr int kMcsCycle = 20;
inline constexpr int kNothingDecoded = -1;

struct PacketRecord {
  std::int64_t timestamp_ms = 0;
  int mcs = 0;
  bool decoded = false;
  double snr = 0.0;
  double rsrp = 0.0;
  double rssi = 0.0;
  double noise_power = 0.0;
  double rx_power = 0.0;
  std::optional<double> rx_gain;
  bool interpolated = false;
};

enum class User { kTx, kRx };

struct GeoFix {
  std::int64_t timestamp_ms = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double velocity = 0.0;
  User user = User::kRx;
};

enum class Area { kAvenue, kPark, kHighway, kResidential, kTunnel, kUnlabeled };

std::string_view to_string(Area a);
/// Throws DataError for unknown names.
Area area_from_string(std::string_view s);

// Canonical feature order of a sweep sample.
enum Feature : std::size_t {
  kSnr,
  kRxPower,
  kRssi,
  kRsrp,
  kNoisePower,
  kRxGain,
  kDistance,
  kSpeedTx,
  kSpeedRx,
  kLatTx,
  kLatRx,
  kLonTx,
  kLonRx,
  kFeatureCount
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "snr",        "rx_power", "rssi",     "rsrp",   "noise_power",
    "rx_gain",    "distance_m", "speed_tx", "speed_rx", "lat_tx",
    "lat_rx",     "lon_tx",   "lon_rx"};

/// One aggregated MCS sweep. Features not yet known are NaN.
struct SweepSample {
  std::int64_t sweep_start_ms = 0;
  int target_mcs = kNothingDecoded;
  std::array<double, kFeatureCount> features{};
  int round_id = -1;
  Area area = Area::kUnlabeled;
  bool gps_stale = false;
};

/// Supervised samples ready for learning. Features are stored row-major in
/// `feature_names` order.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;
  std::vector<int> target_mcs;
  std::vector<int> round_id;
  std::vector<Area> area;
  std::vector<std::int64_t> sweep_start_ms;

  std::size_t size() const noexcept { return target_mcs.size(); }
  std::size_t dim() const noexcept { return feature_names.size(); }

  /// Sorted distinct round ids.
  std::vector<int> rounds() const;

  Dataset subset(std::span<const std::size_t> indices) const;
  /// Restricts columns to `names`, in that order. Throws ConfigError if a name
  /// is not present.
  Dataset select_features(std::span<const std::string> names) const;

  /// Rows `indices` as a design matrix with targets.
  FeatureMatrix to_feature_matrix(std::span<const std::size_t> indices) const;
  FeatureMatrix to_feature_matrix() const;

  void append(std::span<const double> x, int target, int round, Area a,
              std::int64_t start_ms);

  /// Throws ContractError when column arities disagree.
  void validate() const;
};

// ---- trace parsing -------------------------------------------------------

/// Column names of the trace CSV. An empty rx_gain name disables the column;
/// otherwise it is read when present in the header.
struct TraceSchema {
  std::string timestamp_ms = "timestamp_ms";
  std::string mcs = "mcs";
  std::string decoded = "decoded";
  std::string snr = "snr";
  std::string rsrp = "rsrp";
  std::string rssi = "rssi";
  std::string noise_power = "noise_power";
  std::string rx_power = "rx_power";
  std::string rx_gain = "rx_gain";
};

struct TraceParseResult {
  std::vector<PacketRecord> records;
  std::size_t rejected = 0;
  /// 1-based line numbers of rejected rows.
  std::vector<std::size_t> rejected_lines;
};

/// Throws SchemaError, OrderingError or EmptyInputError.
TraceParseResult parse_trace(std::istream& in, const TraceSchema& schema = {});
TraceParseResult parse_trace(const std::string& path, const TraceSchema& schema = {});

struct GpsParseResult {
  std::vector<GeoFix> tx;
  std::vector<GeoFix> rx;
  std::size_t rejected = 0;
};

/// GPS CSV: timestamp_ms,user,latitude,longitude,velocity with user tx|rx.
/// Fixes are sorted by timestamp per user.
GpsParseResult parse_gps(std::istream& in);
GpsParseResult parse_gps(const std::string& path);

// ---- reconstruction and aggregation --------------------------------------

struct GapOptions {
  int mcs_cycle_len = kMcsCycle;
  /// Gaps with more missing packets than this split the trace.
  std::int64_t max_gap_ms = 1000;
  /// Optional trace span; missing packets before the first or after the last
  /// real record are filled with the nearest real values.
  std::optional<std::int64_t> span_start_ms;
  std::optional<std::int64_t> span_end_ms;
};

using Segment = std::vector<PacketRecord>;

/// Fills every missing millisecond. Inserted records are undecoded and
/// interpolated, carry the MCS implied by the sweep cycle and linearly
/// interpolated PHY values.
std::vector<Segment> reconstruct_gaps(std::span<const PacketRecord> records,
                                      const GapOptions& options = {});

struct AggregateResult {
  std::vector<SweepSample> samples;
  std::size_t discarded_packets = 0;
  std::vector<std::string> warnings;
};

/// One sample per complete 0..cycle_len-1 run of consecutive packets.
AggregateResult aggregate_sweeps(std::span<const PacketRecord> records,
                                 int mcs_cycle_len = kMcsCycle);

struct MergeResult {
  std::vector<SweepSample> samples;
  std::size_t dropped_before_first_fix = 0;
  std::size_t stale = 0;
};

struct FixMatch {
  const GeoFix* fix = nullptr;
  bool stale = false;
};

/// Nearest fix to `t` within `tol`, otherwise the last earlier fix (stale),
/// otherwise none. `fixes` must be sorted by timestamp.
FixMatch match_fix(std::span<const GeoFix> fixes, std::int64_t t, std::int64_t tol);

/// Attaches the nearest fix of each user within `tolerance_ms`, otherwise the
/// last earlier fix (flagged stale). Samples preceding every fix are dropped.
/// Throws ConfigError when a user has no fixes.
MergeResult merge_gps(std::span<const SweepSample> samples,
                      std::span<const GeoFix> fixes_tx,
                      std::span<const GeoFix> fixes_rx,
                      std::int64_t tolerance_ms = 1000);

/// Point-in-polygon on the RX position; the first containing polygon in file
/// order wins. Throws DataError for polygons with unknown area names.
std::vector<SweepSample> label_areas(std::span<const SweepSample> samples,
                                     std::span<const geo::Polygon> polygons);

struct RoundRange {
  int id = 0;
  std::int64_t start_ms = 0;  // inclusive
  std::int64_t end_ms = 0;    // inclusive
};

/// Reads {"rounds": [{"id": 0, "start_ms": ..., "end_ms": ...}, ...]}; a
/// missing id defaults to the position in the list.
std::vector<RoundRange> parse_round_ranges(std::istream& in);
std::vector<RoundRange> load_round_ranges(const std::string& path);

struct SplitResult {
  Dataset dataset;
  std::size_t dropped = 0;
};

/// Assigns round ids and builds the dataset. A feature column is kept only if
/// it is finite for every sample. Throws ConfigError on overlapping ranges.
SplitResult split_rounds(std::span<const SweepSample> samples,
                         std::span<const RoundRange> boundaries);

// ---- dataset file ----------------------------------------------------------

/// Columns: feature_names..., target_mcs, round_id, area, sweep_start_ms.
void write_dataset(std::ostream& out, const Dataset& ds);
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::string& path);

// ---- full pipeline ---------------------------------------------------------

struct PipelineOptions {
  GapOptions gaps;
  std::int64_t gps_tolerance_ms = 1000;
};

struct PipelineSummary {
  std::size_t packets = 0;
  std::size_t interpolated_packets = 0;
  std::size_t segments = 0;
  std::size_t sweeps = 0;
  std::size_t discarded_packets = 0;
  std::size_t dropped_before_first_fix = 0;
  std::size_t stale_gps = 0;
  std::size_t dropped_outside_rounds = 0;
  std::size_t samples = 0;
  std::size_t rounds = 0;
  std::vector<std::string> warnings;
};

struct PipelineResult {
  Dataset dataset;
  PipelineSummary summary;
  /// Every packet after gap reconstruction, in time order.
  std::vector<PacketRecord> reconstructed;
};

/// Reconstruction, sweep aggregation, GPS merge, area labels and round split.
PipelineResult run_pipeline(std::span<const PacketRecord> packets,
                            std::span<const GeoFix> fixes_tx, std::span<const GeoFix> fixes_rx,
                            std::span<const geo::Polygon> polygons,
                            std::span<const RoundRange> rounds,
                            const PipelineOptions& options = {});

nlohmann::json to_json(const PipelineSummary& s);

}  // namespace mcsadapt::ingest
