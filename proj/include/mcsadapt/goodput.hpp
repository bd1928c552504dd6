#pragma once

// Goodput scoring of MCS choices for one 48-RB transport block per millisecond.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcsadapt::goodput {

inline constexpr int kMcsLevels = 20;
inline constexpr int kResourceBlocks = 48;
inline constexpr double kTransportBlocksPerSecond = 1000.0;

/// Transport block size in bits per MCS index, for 48 resource blocks.
struct TbsTable {
  std::array<std::int64_t, kMcsLevels> entries{};
  std::string source_tag;

  /// Throws DataError when an invariant does not hold.
  void validate() const;
};

/// I_MCS -> I_TBS for the uplink/sidelink modulation table (QPSK up to 10,
/// 16-QAM from 11). Throws DomainError outside [0, 28].
int mcs_to_tbs_index(int mcs);

/// Reads `mcs,tbs_bits` rows. Leading '#' lines carry metadata; a
/// `# checksum: fnv1a64:<hex>` line is verified against the data lines.
TbsTable parse_tbs_table(std::istream& in);
TbsTable load_tbs_table(const std::string& path);

/// Checksum over the header and data rows as written in the file.
std::uint64_t tbs_checksum(const TbsTable& table);

/// Throws DomainError for mcs outside [0, 19].
std::int64_t tbs_lookup(const TbsTable& table, int mcs);

/// round-half-up, then clamp to [0, 19]. Requires a finite value.
int rounded_mcs(double predicted);

/// Achievable goodput in bit/s of one sample; 0 on overshoot or a non-finite
/// prediction.
double sample_goodput(double predicted, int target_mcs, const TbsTable& table);

struct GoodputScore {
  double mean_bps = 0.0;
  std::vector<double> per_sample_bps;
  std::size_t non_finite = 0;
};

/// Throws ContractError on length mismatch or empty input.
GoodputScore mean_goodput(std::span<const double> predictions,
                          std::span<const int> targets, const TbsTable& table);

/// Goodput of always picking the highest decodable MCS.
double oracle_goodput(std::span<const int> targets, const TbsTable& table);

/// Goodput of using `mcs` for every sample.
double static_goodput(std::span<const int> targets, int mcs, const TbsTable& table);

struct StaticChoice {
  int mcs = 0;
  double bps = 0.0;
};

/// Best fixed MCS; ties go to the lowest MCS.
StaticChoice best_static_mcs(std::span<const int> targets, const TbsTable& table);

struct GoodputReport {
  double mean_goodput_bps = 0.0;
  std::vector<double> per_sample_bps;
  double oracle_bps = 0.0;
  int best_static_mcs = 0;
  double best_static_bps = 0.0;
  // Same baselines over samples with at least one decoded packet.
  double oracle_decodable_bps = 0.0;
  double best_static_decodable_bps = 0.0;
  std::size_t samples = 0;
  std::size_t undecodable_samples = 0;
  std::size_t non_finite_predictions = 0;
};

GoodputReport make_report(std::span<const double> predictions, std::span<const int> targets,
                          const TbsTable& table);
/// Baselines only (no predictions).
GoodputReport baseline_report(std::span<const int> targets, const TbsTable& table);

nlohmann::json to_json(const GoodputReport& report, bool include_per_sample = false);

}  // namespace mcsadapt::goodput
