#include "mcsadapt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::synthetic {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg(double rad) { return rad * 180.0 / kPi; }

// Triangle wave between lo and hi with the given rate, starting at lo.
double distance_at(double t_s, const DriveOptions& o) {
  const double span = o.max_distance_m - o.min_distance_m;
  const double period = 2.0 * span / o.relative_speed_mps;
  const double phase = std::fmod(t_s, period) / period;
  const double tri = phase < 0.5 ? 2.0 * phase : 2.0 - 2.0 * phase;
  return o.min_distance_m + span * tri;
}

struct Position {
  geo::LatLon tx;
  geo::LatLon rx;
  double distance = 0.0;
};

Position position_at(double t_s, const DriveOptions& o) {
  const double north = o.tx_speed_mps * t_s;
  const double lat = o.origin.lat + deg(north / geo::kEarthRadiusM);
  const double d = distance_at(t_s, o);
  const double lon_rx = o.origin.lon + deg(d / (geo::kEarthRadiusM * std::cos(lat * kPi / 180.0)));
  return {{lat, o.origin.lon}, {lat, lon_rx}, d};
}

// East offset bands of the RX position.
double area_offset_db(double d) {
  if (d < 150.0) return 0.0;   // avenue
  if (d < 300.0) return -4.0;  // park
  return 2.0;                  // highway
}

geo::Polygon band(const std::string& name, const DriveOptions& o, double east_lo, double east_hi) {
  const double lat_lo = o.origin.lat - 0.01;
  const double lat_hi = o.origin.lat + 0.2;
  const double k = 1.0 / (geo::kEarthRadiusM * std::cos(o.origin.lat * kPi / 180.0));
  const double lon_lo = o.origin.lon + deg(east_lo * k);
  const double lon_hi = o.origin.lon + deg(east_hi * k);
  return {name, {{lat_lo, lon_lo}, {lat_lo, lon_hi}, {lat_hi, lon_hi}, {lat_hi, lon_lo}}};
}

}  // namespace

DriveTrace generate_drive(const DriveOptions& o) {
  if (o.rounds < 1 || o.sweeps_per_round < 1 || o.mcs_cycle_len < 1 ||
      !(o.max_distance_m > o.min_distance_m) || !(o.min_distance_m > 0) ||
      !(o.relative_speed_mps > 0)) {
    throw ConfigError("synthetic drive: invalid options");
  }
  DriveTrace out;
  out.areas = {band("avenue", o, -50.0, 150.0), band("park", o, 150.0, 300.0),
               band("highway", o, 300.0, 2000.0)};

  const std::int64_t sweep_ms = o.mcs_cycle_len;
  const std::int64_t round_ms = sweep_ms * o.sweeps_per_round;
  std::int64_t t0 = 10000;
  for (int r = 0; r < o.rounds; ++r) {
    Rng rng(derive_seed(o.seed, "drive-round", static_cast<std::uint64_t>(r)));
    const std::int64_t t_end = t0 + round_ms - 1;
    out.rounds.push_back({r, t0, t_end});

    for (std::int64_t t = t0 - 1000; t <= t_end + 1000; t += 1000) {
      const double ts = static_cast<double>(t - t0) / 1000.0;
      const Position p = position_at(ts, o);
      const double v_rx = std::hypot(o.tx_speed_mps, o.relative_speed_mps);
      out.tx.push_back({t, p.tx.lat, p.tx.lon, o.tx_speed_mps, ingest::User::kTx});
      out.rx.push_back({t, p.rx.lat, p.rx.lon, v_rx, ingest::User::kRx});
    }

    double shadow = 0.0;
    const double rho = 0.95;
    for (int s = 0; s < o.sweeps_per_round; ++s) {
      shadow = rho * shadow + std::sqrt(1.0 - rho * rho) * o.shadowing_db * standard_normal(rng);
      const std::int64_t start = t0 + s * sweep_ms;
      for (int m = 0; m < o.mcs_cycle_len; ++m) {
        const std::int64_t t = start + m;
        const Position p = position_at(static_cast<double>(t - t0) / 1000.0, o);
        ingest::PacketRecord rec;
        rec.timestamp_ms = t;
        rec.mcs = m;
        rec.noise_power = -95.0 + 0.5 * standard_normal(rng);
        rec.rsrp = -50.0 - 25.0 * std::log10(p.distance) + area_offset_db(p.distance) + shadow +
                   0.5 * standard_normal(rng);
        rec.snr = rec.rsrp - rec.noise_power + 20.0;
        rec.rssi = rec.rsrp + 27.6 + 0.5 * standard_normal(rng);
        rec.rx_power = rec.rssi + 0.3 * standard_normal(rng);
        if (o.with_rx_gain) rec.rx_gain = 30.0 + 0.2 * standard_normal(rng);
        const double capacity = (rec.snr - 2.0) / 1.3 + o.fading_mcs * standard_normal(rng);
        rec.decoded = static_cast<double>(m) <= capacity;
        out.truth.push_back(rec);
        if (rec.decoded) out.packets.push_back(rec);
      }
    }
    t0 = t_end + 1 + o.round_gap_ms;
  }
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const ingest::PacketRecord> packets) {
  const bool gain = std::all_of(packets.begin(), packets.end(),
                                [](const auto& p) { return p.rx_gain.has_value(); });
  out << "timestamp_ms,mcs,decoded,snr,rsrp,rssi,noise_power,rx_power";
  if (gain) out << ",rx_gain";
  out << '\n';
  for (const auto& p : packets) {
    out << p.timestamp_ms << ',' << p.mcs << ',' << (p.decoded ? 1 : 0) << ','
        << csv::format_double(p.snr) << ',' << csv::format_double(p.rsrp) << ','
        << csv::format_double(p.rssi) << ',' << csv::format_double(p.noise_power) << ','
        << csv::format_double(p.rx_power);
    if (gain) out << ',' << csv::format_double(*p.rx_gain);
    out << '\n';
  }
}

void write_gps_csv(std::ostream& out, std::span<const ingest::GeoFix> tx,
                   std::span<const ingest::GeoFix> rx) {
  out << "timestamp_ms,user,latitude,longitude,velocity\n";
  auto emit = [&](const ingest::GeoFix& f, const char* user) {
    out << f.timestamp_ms << ',' << user << ',' << csv::format_double(f.latitude) << ','
        << csv::format_double(f.longitude) << ',' << csv::format_double(f.velocity) << '\n';
  };
  for (const auto& f : tx) emit(f, "tx");
  for (const auto& f : rx) emit(f, "rx");
}

void write_polygons_json(std::ostream& out, std::span<const geo::Polygon> polygons) {
  nlohmann::json areas = nlohmann::json::array();
  for (const auto& p : polygons) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& v : p.ring) ring.push_back({v.lat, v.lon});
    areas.push_back({{"name", p.name}, {"ring", ring}});
  }
  out << nlohmann::json{{"areas", areas}}.dump(2) << '\n';
}

void write_rounds_json(std::ostream& out, std::span<const ingest::RoundRange> rounds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rounds) {
    arr.push_back({{"id", r.id}, {"start_ms", r.start_ms}, {"end_ms", r.end_ms}});
  }
  out << nlohmann::json{{"rounds", arr}}.dump(2) << '\n';
}

void write_drive(const std::string& dir, const DriveTrace& trace) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (std::filesystem::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("trace.csv");
    write_trace_csv(f, trace.packets);
  }
  {
    auto f = open("gps.csv");
    write_gps_csv(f, trace.tx, trace.rx);
  }
  {
    auto f = open("areas.json");
    write_polygons_json(f, trace.areas);
  }
  {
    auto f = open("rounds.json");
    write_rounds_json(f, trace.rounds);
  }
}

ingest::Dataset make_tabular(const TabularOptions& o) {
  if (o.rounds < 1 || o.per_round < 1 || o.noise_features < 0) {
    throw ConfigError("synthetic tabular: invalid options");
  }
  ingest::Dataset ds;
  ds.feature_names.push_back("signal");
  for (int k = 0; k < o.noise_features; ++k) ds.feature_names.push_back("noise" + std::to_string(k));
  ds.features = Matrix(0, ds.feature_names.size());
  Rng rng(derive_seed(o.seed, "tabular"));
  std::vector<double> row(ds.feature_names.size());
  std::int64_t t = 0;
  for (int r = 0; r < o.rounds; ++r) {
    for (int i = 0; i < o.per_round; ++i) {
      row[0] = uniform(rng, 0.0, 32.0);
      for (int k = 0; k < o.noise_features; ++k) row[1 + k] = uniform01(rng);
      const double y = std::floor(row[0] / 1.6 + o.label_noise * standard_normal(rng));
      const int target = static_cast<int>(std::clamp(y, -1.0, 19.0));
      ds.append(row, target, r, ingest::Area::kUnlabeled, t);
      t += 20;
    }
  }
  return ds;
}

}  // namespace mcsadapt::synthetic
