#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpqkd/config.hpp"
#include "fpqkd/decoy.hpp"
#include "fpqkd/detection.hpp"
#include "fpqkd/keyrate.hpp"

namespace fpqkd {

/// Precomputed geometry shared by every analysis path: the region list plus
/// per-region masses and photon moments under the reshaped density.
struct RegionContext {
  std::vector<Region> regions;
  std::vector<double> masses;
  std::vector<PhotonMoments> moments;

  static RegionContext build(const RunConfig& cfg);

  int index_of(const std::string& label) const;  // -1 if absent
};

struct SimulationSummary {
  std::vector<RegionTally> tallies;
  std::uint64_t n_generated = 0;
  std::uint64_t n_kept = 0;
  double keep_fraction = 0.0;
};

struct TraceRecord {
  double mu_h, mu_v, mu_d;
};

/// Sharded Monte Carlo over cfg.run.n_samples pulses. Deterministic in the
/// seed and independent of the shard count. If `trace_out` is non-null, all
/// generated samples (pre-acceptance) are appended to it in index order.
SimulationSummary run_simulation(const RunConfig& cfg, const RegionContext& ctx,
                                 std::vector<TraceRecord>* trace_out = nullptr);

/// Decoy constraint sets assembled from tallies. Z-basis observations pool
/// the scaled H/V sector pairs; X-basis observations use the X sectors.
DecoyConstraintSet make_z_constraints(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const RegionTally> tallies, bool asymptotic);
DecoyConstraintSet make_x_constraints(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const RegionTally> tallies, bool asymptotic);

struct PointAnalysis {
  double loss_db = 0.0;
  std::vector<RegionTally> tallies;
  DecoyBounds bounds;
  KeyRateReport report;
};

/// Full decoy + key-rate analysis on a tally set (Monte Carlo or expected).
PointAnalysis analyze_tallies(const RunConfig& cfg, const RegionContext& ctx,
                              std::span<const RegionTally> tallies, double loss_db,
                              bool asymptotic);

/// Asymptotic pipeline at one channel loss: expected tallies by quadrature,
/// then decoy bounds and the key rate.
PointAnalysis analytic_point(const RunConfig& cfg, const RegionContext& ctx, double loss_db);

/// Analytic loss sweep; points evaluate independently across a worker pool.
std::vector<SweepRow> sweep_key_rates(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const double> loss_points);

/// Trace container formats: CSV with header mu_h,mu_v,mu_d, or fixed-width
/// binary (8-byte magic then 3 little-endian doubles per record).
inline constexpr char kTraceMagic[8] = {'F', 'P', 'Q', 'K', 'D', 'T', 'R', '1'};

std::string trace_to_csv(std::span<const TraceRecord> records);
std::string trace_to_binary(std::span<const TraceRecord> records);
std::vector<TraceRecord> parse_trace(const std::string& content);

struct AnalyzeSummary {
  std::vector<RegionTally> tallies;  // classification counts only
  std::uint64_t n_records = 0;
  std::uint64_t n_kept = 0;
  double keep_fraction = 0.0;
  std::uint64_t n_clamped = 0;       // azimuth arguments clamped into [-1, 1]
  double clamped_fraction = 0.0;
};

/// Alice-side re-analysis of recorded local measurements: validation,
/// acceptance-rejection with the config seed, azimuth recovery, and
/// classification. Throws DataError with the record index on bad records.
AnalyzeSummary analyze_trace(const RunConfig& cfg, const RegionContext& ctx,
                             std::span<const TraceRecord> records);

}  // namespace fpqkd
