// Command-line driver for the fully-passive QKD simulation and analysis
// pipeline: deterministic Monte Carlo runs, trace re-analysis, decoy-state
// bounds on supplied tallies, and analytic key-rate sweeps.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpqkd/pipeline.hpp"
#include "fpqkd/report.hpp"

namespace {

using namespace fpqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

RunConfig resolve_config(const std::string& config_path,
                         std::optional<std::uint64_t> seed,
                         std::optional<std::uint64_t> samples,
                         std::optional<std::string> out_dir) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (seed) cfg.source.rng_seed = *seed;
  if (samples) cfg.run.n_samples = *samples;
  if (out_dir) cfg.run.out_dir = *out_dir;
  validate(cfg);
  return cfg;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& artifacts) {
  RunManifest m;
  m.cfg_hash = config_hash(cfg);
  m.seed = cfg.source.rng_seed;
  m.n_samples = cfg.run.n_samples;
  m.shards = cfg.run.shards;
  m.version = kVersion;
  m.artifacts = artifacts;
  write_file(join_path(cfg.run.out_dir, "run_manifest.txt"), manifest_text(m, cfg));
}

int cmd_simulate(const RunConfig& cfg, const std::string& trace_path) {
  RegionContext ctx = RegionContext::build(cfg);
  std::vector<TraceRecord> trace;
  SimulationSummary sim =
      run_simulation(cfg, ctx, trace_path.empty() ? nullptr : &trace);

  const std::uint64_t hash = config_hash(cfg);
  std::vector<std::string> artifacts = {"tallies.csv", "bounds.csv", "keyrate.csv"};
  write_file(join_path(cfg.run.out_dir, "tallies.csv"), tallies_csv(hash, sim.tallies));

  PointAnalysis pa = analyze_tallies(cfg, ctx, sim.tallies, cfg.channel.loss_db,
                                     /*asymptotic=*/false);
  write_file(join_path(cfg.run.out_dir, "bounds.csv"), bounds_csv(hash, pa.bounds));
  write_file(join_path(cfg.run.out_dir, "keyrate.csv"),
             keyrate_csv(hash, cfg.channel.loss_db, pa.report));

  if (!trace_path.empty()) {
    const bool binary = trace_path.size() > 4 &&
                        trace_path.compare(trace_path.size() - 4, 4, ".bin") == 0;
    write_file(trace_path, binary ? trace_to_binary(trace) : trace_to_csv(trace));
    artifacts.push_back(trace_path);
  }
  write_manifest(cfg, artifacts);

  std::printf("samples: %" PRIu64 "  kept: %" PRIu64 " (%.4f)\n", sim.n_generated,
              sim.n_kept, sim.keep_fraction);
  std::printf("Y1_low: %s  e1_high: %s  R: %s\n",
              format_g17(pa.bounds.y1_low).c_str(),
              format_g17(pa.bounds.e1_high).c_str(),
              format_g17(pa.report.r_clamped).c_str());
  std::printf("artifacts written to %s\n", cfg.run.out_dir.c_str());
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, const std::string& trace_path) {
  RegionContext ctx = RegionContext::build(cfg);
  const auto records = parse_trace(read_file(trace_path));
  AnalyzeSummary sum = analyze_trace(cfg, ctx, records);
  if (sum.clamped_fraction > 0.01)
    std::fprintf(stderr,
                 "WARNING: %.2f%% of azimuth arguments clamped; "
                 "trace calibration looks suspect\n",
                 100.0 * sum.clamped_fraction);
  const std::uint64_t hash = config_hash(cfg);
  write_file(join_path(cfg.run.out_dir, "tallies.csv"), tallies_csv(hash, sum.tallies));
  write_manifest(cfg, {"tallies.csv"});
  std::printf("records: %" PRIu64 "  kept: %" PRIu64 " (%.4f)  clamped: %" PRIu64 "\n",
              sum.n_records, sum.n_kept, sum.keep_fraction, sum.n_clamped);
  std::printf("artifacts written to %s\n", cfg.run.out_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, double from_db, double to_db, double step_db,
              const std::vector<double>& grid) {
  std::vector<double> points = grid;
  if (points.empty()) {
    if (step_db <= 0.0) throw ConfigError("sweep: step must be > 0");
    for (double L = from_db; L <= to_db + 1e-12; L += step_db) points.push_back(L);
  }
  if (points.empty()) throw ConfigError("sweep: empty loss grid");
  RegionContext ctx = RegionContext::build(cfg);
  const auto rows = sweep_key_rates(cfg, ctx, points);
  write_file(join_path(cfg.run.out_dir, "keyrate_curve.csv"),
             sweep_csv(config_hash(cfg), rows));
  write_manifest(cfg, {"keyrate_curve.csv"});
  for (const auto& r : rows)
    std::printf("%7.2f dB  %8.1f km  R = %s\n", r.loss_db, r.distance_km,
                format_g17(r.rate).c_str());
  return kExitOk;
}

int cmd_bounds(const RunConfig& cfg, const std::string& tallies_path) {
  RegionContext ctx = RegionContext::build(cfg);
  const auto tallies = parse_tallies_csv(read_file(tallies_path));
  PointAnalysis pa = analyze_tallies(cfg, ctx, tallies, cfg.channel.loss_db,
                                     /*asymptotic=*/false);
  const std::uint64_t hash = config_hash(cfg);
  write_file(join_path(cfg.run.out_dir, "bounds.csv"), bounds_csv(hash, pa.bounds));
  write_file(join_path(cfg.run.out_dir, "keyrate.csv"),
             keyrate_csv(hash, cfg.channel.loss_db, pa.report));
  write_manifest(cfg, {"bounds.csv", "keyrate.csv"});
  std::printf("Y1_low: %s  e1Y1_high: %s  e1_high: %s (%s)\n",
              format_g17(pa.bounds.y1_low).c_str(),
              format_g17(pa.bounds.e1y1_high).c_str(),
              format_g17(pa.bounds.e1_high).c_str(), pa.bounds.lp_status.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpqkd - fully-passive decoy-state BB84 simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--seed", seed, "override source.seed");
  app.add_option("--samples", samples, "override run.n_samples");
  app.add_option("--out", out_dir, "override run.out_dir");

  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo pipeline");
  std::string trace_out;
  sim->add_option("--export-trace", trace_out,
                  "write generated samples as a trace (.csv or .bin)");

  auto* ana = app.add_subcommand("analyze", "re-analyze a recorded trace");
  std::string trace_in;
  ana->add_option("trace", trace_in, "trace file (csv or binary)")->required();

  auto* swp = app.add_subcommand("sweep", "analytic key-rate vs loss curve");
  double from_db = 0.0, to_db = 40.0, step_db = 1.0;
  std::vector<double> grid;
  swp->add_option("--from", from_db, "start loss (dB)");
  swp->add_option("--to", to_db, "end loss (dB)");
  swp->add_option("--step", step_db, "step (dB)");
  swp->add_option("--grid", grid, "explicit loss points (dB)")->delimiter(',');

  auto* bnd = app.add_subcommand("bounds", "decoy bounds from a tallies.csv");
  std::string tallies_path;
  bnd->add_option("tallies", tallies_path, "tallies csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(config_path, seed, samples, out_dir);
    if (sim->parsed()) return cmd_simulate(cfg, trace_out);
    if (ana->parsed()) return cmd_analyze(cfg, trace_in);
    if (swp->parsed()) return cmd_sweep(cfg, from_db, to_db, step_db, grid);
    if (bnd->parsed()) return cmd_bounds(cfg, tallies_path);
  } catch (const fpqkd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fpqkd::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
