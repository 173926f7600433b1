#include "fpqkd/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <thread>

#include "fpqkd/report.hpp"

namespace fpqkd {

RegionContext RegionContext::build(const RunConfig& cfg) {
  RegionContext ctx;
  ctx.regions = standard_regions(cfg.regions);
  const double mu_max = cfg.source.mu_max_per_pol;
  ctx.masses.reserve(ctx.regions.size());
  ctx.moments.reserve(ctx.regions.size());
  for (const auto& r : ctx.regions) {
    ctx.masses.push_back(region_mass(r, mu_max));
    ctx.moments.push_back(photon_moments(r, mu_max, cfg.decoy.n_cut));
  }
  return ctx;
}

int RegionContext::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].label == label) return static_cast<int>(i);
  return -1;
}

namespace {

unsigned worker_count(int shards) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min<unsigned>(hw, static_cast<unsigned>(shards));
}

}  // namespace

SimulationSummary run_simulation(const RunConfig& cfg, const RegionContext& ctx,
                                 std::vector<TraceRecord>* trace_out) {
  const ReshapeSpec reshape = cfg.reshape();
  const std::uint64_t n = cfg.run.n_samples;
  const int shards = cfg.run.shards;
  const std::uint64_t seed = cfg.source.rng_seed;
  const bool train = cfg.source.train_mode;

  struct ShardResult {
    std::vector<RegionTally> tallies;
    std::uint64_t generated = 0;
    std::uint64_t kept = 0;
    std::vector<TraceRecord> trace;
  };
  std::vector<ShardResult> results(shards);
  std::atomic<int> next_shard{0};

  const auto work = [&]() {
    for (;;) {
      const int s = next_shard.fetch_add(1);
      if (s >= shards) return;
      ShardResult& res = results[s];
      res.tallies = make_tallies(ctx.regions);
      const std::uint64_t lo = n * s / shards;
      const std::uint64_t hi = n * (s + 1) / shards;
      for (std::uint64_t i = lo; i < hi; ++i) {
        // Train mode keeps only the 1-in-4 independent windows; their phase
        // quadruple comes from per-pulse draws at indices i..i+3.
        if (train && (i % 4 != 0 || i + 3 >= n)) continue;
        SampleStream stream(seed, i);
        PulseSample sample;
        if (train) {
          std::array<double, 4> q;
          for (unsigned k = 0; k < 4; ++k)
            q[k] = 2.0 * std::numbers::pi *
                   SampleStream(seed, i + k).uniform(lane::phase0);
          sample = make_sample(q, cfg.source);
        } else {
          sample = make_sample(phases_at(seed, i), cfg.source);
        }
        ++res.generated;
        if (trace_out) {
          const LocalReadout r = local_readout(sample);
          res.trace.push_back({sample.mu_h, sample.mu_v, r.mu_d});
        }
        if (!accept(sample.mu_h, reshape, stream.uniform(lane::accept_h))) continue;
        if (!accept(sample.mu_v, reshape, stream.uniform(lane::accept_v))) continue;
        ++res.kept;
        const SiftOutcome sift = classify(sample, ctx.regions);
        if (sift.region_indices.empty()) continue;
        const DetectionEvent ev = transmit_and_detect(sample, cfg.channel, stream);
        tally_event(res.tallies, ctx.regions, sift, ev);
      }
    }
  };

  std::vector<std::thread> pool;
  const unsigned workers = worker_count(shards);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  SimulationSummary sum;
  sum.tallies = make_tallies(ctx.regions);
  for (auto& res : results) {
    for (std::size_t k = 0; k < sum.tallies.size(); ++k)
      sum.tallies[k].merge(res.tallies[k]);
    sum.n_generated += res.generated;
    sum.n_kept += res.kept;
    if (trace_out)
      trace_out->insert(trace_out->end(), res.trace.begin(), res.trace.end());
  }
  for (auto& t : sum.tallies) t.finalize();
  sum.keep_fraction =
      sum.n_generated ? static_cast<double>(sum.n_kept) / sum.n_generated : 0.0;
  return sum;
}

namespace {

DecoyObservation pooled_observation(const RegionTally& a, const RegionTally& b,
                                    const PhotonMoments& ma, double mass_a,
                                    const PhotonMoments& mb, double mass_b,
                                    bool asymptotic) {
  DecoyObservation obs;
  obs.moments = combine_moments(ma, mass_a, mb, mass_b);
  if (asymptotic) {
    const double total = mass_a + mass_b;
    obs.q = (a.q * mass_a + b.q * mass_b) / total;
    obs.qe = (a.qe * mass_a + b.qe * mass_b) / total;
    obs.sigma_q = obs.sigma_qe = 0.0;
    return obs;
  }
  RegionTally pooled;
  pooled.n_sent = a.n_sent + b.n_sent;
  pooled.n_detected = a.n_detected + b.n_detected;
  pooled.n_error = a.n_error + b.n_error;
  if (pooled.n_sent == 0) {
    obs.q = obs.qe = 0.0;
    obs.sigma_q = obs.sigma_qe = 1.0;  // no exposures: uninformative
    return obs;
  }
  pooled.finalize();
  obs.q = pooled.q;
  obs.qe = pooled.qe;
  obs.sigma_q = pooled.sigma_q;
  obs.sigma_qe = pooled.sigma_qe;
  return obs;
}

DecoyObservation single_observation(const RegionTally& t, const PhotonMoments& m,
                                    bool asymptotic) {
  DecoyObservation obs;
  obs.moments = m;
  if (asymptotic) {
    obs.q = t.q;
    obs.qe = t.qe;
    obs.sigma_q = obs.sigma_qe = 0.0;
    return obs;
  }
  if (t.n_sent == 0) {
    obs.q = obs.qe = 0.0;
    obs.sigma_q = obs.sigma_qe = 1.0;
    return obs;
  }
  obs.q = t.q;
  obs.qe = t.qe;
  obs.sigma_q = t.sigma_q;
  obs.sigma_qe = t.sigma_qe;
  return obs;
}

const RegionTally& tally_for(std::span<const RegionTally> tallies, const std::string& label) {
  for (const auto& t : tallies)
    if (t.label == label) return t;
  throw DataError("missing tally for region " + label);
}

}  // namespace

DecoyConstraintSet make_z_constraints(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const RegionTally> tallies, bool asymptotic) {
  DecoyConstraintSet set;
  set.basis = Basis::z;
  set.n_cut = cfg.decoy.n_cut;
  set.k_sigma = cfg.decoy.k_sigma;
  for (std::size_t i = 1; i <= cfg.regions.t.size(); ++i) {
    const std::string h = "Z" + std::to_string(i) + "_H";
    const std::string v = "Z" + std::to_string(i) + "_V";
    const int ih = ctx.index_of(h), iv = ctx.index_of(v);
    if (ih < 0 || iv < 0) throw DataError("region context missing " + h + "/" + v);
    set.observations.push_back(pooled_observation(
        tally_for(tallies, h), tally_for(tallies, v), ctx.moments[ih], ctx.masses[ih],
        ctx.moments[iv], ctx.masses[iv], asymptotic));
  }
  return set;
}

DecoyConstraintSet make_x_constraints(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const RegionTally> tallies, bool asymptotic) {
  DecoyConstraintSet set;
  set.basis = Basis::x;
  set.n_cut = cfg.decoy.n_cut;
  set.k_sigma = cfg.decoy.k_sigma;
  for (std::size_t i = 1; i <= cfg.regions.t.size(); ++i) {
    const std::string label = "X" + std::to_string(i);
    const int ix = ctx.index_of(label);
    if (ix < 0) throw DataError("region context missing " + label);
    set.observations.push_back(
        single_observation(tally_for(tallies, label), ctx.moments[ix], asymptotic));
  }
  return set;
}

PointAnalysis analyze_tallies(const RunConfig& cfg, const RegionContext& ctx,
                              std::span<const RegionTally> tallies, double loss_db,
                              bool asymptotic) {
  PointAnalysis out;
  out.loss_db = loss_db;
  out.tallies.assign(tallies.begin(), tallies.end());
  out.bounds = decoy_analysis(make_z_constraints(cfg, ctx, tallies, asymptotic),
                              make_x_constraints(cfg, ctx, tallies, asymptotic));

  const int ih = ctx.index_of("Z_H");
  const int iv = ctx.index_of("Z_V");
  if (ih < 0 || iv < 0) throw DataError("region context missing Z key regions");
  const DecoyObservation key =
      pooled_observation(tally_for(tallies, "Z_H"), tally_for(tallies, "Z_V"),
                         ctx.moments[ih], ctx.masses[ih], ctx.moments[iv],
                         ctx.masses[iv], asymptotic);
  KeyRateInputs in;
  in.p_z = ctx.masses[ih] + ctx.masses[iv];
  in.p1_avg = key.moments.p_n.size() > 1 ? key.moments.p_n[1] : 0.0;
  in.y1_low = out.bounds.y1_low;
  in.e1_high = out.bounds.e1_high;
  in.q_z = key.q;
  in.qe_z = std::min(key.qe, key.q);
  in.f_e = cfg.keyrate.f_e;
  out.report = key_rate(in);
  return out;
}

PointAnalysis analytic_point(const RunConfig& cfg, const RegionContext& ctx, double loss_db) {
  ChannelParams channel = cfg.channel;
  channel.loss_db = loss_db;
  const auto tallies = expected_tallies(ctx.regions, cfg.source.mu_max_per_pol, channel);
  return analyze_tallies(cfg, ctx, tallies, loss_db, /*asymptotic=*/true);
}

std::vector<SweepRow> sweep_key_rates(const RunConfig& cfg, const RegionContext& ctx,
                                      std::span<const double> loss_points) {
  if (loss_points.empty()) throw ConfigError("sweep: empty loss grid");
  std::vector<SweepRow> rows(loss_points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= loss_points.size()) return;
      const PointAnalysis pa = analytic_point(cfg, ctx, loss_points[i]);
      rows[i] = {loss_points[i], db_to_km(loss_points[i]), pa.report.r_clamped,
                 pa.bounds.y1_low, pa.bounds.e1_high};
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(loss_points.size()));
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

std::string trace_to_csv(std::span<const TraceRecord> records) {
  std::ostringstream out;
  out << "mu_h,mu_v,mu_d\n";
  for (const auto& r : records)
    out << format_g17(r.mu_h) << ',' << format_g17(r.mu_v) << ','
        << format_g17(r.mu_d) << '\n';
  return out.str();
}

std::string trace_to_binary(std::span<const TraceRecord> records) {
  std::string out;
  out.reserve(8 + records.size() * 24);
  out.append(kTraceMagic, 8);
  for (const auto& r : records) {
    const double vals[3] = {r.mu_h, r.mu_v, r.mu_d};
    char buf[24];
    std::memcpy(buf, vals, 24);  // little-endian hosts only
    out.append(buf, 24);
  }
  return out;
}

std::vector<TraceRecord> parse_trace(const std::string& content) {
  std::vector<TraceRecord> records;
  if (content.size() >= 8 && std::memcmp(content.data(), kTraceMagic, 8) == 0) {
    const std::size_t payload = content.size() - 8;
    if (payload % 24 != 0)
      throw DataError("binary trace: truncated record at end of file");
    const std::size_t n = payload / 24;
    records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double vals[3];
      std::memcpy(vals, content.data() + 8 + 24 * i, 24);
      records[i] = {vals[0], vals[1], vals[2]};
    }
    return records;
  }
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "mu_h,mu_v,mu_d")
        throw DataError("trace csv: expected header mu_h,mu_v,mu_d");
      header_seen = true;
      continue;
    }
    double vals[3];
    int field = 0;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (field >= 3) break;
      try {
        std::size_t pos = 0;
        vals[field] = std::stod(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (...) {
        throw DataError("trace record " + std::to_string(records.size()) +
                        ": bad field '" + item + "'");
      }
      ++field;
    }
    if (field != 3)
      throw DataError("trace record " + std::to_string(records.size()) +
                      ": expected 3 fields");
    records.push_back({vals[0], vals[1], vals[2]});
  }
  if (!header_seen) throw DataError("trace csv: missing header");
  return records;
}

AnalyzeSummary analyze_trace(const RunConfig& cfg, const RegionContext& ctx,
                             std::span<const TraceRecord> records) {
  const ReshapeSpec reshape = cfg.reshape();
  const double mu_max = cfg.source.mu_max_per_pol;
  AnalyzeSummary sum;
  sum.tallies = make_tallies(ctx.regions);
  sum.n_records = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TraceRecord& rec = records[i];
    const auto bad = [&](const std::string& why) {
      return DataError("trace record " + std::to_string(i) + ": " + why);
    };
    if (!(rec.mu_h >= 0.0) || !(rec.mu_h <= mu_max) || !(rec.mu_v >= 0.0) ||
        !(rec.mu_v <= mu_max))
      throw bad("mu_h/mu_v outside [0, mu_max]");
    if (!(rec.mu_d >= 0.0) || !(rec.mu_d <= 2.0 * mu_max))
      throw bad("mu_d outside [0, 2*mu_max]");
    double mu_a = rec.mu_h + rec.mu_v - rec.mu_d;
    if (mu_a < -1e-6) throw bad("energy conservation violated (mu_a < -1e-6)");
    if (mu_a < 0.0) mu_a = 0.0;  // tolerated noise floor

    SampleStream stream(cfg.source.rng_seed, i);
    if (!accept(rec.mu_h, reshape, stream.uniform(lane::accept_h))) continue;
    if (!accept(rec.mu_v, reshape, stream.uniform(lane::accept_v))) continue;
    ++sum.n_kept;

    // Recovered azimuth lives in [0, pi]; the standard windows are mirror
    // symmetric so membership matches the unfolded angle.
    LocalReadout r{rec.mu_h, rec.mu_v, rec.mu_d, mu_a};
    bool clamped = false;
    PulseSample s;
    s.mu_h = rec.mu_h;
    s.mu_v = rec.mu_v;
    s.phi_hv = azimuth(r, &clamped);
    if (clamped) ++sum.n_clamped;
    const SiftOutcome sift = classify(s, ctx.regions);
    for (std::uint32_t idx : sift.region_indices) ++sum.tallies[idx].n_classified;
  }
  for (auto& t : sum.tallies) t.finalize();
  sum.keep_fraction =
      sum.n_records ? static_cast<double>(sum.n_kept) / sum.n_records : 0.0;
  sum.clamped_fraction =
      sum.n_kept ? static_cast<double>(sum.n_clamped) / sum.n_kept : 0.0;
  return sum;
}

}  // namespace fpqkd
