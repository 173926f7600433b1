#include "fpqkd/phase_source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fpqkd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}
}  // namespace

std::array<double, 4> phases_at(std::uint64_t seed, std::uint64_t index) {
  SampleStream stream(seed, index);
  std::array<double, 4> q;
  for (unsigned k = 0; k < 4; ++k) q[k] = kTwoPi * stream.uniform(lane::phase0 + k);
  return q;
}

std::vector<std::array<double, 4>> sample_phases(std::uint64_t seed, std::size_t n,
                                                 std::uint64_t index_offset) {
  if (n < 1) throw std::invalid_argument("sample_phases: n must be >= 1");
  std::vector<std::array<double, 4>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = phases_at(seed, index_offset + i);
  return out;
}

double interfere(double phi_a, double phi_b) {
  return 0.5 * (1.0 + std::cos(phi_a - phi_b));
}

PulseSample make_sample(const std::array<double, 4>& q, const SourceConfig& cfg) {
  PulseSample s;
  s.phi_raw = q;
  s.mu_h = cfg.mu_max_per_pol * interfere(q[0], q[1]);
  s.mu_v = cfg.mu_max_per_pol * interfere(q[2], q[3]);
  const double phi_h = q[0] - q[1];
  const double phi_v = q[2] - q[3];
  s.phi_hv = mod_2pi(phi_v - phi_h);
  s.valid = true;
  return s;
}

double intensity_pdf(double mu, double mu_max) {
  if (!(mu > 0.0) || !(mu < mu_max))
    throw std::domain_error("intensity_pdf: mu outside (0, mu_max)");
  return 1.0 / (std::numbers::pi * std::sqrt(mu * (mu_max - mu)));
}

double intensity_cdf(double mu, double mu_max) {
  if (mu <= 0.0) return 0.0;
  if (mu >= mu_max) return 1.0;
  return (2.0 / std::numbers::pi) * std::asin(std::sqrt(mu / mu_max));
}

std::vector<PulseSample> generate_train(std::size_t n_pulses, const SourceConfig& cfg) {
  if (!cfg.train_mode)
    throw std::invalid_argument("generate_train: train_mode not enabled");
  if (n_pulses < 8)
    throw std::invalid_argument("generate_train: need at least 8 pulses");
  // Per-pulse phases, indexed by pulse position (lane 0 of each index).
  std::vector<double> phase(n_pulses);
  for (std::size_t j = 0; j < n_pulses; ++j)
    phase[j] = kTwoPi * SampleStream(cfg.rng_seed, j).uniform(lane::phase0);
  std::vector<PulseSample> out;
  out.reserve(n_pulses - 3);
  for (std::size_t i = 0; i + 3 < n_pulses; ++i) {
    PulseSample s = make_sample({phase[i], phase[i + 1], phase[i + 2], phase[i + 3]}, cfg);
    s.valid = (i % 4 == 0);
    out.push_back(s);
  }
  return out;
}

LocalReadout local_readout(const PulseSample& s) {
  LocalReadout r;
  r.mu_h = s.mu_h;
  r.mu_v = s.mu_v;
  r.mu_d = 0.5 * (s.mu_h + s.mu_v + 2.0 * std::sqrt(s.mu_h * s.mu_v) * std::cos(s.phi_hv));
  r.mu_a = s.mu_h + s.mu_v - r.mu_d;
  return r;
}

}  // namespace fpqkd
