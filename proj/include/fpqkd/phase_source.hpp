#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fpqkd/rng.hpp"

namespace fpqkd {

struct SourceConfig {
  double mu_max_per_pol = 0.5;  // photons/pulse after attenuation
  bool train_mode = false;      // sliding-window pulse train vs i.i.d. quadruples
  std::uint64_t rng_seed = 1;
};

/// One post-interference signal: intensities of the H and V components,
/// their relative phase, the raw source phases, and whether the sample is an
/// independent signal (always true in i.i.d. mode; 1-in-4 in train mode).
struct PulseSample {
  double mu_h = 0.0;
  double mu_v = 0.0;
  double phi_hv = 0.0;                  // (phi_V - phi_H) mod 2pi
  std::array<double, 4> phi_raw{};
  bool valid = true;
};

/// Rescaled local-measurement values; mu_d + mu_a == mu_h + mu_v.
struct LocalReadout {
  double mu_h = 0.0;
  double mu_v = 0.0;
  double mu_d = 0.0;
  double mu_a = 0.0;
};

/// Draw n quadruples of phases, i.i.d. uniform on [0, 2pi). Quadruple i uses
/// sample index `index_offset + i` of the counter-based stream.
std::vector<std::array<double, 4>> sample_phases(std::uint64_t seed, std::size_t n,
                                                 std::uint64_t index_offset = 0);

/// Phases of a single sample index (lanes 0..3).
std::array<double, 4> phases_at(std::uint64_t seed, std::uint64_t index);

/// Normalized interference output: (1 + cos(phi_a - phi_b)) / 2 in [0, 1].
double interfere(double phi_a, double phi_b);

/// Build a sample from a phase quadruple: mu_h/mu_v from the two interference
/// stages, phi_hv = (phi_V - phi_H) mod 2pi.
PulseSample make_sample(const std::array<double, 4>& quadruple,
                        const SourceConfig& cfg);

/// Arcsine-law intensity density 1/(pi*sqrt(mu*(mu_max-mu))).
/// Throws std::domain_error outside (0, mu_max).
double intensity_pdf(double mu, double mu_max);

/// Arcsine-law cdf (2/pi)*asin(sqrt(mu/mu_max)), clamped to [0, mu_max].
double intensity_cdf(double mu, double mu_max);

/// Sliding-window pulse train: sample i interferes pulses (i, i+1) for H and
/// (i+2, i+3) for V; only starting indices i == 0 (mod 4) are independent and
/// carry valid=true. Requires n_pulses >= 8 and train_mode set.
std::vector<PulseSample> generate_train(std::size_t n_pulses, const SourceConfig& cfg);

/// Local Z/X measurement pair for a sample:
/// mu_d = (mu_h + mu_v + 2*sqrt(mu_h*mu_v)*cos(phi)) / 2, mu_a by energy
/// conservation.
LocalReadout local_readout(const PulseSample& s);

}  // namespace fpqkd
