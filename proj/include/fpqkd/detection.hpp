#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpqkd/postselect.hpp"

namespace fpqkd {

struct ChannelParams {
  double loss_db = 16.7;
  double detector_efficiency = 0.1;
  double dark_prob = 1e-6;          // per detector per gate
  double misalignment_e_d = 0.012;  // single-photon misalignment error probability
  double basis_split = 0.5;         // probability Bob measures Z

  double eta_total() const;
};

struct DetectionEvent {
  std::array<bool, 4> clicks{};  // H, V, D, A detectors
  Basis basis = Basis::z;
  StateLabel squashed = StateLabel::none;  // none == no click in the chosen basis
};

/// Threshold-detector Monte Carlo for one pulse. Polarization is rotated by
/// the misalignment angle, Bob's basis drawn with basis_split, and each
/// detector of that basis clicks with 1 - (1-dark) * exp(-eta_total * mu_arm).
/// Double clicks squash to a uniformly random bit of the basis.
DetectionEvent transmit_and_detect(const PulseSample& s, const ChannelParams& p,
                                   const SampleStream& stream);

/// Exact per-basis gain and error-gain of the same model, with the
/// double-click random assignment integrated analytically. Error-gains are
/// quoted for Alice labels H (Z basis) and D (X basis); the V/A label values
/// follow as gain - err_gain.
struct ClickStats {
  double gain_z;
  double err_gain_z_h;
  double gain_x;
  double err_gain_x_d;
};
ClickStats analytic_click_stats(double mu_h, double mu_v, double phi,
                                const ChannelParams& p);

/// Same detector model conditioned on a single-photon emission (Fock state,
/// not coherent). y1 is polarization-independent.
struct SinglePhotonStats {
  double y1;
  double e1y1_z_h;
  double e1y1_x_d;
};
SinglePhotonStats single_photon_stats(double mu_h, double mu_v, double phi,
                                      const ChannelParams& p);

/// Accumulated counts for one region. n_sent counts classified samples for
/// which Bob's basis matched the region's basis (the paper's gains condition
/// on matched bases); n_classified counts all classified samples. With zero
/// detections the binomial sigma falls back to the rule-of-three bound 3/n.
struct RegionTally {
  std::string label;
  Basis basis = Basis::z;
  std::uint64_t n_classified = 0;
  std::uint64_t n_sent = 0;
  std::uint64_t n_detected = 0;
  std::uint64_t n_error = 0;
  double q = 0.0;
  double qe = 0.0;
  double sigma_q = 0.0;
  double sigma_qe = 0.0;

  void add(bool basis_match, StateLabel alice, StateLabel squashed);
  void merge(const RegionTally& other);
  void finalize();  // recompute q, qe and sigmas from the counts
};

std::vector<RegionTally> make_tallies(std::span<const Region> regions);

/// Tally one classified+detected sample into every region it belongs to.
void tally_event(std::vector<RegionTally>& tallies, std::span<const Region> regions,
                 const SiftOutcome& sift, const DetectionEvent& event);

/// Index-aligned batch form of tally_event; throws on length mismatch.
std::vector<RegionTally> accumulate(std::span<const SiftOutcome> sift,
                                    std::span<const DetectionEvent> events,
                                    std::span<const Region> regions);

/// Asymptotic expected tallies: region-conditional <Q>, <QE> of the analytic
/// click model under the reshaped density (quadrature, no Monte Carlo).
std::vector<RegionTally> expected_tallies(std::span<const Region> regions, double mu_max,
                                          const ChannelParams& p,
                                          const QuadratureControl& qc = {});

}  // namespace fpqkd
