#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fpqkd/phase_source.hpp"

namespace fpqkd {

enum class Basis { z, x };
enum class StateLabel { none, h, v, d, a };

const char* to_string(Basis b);
const char* to_string(StateLabel s);
Basis basis_of(StateLabel s);

/// Target-distribution scale for acceptance-rejection: keep probability is
/// target_scale_c * exp(mu) / f(mu), the largest exponential envelope under
/// the arcsine density.
struct ReshapeSpec {
  double target_scale_c;
  double mu_max;
};

/// min over (0, mu_max) of f(mu) * exp(-mu), located by bounded scalar
/// minimization; equals 0.961 for mu_max = 0.5.
double compute_C(double mu_max);

ReshapeSpec auto_reshape(double mu_max);

/// Acceptance-rejection keep decision for one intensity component given the
/// caller's uniform draw u in [0,1). Exact endpoints are probability-zero
/// events and are rejected.
bool accept(double mu, const ReshapeSpec& spec, double u);

/// Azimuth recovery phi = arccos((mu_d - mu_a) / (2*sqrt(mu_h*mu_v))) in
/// [0, pi]. Arguments within 1e-9 beyond [-1,1] are clamped (sets *clamped);
/// larger excursions indicate corrupt data and throw. Throws if
/// mu_h * mu_v == 0 (Bloch-sphere pole).
double azimuth(const LocalReadout& r, bool* clamped = nullptr);

struct AzimuthWindow {
  double lo, hi;      // sub-interval of [0, 2pi)
  StateLabel state;   // label assigned when phi falls in the window
};

/// Post-selection region in (mu_h, mu_v, phi): a polar-angle wedge on the
/// quarter-plane (angle = atan2(mu_v, mu_h)), an optional sector radius cut,
/// and for X-basis regions a set of azimuth windows.
struct Region {
  std::string label;
  Basis basis = Basis::z;
  StateLabel state = StateLabel::none;  // fixed label for Z regions
  double polar_min = 0.0;
  double polar_max = 0.0;
  double radius_max = kUnboundedRadius;  // sentinel: bounded only by the box
  std::vector<AzimuthWindow> azimuth_windows;

  static constexpr double kUnboundedRadius = 1e308;

  /// Membership test; for X regions also resolves the window label.
  bool contains(double mu_h, double mu_v, double phi, StateLabel* state_out = nullptr) const;
};

struct RegionParams {
  double delta_z = 0.02;    // Z wedge half-angle (radians)
  double delta_x = 0.2;     // X wedge full width (radians); half-width each side
  double delta_phi = 0.2;   // azimuth window full width (radians)
  double r_max = 0.5;       // X sector radius at t = 1
  std::vector<double> t = {1.0, 0.5, 0.1};
};

/// The paper's region set: two key-generation Z wedges bounded only by the
/// box, three scaled Z sector pairs for the Z-basis decoy constraints, and
/// three concentric X sectors with D/A azimuth windows.
/// Throws std::invalid_argument on overlapping wedges or bad parameters.
std::vector<Region> standard_regions(const RegionParams& p = {});

struct SiftOutcome {
  std::vector<std::uint32_t> region_indices;  // indices into the region list
  StateLabel state = StateLabel::none;
};

/// Pure classification of a sample against a region list.
SiftOutcome classify(const PulseSample& s, std::span<const Region> regions);

struct QuadratureControl {
  double rel_tol = 1e-8;
  int n_start = 32;
  int n_max = 256;
};

/// Mass of the reshaped joint density g~(mu_h) g~(mu_v) / (2pi) over a region,
/// by tensor Gauss-Legendre quadrature in polar coordinates with adaptive
/// node doubling.
double region_mass(const Region& region, double mu_max, const QuadratureControl& qc = {});

/// Region-conditional expectations of a vector-valued observable
/// F(mu_h, mu_v, phi, out[m]) under the reshaped density. The phi dimension
/// runs over the region's azimuth windows (or all of [0, 2pi)).
std::vector<double> region_average(const Region& region, double mu_max,
                                   const std::function<void(double, double, double, double*)>& f,
                                   std::size_t m, const QuadratureControl& qc = {});

/// Same as region_average but for phi-independent observables (single phi
/// evaluation; the azimuth factor cancels in the conditional mean).
std::vector<double> region_average_2d(const Region& region, double mu_max,
                                      const std::function<void(double, double, double*)>& f,
                                      std::size_t m, const QuadratureControl& qc = {});

}  // namespace fpqkd
