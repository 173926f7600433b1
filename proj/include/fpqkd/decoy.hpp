#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpqkd/detection.hpp"
#include "fpqkd/postselect.hpp"
#include "fpqkd/simplex.hpp"

namespace fpqkd {

/// Region-conditional Poissonian photon-number expectations <P_n>_{S_i} for
/// n = 0..n_cut, computed in the total intensity mu_h + mu_v.
struct PhotonMoments {
  std::string label;
  std::vector<double> p_n;
  double tail_mass = 0.0;

  static PhotonMoments poissonian(double mu, int n_cut);
};

/// Moments over a region under the reshaped density.
PhotonMoments photon_moments(const Region& region, double mu_max, int n_cut,
                             const QuadratureControl& qc = {});

/// Mass-weighted combination of region moments (for H+V or D+A pairs).
PhotonMoments combine_moments(const PhotonMoments& a, double mass_a,
                              const PhotonMoments& b, double mass_b);

/// One decoy constraint: moments plus the observed gain and error-gain with
/// their statistical errors.
struct DecoyObservation {
  PhotonMoments moments;
  double q = 0.0;
  double qe = 0.0;
  double sigma_q = 0.0;
  double sigma_qe = 0.0;
};

struct DecoyConstraintSet {
  Basis basis = Basis::z;
  int n_cut = 10;
  double k_sigma = 0.0;  // observation interval half-width in sigmas
  std::vector<DecoyObservation> observations;
};

enum class DecoyObjective { min_y1, max_e1y1 };

struct DecoyDiagnostics {
  LpStatus status = LpStatus::infeasible;
  double complementary_residual = 0.0;
  double primal_residual = 0.0;
  bool relaxed = false;  // fell back to +-3 sigma widening
};

/// Yield/error-yield linear program: variables Y_n in [0,1] and E_n with
/// 0 <= E_n <= Y_n; per region, sum_n p_n Y_n + s = Q and sum_n p_n E_n +
/// s' = QE with slack in [0, tail_mass] and an observation deviation in
/// +-k_sigma*sigma. If infeasible at the requested k_sigma, retries once with
/// +-3 sigma before giving up. Returns the bound, or nullopt on infeasibility.
std::optional<double> solve_bounds(const DecoyConstraintSet& cs, DecoyObjective objective,
                                   DecoyDiagnostics* diag = nullptr);

/// Single-photon bounds for the key-rate formula.
struct DecoyBounds {
  double y1_low = 0.0;       // Z-basis yield lower bound
  double y1_low_x = 0.0;     // X-basis yield lower bound (e1 denominator)
  double e1y1_high = 0.0;    // X-basis error-yield upper bound
  double e1_high = 0.5;
  bool e1_capped = false;    // Y1_low_X hit zero; e1 reported as 0.5
  std::string lp_status = "infeasible";
  double complementary_residual = 0.0;
};

/// Full decoy analysis: Y1 lower bound from the Z program, e1Y1 upper bound
/// and its yield denominator from the X program.
DecoyBounds decoy_analysis(const DecoyConstraintSet& z_set, const DecoyConstraintSet& x_set);

}  // namespace fpqkd
