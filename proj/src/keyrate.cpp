#include "fpqkd/keyrate.hpp"

#include <cmath>
#include <stdexcept>

namespace fpqkd {

double binary_entropy(double x) {
  if (!(x >= 0.0) || !(x <= 1.0))
    throw std::domain_error("binary_entropy: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

KeyRateReport key_rate(const KeyRateInputs& in) {
  if (in.f_e < 1.0) throw std::invalid_argument("key_rate: f_e must be >= 1");
  if (in.qe_z > in.q_z + 1e-15) throw std::invalid_argument("key_rate: QE_Z exceeds Q_Z");
  KeyRateReport rep;
  rep.inputs = in;
  if (in.q_z <= 0.0) {
    rep.zero_gain = true;
    return rep;
  }
  rep.single_photon_term =
      (in.e1_high >= 0.5)
          ? 0.0
          : in.p1_avg * in.y1_low * (1.0 - binary_entropy(in.e1_high));
  rep.error_correction_term =
      in.f_e * in.q_z * binary_entropy(std::min(1.0, in.qe_z / in.q_z));
  rep.r = in.p_z * (rep.single_photon_term - rep.error_correction_term);
  rep.r_clamped = std::max(rep.r, 0.0);
  return rep;
}

}  // namespace fpqkd
