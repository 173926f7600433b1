#pragma once

#include <vector>

namespace fpqkd {

/// Binary entropy in bits, h2(0) = h2(1) = 0 by continuity.
/// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

struct KeyRateInputs {
  double p_z;      // probability mass of the key-generating Z region
  double p1_avg;   // <P_1> over the Z key region
  double y1_low;   // single-photon yield lower bound (Z basis)
  double e1_high;  // single-photon error upper bound (X basis)
  double q_z;      // Z key region gain
  double qe_z;     // Z key region error-gain
  double f_e;      // error-correction inefficiency (>= 1)
};

struct KeyRateReport {
  KeyRateInputs inputs;
  double single_photon_term = 0.0;     // p1_avg * y1_low * (1 - h2(e1_high))
  double error_correction_term = 0.0;  // f_e * q_z * h2(qe_z / q_z)
  double r = 0.0;                       // p_z * (sp_term - ec_term)
  double r_clamped = 0.0;
  bool zero_gain = false;               // q_z == 0 diagnostic
};

/// Asymptotic secret key rate per source pulse. e1_high >= 0.5 zeroes the
/// single-photon term; q_z == 0 yields R = 0 with a diagnostic flag.
KeyRateReport key_rate(const KeyRateInputs& in);

/// One row of the analytic loss sweep (0.2 dB/km fiber).
struct SweepRow {
  double loss_db;
  double distance_km;
  double rate;
  double y1_low;
  double e1_high;
};

inline double km_to_db(double km) { return 0.2 * km; }
inline double db_to_km(double db) { return db / 0.2; }

}  // namespace fpqkd
