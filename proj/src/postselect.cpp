#include "fpqkd/postselect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fpqkd/quadrature.hpp"

namespace fpqkd {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

const char* to_string(Basis b) { return b == Basis::z ? "Z" : "X"; }

const char* to_string(StateLabel s) {
  switch (s) {
    case StateLabel::h: return "H";
    case StateLabel::v: return "V";
    case StateLabel::d: return "D";
    case StateLabel::a: return "A";
    default: return "none";
  }
}

Basis basis_of(StateLabel s) {
  return (s == StateLabel::h || s == StateLabel::v) ? Basis::z : Basis::x;
}

double compute_C(double mu_max) {
  if (!(mu_max > 0.0)) throw std::invalid_argument("compute_C: mu_max must be > 0");
  const auto objective = [mu_max](double mu) {
    return intensity_pdf(mu, mu_max) * std::exp(-mu);
  };
  // The minimum is interior; keep the bracket away from the endpoint poles.
  const double eps = mu_max * 1e-12;
  return brent_minimize(objective, eps, mu_max - eps, 1e-12).value;
}

ReshapeSpec auto_reshape(double mu_max) { return {compute_C(mu_max), mu_max}; }

bool accept(double mu, const ReshapeSpec& spec, double u) {
  if (!(mu > 0.0) || !(mu < spec.mu_max)) return false;  // probability-zero endpoints
  const double keep = spec.target_scale_c * std::exp(mu) / intensity_pdf(mu, spec.mu_max);
  return u < keep;
}

double azimuth(const LocalReadout& r, bool* clamped) {
  if (clamped) *clamped = false;
  const double denom = 2.0 * std::sqrt(r.mu_h * r.mu_v);
  if (!(denom > 0.0))
    throw std::domain_error("azimuth: undefined at mu_h*mu_v == 0 (Bloch pole)");
  double arg = (r.mu_d - r.mu_a) / denom;
  if (std::abs(arg) > 1.0) {
    if (std::abs(arg) > 1.0 + 1e-9)
      throw std::domain_error("azimuth: argument beyond [-1,1] tolerance (corrupt record)");
    if (clamped) *clamped = true;
    arg = std::clamp(arg, -1.0, 1.0);
  }
  return std::acos(arg);
}

bool Region::contains(double mu_h, double mu_v, double phi, StateLabel* state_out) const {
  const double angle = std::atan2(mu_v, mu_h);
  if (angle < polar_min || angle > polar_max) return false;
  const double radius = std::hypot(mu_h, mu_v);
  if (radius > radius_max) return false;
  if (azimuth_windows.empty()) {
    if (state_out) *state_out = state;
    return true;
  }
  for (const auto& w : azimuth_windows) {
    if (phi >= w.lo && phi <= w.hi) {
      if (state_out) *state_out = w.state;
      return true;
    }
  }
  return false;
}

std::vector<Region> standard_regions(const RegionParams& p) {
  if (!(p.delta_z > 0.0) || !(p.delta_x > 0.0) || !(p.delta_phi > 0.0) || !(p.r_max > 0.0))
    throw std::invalid_argument("standard_regions: parameters must be positive");
  if (p.delta_z >= kPi / 4.0 - p.delta_x / 2.0)
    throw std::invalid_argument("standard_regions: Z and X wedges overlap");
  for (double t : p.t)
    if (!(t > 0.0) || t > 1.0)
      throw std::invalid_argument("standard_regions: t factors must be in (0, 1]");

  std::vector<Region> regions;
  auto z_pair = [&](const std::string& suffix, double radius) {
    Region h{"Z" + suffix + "_H", Basis::z, StateLabel::h, 0.0, p.delta_z, radius, {}};
    Region v{"Z" + suffix + "_V", Basis::z, StateLabel::v, kPi / 2.0 - p.delta_z, kPi / 2.0,
             radius, {}};
    regions.push_back(std::move(h));
    regions.push_back(std::move(v));
  };
  // Key-generation wedges reach the box edge (no radius cut).
  z_pair("", Region::kUnboundedRadius);
  // Scaled sector pairs for the Z-basis decoy constraints.
  for (std::size_t i = 0; i < p.t.size(); ++i)
    z_pair(std::to_string(i + 1), p.t[i] * p.r_max);
  // Concentric X sectors with D/A azimuth windows.
  const double half = p.delta_phi / 2.0;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    Region x;
    x.label = "X" + std::to_string(i + 1);
    x.basis = Basis::x;
    x.state = StateLabel::none;  // resolved per sample by the matched window
    x.polar_min = kPi / 4.0 - p.delta_x / 2.0;
    x.polar_max = kPi / 4.0 + p.delta_x / 2.0;
    x.radius_max = p.t[i] * p.r_max;
    x.azimuth_windows = {{0.0, half, StateLabel::d},
                         {kTwoPi - half, kTwoPi, StateLabel::d},
                         {kPi - half, kPi + half, StateLabel::a}};
    regions.push_back(std::move(x));
  }
  return regions;
}

SiftOutcome classify(const PulseSample& s, std::span<const Region> regions) {
  SiftOutcome out;
  for (std::uint32_t i = 0; i < regions.size(); ++i) {
    StateLabel st = StateLabel::none;
    if (regions[i].contains(s.mu_h, s.mu_v, s.phi_hv, &st)) {
      out.region_indices.push_back(i);
      if (st != StateLabel::none) out.state = st;
    }
  }
  return out;
}

namespace {

// Panels of the polar-angle range, split at pi/4 where the box boundary
// r(alpha) = mu_max / max(cos, sin) has a kink.
std::vector<std::pair<double, double>> polar_panels(const Region& region) {
  if (region.polar_min < kPi / 4.0 && region.polar_max > kPi / 4.0)
    return {{region.polar_min, kPi / 4.0}, {kPi / 4.0, region.polar_max}};
  return {{region.polar_min, region.polar_max}};
}

double window_length(const Region& region) {
  if (region.azimuth_windows.empty()) return kTwoPi;
  double len = 0.0;
  for (const auto& w : region.azimuth_windows) len += w.hi - w.lo;
  return len;
}

// One fixed-order tensor pass. Integrates f * g~(muH) g~(muV) r / (2pi) over
// the region; out[0..m) are the f components, out[m] accumulates the mass.
void tensor_pass(const Region& region, double mu_max, int n,
                 const std::function<void(double, double, double, double*)>* f3,
                 const std::function<void(double, double, double*)>* f2,
                 std::size_t m, std::vector<double>& out) {
  const double norm = std::exp(mu_max) - 1.0;
  out.assign(m + 1, 0.0);
  std::vector<double> ax, aw, rx, rw, px, pw;
  std::vector<double> fbuf(m, 0.0);
  const double wlen = window_length(region);
  for (const auto& [alo, ahi] : polar_panels(region)) {
    gauss_legendre_on(n, alo, ahi, ax, aw);
    for (int ia = 0; ia < n; ++ia) {
      const double alpha = ax[ia];
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      const double r_box = mu_max / std::max(ca, sa);
      const double r_up = std::min(region.radius_max, r_box);
      gauss_legendre_on(n, 0.0, r_up, rx, rw);
      for (int ir = 0; ir < n; ++ir) {
        const double r = rx[ir];
        const double mu_h = r * ca, mu_v = r * sa;
        const double dens = std::exp(mu_h + mu_v) / (norm * norm) * r;
        const double base_w = aw[ia] * rw[ir] * dens / kTwoPi;
        if (f3 == nullptr) {
          out[m] += base_w * wlen;
          if (f2 != nullptr) {
            (*f2)(mu_h, mu_v, fbuf.data());
            for (std::size_t k = 0; k < m; ++k) out[k] += base_w * wlen * fbuf[k];
          }
        } else {
          out[m] += base_w * wlen;
          const auto& windows = region.azimuth_windows;
          if (windows.empty()) {
            gauss_legendre_on(n, 0.0, kTwoPi, px, pw);
            for (int ip = 0; ip < n; ++ip) {
              (*f3)(mu_h, mu_v, px[ip], fbuf.data());
              for (std::size_t k = 0; k < m; ++k) out[k] += base_w * pw[ip] * fbuf[k];
            }
          } else {
            for (const auto& w : windows) {
              gauss_legendre_on(n, w.lo, w.hi, px, pw);
              for (int ip = 0; ip < n; ++ip) {
                (*f3)(mu_h, mu_v, px[ip], fbuf.data());
                for (std::size_t k = 0; k < m; ++k) out[k] += base_w * pw[ip] * fbuf[k];
              }
            }
          }
        }
      }
    }
  }
}

std::vector<double> adaptive(const Region& region, double mu_max,
                             const std::function<void(double, double, double, double*)>* f3,
                             const std::function<void(double, double, double*)>* f2,
                             std::size_t m, const QuadratureControl& qc) {
  std::vector<double> prev, cur;
  tensor_pass(region, mu_max, qc.n_start, f3, f2, m, prev);
  for (int n = qc.n_start * 2; n <= qc.n_max; n *= 2) {
    tensor_pass(region, mu_max, n, f3, f2, m, cur);
    bool converged = true;
    for (std::size_t k = 0; k <= m; ++k) {
      const double scale = std::max(std::abs(cur[k]), 1e-30);
      if (std::abs(cur[k] - prev[k]) > qc.rel_tol * scale &&
          std::abs(cur[k] - prev[k]) > 1e-16) {
        converged = false;
        break;
      }
    }
    prev.swap(cur);
    if (converged) break;
  }
  return prev;
}

}  // namespace

double region_mass(const Region& region, double mu_max, const QuadratureControl& qc) {
  auto res = adaptive(region, mu_max, nullptr, nullptr, 0, qc);
  return res[0];
}

std::vector<double> region_average(const Region& region, double mu_max,
                                   const std::function<void(double, double, double, double*)>& f,
                                   std::size_t m, const QuadratureControl& qc) {
  auto res = adaptive(region, mu_max, &f, nullptr, m, qc);
  const double mass = res[m];
  if (!(mass > 0.0)) throw std::domain_error("region_average: empty region");
  std::vector<double> avg(m);
  for (std::size_t k = 0; k < m; ++k) avg[k] = res[k] / mass;
  return avg;
}

std::vector<double> region_average_2d(const Region& region, double mu_max,
                                      const std::function<void(double, double, double*)>& f,
                                      std::size_t m, const QuadratureControl& qc) {
  auto res = adaptive(region, mu_max, nullptr, &f, m, qc);
  const double mass = res[m];
  if (!(mass > 0.0)) throw std::domain_error("region_average_2d: empty region");
  std::vector<double> avg(m);
  for (std::size_t k = 0; k < m; ++k) avg[k] = res[k] / mass;
  return avg;
}

}  // namespace fpqkd
