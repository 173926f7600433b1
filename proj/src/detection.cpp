#include "fpqkd/detection.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fpqkd {

namespace {

// Bloch components (x, z) of the encoded state and the rotated components
// after the misalignment rotation about the Y axis. The rotation angle beta
// satisfies sin^2(beta/2) = e_d so a single photon suffers exactly e_d.
struct RotatedState {
  double comp_z;  // rotated z component: +1 -> pure H
  double comp_x;  // rotated x component: +1 -> pure D
  double total;   // mu_h + mu_v
};

RotatedState rotate_state(double mu_h, double mu_v, double phi, double e_d) {
  RotatedState r;
  r.total = mu_h + mu_v;
  double z = 1.0, x = 0.0;
  if (r.total > 0.0) {
    z = (mu_h - mu_v) / r.total;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    x = s * std::cos(phi);
  }
  const double beta = 2.0 * std::asin(std::sqrt(e_d));
  const double cb = std::cos(beta), sb = std::sin(beta);
  r.comp_z = z * cb - x * sb;
  r.comp_x = x * cb + z * sb;
  return r;
}

inline double click_prob(double mu_arm, double dark) {
  return 1.0 - (1.0 - dark) * std::exp(-mu_arm);
}

}  // namespace

double ChannelParams::eta_total() const {
  return detector_efficiency * std::pow(10.0, -loss_db / 10.0);
}

DetectionEvent transmit_and_detect(const PulseSample& s, const ChannelParams& p,
                                   const SampleStream& stream) {
  const RotatedState st = rotate_state(s.mu_h, s.mu_v, s.phi_hv, p.misalignment_e_d);
  const double eta = p.eta_total();
  DetectionEvent ev;
  ev.basis = (stream.uniform(lane::bob_basis) < p.basis_split) ? Basis::z : Basis::x;
  const double comp = (ev.basis == Basis::z) ? st.comp_z : st.comp_x;
  const double a_first = eta * st.total * 0.5 * (1.0 + comp);
  const double a_second = eta * st.total * 0.5 * (1.0 - comp);
  const bool first = stream.uniform(lane::click_first) < click_prob(a_first, p.dark_prob);
  const bool second = stream.uniform(lane::click_second) < click_prob(a_second, p.dark_prob);
  const StateLabel first_label = (ev.basis == Basis::z) ? StateLabel::h : StateLabel::d;
  const StateLabel second_label = (ev.basis == Basis::z) ? StateLabel::v : StateLabel::a;
  const int first_idx = (ev.basis == Basis::z) ? 0 : 2;
  ev.clicks[first_idx] = first;
  ev.clicks[first_idx + 1] = second;
  if (first && second)
    ev.squashed = (stream.uniform(lane::squash) < 0.5) ? first_label : second_label;
  else if (first)
    ev.squashed = first_label;
  else if (second)
    ev.squashed = second_label;
  else
    ev.squashed = StateLabel::none;
  return ev;
}

ClickStats analytic_click_stats(double mu_h, double mu_v, double phi,
                                const ChannelParams& p) {
  const RotatedState st = rotate_state(mu_h, mu_v, phi, p.misalignment_e_d);
  const double eta = p.eta_total();
  ClickStats out{};
  for (int b = 0; b < 2; ++b) {
    const double comp = (b == 0) ? st.comp_z : st.comp_x;
    const double p1 = click_prob(eta * st.total * 0.5 * (1.0 + comp), p.dark_prob);
    const double p2 = click_prob(eta * st.total * 0.5 * (1.0 - comp), p.dark_prob);
    const double gain = 1.0 - (1.0 - p1) * (1.0 - p2);
    const double err = p2 * (1.0 - p1) + 0.5 * p1 * p2;
    if (b == 0) {
      out.gain_z = gain;
      out.err_gain_z_h = err;
    } else {
      out.gain_x = gain;
      out.err_gain_x_d = err;
    }
  }
  return out;
}

SinglePhotonStats single_photon_stats(double mu_h, double mu_v, double phi,
                                      const ChannelParams& p) {
  const RotatedState st = rotate_state(mu_h, mu_v, phi, p.misalignment_e_d);
  const double eta = p.eta_total();
  const double d = p.dark_prob;
  SinglePhotonStats out{};
  out.y1 = 1.0 - (1.0 - eta) * (1.0 - d) * (1.0 - d);
  for (int b = 0; b < 2; ++b) {
    const double comp = (b == 0) ? st.comp_z : st.comp_x;
    const double q_first = 0.5 * (1.0 + comp);  // photon projects onto the label arm
    // Photon cases: lost (1-eta), first arm (eta*q), second arm (eta*(1-q));
    // darks act independently on both detectors.
    double e1y1 = 0.0;
    const struct { double prob; bool first, second; } photon_cases[] = {
        {1.0 - eta, false, false},
        {eta * q_first, true, false},
        {eta * (1.0 - q_first), false, true},
    };
    for (const auto& pc : photon_cases) {
      for (int dk1 = 0; dk1 < 2; ++dk1) {
        for (int dk2 = 0; dk2 < 2; ++dk2) {
          const double prob = pc.prob * (dk1 ? d : 1.0 - d) * (dk2 ? d : 1.0 - d);
          const bool first = pc.first || dk1;
          const bool second = pc.second || dk2;
          if (second && !first) e1y1 += prob;
          else if (first && second) e1y1 += 0.5 * prob;
        }
      }
    }
    if (b == 0) out.e1y1_z_h = e1y1;
    else out.e1y1_x_d = e1y1;
  }
  return out;
}

void RegionTally::add(bool basis_match, StateLabel alice, StateLabel squashed) {
  ++n_classified;
  if (!basis_match) return;
  ++n_sent;
  if (squashed == StateLabel::none) return;
  ++n_detected;
  if (squashed != alice) ++n_error;
}

void RegionTally::merge(const RegionTally& other) {
  n_classified += other.n_classified;
  n_sent += other.n_sent;
  n_detected += other.n_detected;
  n_error += other.n_error;
}

void RegionTally::finalize() {
  if (n_sent == 0) {
    q = qe = sigma_q = sigma_qe = 0.0;
    return;
  }
  const double n = static_cast<double>(n_sent);
  q = static_cast<double>(n_detected) / n;
  qe = static_cast<double>(n_error) / n;
  sigma_q = (n_detected == 0) ? 3.0 / n : std::sqrt(q * (1.0 - q) / n);
  sigma_qe = (n_error == 0) ? 3.0 / n : std::sqrt(qe * (1.0 - qe) / n);
}

std::vector<RegionTally> make_tallies(std::span<const Region> regions) {
  std::vector<RegionTally> out(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    out[i].label = regions[i].label;
    out[i].basis = regions[i].basis;
  }
  return out;
}

void tally_event(std::vector<RegionTally>& tallies, std::span<const Region> regions,
                 const SiftOutcome& sift, const DetectionEvent& event) {
  for (std::uint32_t idx : sift.region_indices) {
    const bool match = regions[idx].basis == event.basis;
    tallies[idx].add(match, sift.state, event.squashed);
  }
}

std::vector<RegionTally> accumulate(std::span<const SiftOutcome> sift,
                                    std::span<const DetectionEvent> events,
                                    std::span<const Region> regions) {
  if (sift.size() != events.size())
    throw std::invalid_argument("accumulate: misaligned sift/event streams");
  auto tallies = make_tallies(regions);
  for (std::size_t i = 0; i < sift.size(); ++i)
    tally_event(tallies, regions, sift[i], events[i]);
  for (auto& t : tallies) t.finalize();
  return tallies;
}

std::vector<RegionTally> expected_tallies(std::span<const Region> regions, double mu_max,
                                          const ChannelParams& p,
                                          const QuadratureControl& qc) {
  std::vector<RegionTally> out(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& reg = regions[i];
    out[i].label = reg.label;
    out[i].basis = reg.basis;
    const auto f = [&](double mu_h, double mu_v, double phi, double* vals) {
      const ClickStats cs = analytic_click_stats(mu_h, mu_v, phi, p);
      if (reg.basis == Basis::z) {
        vals[0] = cs.gain_z;
        vals[1] = (reg.state == StateLabel::h) ? cs.err_gain_z_h
                                               : cs.gain_z - cs.err_gain_z_h;
      } else {
        StateLabel st = StateLabel::none;
        for (const auto& w : reg.azimuth_windows)
          if (phi >= w.lo && phi <= w.hi) st = w.state;
        vals[0] = cs.gain_x;
        vals[1] = (st == StateLabel::a) ? cs.gain_x - cs.err_gain_x_d : cs.err_gain_x_d;
      }
    };
    auto avg = region_average(reg, mu_max, f, 2, qc);
    out[i].q = avg[0];
    out[i].qe = avg[1];
    out[i].sigma_q = 0.0;  // asymptotic
    out[i].sigma_qe = 0.0;
  }
  return out;
}

}  // namespace fpqkd
