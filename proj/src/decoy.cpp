#include "fpqkd/decoy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpqkd {

PhotonMoments PhotonMoments::poissonian(double mu, int n_cut) {
  if (n_cut < 2) throw std::invalid_argument("poissonian: n_cut must be >= 2");
  if (mu < 0.0) throw std::invalid_argument("poissonian: mu must be >= 0");
  PhotonMoments m;
  m.p_n.resize(n_cut + 1);
  double term = std::exp(-mu);
  double sum = 0.0;
  for (int n = 0; n <= n_cut; ++n) {
    m.p_n[n] = term;
    sum += term;
    term *= mu / (n + 1);
  }
  m.tail_mass = std::max(0.0, 1.0 - sum);
  return m;
}

PhotonMoments photon_moments(const Region& region, double mu_max, int n_cut,
                             const QuadratureControl& qc) {
  if (n_cut < 2) throw std::invalid_argument("photon_moments: n_cut must be >= 2");
  const auto f = [n_cut](double mu_h, double mu_v, double* out) {
    const double mu = mu_h + mu_v;
    double term = std::exp(-mu);
    for (int n = 0; n <= n_cut; ++n) {
      out[n] = term;
      term *= mu / (n + 1);
    }
  };
  auto avg = region_average_2d(region, mu_max, f, n_cut + 1, qc);
  PhotonMoments m;
  m.label = region.label;
  m.p_n = std::move(avg);
  double sum = 0.0;
  for (double v : m.p_n) sum += v;
  m.tail_mass = std::max(0.0, 1.0 - sum);
  return m;
}

PhotonMoments combine_moments(const PhotonMoments& a, double mass_a,
                              const PhotonMoments& b, double mass_b) {
  if (a.p_n.size() != b.p_n.size())
    throw std::invalid_argument("combine_moments: mismatched cutoffs");
  const double total = mass_a + mass_b;
  PhotonMoments m;
  m.label = a.label + "+" + b.label;
  m.p_n.resize(a.p_n.size());
  for (std::size_t n = 0; n < a.p_n.size(); ++n)
    m.p_n[n] = (a.p_n[n] * mass_a + b.p_n[n] * mass_b) / total;
  m.tail_mass = (a.tail_mass * mass_a + b.tail_mass * mass_b) / total;
  return m;
}

namespace {

LpProblem build_program(const DecoyConstraintSet& cs, DecoyObjective objective,
                        double k_sigma) {
  const int nv = cs.n_cut + 1;
  const std::size_t m = cs.observations.size();
  LpProblem p;
  // Variable layout: Y_0..Y_c, E_0..E_c, then per-observation slack and
  // deviation variables appended below.
  for (int n = 0; n < nv; ++n) p.add_var(0.0, 0.0, 1.0);  // Y_n
  for (int n = 0; n < nv; ++n) p.add_var(0.0, 0.0, 1.0);  // E_n
  if (objective == DecoyObjective::min_y1) p.c[1] = 1.0;
  else p.c[nv + 1] = -1.0;  // maximize E_1

  // Coupling rows E_n - Y_n + w_n = 0, w_n >= 0.
  for (int n = 0; n < nv; ++n) {
    std::vector<double> row(p.num_vars(), 0.0);
    row[n] = -1.0;
    row[nv + n] = 1.0;
    p.rows.push_back(std::move(row));
    p.rhs.push_back(0.0);
  }
  for (int n = 0; n < nv; ++n) {
    const std::size_t w = p.add_var(0.0, 0.0, std::numeric_limits<double>::infinity());
    p.rows[n][w] = 1.0;
  }

  for (std::size_t i = 0; i < m; ++i) {
    const auto& obs = cs.observations[i];
    if (static_cast<int>(obs.moments.p_n.size()) != nv)
      throw std::invalid_argument("solve_bounds: inconsistent n_cut");
    // Gain row: sum p_n Y_n + s - d = Q.
    {
      std::vector<double> row(p.num_vars(), 0.0);
      for (int n = 0; n < nv; ++n) row[n] = obs.moments.p_n[n];
      p.rows.push_back(std::move(row));
      p.rhs.push_back(obs.q);
      const std::size_t s = p.add_var(0.0, 0.0, obs.moments.tail_mass);
      p.rows.back()[s] = 1.0;
      const double dev = k_sigma * obs.sigma_q;
      const std::size_t dv = p.add_var(0.0, -dev, dev);
      p.rows.back()[dv] = -1.0;
    }
    // Error row: sum p_n E_n + s' - d' = QE.
    {
      std::vector<double> row(p.num_vars(), 0.0);
      for (int n = 0; n < nv; ++n) row[nv + n] = obs.moments.p_n[n];
      p.rows.push_back(std::move(row));
      p.rhs.push_back(obs.qe);
      const std::size_t s = p.add_var(0.0, 0.0, obs.moments.tail_mass);
      p.rows.back()[s] = 1.0;
      const double dev = k_sigma * obs.sigma_qe;
      const std::size_t dv = p.add_var(0.0, -dev, dev);
      p.rows.back()[dv] = -1.0;
    }
  }
  return p;
}

}  // namespace

std::optional<double> solve_bounds(const DecoyConstraintSet& cs, DecoyObjective objective,
                                   DecoyDiagnostics* diag) {
  if (cs.observations.size() < 2)
    throw std::invalid_argument("solve_bounds: need at least 2 constraint triples");
  LpSolution sol = lp_solve(build_program(cs, objective, cs.k_sigma));
  bool relaxed = false;
  if (sol.status == LpStatus::infeasible && cs.k_sigma < 3.0) {
    // Finite-sample tallies can be mutually inconsistent; widen the
    // observation intervals to +-3 sigma before declaring failure.
    sol = lp_solve(build_program(cs, objective, 3.0));
    relaxed = true;
  }
  if (diag) {
    diag->status = sol.status;
    diag->relaxed = relaxed;
    diag->complementary_residual = sol.complementary_residual;
    diag->primal_residual = sol.primal_residual;
  }
  if (sol.status != LpStatus::optimal) return std::nullopt;
  const double value = (objective == DecoyObjective::min_y1) ? sol.objective : -sol.objective;
  return std::max(0.0, value);
}

DecoyBounds decoy_analysis(const DecoyConstraintSet& z_set, const DecoyConstraintSet& x_set) {
  DecoyBounds b;
  DecoyDiagnostics dz, dx_y, dx_e;
  const auto y1_z = solve_bounds(z_set, DecoyObjective::min_y1, &dz);
  const auto y1_x = solve_bounds(x_set, DecoyObjective::min_y1, &dx_y);
  const auto e1y1 = solve_bounds(x_set, DecoyObjective::max_e1y1, &dx_e);
  if (!y1_z || !y1_x || !e1y1) {
    b.lp_status = "infeasible";
    return b;
  }
  b.y1_low = *y1_z;
  b.y1_low_x = *y1_x;
  b.e1y1_high = *e1y1;
  b.complementary_residual = std::max({dz.complementary_residual,
                                       dx_y.complementary_residual,
                                       dx_e.complementary_residual});
  if (b.y1_low_x <= 0.0) {
    b.e1_high = 0.5;  // maximally uninformative
    b.e1_capped = true;
  } else {
    b.e1_high = std::min(0.5, b.e1y1_high / b.y1_low_x);
    b.e1_capped = b.e1y1_high / b.y1_low_x > 0.5;
  }
  b.lp_status = (dz.relaxed || dx_y.relaxed || dx_e.relaxed) ? "optimal-relaxed" : "optimal";
  return b;
}

}  // namespace fpqkd
