#include "fpqkd/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fpqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;
constexpr int kMaxIter = 20000;

// Dense LU solve with partial pivoting; A is m x m row-major, overwritten.
bool lu_solve(std::vector<double> a, std::vector<double>& x, int m) {
  std::vector<int> piv(m);
  for (int i = 0; i < m; ++i) piv[i] = i;
  for (int k = 0; k < m; ++k) {
    int p = k;
    double best = std::abs(a[k * m + k]);
    for (int i = k + 1; i < m; ++i) {
      const double v = std::abs(a[i * m + k]);
      if (v > best) { best = v; p = i; }
    }
    if (best < 1e-14) return false;
    if (p != k) {
      for (int j = 0; j < m; ++j) std::swap(a[k * m + j], a[p * m + j]);
      std::swap(x[k], x[p]);
    }
    const double inv = 1.0 / a[k * m + k];
    for (int i = k + 1; i < m; ++i) {
      const double f = a[i * m + k] * inv;
      if (f == 0.0) continue;
      a[i * m + k] = f;
      for (int j = k + 1; j < m; ++j) a[i * m + j] -= f * a[k * m + j];
      x[i] -= f * x[k];
    }
  }
  for (int i = m - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < m; ++j) s -= a[i * m + j] * x[j];
    x[i] = s / a[i * m + i];
  }
  return true;
}

bool lu_solve_transposed(const std::vector<double>& a_in, std::vector<double>& y, int m) {
  // Solve A^T y = c by building the transpose densely (m is tiny).
  std::vector<double> at(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) at[i * m + j] = a_in[j * m + i];
  return lu_solve(std::move(at), y, m);
}

struct Tableau {
  const LpProblem* p;
  int m, n;
  std::vector<int> basis;          // row -> var
  std::vector<signed char> at_up;  // nonbasic position: 0 = at lower, 1 = at upper
  std::vector<bool> is_basic;
  std::vector<double> x;

  std::vector<double> basis_matrix() const {
    std::vector<double> b(m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) b[i * m + j] = p->rows[i][basis[j]];
    return b;
  }

  void recompute_basic_values() {
    std::vector<double> r(p->rhs);
    for (int j = 0; j < n; ++j) {
      if (is_basic[j]) continue;
      const double v = at_up[j] ? p->up[j] : p->lo[j];
      x[j] = v;
      if (v != 0.0)
        for (int i = 0; i < m; ++i) r[i] -= p->rows[i][j] * v;
    }
    if (!lu_solve(basis_matrix(), r, m))
      throw std::runtime_error("lp_solve: singular basis");
    for (int i = 0; i < m; ++i) x[basis[i]] = r[i];
  }
};

// One simplex run with the given cost vector; basis/positions updated in place.
LpStatus iterate(Tableau& t, const std::vector<double>& cost) {
  const LpProblem& p = *t.p;
  const int m = t.m, n = t.n;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    // Duals: B^T y = c_B.
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = cost[t.basis[i]];
    if (!lu_solve_transposed(t.basis_matrix(), y, m))
      throw std::runtime_error("lp_solve: singular basis (duals)");

    // Entering variable by Bland's rule: smallest eligible index.
    int enter = -1;
    double enter_dir = 0.0;
    for (int j = 0; j < n; ++j) {
      if (t.is_basic[j] || p.lo[j] == p.up[j]) continue;
      double d = cost[j];
      for (int i = 0; i < m; ++i) d -= y[i] * p.rows[i][j];
      if (!t.at_up[j] && d < -kReducedCostTol) { enter = j; enter_dir = 1.0; break; }
      if (t.at_up[j] && d > kReducedCostTol) { enter = j; enter_dir = -1.0; break; }
    }
    if (enter < 0) return LpStatus::optimal;

    // Direction of basic variables: w = B^-1 A_enter.
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i) w[i] = p.rows[i][enter];
    if (!lu_solve(t.basis_matrix(), w, m))
      throw std::runtime_error("lp_solve: singular basis (direction)");

    // Ratio test, including the entering variable's own bound span.
    double t_max = p.up[enter] - p.lo[enter];  // may be +inf
    int leave_row = -1;
    signed char leave_to_up = 0;
    for (int i = 0; i < m; ++i) {
      const int bi = t.basis[i];
      const double delta = enter_dir * w[i];
      double lim = kInf;
      signed char to_up = 0;
      if (delta > kPivotTol) {
        lim = (t.x[bi] - p.lo[bi]) / delta;
        to_up = 0;
      } else if (delta < -kPivotTol) {
        if (p.up[bi] == kInf) continue;
        lim = (p.up[bi] - t.x[bi]) / (-delta);
        to_up = 1;
      } else {
        continue;
      }
      if (lim < t_max - 1e-15 ||
          (lim < t_max + 1e-15 && (leave_row < 0 || bi < t.basis[leave_row]))) {
        t_max = std::max(lim, 0.0);
        leave_row = i;
        leave_to_up = to_up;
      }
    }
    if (t_max == kInf)
      throw std::runtime_error("lp_solve: unbounded (impossible with box bounds)");

    if (leave_row < 0) {
      // Bound flip: entering jumps to its other bound; basis unchanged.
      t.at_up[enter] = t.at_up[enter] ? 0 : 1;
      t.x[enter] = t.at_up[enter] ? p.up[enter] : p.lo[enter];
      for (int i = 0; i < m; ++i) t.x[t.basis[i]] -= t_max * enter_dir * w[i];
      continue;
    }

    // Pivot: entering becomes basic, leaving goes to one of its bounds.
    const int leave = t.basis[leave_row];
    for (int i = 0; i < m; ++i) t.x[t.basis[i]] -= t_max * enter_dir * w[i];
    t.x[enter] = (t.at_up[enter] ? p.up[enter] : p.lo[enter]) + enter_dir * t_max;
    t.x[leave] = leave_to_up ? p.up[leave] : p.lo[leave];
    t.is_basic[enter] = true;
    t.is_basic[leave] = false;
    t.at_up[leave] = leave_to_up;
    t.basis[leave_row] = enter;
  }
  return LpStatus::iteration_limit;
}

}  // namespace

std::size_t LpProblem::add_var(double cost, double lower, double upper) {
  c.push_back(cost);
  lo.push_back(lower);
  up.push_back(upper);
  for (auto& row : rows) row.push_back(0.0);
  return c.size() - 1;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    default: return "iteration_limit";
  }
}

LpSolution lp_solve(const LpProblem& problem) {
  const int m = static_cast<int>(problem.num_rows());
  const int n0 = static_cast<int>(problem.num_vars());
  for (const auto& row : problem.rows)
    if (static_cast<int>(row.size()) != n0)
      throw std::invalid_argument("lp_solve: ragged constraint matrix");
  for (int j = 0; j < n0; ++j)
    if (problem.lo[j] > problem.up[j])
      throw std::invalid_argument("lp_solve: inverted variable bounds");

  // Row equilibration keeps gains ~1e-4 and moments ~1 on equal footing.
  LpProblem p = problem;
  std::vector<double> row_scale(m, 1.0);
  for (int i = 0; i < m; ++i) {
    double mx = 0.0;
    for (double v : p.rows[i]) mx = std::max(mx, std::abs(v));
    if (mx > 0.0) {
      row_scale[i] = 1.0 / mx;
      for (double& v : p.rows[i]) v *= row_scale[i];
      p.rhs[i] *= row_scale[i];
    }
  }

  // Phase 1: artificials with signs matching the residual at the lower-bound
  // starting point.
  Tableau t;
  t.p = &p;
  t.m = m;
  t.n = n0 + m;
  std::vector<double> residual(p.rhs);
  for (int j = 0; j < n0; ++j) {
    // Start each variable at the finite bound of smaller magnitude.
    const double lv = p.lo[j];
    const double uv = p.up[j];
    const double start = (uv != kInf && std::abs(uv) < std::abs(lv)) ? uv : lv;
    if (start != 0.0)
      for (int i = 0; i < m; ++i) residual[i] -= p.rows[i][j] * start;
  }
  std::vector<double> phase1_cost(t.n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double sign = (residual[i] >= 0.0) ? 1.0 : -1.0;
    const std::size_t a = p.add_var(0.0, 0.0, kInf);
    p.rows[i][a] = sign;
    phase1_cost[a] = 1.0;
  }
  t.basis.resize(m);
  t.is_basic.assign(t.n, false);
  t.at_up.assign(t.n, 0);
  t.x.assign(t.n, 0.0);
  for (int j = 0; j < n0; ++j) {
    const double lv = p.lo[j];
    const double uv = p.up[j];
    t.at_up[j] = (uv != kInf && std::abs(uv) < std::abs(lv)) ? 1 : 0;
  }
  for (int i = 0; i < m; ++i) {
    t.basis[i] = n0 + i;
    t.is_basic[n0 + i] = true;
  }
  t.recompute_basic_values();

  LpSolution sol;
  LpStatus st = iterate(t, phase1_cost);
  if (st != LpStatus::optimal) {
    sol.status = st;
    return sol;
  }
  double phase1_obj = 0.0;
  for (int j = n0; j < t.n; ++j) phase1_obj += t.x[j];
  if (phase1_obj > kFeasTol) {
    sol.status = LpStatus::infeasible;
    return sol;
  }

  // Phase 2: pin artificials to zero and optimize the real objective.
  for (int j = n0; j < t.n; ++j) p.up[j] = 0.0;
  t.recompute_basic_values();
  std::vector<double> cost(t.n, 0.0);
  for (int j = 0; j < n0; ++j) cost[j] = p.c[j];
  st = iterate(t, cost);
  sol.status = st;
  if (st != LpStatus::optimal) return sol;

  t.recompute_basic_values();
  sol.x.assign(t.x.begin(), t.x.begin() + n0);
  sol.objective = 0.0;
  for (int j = 0; j < n0; ++j) sol.objective += problem.c[j] * sol.x[j];

  // Diagnostics against the original (unscaled) problem.
  for (int i = 0; i < m; ++i) {
    double r = -problem.rhs[i];
    for (int j = 0; j < n0; ++j) r += problem.rows[i][j] * sol.x[j];
    sol.primal_residual = std::max(sol.primal_residual, std::abs(r));
  }
  {
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = cost[t.basis[i]];
    if (lu_solve_transposed(t.basis_matrix(), y, m)) {
      for (int j = 0; j < n0; ++j) {
        if (t.is_basic[j] || p.lo[j] == p.up[j]) continue;
        double d = cost[j];
        for (int i = 0; i < m; ++i) d -= y[i] * p.rows[i][j];
        const double viol = t.at_up[j] ? d : -d;
        sol.complementary_residual = std::max(sol.complementary_residual, std::max(0.0, viol));
      }
    }
  }
  return sol;
}

}  // namespace fpqkd
