#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fpqkd {

/// Dense LP in computational form: minimize c.x subject to A x = b and
/// lo <= x <= up. Inequalities are expected to be rewritten with explicit
/// slack variables by the caller. Upper bounds may be +infinity.
struct LpProblem {
  std::vector<double> c;
  std::vector<std::vector<double>> rows;  // each of size c.size()
  std::vector<double> rhs;
  std::vector<double> lo;
  std::vector<double> up;

  std::size_t num_vars() const { return c.size(); }
  std::size_t num_rows() const { return rows.size(); }
  std::size_t add_var(double cost, double lower, double upper);
};

enum class LpStatus { optimal, infeasible, iteration_limit };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  double primal_residual = 0.0;          // max |A x - b|
  double complementary_residual = 0.0;   // max reduced-cost sign violation
};

/// Two-phase bounded-variable simplex with Bland's anti-cycling rule.
/// Sized for small problems (tens of variables); dense algebra throughout.
LpSolution lp_solve(const LpProblem& problem);

}  // namespace fpqkd
