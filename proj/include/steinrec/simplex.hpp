#ifndef STEINREC_SIMPLEX_HPP
#define STEINREC_SIMPLEX_HPP

#include <Eigen/Core>
#include <vector>

#include "steinrec/errors.hpp"

namespace steinrec {

struct LpOptions {
  int max_iterations = 50000;
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  double feas_tol = 1e-7;
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  Eigen::VectorXd dual;                  // row multipliers of the final basis
  double max_dual_infeasibility = 0.0;   // max_j (y^T A_j - c_j)+
  double complementarity_gap = 0.0;      // |c^T x - y^T b|
};

class LpIterationLimit : public SolverError {
 public:
  LpIterationLimit(const std::string& msg, Eigen::VectorXd best_x,
                   double best_objective)
      : SolverError(msg),
        best_x(std::move(best_x)),
        best_objective(best_objective) {}
  Eigen::VectorXd best_x;
  double best_objective = 0.0;
};

// Dense two-phase tableau simplex for min c^T x s.t. A x = b, x >= 0 with
// b >= 0. initial_basis[i] names a column of A that is the unit vector e_i
// (giving a ready-made basic variable for row i) or -1 to request an
// artificial. Dantzig pricing with a Bland fallback after a degenerate stall,
// so heavily degenerate tableaus still terminate.
LpSolution solve_standard_form_lp(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& c,
                                  const std::vector<int>& initial_basis,
                                  const LpOptions& options = {});

}  // namespace steinrec

#endif
