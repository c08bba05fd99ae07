#include "steinrec/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

namespace steinrec {

namespace {

struct Tableau {
  Eigen::MatrixXd t;       // m x (n_total + 1), last column is the rhs
  Eigen::VectorXd zrow;    // reduced costs, last entry = -objective
  std::vector<int> basis;  // basic column per row
  int n_total = 0;

  int rows() const { return static_cast<int>(t.rows()); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    const double fz = zrow(col);
    if (fz != 0.0) zrow -= fz * t.row(row).transpose();
    basis[row] = col;
  }

  // Rebuild the reduced-cost row for a phase objective; basic columns of the
  // current tableau are unit vectors, so elimination by rows is exact.
  void set_costs(const Eigen::VectorXd& phase_costs) {
    zrow.setZero(n_total + 1);
    zrow.head(n_total) = phase_costs;
    for (int i = 0; i < rows(); ++i) {
      const double cb = phase_costs(basis[i]);
      if (cb != 0.0) zrow -= cb * t.row(i).transpose();
    }
  }
};

// Runs simplex iterations until optimality for the current zrow. `allowed`
// masks columns permitted to enter. Returns iterations used.
int run_phase(Tableau& tab, const std::vector<bool>& allowed,
              const LpOptions& opt, int iter_budget, double* best_objective,
              Eigen::VectorXd* best_x_out, int n_original) {
  const int m = tab.rows();
  bool bland = false;
  int stall = 0;
  double last_obj = -tab.zrow(tab.n_total);
  int iters = 0;

  auto record_best = [&]() {
    const double obj = -tab.zrow(tab.n_total);
    if (best_objective && obj < *best_objective) {
      *best_objective = obj;
      if (best_x_out) {
        best_x_out->setZero(n_original);
        for (int i = 0; i < m; ++i)
          if (tab.basis[i] < n_original)
            (*best_x_out)(tab.basis[i]) = tab.t(i, tab.n_total);
      }
    }
  };

  while (true) {
    // entering column
    int enter = -1;
    if (bland) {
      for (int j = 0; j < tab.n_total; ++j) {
        if (allowed[j] && tab.zrow(j) < -opt.cost_tol) {
          enter = j;
          break;
        }
      }
    } else {
      double best = -opt.cost_tol;
      for (int j = 0; j < tab.n_total; ++j) {
        if (allowed[j] && tab.zrow(j) < best) {
          best = tab.zrow(j);
          enter = j;
        }
      }
    }
    if (enter < 0) return iters;  // optimal for this phase

    // ratio test
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = tab.t(i, enter);
      if (a > opt.pivot_tol) {
        const double ratio = tab.t(i, tab.n_total) / a;
        const bool better =
            ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (bland ? tab.basis[i] < (leave >= 0 ? tab.basis[leave] : INT_MAX)
                    : a > best_pivot));
        if (better) {
          best_ratio = ratio;
          best_pivot = a;
          leave = i;
        }
      }
    }
    if (leave < 0) throw SolverError("linear program is unbounded");

    tab.pivot(leave, enter);
    ++iters;
    record_best();

    const double obj = -tab.zrow(tab.n_total);
    if (obj < last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
      stall = 0;
      last_obj = obj;
    } else if (++stall > 500) {
      bland = true;  // anti-cycling fallback
    }
    if (iters >= iter_budget) {
      Eigen::VectorXd best_x =
          best_x_out ? *best_x_out : Eigen::VectorXd::Zero(n_original);
      throw LpIterationLimit("simplex iteration budget exhausted", best_x,
                             best_objective ? *best_objective : obj);
    }
  }
}

}  // namespace

LpSolution solve_standard_form_lp(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& c,
                                  const std::vector<int>& initial_basis,
                                  const LpOptions& options) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n ||
      static_cast<int>(initial_basis.size()) != m)
    throw ConfigError("LP dimensions disagree");
  if (m > 0 && b.minCoeff() < 0.0)
    throw ConfigError("standard-form LP requires b >= 0");

  int n_art = 0;
  for (int hint : initial_basis)
    if (hint < 0) ++n_art;

  Tableau tab;
  tab.n_total = n + n_art;
  tab.t.setZero(m, tab.n_total + 1);
  tab.t.leftCols(n) = a;
  tab.t.col(tab.n_total) = b;
  tab.basis.resize(m);

  int art = n;
  for (int i = 0; i < m; ++i) {
    if (initial_basis[i] >= 0) {
      tab.basis[i] = initial_basis[i];
    } else {
      tab.t(i, art) = 1.0;
      tab.basis[i] = art;
      ++art;
    }
  }

  std::vector<int> row_map(m);
  for (int i = 0; i < m; ++i) row_map[i] = i;

  std::vector<bool> allowed(tab.n_total, true);
  int total_iters = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(n);

  // Phase 1: drive artificials to zero.
  if (n_art > 0) {
    Eigen::VectorXd phase1_costs = Eigen::VectorXd::Zero(tab.n_total);
    phase1_costs.tail(n_art).setOnes();
    tab.set_costs(phase1_costs);
    total_iters += run_phase(tab, allowed, options, options.max_iterations,
                             nullptr, nullptr, n);
    const double infeas = -tab.zrow(tab.n_total);
    if (infeas > options.feas_tol)
      throw SolverError("linear program infeasible (phase-1 objective " +
                        std::to_string(infeas) + ")");
    // Pivot out any artificial still basic at zero; a row where no original
    // column has a nonzero coefficient is redundant and gets dropped.
    std::vector<int> keep_rows;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < n) {
        keep_rows.push_back(i);
        continue;
      }
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(tab.t(i, j)) > options.pivot_tol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
        keep_rows.push_back(i);
      }
      // else: redundant row, dropped below
    }
    if (static_cast<int>(keep_rows.size()) != m) {
      Eigen::MatrixXd t2(keep_rows.size(), tab.n_total + 1);
      std::vector<int> basis2, row_map2;
      for (std::size_t r = 0; r < keep_rows.size(); ++r) {
        t2.row(r) = tab.t.row(keep_rows[r]);
        basis2.push_back(tab.basis[keep_rows[r]]);
        row_map2.push_back(row_map[keep_rows[r]]);
      }
      tab.t = std::move(t2);
      tab.basis = std::move(basis2);
      row_map = std::move(row_map2);
    }
    for (int j = n; j < tab.n_total; ++j) allowed[j] = false;
  }

  // Phase 2: the real objective.
  Eigen::VectorXd phase2_costs = Eigen::VectorXd::Zero(tab.n_total);
  phase2_costs.head(n) = c;
  tab.set_costs(phase2_costs);
  best_obj = std::numeric_limits<double>::infinity();
  total_iters += run_phase(tab, allowed, options,
                           options.max_iterations - total_iters, &best_obj,
                           &best_x, n);

  LpSolution sol;
  sol.x.setZero(n);
  for (int i = 0; i < tab.rows(); ++i)
    if (tab.basis[i] < n) sol.x(tab.basis[i]) = tab.t(i, tab.n_total);
  sol.objective = c.dot(sol.x);
  sol.iterations = total_iters;

  // Dual certificate from the final basis: solve B^T y = c_B restricted to
  // the surviving rows (dropped redundant rows take multiplier zero), then
  // report worst dual infeasibility and the complementarity gap.
  {
    const int mf = tab.rows();
    Eigen::MatrixXd basis_mat(mf, mf);
    Eigen::VectorXd cb(mf);
    bool all_original = true;
    for (int i = 0; i < mf && all_original; ++i) {
      if (tab.basis[i] >= n) {
        all_original = false;
        break;
      }
      for (int r = 0; r < mf; ++r) basis_mat(r, i) = a(row_map[r], tab.basis[i]);
      cb(i) = c(tab.basis[i]);
    }
    sol.dual = Eigen::VectorXd::Zero(m);
    if (all_original) {
      const Eigen::VectorXd y =
          basis_mat.transpose().colPivHouseholderQr().solve(cb);
      for (int r = 0; r < mf; ++r) sol.dual(row_map[r]) = y(r);
      double worst = 0.0;
      for (int j = 0; j < n; ++j)
        worst = std::max(worst, sol.dual.dot(a.col(j)) - c(j));
      sol.max_dual_infeasibility = std::max(worst, 0.0);
      sol.complementarity_gap = std::abs(sol.objective - sol.dual.dot(b));
    } else {
      sol.max_dual_infeasibility = std::numeric_limits<double>::quiet_NaN();
      sol.complementarity_gap = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return sol;
}

}  // namespace steinrec
