#include "steinrec/recovery.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "steinrec/linalg.hpp"
#include "steinrec/parallel.hpp"
#include "steinrec/simplex.hpp"

namespace steinrec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// LAD form of the l1 program: v_j = (M^T w)_j split as p_j - q_j with
// objective sum(p + q), plus the hyperplane row r^T w = 1. The q columns give
// a ready basis for the homogeneous rows; only the hyperplane row needs an
// artificial.
L1Solution solve_l1_simplex(const L1Problem& problem) {
  const int n_y = static_cast<int>(problem.m.rows());
  const int n_x = static_cast<int>(problem.m.cols());
  const int n_vars = 2 * n_y + 2 * n_x;
  const int m_rows = n_x + 1;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m_rows, n_vars);
  for (int j = 0; j < n_x; ++j) {
    for (int i = 0; i < n_y; ++i) {
      a(j, i) = problem.m(i, j);
      a(j, n_y + i) = -problem.m(i, j);
    }
    a(j, 2 * n_y + j) = -1.0;          // p_j
    a(j, 2 * n_y + n_x + j) = 1.0;     // q_j
  }
  for (int i = 0; i < n_y; ++i) {
    a(n_x, i) = problem.r(i);
    a(n_x, n_y + i) = -problem.r(i);
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(m_rows);
  b(n_x) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_vars);
  c.tail(2 * n_x).setOnes();

  std::vector<int> basis(m_rows, -1);
  for (int j = 0; j < n_x; ++j) basis[j] = 2 * n_y + n_x + j;

  LpOptions lp_options;
  lp_options.max_iterations = problem.max_iterations;
  const LpSolution lp = solve_standard_form_lp(a, b, c, basis, lp_options);

  L1Solution sol;
  sol.w = lp.x.head(n_y) - lp.x.segment(n_y, n_y);
  sol.iterations = lp.iterations;
  const double gap = std::max(lp.complementarity_gap, lp.max_dual_infeasibility);
  sol.optimality_gap = std::isfinite(gap) ? gap : 0.0;
  return sol;
}

// First-order alternative backend: ADMM splitting on z = M^T w with the
// hyperplane handled inside the w update (KKT solve, prefactored).
L1Solution solve_l1_admm(const L1Problem& problem) {
  const int n_y = static_cast<int>(problem.m.rows());
  const int n_x = static_cast<int>(problem.m.cols());
  const Eigen::MatrixXd mt = problem.m.transpose();

  double rho = 1.0;
  const Eigen::MatrixXd gram = problem.m * mt;
  // Tiny ridge keeps the KKT system invertible when M is rank-deficient
  // (e.g. a rank-truncated moment); it steers w's null-space component to 0.
  const double ridge = 1e-10 * std::max(gram.trace() / n_y, 1e-30);
  auto factor_kkt = [&](double rho_value) {
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n_y + 1, n_y + 1);
    kkt.topLeftCorner(n_y, n_y) = rho_value * gram;
    kkt.topLeftCorner(n_y, n_y).diagonal().array() += rho_value * ridge;
    kkt.topRightCorner(n_y, 1) = problem.r;
    kkt.bottomLeftCorner(1, n_y) = problem.r.transpose();
    return Eigen::PartialPivLU<Eigen::MatrixXd>(kkt);
  };
  Eigen::PartialPivLU<Eigen::MatrixXd> kkt = factor_kkt(rho);

  Eigen::VectorXd w = problem.r / problem.r.squaredNorm();
  Eigen::VectorXd z = mt * w;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_x);

  const int max_iters = std::max(problem.max_iterations, 1000);
  const double tol = std::max(problem.tolerance, 1e-12);
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    Eigen::VectorXd rhs(n_y + 1);
    rhs.head(n_y) = rho * (problem.m * (z - u));
    rhs(n_y) = 1.0;
    const Eigen::VectorXd wl = kkt.solve(rhs);
    w = wl.head(n_y);

    const Eigen::VectorXd mtw = mt * w;
    const Eigen::VectorXd z_old = z;
    const Eigen::ArrayXd shifted = (mtw + u).array();
    z = (shifted.abs() - 1.0 / rho).max(0.0) * shifted.sign();

    u += mtw - z;

    const double primal = (mtw - z).norm();
    const double dual = rho * (problem.m * (z - z_old)).norm();
    const double scale = std::max(1.0, std::max(mtw.norm(), z.norm()));
    if (primal < tol * scale && dual < tol * scale) break;

    // residual balancing
    if (iter % 50 == 49) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        kkt = factor_kkt(rho);
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        kkt = factor_kkt(rho);
      }
    }
  }

  L1Solution sol;
  sol.w = w;
  sol.iterations = iter;
  sol.optimality_gap = (mt * w - z).norm();
  return sol;
}

std::vector<int> usable_columns(const Eigen::MatrixXd& m,
                                const std::vector<int>& subset) {
  std::vector<int> cols;
  if (subset.empty()) {
    cols.resize(m.cols());
    std::iota(cols.begin(), cols.end(), 0);
  } else {
    for (int j : subset) {
      if (j < 0 || j >= m.cols())
        throw ConfigError("column subset index out of range");
      cols.push_back(j);
    }
  }
  return cols;
}

}  // namespace

L1Backend l1_backend_from_string(const std::string& name) {
  if (name == "simplex") return L1Backend::simplex;
  if (name == "admm") return L1Backend::admm;
  throw ConfigError("unknown l1 backend: " + name);
}

const char* to_string(L1Backend backend) {
  return backend == L1Backend::simplex ? "simplex" : "admm";
}

L1Solution solve_l1(const L1Problem& problem) {
  if (problem.m.rows() < 1 || problem.m.cols() < 1)
    throw ConfigError("l1 problem needs a nonempty matrix");
  if (problem.r.size() != problem.m.rows())
    throw ConfigError("hyperplane vector length must match rows of M");
  if (problem.r.norm() == 0.0)
    throw InfeasibleConstraintError("constraint r^T w = 1 with r = 0");

  L1Solution sol = problem.backend == L1Backend::simplex
                       ? solve_l1_simplex(problem)
                       : solve_l1_admm(problem);

  // Polish feasibility exactly; basic solutions leave only rounding here.
  const double along = problem.r.dot(sol.w);
  if (along == 0.0)
    throw SolverError("l1 solver returned w orthogonal to r");
  sol.w /= along;
  sol.objective = (problem.m.transpose() * sol.w).lpNorm<1>();
  return sol;
}

CandidateSet spud_candidates(const MomentMatrix& moment,
                             const SpudOptions& options) {
  const Eigen::MatrixXd& m = moment.values;
  const std::vector<int> cols = usable_columns(m, options.column_subset);

  const double col_zero_tol =
      1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff());

  struct Slot {
    bool usable = false;
    L1Solution sol;
    Eigen::VectorXd direction;
  };
  std::vector<Slot> slots(cols.size());

  CandidateSet out;
  out.trace.resize(cols.size());

  std::size_t n_usable = 0;
  for (std::size_t idx = 0; idx < cols.size(); ++idx) {
    const int j = cols[idx];
    out.trace[idx].column = j;
    Eigen::VectorXd r = m.col(j);
    if (options.pair_sum_r)
      r += m.col(cols[(idx + 1) % cols.size()]);
    if (r.cwiseAbs().maxCoeff() <= col_zero_tol) {
      out.trace[idx].skipped_zero_column = true;
      continue;
    }
    slots[idx].usable = true;
    ++n_usable;
  }
  if (n_usable == 0)
    throw NumericError("degenerate moment matrix: all columns are zero");

  parallel_for(cols.size(), options.workers, [&](std::size_t idx) {
    if (!slots[idx].usable) return;
    const int j = cols[idx];
    L1Problem problem;
    problem.m = m;
    problem.r = m.col(j);
    if (options.pair_sum_r)
      problem.r += m.col(cols[(idx + 1) % cols.size()]);
    problem.tolerance = options.lp_tolerance;
    problem.backend = options.backend;
    slots[idx].sol = solve_l1(problem);
    slots[idx].direction = m.transpose() * slots[idx].sol.w;
  });

  // Deduplicate in column order; duplicates cannot add rank, so merging them
  // only shortens the trace.
  for (std::size_t idx = 0; idx < cols.size(); ++idx) {
    if (!slots[idx].usable) continue;
    CandidateRecord& rec = out.trace[idx];
    rec.objective = slots[idx].sol.objective;
    rec.lp_iterations = slots[idx].sol.iterations;
    rec.lp_gap = slots[idx].sol.optimality_gap;
    rec.sparsity =
        sparsity_count(slots[idx].direction, options.zero_threshold_rel);

    const Eigen::VectorXd unit = normalize_canonical(slots[idx].direction);
    bool merged = false;
    for (std::size_t prev = 0; prev < out.directions.size(); ++prev) {
      const double cosine =
          std::abs(unit.dot(normalize_canonical(out.directions[prev])));
      if (cosine >= options.dedup_cosine) {
        rec.merged_into = out.source_column[prev];
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.directions.push_back(slots[idx].direction);
      out.source_column.push_back(cols[idx]);
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> greedy_select(
    const std::vector<Eigen::VectorXd>& candidates, int k,
    double zero_threshold_rel, double rank_tol, std::vector<int>* chosen) {
  if (k < 1) throw ConfigError("greedy selection needs k >= 1");

  struct Entry {
    int sparsity;
    int index;
  };
  std::vector<Entry> pool;
  pool.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    pool.push_back({sparsity_count(candidates[i], zero_threshold_rel),
                    static_cast<int>(i)});
  // Ties broken by lowest original index: a deterministic refinement of the
  // "break ties arbitrarily" rule.
  std::stable_sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    return a.sparsity != b.sparsity ? a.sparsity < b.sparsity
                                    : a.index < b.index;
  });

  std::vector<Eigen::VectorXd> kept;
  std::vector<Eigen::VectorXd> ortho;  // Gram-Schmidt basis of kept rows
  if (chosen) chosen->clear();

  for (const Entry& entry : pool) {
    if (static_cast<int>(kept.size()) == k) break;
    const Eigen::VectorXd& cand = candidates[entry.index];
    const double norm = cand.norm();
    if (norm == 0.0) continue;
    Eigen::VectorXd residual = cand;
    for (const Eigen::VectorXd& q : ortho) residual -= q.dot(residual) * q;
    if (residual.norm() <= rank_tol * norm) continue;  // no rank gain
    ortho.push_back(residual / residual.norm());
    kept.push_back(cand);
    if (chosen) chosen->push_back(entry.index);
  }

  if (static_cast<int>(kept.size()) < k)
    throw InsufficientCandidatesError(
        "candidate pool exhausted before reaching rank " + std::to_string(k),
        kept);
  return kept;
}

RecoveryResult recover_first_layer(const MomentMatrix& moment, int k,
                                   const RecoveryConfig& config) {
  if (k < 1 || k > std::min(moment.values.rows(), moment.values.cols()))
    throw ConfigError("requested k is outside the moment matrix shape");

  RecoveryResult result;
  result.moment_singular_values = singular_values(moment.values);
  {
    const Eigen::VectorXd& sv = result.moment_singular_values;
    if (sv(0) == 0.0 || sv(k - 1) <= config.rank_rel_threshold * sv(0))
      throw RankError("moment matrix numeric rank below k");
  }

  MomentMatrix working = moment;
  if (config.truncate_to_rank_k && moment.values.rows() > k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        moment.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
    working.values = svd.matrixU().leftCols(k) *
                     svd.singularValues().head(k).asDiagonal() *
                     svd.matrixV().leftCols(k).transpose();
  }
  const Eigen::MatrixXd& m = working.values;

  SpudOptions spud;
  spud.lp_tolerance = config.lp_tolerance;
  spud.zero_threshold_rel = config.zero_threshold_rel;
  spud.pair_sum_r = config.pair_sum_r;
  spud.backend = config.backend;
  spud.workers = config.workers;
  if (config.column_limit > 0 &&
      config.column_limit < static_cast<int>(m.cols())) {
    const int stride = static_cast<int>(
        (m.cols() + config.column_limit - 1) / config.column_limit);
    for (int j = 0; j < m.cols(); j += stride)
      spud.column_subset.push_back(j);
  }

  CandidateSet candidates = spud_candidates(working, spud);

  std::vector<int> chosen;
  const std::vector<Eigen::VectorXd> rows =
      greedy_select(candidates.directions, k, config.zero_threshold_rel,
                    config.selection_rank_tol, &chosen);

  result.first_layer.resize(k, m.cols());
  result.residuals.resize(k, 0.0);
  for (int i = 0; i < k; ++i)
    result.first_layer.row(i) = normalize_canonical(rows[i]).transpose();

  // Mark selections in the trace and surface each selected row's lp gap.
  for (int i = 0; i < k; ++i) {
    const int source = candidates.source_column[chosen[i]];
    for (CandidateRecord& rec : candidates.trace) {
      if (rec.column == source) {
        rec.selected = true;
        result.residuals[i] = rec.lp_gap;
        break;
      }
    }
  }
  result.trace = std::move(candidates.trace);
  return result;
}

std::vector<Eigen::VectorXd> brute_force_sparsest(const Eigen::MatrixXd& m,
                                                  int k, int grid) {
  const int n_y = static_cast<int>(m.rows());
  const int n_x = static_cast<int>(m.cols());
  if (n_y > 3 || n_x > 10)
    throw DiagnosticScaleError(
        "brute-force sparsest search supports n_y <= 3, n_x <= 10");
  if (grid < 8) throw ConfigError("grid must be at least 8");

  std::vector<Eigen::VectorXd> pool;

  auto add_direction = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd s = m.transpose() * w;
    if (s.cwiseAbs().maxCoeff() <= 1e-12) return;
    pool.push_back(s);
  };

  // Exact candidates: for every target support T with |T| <= 2, directions w
  // that zero out every column outside T (null space of those columns).
  auto null_candidates = [&](const std::vector<int>& target) {
    std::vector<int> complement;
    for (int j = 0; j < n_x; ++j)
      if (std::find(target.begin(), target.end(), j) == target.end())
        complement.push_back(j);
    if (complement.empty()) return;
    Eigen::MatrixXd rest(complement.size(), n_y);
    for (std::size_t r = 0; r < complement.size(); ++r)
      rest.row(r) = m.col(complement[r]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    for (int c = 0; c < n_y; ++c) {
      const double sigma = c < sv.size() ? sv(c) : 0.0;
      if (sigma <= cut) add_direction(svd.matrixV().col(c));
    }
  };
  for (int j1 = 0; j1 < n_x; ++j1) {
    null_candidates({j1});
    for (int j2 = j1 + 1; j2 < n_x; ++j2) null_candidates({j1, j2});
  }

  // Grid over half the unit sphere (directions are sign-free), polished onto
  // the nearest exact support so l0 counts are not blurred by grid spacing.
  std::vector<Eigen::VectorXd> grid_points;
  if (n_y == 1) {
    grid_points.push_back(Eigen::VectorXd::Ones(1));
  } else if (n_y == 2) {
    for (int i = 0; i < grid; ++i) {
      const double angle = kPi * i / grid;
      Eigen::VectorXd w(2);
      w << std::cos(angle), std::sin(angle);
      grid_points.push_back(w);
    }
  } else {
    for (int i = 0; i < grid; ++i) {
      const double polar = kPi * (i + 0.5) / grid;
      for (int j = 0; j < grid; ++j) {
        const double azimuth = kPi * j / grid;  // hemisphere
        Eigen::VectorXd w(3);
        w << std::sin(polar) * std::cos(azimuth),
            std::sin(polar) * std::sin(azimuth), std::cos(polar);
        grid_points.push_back(w);
      }
    }
  }
  for (const Eigen::VectorXd& w : grid_points) {
    const Eigen::VectorXd s = m.transpose() * w;
    const double peak = s.cwiseAbs().maxCoeff();
    if (peak <= 1e-12) continue;
    // approximate support at a coarse cut, then refine exactly
    std::vector<int> support;
    for (int j = 0; j < n_x; ++j)
      if (std::abs(s(j)) > 0.05 * peak) support.push_back(j);
    if (static_cast<int>(support.size()) < n_x) null_candidates(support);
    add_direction(w);
  }

  // Deduplicate directions, then reuse the greedy sparsest-first selector.
  std::vector<Eigen::VectorXd> unique;
  for (const Eigen::VectorXd& s : pool) {
    const Eigen::VectorXd unit = normalize_canonical(s);
    bool dup = false;
    for (const Eigen::VectorXd& seen : unique) {
      if (std::abs(unit.dot(normalize_canonical(seen))) >= 1.0 - 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(s);
  }

  std::vector<Eigen::VectorXd> picked = greedy_select(unique, k, 1e-6);
  for (Eigen::VectorXd& v : picked) v = normalize_canonical(v);
  return picked;
}

ExpansionReport expansion_check(const Eigen::MatrixXd& b,
                                double zero_threshold) {
  const int n_rows = static_cast<int>(b.rows());
  const int n_cols = static_cast<int>(b.cols());
  if (n_cols > 20)
    throw DiagnosticScaleError("expansion check supports at most 20 columns");
  if (n_rows > 64)
    throw DiagnosticScaleError("expansion check supports at most 64 rows");

  std::vector<std::uint64_t> col_mask(n_cols, 0);
  std::vector<int> row_degree(n_rows, 0);
  for (int j = 0; j < n_cols; ++j) {
    for (int i = 0; i < n_rows; ++i) {
      if (std::abs(b(i, j)) > zero_threshold) {
        col_mask[j] |= (1ull << i);
        ++row_degree[i];
      }
    }
  }
  const int d_max =
      row_degree.empty() ? 0 : *std::max_element(row_degree.begin(), row_degree.end());

  ExpansionReport report;
  const std::uint64_t n_subsets = 1ull << n_cols;
  for (std::uint64_t s = 3; s < n_subsets; ++s) {
    const int size = __builtin_popcountll(s);
    if (size < 2) continue;
    std::uint64_t neighbors = 0;
    for (int j = 0; j < n_cols; ++j)
      if (s & (1ull << j)) neighbors |= col_mask[j];
    if (__builtin_popcountll(neighbors) < size + d_max) {
      report.holds = false;
      std::vector<int> subset;
      for (int j = 0; j < n_cols; ++j)
        if (s & (1ull << j)) subset.push_back(j);
      report.violating_subset = subset;
      return report;
    }
  }
  return report;
}

}  // namespace steinrec
