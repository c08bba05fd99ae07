#ifndef STEINREC_RECOVERY_HPP
#define STEINREC_RECOVERY_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "steinrec/errors.hpp"
#include "steinrec/moments.hpp"

namespace steinrec {

class InfeasibleConstraintError : public NumericError {
 public:
  explicit InfeasibleConstraintError(const std::string& msg)
      : NumericError(msg) {}
};

class InsufficientCandidatesError : public NumericError {
 public:
  InsufficientCandidatesError(const std::string& msg,
                              std::vector<Eigen::VectorXd> partial)
      : NumericError(msg), partial(std::move(partial)) {}
  std::vector<Eigen::VectorXd> partial;
};

enum class L1Backend { simplex, admm };
L1Backend l1_backend_from_string(const std::string& name);
const char* to_string(L1Backend backend);

// minimize ||w^T M||_1 subject to r^T w = 1.
struct L1Problem {
  Eigen::MatrixXd m;
  Eigen::VectorXd r;
  double tolerance = 1e-9;
  L1Backend backend = L1Backend::simplex;
  int max_iterations = 50000;
};

struct L1Solution {
  Eigen::VectorXd w;
  double objective = 0.0;
  int iterations = 0;
  // Complementarity gap plus worst dual infeasibility of the final basis
  // (simplex) or the final residual norms (admm); near zero at optimality.
  double optimality_gap = 0.0;
};

L1Solution solve_l1(const L1Problem& problem);

struct CandidateRecord {
  int column = -1;          // source column j of M (r = M e_j)
  double objective = 0.0;   // ||w^T M||_1 at the solution
  int sparsity = 0;         // entries above the relative zero threshold
  bool selected = false;
  bool skipped_zero_column = false;
  int merged_into = -1;     // column of an earlier duplicate direction
  int lp_iterations = 0;
  double lp_gap = 0.0;
};

struct SpudOptions {
  std::vector<int> column_subset;  // empty = all columns
  bool pair_sum_r = false;         // r = M e_j + M e_{j+1} instead of M e_j
  double lp_tolerance = 1e-9;
  double zero_threshold_rel = 1e-6;
  double dedup_cosine = 1.0 - 1e-9;
  L1Backend backend = L1Backend::simplex;
  int workers = 0;
};

struct CandidateSet {
  std::vector<Eigen::VectorXd> directions;  // deduplicated, column order
  std::vector<int> source_column;           // per direction
  std::vector<CandidateRecord> trace;       // per attempted column
};

// One l1 solve per selected column of M; zero columns are skipped and
// near-duplicate directions merged into their first occurrence.
CandidateSet spud_candidates(const MomentMatrix& moment,
                             const SpudOptions& options = {});

// Pops the sparsest candidate (ties to the lowest index), keeps it only when
// it raises the numeric rank, until k vectors are kept.
std::vector<Eigen::VectorXd> greedy_select(
    const std::vector<Eigen::VectorXd>& candidates, int k,
    double zero_threshold_rel, double rank_tol = 1e-8,
    std::vector<int>* chosen = nullptr);

struct RecoveryConfig {
  double zero_threshold_rel = 1e-6;
  double rank_rel_threshold = 1e-8;
  double lp_tolerance = 1e-9;
  int column_limit = 0;  // 0 = solve every column; else strided subsample
  bool pair_sum_r = false;
  // Project the moment matrix onto its top-k singular directions before the
  // column programs. A sampled moment has full rank, and the extra noise-only
  // directions let the l1 minimizer cancel mass with spurious combinations;
  // truncation removes them. Exact (closed-form) moments are unaffected.
  bool truncate_to_rank_k = true;
  // Rank-gain tolerance used by greedy selection. Near 0 every noisy
  // near-duplicate of an already-kept row counts as a new direction; sampled
  // moments need a macroscopic value (0.2-0.3) so duplicates are rejected.
  double selection_rank_tol = 1e-8;
  L1Backend backend = L1Backend::simplex;
  int workers = 0;
};

struct RecoveryResult {
  Eigen::MatrixXd first_layer;  // k x n_x, unit-norm rows, canonical signs
  std::vector<CandidateRecord> trace;
  std::vector<double> residuals;            // lp gap per selected row
  Eigen::VectorXd moment_singular_values;   // spectrum diagnostic for k choice
};

RecoveryResult recover_first_layer(const MomentMatrix& moment, int k,
                                   const RecoveryConfig& config = {});

// Exhaustive sparsest-vector search at oracle scale (n_y <= 3, n_x <= 10):
// sphere-grid directions polished onto exact zero supports, plus all supports
// of size <= 2 solved exactly via null spaces. Independent of the l1 path.
std::vector<Eigen::VectorXd> brute_force_sparsest(const Eigen::MatrixXd& m,
                                                  int k, int grid);

struct ExpansionReport {
  bool holds = true;
  std::optional<std::vector<int>> violating_subset;
};

// |N_B(S)| >= |S| + d_max(B) over all column subsets with |S| >= 2, where
// N_B(S) is the set of rows touched by S and d_max is the largest row
// support. Enumeration is exponential in columns(B), capped at 20.
ExpansionReport expansion_check(const Eigen::MatrixXd& b,
                                double zero_threshold);

}  // namespace steinrec

#endif
