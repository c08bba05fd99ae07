#ifndef STEINREC_LINALG_HPP
#define STEINREC_LINALG_HPP

#include <Eigen/Core>

namespace steinrec {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

// Count of singular values above rel_threshold * sigma_max.
int numeric_rank(const Eigen::MatrixXd& m, double rel_threshold = 1e-8);

// Orthonormal basis (n_cols x k) of the top-k right singular subspace.
// Throws RankError when sigma_k does not clear rel_threshold * sigma_1.
Eigen::MatrixXd top_right_singular_basis(const Eigen::MatrixXd& m, int k,
                                         double rel_threshold = 1e-8);

// Entries counted as nonzero when |v_i| > rel_threshold * max|v|.
int sparsity_count(const Eigen::VectorXd& v, double rel_threshold);

// Unit-norm copy with the largest-magnitude entry made positive; fixes the
// sign ambiguity of recovered directions deterministically.
Eigen::VectorXd normalize_canonical(const Eigen::VectorXd& v);

}  // namespace steinrec

#endif
