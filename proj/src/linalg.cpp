#include "steinrec/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "steinrec/errors.hpp"

namespace steinrec {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

int numeric_rank(const Eigen::MatrixXd& m, double rel_threshold) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_threshold * sv(0)) ++rank;
  return rank;
}

Eigen::MatrixXd top_right_singular_basis(const Eigen::MatrixXd& m, int k,
                                         double rel_threshold) {
  if (k <= 0 || k > m.cols() || k > std::min(m.rows(), m.cols()))
    throw RankError("requested subspace dimension out of range");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(k - 1) <= rel_threshold * sv(0))
    throw RankError("matrix numeric rank below requested dimension");
  return svd.matrixV().leftCols(k);
}

int sparsity_count(const Eigen::VectorXd& v, double rel_threshold) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  const double cut = rel_threshold * scale;
  int count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > cut) ++count;
  return count;
}

Eigen::VectorXd normalize_canonical(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm == 0.0) throw NumericError("cannot normalize a zero vector");
  Eigen::VectorXd out = v / norm;
  Eigen::Index imax = 0;
  out.cwiseAbs().maxCoeff(&imax);
  if (out(imax) < 0.0) out = -out;
  return out;
}

}  // namespace steinrec
