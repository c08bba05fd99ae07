#include "steinrec/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "steinrec/assignment.hpp"
#include "steinrec/errors.hpp"
#include "steinrec/linalg.hpp"

namespace steinrec {

namespace {

constexpr double kRadToDeg = 57.29577951308232;

std::vector<int> support_set(const Eigen::VectorXd& v, double rel_threshold) {
  std::vector<int> support;
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return support;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > rel_threshold * scale)
      support.push_back(static_cast<int>(i));
  return support;
}

// Angles between two orthonormal bases. Cosines come from svd(U1^T U2) and
// sines from svd(U2 - U1 (U1^T U2)); small angles read off the sine branch,
// which stays accurate where acos of a near-unit cosine loses all precision.
std::vector<double> basis_angles_deg(const Eigen::MatrixXd& u1,
                                     const Eigen::MatrixXd& u2) {
  const Eigen::MatrixXd overlap = u1.transpose() * u2;
  Eigen::VectorXd cosines = singular_values(overlap);          // descending
  Eigen::VectorXd sines = singular_values(u2 - u1 * overlap);  // descending
  std::vector<double> angles;
  const Eigen::Index k = cosines.size();
  for (Eigen::Index i = 0; i < k; ++i) {
    const double sine = std::clamp(sines(k - 1 - i), 0.0, 1.0);
    const double cosine = std::clamp(cosines(i), 0.0, 1.0);
    const double angle =
        sine < 0.7 ? std::asin(sine) : std::acos(cosine);
    angles.push_back(angle * kRadToDeg);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace

MatchReport match_rows(const Eigen::MatrixXd& recovered,
                       const Eigen::MatrixXd& truth,
                       double support_threshold_rel) {
  if (recovered.rows() != truth.rows() || recovered.cols() != truth.cols())
    throw ConfigError("match_rows requires matrices of identical shape");
  const int k = static_cast<int>(recovered.rows());

  Eigen::MatrixXd cosines(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double denom = recovered.row(i).norm() * truth.row(j).norm();
      cosines(i, j) = denom == 0.0 ? 0.0 : recovered.row(i).dot(truth.row(j)) / denom;
    }
  }

  const std::vector<int> perm =
      solve_assignment((1.0 - cosines.cwiseAbs().array()).matrix());

  MatchReport report;
  report.permutation = perm;
  report.signs.resize(k);
  report.per_row_cosine_error.resize(k);

  std::size_t support_hits = 0, support_recovered = 0, support_true = 0;
  for (int i = 0; i < k; ++i) {
    const double c = cosines(i, perm[i]);
    report.signs[i] = c >= 0.0 ? 1 : -1;
    report.per_row_cosine_error(i) = std::max(0.0, 1.0 - std::abs(c));

    const std::vector<int> s_hat =
        support_set(recovered.row(i), support_threshold_rel);
    const std::vector<int> s_true =
        support_set(truth.row(perm[i]), support_threshold_rel);
    support_recovered += s_hat.size();
    support_true += s_true.size();
    for (int idx : s_hat)
      if (std::find(s_true.begin(), s_true.end(), idx) != s_true.end())
        ++support_hits;
  }
  report.support_precision =
      support_recovered == 0 ? 0.0
                             : static_cast<double>(support_hits) / support_recovered;
  report.support_recall =
      support_true == 0 ? 0.0
                        : static_cast<double>(support_hits) / support_true;

  // Angle between the two row spans; 90 degrees when the ranks disagree.
  const int rank_rec = numeric_rank(recovered);
  const int rank_true = numeric_rank(truth);
  if (rank_rec != rank_true) {
    report.max_principal_angle_deg = 90.0;
  } else {
    const Eigen::MatrixXd b1 = top_right_singular_basis(recovered, rank_rec);
    const Eigen::MatrixXd b2 = top_right_singular_basis(truth, rank_true);
    report.max_principal_angle_deg = basis_angles_deg(b1, b2).back();
  }
  return report;
}

std::vector<double> principal_angles(const Eigen::MatrixXd& m,
                                     const Eigen::MatrixXd& a1_true, int k,
                                     double rank_rel_threshold) {
  const Eigen::MatrixXd basis_m =
      top_right_singular_basis(m, k, rank_rel_threshold);
  const Eigen::MatrixXd basis_true =
      top_right_singular_basis(a1_true, k, rank_rel_threshold);
  return basis_angles_deg(basis_m, basis_true);
}

std::vector<Eigen::VectorXd> project_inputs(
    const Eigen::MatrixXd& m, const std::vector<Eigen::VectorXd>& inputs,
    int k, double rank_rel_threshold) {
  const Eigen::MatrixXd basis =
      top_right_singular_basis(m, k, rank_rel_threshold);
  std::vector<Eigen::VectorXd> projected;
  projected.reserve(inputs.size());
  for (const Eigen::VectorXd& x : inputs) {
    if (x.size() != basis.rows())
      throw ConfigError("projection input has wrong dimension");
    projected.push_back(basis.transpose() * x);
  }
  return projected;
}

double softmax_cross_entropy(const Eigen::MatrixXd& weights,
                             const Eigen::MatrixXd& features,
                             const Eigen::MatrixXd& labels,
                             Eigen::MatrixXd* grad) {
  const Eigen::Index n = features.cols();
  const Eigen::MatrixXd logits = weights * features;  // n_y x n
  double loss = 0.0;
  Eigen::MatrixXd probs(logits.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = logits.col(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.col(i).array() - shift).exp();
    const double z = e.sum();
    probs.col(i) = (e / z).matrix();
    loss -= labels.col(i).dot(
        (logits.col(i).array() - shift - std::log(z)).matrix());
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw NumericError("cross-entropy overflowed");
  if (grad)
    grad->noalias() =
        (probs - labels) * features.transpose() / static_cast<double>(n);
  return loss;
}

double classification_accuracy(const Eigen::MatrixXd& weights,
                               const Eigen::MatrixXd& features,
                               const Eigen::MatrixXd& labels) {
  const Eigen::MatrixXd logits = weights * features;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    Eigen::Index pred, actual;
    logits.col(i).maxCoeff(&pred);
    labels.col(i).maxCoeff(&actual);
    if (pred == actual) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.cols());
}

SoftmaxFitResult learn_second_layer(const Eigen::MatrixXd& a1,
                                    const std::vector<LabeledSample>& samples,
                                    const SoftmaxFitConfig& config) {
  if (samples.empty()) throw ConfigError("softmax regression needs samples");
  const int k = static_cast<int>(a1.rows());
  const int n_y = static_cast<int>(samples.front().y.size());
  const int n = static_cast<int>(samples.size());

  Eigen::MatrixXd features(k, n);
  Eigen::MatrixXd labels(n_y, n);
  for (int i = 0; i < n; ++i) {
    if (samples[i].x.size() != a1.cols())
      throw ConfigError("sample dimension does not match first layer");
    features.col(i) = activate(config.feature_activation, a1 * samples[i].x);
    labels.col(i) = samples[i].y;
  }

  SoftmaxFitResult result;
  result.weights = Eigen::MatrixXd::Zero(n_y, k);
  Eigen::MatrixXd grad(n_y, k);
  double loss = softmax_cross_entropy(result.weights, features, labels, &grad);
  result.loss_history.push_back(loss);

  double step = config.initial_step;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm < config.grad_tolerance) {
      result.converged = true;
      break;
    }
    // Armijo backtracking on the descent direction -grad.
    const double g2 = grad.squaredNorm();
    bool accepted = false;
    while (step > 1e-14) {
      const Eigen::MatrixXd trial = result.weights - step * grad;
      Eigen::MatrixXd trial_grad(n_y, k);
      const double trial_loss =
          softmax_cross_entropy(trial, features, labels, &trial_grad);
      if (trial_loss <= loss - 1e-4 * step * g2) {
        result.weights = trial;
        loss = trial_loss;
        grad = trial_grad;
        result.loss_history.push_back(loss);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: gradient is numerically flat
    step = std::min(step * 2.0, 1e4);
  }

  result.final_loss = loss;
  result.grad_norm = grad.norm();
  result.iterations = iter;
  if (result.grad_norm < config.grad_tolerance) result.converged = true;
  return result;
}

}  // namespace steinrec
