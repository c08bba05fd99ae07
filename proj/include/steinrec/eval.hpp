#ifndef STEINREC_EVAL_HPP
#define STEINREC_EVAL_HPP

#include <Eigen/Core>
#include <vector>

#include "steinrec/activation.hpp"

namespace steinrec {

// Row correspondence between a recovered matrix and ground truth, resolved by
// optimal assignment on |cosine| so near-collinear rows cannot be misreported.
struct MatchReport {
  std::vector<int> permutation;  // recovered row i matches true row perm[i]
  std::vector<int> signs;        // +-1 per recovered row
  Eigen::VectorXd per_row_cosine_error;  // 1 - |cos| per recovered row
  double support_precision = 0.0;
  double support_recall = 0.0;
  double max_principal_angle_deg = 0.0;

  double mean_cosine_error() const { return per_row_cosine_error.mean(); }
  double max_cosine_error() const { return per_row_cosine_error.maxCoeff(); }
};

MatchReport match_rows(const Eigen::MatrixXd& recovered,
                       const Eigen::MatrixXd& truth,
                       double support_threshold_rel = 1e-6);

// Canonical angles (degrees, nondecreasing) between the top-k right singular
// subspace of m and the row span of a1_true.
std::vector<double> principal_angles(const Eigen::MatrixXd& m,
                                     const Eigen::MatrixXd& a1_true, int k,
                                     double rank_rel_threshold = 1e-8);

// Coordinates of each input in the top-k right singular basis of m.
std::vector<Eigen::VectorXd> project_inputs(
    const Eigen::MatrixXd& m, const std::vector<Eigen::VectorXd>& inputs,
    int k, double rank_rel_threshold = 1e-8);

struct LabeledSample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // one-hot
};

struct SoftmaxFitConfig {
  ActivationKind feature_activation = ActivationKind::sigmoid;
  double grad_tolerance = 1e-6;
  int max_iterations = 500;
  double initial_step = 1.0;
};

struct SoftmaxFitResult {
  Eigen::MatrixXd weights;  // n_y x k head, A2_hat
  double final_loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // loss after each accepted step
};

// Softmax regression of the labels on features sigma(A1 x): full-batch
// gradient descent with Armijo backtracking, so the loss never increases.
SoftmaxFitResult learn_second_layer(const Eigen::MatrixXd& a1,
                                    const std::vector<LabeledSample>& samples,
                                    const SoftmaxFitConfig& config = {});

// Mean cross-entropy of softmax(weights * features) against one-hot labels;
// optionally returns the gradient. Exposed for gradient checks.
double softmax_cross_entropy(const Eigen::MatrixXd& weights,
                             const Eigen::MatrixXd& features,
                             const Eigen::MatrixXd& labels,
                             Eigen::MatrixXd* grad = nullptr);

double classification_accuracy(const Eigen::MatrixXd& weights,
                               const Eigen::MatrixXd& features,
                               const Eigen::MatrixXd& labels);

}  // namespace steinrec

#endif
