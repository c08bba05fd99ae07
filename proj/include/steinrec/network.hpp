#ifndef STEINREC_NETWORK_HPP
#define STEINREC_NETWORK_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "steinrec/activation.hpp"
#include "steinrec/rng.hpp"

namespace steinrec {

enum class TaskKind { multilabel, multiclass };

const char* to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

// Generative feedforward model: E[y|x] = sigma_d(A_d ... sigma_1(A_1 x)).
// Layer 1 maps n_x -> k, intermediate layers are k -> k, the head maps to
// n_y outputs.
struct NetworkSpec {
  std::vector<Eigen::MatrixXd> weights;     // A_1 .. A_d
  std::vector<ActivationKind> activations;  // sigma_1 .. sigma_d
  TaskKind task = TaskKind::multilabel;

  int depth() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int hidden_dim() const { return static_cast<int>(weights.front().rows()); }

  // Shape chain, elementwise-only below the head, square intermediates.
  void validate() const;

  // Stricter check needed before sampling labels: the head must emit
  // probabilities (softmax for multiclass, sigmoid for multilabel).
  void validate_task_head() const;
};

struct FirstLayerPrior {
  int k = 0;
  int n_x = 0;
  double theta = 0.0;  // Bernoulli activation probability per entry
  std::uint64_t seed = 0;
};

struct FirstLayerDraw {
  Eigen::MatrixXd normalized;  // unit-norm rows; the recovery target
  Eigen::MatrixXd raw;         // same draw before row normalization
};

// Bernoulli(theta)-Gaussian entries, all-zero rows redrawn, rows scaled to
// unit Euclidean norm. The raw draw is kept alongside for experiments that
// switch normalization off.
FirstLayerDraw draw_first_layer(const FirstLayerPrior& prior);
Eigen::MatrixXd generate_first_layer(const FirstLayerPrior& prior);

// Sparsity-band advisories (2/k <= theta <= alpha/sqrt(k) and n_x sizing);
// returned as messages rather than failures.
std::vector<std::string> prior_band_warnings(const FirstLayerPrior& prior,
                                             double alpha = 1.0);

struct ForwardTrace {
  std::vector<Eigen::VectorXd> pre;   // per-layer pre-activations x~_i
  std::vector<Eigen::VectorXd> post;  // per-layer outputs sigma_i(x~_i)
};

// Pre-activations are computed once here and shared by the forward value and
// the Jacobian so the two paths agree bit for bit.
ForwardTrace forward_trace(const NetworkSpec& net, const Eigen::VectorXd& x);

Eigen::VectorXd forward_expected(const NetworkSpec& net,
                                 const Eigen::VectorXd& x);

// One-hot categorical draw (multiclass) or independent Bernoulli per
// coordinate (multilabel) from forward_expected(x).
Eigen::VectorXd sample_label(const NetworkSpec& net, const Eigen::VectorXd& x,
                             RngStream& rng);

Eigen::VectorXd sample_one_hot(const Eigen::VectorXd& probs, RngStream& rng);
Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& probs, RngStream& rng);

// d(E[y|x])/dx, an n_y x n_x matrix assembled from the layer Jacobians.
Eigen::MatrixXd input_jacobian(const NetworkSpec& net,
                               const Eigen::VectorXd& x);
Eigen::MatrixXd input_jacobian(const NetworkSpec& net,
                               const ForwardTrace& trace);

// Product of everything above layer 1 including D(sigma_1'(x~_1)); the input
// Jacobian equals this factor times A_1.
Eigen::MatrixXd upper_jacobian_factor(const NetworkSpec& net,
                                      const ForwardTrace& trace);

}  // namespace steinrec

#endif
