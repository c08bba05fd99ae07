#include "steinrec/network.hpp"

#include <cmath>
#include <sstream>

#include "steinrec/errors.hpp"

namespace steinrec {

const char* to_string(TaskKind task) {
  return task == TaskKind::multiclass ? "multiclass" : "multilabel";
}

TaskKind task_from_string(const std::string& name) {
  if (name == "multiclass") return TaskKind::multiclass;
  if (name == "multilabel") return TaskKind::multilabel;
  throw ConfigError("unknown task kind: " + name);
}

void NetworkSpec::validate() const {
  if (weights.empty()) throw ConfigError("network has no layers");
  if (weights.size() < 2)
    throw ConfigError("network depth must be at least 2");
  if (activations.size() != weights.size())
    throw ConfigError("activation count must match layer count");
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    if (weights[i + 1].cols() != weights[i].rows()) {
      std::ostringstream msg;
      msg << "layer shape chain broken between A_" << (i + 1) << " and A_"
          << (i + 2);
      throw ConfigError(msg.str());
    }
    if (!is_elementwise(activations[i]))
      throw ConfigError("softmax is only permitted at the final layer");
  }
  const int k = hidden_dim();
  for (std::size_t i = 1; i + 1 < weights.size(); ++i) {
    if (weights[i].rows() != k || weights[i].cols() != k)
      throw ConfigError("intermediate weight matrices must be square");
  }
}

void NetworkSpec::validate_task_head() const {
  validate();
  const ActivationKind head = activations.back();
  if (task == TaskKind::multiclass && head != ActivationKind::softmax)
    throw ConfigError("multiclass task requires a softmax head");
  if (task == TaskKind::multilabel && head != ActivationKind::sigmoid)
    throw ConfigError("multilabel task requires a sigmoid head");
}

FirstLayerDraw draw_first_layer(const FirstLayerPrior& prior) {
  if (prior.k < 2 || prior.n_x < prior.k)
    throw ConfigError("first-layer prior needs k >= 2 and n_x >= k");
  // theta = 1 (dense mask) is admitted for degenerate fixtures.
  if (!(prior.theta > 0.0) || prior.theta > 1.0)
    throw ConfigError("theta must lie in (0, 1]");

  Eigen::MatrixXd raw(prior.k, prior.n_x);
  for (int i = 0; i < prior.k; ++i) {
    RngStream rng(prior.seed, rng_stream::kWeights, static_cast<std::uint64_t>(i));
    bool nonzero = false;
    while (!nonzero) {
      for (int j = 0; j < prior.n_x; ++j) {
        const bool active = rng.uniform() < prior.theta;
        const double g = rng.normal();  // consumed either way, keeps streams aligned
        raw(i, j) = active ? g : 0.0;
        nonzero = nonzero || active;
      }
    }
  }

  FirstLayerDraw out;
  out.raw = raw;
  out.normalized = raw;
  for (int i = 0; i < prior.k; ++i)
    out.normalized.row(i) /= out.normalized.row(i).norm();
  return out;
}

Eigen::MatrixXd generate_first_layer(const FirstLayerPrior& prior) {
  return draw_first_layer(prior).normalized;
}

std::vector<std::string> prior_band_warnings(const FirstLayerPrior& prior,
                                             double alpha) {
  std::vector<std::string> warnings;
  const double lo = 2.0 / prior.k;
  const double hi = alpha / std::sqrt(static_cast<double>(prior.k));
  if (prior.theta < lo || prior.theta > hi) {
    std::ostringstream msg;
    msg << "theta=" << prior.theta << " outside sparsity band [" << lo << ", "
        << hi << "] for k=" << prior.k;
    warnings.push_back(msg.str());
  }
  if (prior.n_x < 10 * prior.k) {
    std::ostringstream msg;
    msg << "n_x=" << prior.n_x << " below the desk-scale sizing n_x >= 10k ("
        << 10 * prior.k << ")";
    warnings.push_back(msg.str());
  }
  return warnings;
}

ForwardTrace forward_trace(const NetworkSpec& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw ConfigError("input vector length does not match network input dim");
  ForwardTrace trace;
  const int d = net.depth();
  trace.pre.resize(d);
  trace.post.resize(d);
  Eigen::VectorXd h = x;
  for (int i = 0; i < d; ++i) {
    trace.pre[i].noalias() = net.weights[i] * h;
    trace.post[i] = activate(net.activations[i], trace.pre[i]);
    h = trace.post[i];
  }
  return trace;
}

Eigen::VectorXd forward_expected(const NetworkSpec& net,
                                 const Eigen::VectorXd& x) {
  return forward_trace(net, x).post.back();
}

Eigen::VectorXd sample_one_hot(const Eigen::VectorXd& probs, RngStream& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  Eigen::Index pick = probs.size() - 1;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    cum += probs(c);
    if (u < cum) {
      pick = c;
      break;
    }
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(probs.size());
  y(pick) = 1.0;
  return y;
}

Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& probs, RngStream& rng) {
  Eigen::VectorXd y(probs.size());
  for (Eigen::Index c = 0; c < probs.size(); ++c)
    y(c) = rng.uniform() < probs(c) ? 1.0 : 0.0;
  return y;
}

Eigen::VectorXd sample_label(const NetworkSpec& net, const Eigen::VectorXd& x,
                             RngStream& rng) {
  net.validate_task_head();
  const Eigen::VectorXd probs = forward_expected(net, x);
  return net.task == TaskKind::multiclass ? sample_one_hot(probs, rng)
                                          : sample_bernoulli(probs, rng);
}

Eigen::MatrixXd upper_jacobian_factor(const NetworkSpec& net,
                                      const ForwardTrace& trace) {
  const int d = net.depth();
  // G = J_d A_d, then fold in J_i A_i down to layer 2, then D(sigma_1').
  Eigen::MatrixXd g =
      jacobian_times(net.activations[d - 1], trace.pre[d - 1], net.weights[d - 1]);
  for (int i = d - 2; i >= 1; --i) {
    g = g * activate_derivative(net.activations[i], trace.pre[i]).asDiagonal();
    g = g * net.weights[i];
  }
  g = g * activate_derivative(net.activations[0], trace.pre[0]).asDiagonal();
  return g;
}

Eigen::MatrixXd input_jacobian(const NetworkSpec& net,
                               const ForwardTrace& trace) {
  return upper_jacobian_factor(net, trace) * net.weights[0];
}

Eigen::MatrixXd input_jacobian(const NetworkSpec& net,
                               const Eigen::VectorXd& x) {
  return input_jacobian(net, forward_trace(net, x));
}

}  // namespace steinrec
