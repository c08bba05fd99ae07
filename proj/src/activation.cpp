#include "steinrec/activation.hpp"

#include <cmath>

#include "steinrec/errors.hpp"

namespace steinrec {

bool is_elementwise(ActivationKind kind) {
  return kind != ActivationKind::softmax;
}

const char* to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::identity: return "identity";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::softplus: return "softplus";
    case ActivationKind::softmax: return "softmax";
  }
  return "unknown";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "identity") return ActivationKind::identity;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "softplus") return ActivationKind::softplus;
  if (name == "softmax") return ActivationKind::softmax;
  throw ConfigError("unknown activation kind: " + name);
}

double sigmoid_scalar(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus_scalar(double z) {
  // max(z, 0) + log1p(exp(-|z|)) avoids overflow on both tails.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

static Eigen::VectorXd softmax_vec(const Eigen::VectorXd& pre) {
  const double shift = pre.maxCoeff();
  Eigen::VectorXd e = (pre.array() - shift).exp();
  return e / e.sum();
}

Eigen::VectorXd activate(ActivationKind kind, const Eigen::VectorXd& pre) {
  switch (kind) {
    case ActivationKind::identity:
      return pre;
    case ActivationKind::sigmoid:
      return pre.unaryExpr([](double z) { return sigmoid_scalar(z); });
    case ActivationKind::tanh:
      return pre.array().tanh();
    case ActivationKind::softplus:
      return pre.unaryExpr([](double z) { return softplus_scalar(z); });
    case ActivationKind::softmax:
      return softmax_vec(pre);
  }
  throw ConfigError("unknown activation kind");
}

Eigen::VectorXd activate_derivative(ActivationKind kind,
                                    const Eigen::VectorXd& pre) {
  switch (kind) {
    case ActivationKind::identity:
      return Eigen::VectorXd::Ones(pre.size());
    case ActivationKind::sigmoid:
      return pre.unaryExpr([](double z) {
        const double s = sigmoid_scalar(z);
        return s * (1.0 - s);
      });
    case ActivationKind::tanh: {
      const Eigen::ArrayXd t = pre.array().tanh();
      return (1.0 - t * t).matrix();
    }
    case ActivationKind::softplus:
      return pre.unaryExpr([](double z) { return sigmoid_scalar(z); });
    case ActivationKind::softmax:
      throw ConfigError("softmax has no elementwise derivative");
  }
  throw ConfigError("unknown activation kind");
}

Eigen::MatrixXd activation_jacobian(ActivationKind kind,
                                    const Eigen::VectorXd& pre) {
  if (kind == ActivationKind::softmax) {
    const Eigen::VectorXd p = softmax_vec(pre);
    Eigen::MatrixXd jac = -(p * p.transpose());
    jac.diagonal() += p;
    return jac;
  }
  return activate_derivative(kind, pre).asDiagonal();
}

Eigen::MatrixXd jacobian_times(ActivationKind kind, const Eigen::VectorXd& pre,
                               const Eigen::MatrixXd& a) {
  if (kind == ActivationKind::softmax) {
    const Eigen::VectorXd p = softmax_vec(pre);
    // (diag(p) - p p^T) a
    return p.asDiagonal() * a - p * (p.transpose() * a);
  }
  return activate_derivative(kind, pre).asDiagonal() * a;
}

}  // namespace steinrec
