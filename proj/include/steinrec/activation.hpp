#ifndef STEINREC_ACTIVATION_HPP
#define STEINREC_ACTIVATION_HPP

#include <Eigen/Core>
#include <string>

namespace steinrec {

// Elementwise kinds have diagonal Jacobians; softmax couples coordinates and
// is only admitted at the output layer.
enum class ActivationKind { identity, sigmoid, tanh, softplus, softmax };

bool is_elementwise(ActivationKind kind);
const char* to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

double sigmoid_scalar(double z);
double softplus_scalar(double z);

Eigen::VectorXd activate(ActivationKind kind, const Eigen::VectorXd& pre);

// Derivative per coordinate, elementwise kinds only.
Eigen::VectorXd activate_derivative(ActivationKind kind,
                                    const Eigen::VectorXd& pre);

// Full Jacobian of the activation at `pre`. Softmax: diag(p) - p p^T.
Eigen::MatrixXd activation_jacobian(ActivationKind kind,
                                    const Eigen::VectorXd& pre);

// J(pre) * a without materializing J for elementwise kinds.
Eigen::MatrixXd jacobian_times(ActivationKind kind, const Eigen::VectorXd& pre,
                               const Eigen::MatrixXd& a);

}  // namespace steinrec

#endif
