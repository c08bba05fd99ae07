#ifndef STEINREC_SCORE_MODEL_HPP
#define STEINREC_SCORE_MODEL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "steinrec/rng.hpp"

namespace steinrec {

// Input distribution with an exact score grad_x log p(x). Supported kinds:
// standard normal, general Gaussian, Gaussian mixture. Immutable after
// construction; covariances are factorized once and every evaluation does
// triangular solves against the stored factor.
class ScoreModel {
 public:
  enum class Kind { standard_normal, gaussian, gaussian_mixture };

  static ScoreModel standard_normal(int dim);
  static ScoreModel gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static ScoreModel gaussian_mixture(Eigen::VectorXd weights,
                                     std::vector<Eigen::VectorXd> means,
                                     std::vector<Eigen::MatrixXd> covariances);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int component_count() const { return static_cast<int>(components_.size()); }

  Eigen::VectorXd sample(RngStream& rng) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;
  double log_density(const Eigen::VectorXd& x) const;

  const Eigen::VectorXd& mixture_weights() const { return weights_; }
  const Eigen::VectorXd& component_mean(int c) const {
    return components_[c].mean;
  }
  const Eigen::MatrixXd& component_covariance(int c) const {
    return components_[c].covariance;
  }
  // Score of component c alone; used by the mixture decomposition property.
  Eigen::VectorXd component_score(int c, const Eigen::VectorXd& x) const;
  // log responsibilities log r_c(x), computed via log-sum-exp.
  Eigen::VectorXd log_responsibilities(const Eigen::VectorXd& x) const;

 private:
  struct Component {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_norm = 0.0;  // -(d/2) log(2 pi) - (1/2) log det(cov)
  };

  ScoreModel() = default;
  double component_log_density(int c, const Eigen::VectorXd& x) const;

  Kind kind_ = Kind::standard_normal;
  int dim_ = 0;
  Eigen::VectorXd weights_;      // empty for standard normal
  Eigen::VectorXd log_weights_;  // aligned with components_
  std::vector<Component> components_;
};

// n i.i.d. draws, one split RNG stream per sample index; deterministic under
// a fixed seed regardless of traversal order.
std::vector<Eigen::VectorXd> sample_inputs(const ScoreModel& model,
                                           std::int64_t n, std::uint64_t seed);

// Max over points and coordinates of |score - central finite difference of
// log_density| with the given step.
double validate_score(const ScoreModel& model,
                      const std::vector<Eigen::VectorXd>& points, double step);

}  // namespace steinrec

#endif
