#include "steinrec/score_model.hpp"

#include <cmath>

#include "steinrec/errors.hpp"

namespace steinrec {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Eigen::VectorXd& v) {
  const double shift = v.maxCoeff();
  return shift + std::log((v.array() - shift).exp().sum());
}

Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols())
    throw ConfigError("covariance matrix must be square");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
    throw ConfigError("covariance matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw ConfigError("covariance matrix is not positive definite");
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

ScoreModel ScoreModel::standard_normal(int dim) {
  if (dim < 1) throw ConfigError("score model dimension must be positive");
  ScoreModel model;
  model.kind_ = Kind::standard_normal;
  model.dim_ = dim;
  return model;
}

ScoreModel ScoreModel::gaussian(Eigen::VectorXd mean,
                                Eigen::MatrixXd covariance) {
  if (mean.size() < 1) throw ConfigError("score model dimension must be positive");
  if (covariance.rows() != mean.size())
    throw ConfigError("covariance size does not match mean");
  ScoreModel model;
  model.kind_ = Kind::gaussian;
  model.dim_ = static_cast<int>(mean.size());
  Component comp;
  comp.mean = std::move(mean);
  comp.covariance = std::move(covariance);
  comp.llt = factorize_spd(comp.covariance);
  comp.log_norm = -0.5 * (model.dim_ * kLog2Pi + log_det_from_llt(comp.llt));
  model.components_.push_back(std::move(comp));
  model.weights_ = Eigen::VectorXd::Ones(1);
  model.log_weights_ = Eigen::VectorXd::Zero(1);
  return model;
}

ScoreModel ScoreModel::gaussian_mixture(
    Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means,
    std::vector<Eigen::MatrixXd> covariances) {
  const auto n_comp = static_cast<std::size_t>(weights.size());
  if (n_comp == 0) throw ConfigError("mixture needs at least one component");
  if (means.size() != n_comp || covariances.size() != n_comp)
    throw ConfigError("mixture weights, means, covariances must align");
  if (weights.minCoeff() < 0.0)
    throw ConfigError("mixture weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw ConfigError("mixture weights must sum to 1");

  ScoreModel model;
  model.kind_ = Kind::gaussian_mixture;
  model.dim_ = static_cast<int>(means[0].size());
  model.weights_ = weights;
  model.log_weights_ =
      weights.unaryExpr([](double w) { return std::log(std::max(w, 1e-300)); });
  for (std::size_t c = 0; c < n_comp; ++c) {
    if (means[c].size() != model.dim_)
      throw ConfigError("mixture component dimensions disagree");
    Component comp;
    comp.mean = std::move(means[c]);
    comp.covariance = std::move(covariances[c]);
    comp.llt = factorize_spd(comp.covariance);
    comp.log_norm = -0.5 * (model.dim_ * kLog2Pi + log_det_from_llt(comp.llt));
    model.components_.push_back(std::move(comp));
  }
  return model;
}

Eigen::VectorXd ScoreModel::sample(RngStream& rng) const {
  if (kind_ == Kind::standard_normal) {
    Eigen::VectorXd z(dim_);
    for (int i = 0; i < dim_; ++i) z(i) = rng.normal();
    return z;
  }
  int pick = 0;
  if (kind_ == Kind::gaussian_mixture) {
    const double u = rng.uniform();
    double cum = 0.0;
    pick = component_count() - 1;
    for (int c = 0; c < component_count(); ++c) {
      cum += weights_(c);
      if (u < cum) {
        pick = c;
        break;
      }
    }
  }
  const Component& comp = components_[pick];
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z(i) = rng.normal();
  return comp.mean + comp.llt.matrixL() * z;
}

double ScoreModel::component_log_density(int c, const Eigen::VectorXd& x) const {
  const Component& comp = components_[c];
  const Eigen::VectorXd diff = x - comp.mean;
  // Quadratic form via one triangular solve: ||L^-1 diff||^2.
  const Eigen::VectorXd half =
      comp.llt.matrixL().solve(diff);
  return comp.log_norm - 0.5 * half.squaredNorm();
}

Eigen::VectorXd ScoreModel::component_score(int c,
                                            const Eigen::VectorXd& x) const {
  const Component& comp = components_[c];
  return -comp.llt.solve(x - comp.mean);
}

Eigen::VectorXd ScoreModel::log_responsibilities(
    const Eigen::VectorXd& x) const {
  Eigen::VectorXd logs(component_count());
  for (int c = 0; c < component_count(); ++c)
    logs(c) = log_weights_(c) + component_log_density(c, x);
  return (logs.array() - log_sum_exp(logs)).matrix();
}

Eigen::VectorXd ScoreModel::score(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ConfigError("score input has wrong dimension");
  switch (kind_) {
    case Kind::standard_normal:
      return -x;
    case Kind::gaussian:
      return component_score(0, x);
    case Kind::gaussian_mixture: {
      const Eigen::VectorXd log_r = log_responsibilities(x);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
      for (int c = 0; c < component_count(); ++c)
        out += std::exp(log_r(c)) * component_score(c, x);
      return out;
    }
  }
  throw ConfigError("unknown score model kind");
}

double ScoreModel::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ConfigError("density input has wrong dimension");
  switch (kind_) {
    case Kind::standard_normal:
      return -0.5 * (x.squaredNorm() + dim_ * kLog2Pi);
    case Kind::gaussian:
      return component_log_density(0, x);
    case Kind::gaussian_mixture: {
      Eigen::VectorXd logs(component_count());
      for (int c = 0; c < component_count(); ++c)
        logs(c) = log_weights_(c) + component_log_density(c, x);
      return log_sum_exp(logs);
    }
  }
  throw ConfigError("unknown score model kind");
}

std::vector<Eigen::VectorXd> sample_inputs(const ScoreModel& model,
                                           std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample count must be at least 1");
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream rng(seed, rng_stream::kMomentInputs,
                  static_cast<std::uint64_t>(i));
    draws.push_back(model.sample(rng));
  }
  return draws;
}

double validate_score(const ScoreModel& model,
                      const std::vector<Eigen::VectorXd>& points, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  double worst = 0.0;
  for (const Eigen::VectorXd& x : points) {
    const Eigen::VectorXd s = model.score(x);
    Eigen::VectorXd probe = x;
    for (int i = 0; i < model.dim(); ++i) {
      const double save = probe(i);
      probe(i) = save + step;
      const double up = model.log_density(probe);
      probe(i) = save - step;
      const double down = model.log_density(probe);
      probe(i) = save;
      const double fd = (up - down) / (2.0 * step);
      worst = std::max(worst, std::abs(s(i) - fd));
    }
  }
  return worst;
}

}  // namespace steinrec
