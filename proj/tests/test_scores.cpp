#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "steinrec/errors.hpp"
#include "steinrec/score_model.hpp"

using namespace steinrec;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::MatrixXd spd2(double a, double b, double c) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, c;
  return m;
}

std::vector<Eigen::VectorXd> random_points(int count, int dim,
                                           std::uint64_t seed,
                                           double scale = 1.0) {
  std::vector<Eigen::VectorXd> points;
  RngStream rng(seed);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x(j) = scale * rng.normal();
    points.push_back(x);
  }
  return points;
}

ScoreModel two_component_mixture() {
  return ScoreModel::gaussian_mixture(
      vec2(0.3, 0.7), {vec2(-2.0, 0.0), vec2(2.0, 1.0)},
      {spd2(1.0, 0.2, 0.8), spd2(0.5, -0.1, 1.2)});
}

}  // namespace

TEST_CASE("score model construction rejects bad inputs") {
  CHECK_THROWS_AS(ScoreModel::standard_normal(0), ConfigError);
  CHECK_THROWS_AS(
      ScoreModel::gaussian(vec2(0, 0), spd2(1.0, 2.0, 1.0)),  // not PD
      ConfigError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(ScoreModel::gaussian(vec2(0, 0), asym), ConfigError);
  CHECK_THROWS_AS(
      ScoreModel::gaussian_mixture(vec2(0.6, 0.6), {vec2(0, 0), vec2(1, 1)},
                                   {spd2(1, 0, 1), spd2(1, 0, 1)}),
      ConfigError);  // weights do not sum to 1
}

TEST_CASE("standard normal: score is -x, density constant at zero") {
  const ScoreModel model = ScoreModel::standard_normal(2);
  const Eigen::VectorXd s = model.score(vec2(1.0, -2.0));
  CHECK(s(0) == -1.0);
  CHECK(s(1) == 2.0);

  const ScoreModel one = ScoreModel::standard_normal(1);
  Eigen::VectorXd zero(1);
  zero << 0.0;
  CHECK(one.log_density(zero) ==
        doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979323846))
            .epsilon(1e-14));
}

TEST_CASE("sample_inputs: deterministic batch of the right shape") {
  const ScoreModel model = two_component_mixture();
  const auto batch = sample_inputs(model, 257, 42);
  REQUIRE(batch.size() == 257);
  for (const Eigen::VectorXd& x : batch) CHECK(x.size() == 2);
  const auto again = sample_inputs(model, 257, 42);
  for (std::size_t i = 0; i < batch.size(); ++i)
    CHECK((batch[i] - again[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standard normal: sample covariance near identity") {
  const ScoreModel model = ScoreModel::standard_normal(3);
  const int n = 100000;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    RngStream rng(5, rng_stream::kMomentInputs, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd x = model.sample(rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= n;
  const Eigen::MatrixXd cov = second / n - mean * mean.transpose();
  CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("gaussian: score vanishes at the mean, sample mean within band") {
  const Eigen::VectorXd mu = vec2(1.5, -0.5);
  const Eigen::MatrixXd cov = spd2(2.0, 0.5, 1.0);
  const ScoreModel model = ScoreModel::gaussian(mu, cov);
  CHECK(model.score(mu).cwiseAbs().maxCoeff() < 1e-14);

  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) {
    RngStream rng(7, rng_stream::kMomentInputs, static_cast<std::uint64_t>(i));
    mean += model.sample(rng);
  }
  mean /= n;
  for (int j = 0; j < 2; ++j) {
    const double band = 4.0 * std::sqrt(cov(j, j) / n);
    CHECK(std::abs(mean(j) - mu(j)) < band);
  }
}

TEST_CASE("mixture: component occupancy within binomial band") {
  // Well-separated components classified by nearest mean.
  const ScoreModel model = ScoreModel::gaussian_mixture(
      vec2(0.3, 0.7), {vec2(-10.0, 0.0), vec2(10.0, 0.0)},
      {spd2(1, 0, 1), spd2(1, 0, 1)});
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    RngStream rng(9, rng_stream::kMomentInputs, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd x = model.sample(rng);
    if (x(0) < 0.0) ++first;
  }
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(first - 0.3 * n) < 4.0 * sigma);
}

TEST_CASE("gaussian equals a single-component mixture everywhere") {
  const Eigen::VectorXd mu = vec2(0.3, -1.1);
  const Eigen::MatrixXd cov = spd2(1.5, -0.4, 0.9);
  const ScoreModel g = ScoreModel::gaussian(mu, cov);
  const ScoreModel m = ScoreModel::gaussian_mixture(
      Eigen::VectorXd::Ones(1), {mu}, {cov});
  for (const Eigen::VectorXd& x : random_points(20, 2, 13, 2.0)) {
    CHECK(std::abs(g.log_density(x) - m.log_density(x)) < 1e-12);
    CHECK((g.score(x) - m.score(x)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("1-d mixture density integrates to one (quadrature oracle)") {
  Eigen::VectorXd w(2);
  w << 0.4, 0.6;
  Eigen::VectorXd m1(1), m2(1);
  m1 << -1.0;
  m2 << 2.5;
  Eigen::MatrixXd c1(1, 1), c2(1, 1);
  c1 << 0.7;
  c2 << 1.8;
  const ScoreModel model = ScoreModel::gaussian_mixture(w, {m1, m2}, {c1, c2});
  // Trapezoid rule on [-30, 30], step 0.005
  const double lo = -30.0, hi = 30.0, h = 0.005;
  double integral = 0.0;
  Eigen::VectorXd x(1);
  const int steps = static_cast<int>((hi - lo) / h);
  for (int i = 0; i <= steps; ++i) {
    x(0) = lo + i * h;
    const double f = std::exp(model.log_density(x));
    integral += (i == 0 || i == steps) ? 0.5 * f : f;
  }
  integral *= h;
  CHECK(std::abs(integral - 1.0) < 1e-4);
}

TEST_CASE("score matches finite differences of log_density") {
  const double step = 1e-5;

  SUBCASE("standard normal: quadratic log-density, fd nearly exact") {
    const ScoreModel model = ScoreModel::standard_normal(3);
    CHECK(validate_score(model, random_points(20, 3, 21), step) < 1e-6);
  }
  SUBCASE("gaussian with condition number 1e3") {
    Eigen::MatrixXd cov = spd2(1.0, 0.0, 1e-3);
    const ScoreModel model = ScoreModel::gaussian(vec2(0.2, -0.3), cov);
    CHECK(validate_score(model, random_points(30, 2, 22, 0.1), step) < 1e-4);
  }
  SUBCASE("two-component mixture at 100 random points") {
    const ScoreModel model = two_component_mixture();
    CHECK(validate_score(model, random_points(100, 2, 23, 2.0), step) < 1e-4);
  }
}

TEST_CASE("expected score is zero (integration by parts sanity)") {
  const ScoreModel models[] = {
      ScoreModel::standard_normal(2),
      ScoreModel::gaussian(vec2(1.0, -1.0), spd2(1.2, 0.3, 0.8)),
      two_component_mixture()};
  for (const ScoreModel& model : models) {
    const int n = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < n; ++i) {
      RngStream rng(33, rng_stream::kMomentInputs,
                    static_cast<std::uint64_t>(i));
      const Eigen::VectorXd s = model.score(model.sample(rng));
      sum += s;
      sum_sq += s.cwiseProduct(s);
    }
    const Eigen::VectorXd mean = sum / n;
    for (int j = 0; j < 2; ++j) {
      const double var = sum_sq(j) / n - mean(j) * mean(j);
      const double band = 4.0 * std::sqrt(var / n);
      CHECK(std::abs(mean(j)) < band);
    }
  }
}

TEST_CASE("gaussian score is translation-equivariant") {
  const Eigen::MatrixXd cov = spd2(1.5, 0.25, 0.75);
  const Eigen::VectorXd mu = vec2(0.5, -0.75);
  const Eigen::VectorXd delta = vec2(3.0, -2.0);
  const ScoreModel base = ScoreModel::gaussian(mu, cov);
  const ScoreModel shifted = ScoreModel::gaussian(mu + delta, cov);
  // dyadic points keep x + delta exact, so equality holds bit for bit
  for (double a : {0.25, -1.5, 2.0, 0.0}) {
    for (double b : {0.5, -0.125, 1.75}) {
      const Eigen::VectorXd x = vec2(a, b);
      CHECK((base.score(x) - shifted.score(x + delta)).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
}

TEST_CASE("mixture score is the responsibility-weighted combination") {
  const ScoreModel model = two_component_mixture();
  for (const Eigen::VectorXd& x : random_points(25, 2, 55, 2.5)) {
    const Eigen::VectorXd log_r = model.log_responsibilities(x);
    CHECK(std::abs(log_r.array().exp().sum() - 1.0) < 1e-12);
    Eigen::VectorXd combo = Eigen::VectorXd::Zero(2);
    for (int c = 0; c < model.component_count(); ++c)
      combo += std::exp(log_r(c)) * model.component_score(c, x);
    CHECK((combo - model.score(x)).cwiseAbs().maxCoeff() < 1e-13);
  }
}
