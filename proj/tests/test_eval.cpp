#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "steinrec/assignment.hpp"
#include "steinrec/errors.hpp"
#include "steinrec/eval.hpp"
#include "steinrec/linalg.hpp"
#include "steinrec/moments.hpp"
#include "steinrec/network.hpp"

using namespace steinrec;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed,
                              double scale = 1.0) {
  RngStream rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Eigen::MatrixXd unit_rows(Eigen::MatrixXd m) {
  for (int i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).norm();
  return m;
}

double brute_force_assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Fixture shared by the classification tests: multiclass net, samples drawn
// from its label distribution.
struct ClassificationFixture {
  NetworkSpec net;
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

ClassificationFixture classification_fixture(int k, int n_x, int n_y,
                                             int n_train, int n_test,
                                             std::uint64_t seed,
                                             double head_scale) {
  ClassificationFixture fixture;
  fixture.net.weights = {
      generate_first_layer({k, n_x, 0.25, seed}),
      random_matrix(n_y, k, seed + 1,
                    head_scale / std::sqrt(static_cast<double>(k)))};
  fixture.net.activations = {ActivationKind::sigmoid, ActivationKind::softmax};
  fixture.net.task = TaskKind::multiclass;

  const ScoreModel model = ScoreModel::standard_normal(n_x);
  for (int i = 0; i < n_train + n_test; ++i) {
    RngStream x_rng(seed, rng_stream::kEvalData, static_cast<std::uint64_t>(i));
    LabeledSample sample;
    sample.x = model.sample(x_rng);
    RngStream y_rng(seed + 2, rng_stream::kLabels,
                    static_cast<std::uint64_t>(i));
    sample.y = sample_label(fixture.net, sample.x, y_rng);
    (i < n_train ? fixture.train : fixture.test).push_back(std::move(sample));
  }
  return fixture;
}

double held_out_accuracy(const Eigen::MatrixXd& a1,
                         const SoftmaxFitResult& fit,
                         const std::vector<LabeledSample>& test,
                         ActivationKind act) {
  Eigen::MatrixXd features(a1.rows(), test.size());
  Eigen::MatrixXd labels(test.front().y.size(), test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    features.col(i) = activate(act, a1 * test[i].x);
    labels.col(i) = test[i].y;
  }
  return classification_accuracy(fit.weights, features, labels);
}

}  // namespace

TEST_CASE("hungarian assignment matches brute force on random costs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const Eigen::MatrixXd cost = random_matrix(n, n, 700 + seed);
    const std::vector<int> assign = solve_assignment(cost);
    double total = 0.0;
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
      total += cost(i, assign[i]);
      CHECK_FALSE(used[assign[i]]);
      used[assign[i]] = true;
    }
    CHECK(total == doctest::Approx(brute_force_assignment_cost(cost))
                       .epsilon(1e-10));
  }
}

TEST_CASE("match_rows: identical matrices match identically") {
  const Eigen::MatrixXd a = unit_rows(random_matrix(5, 12, 1));
  const MatchReport report = match_rows(a, a);
  for (int i = 0; i < 5; ++i) {
    CHECK(report.permutation[i] == i);
    CHECK(report.signs[i] == 1);
  }
  CHECK(report.max_cosine_error() < 1e-12);
  CHECK(report.support_precision == doctest::Approx(1.0));
  CHECK(report.support_recall == doctest::Approx(1.0));
  CHECK(report.max_principal_angle_deg < 1e-6);
}

TEST_CASE("match_rows: negated reversed rows resolve with signs") {
  const Eigen::MatrixXd a = unit_rows(random_matrix(4, 9, 3));
  Eigen::MatrixXd flipped(4, 9);
  for (int i = 0; i < 4; ++i) flipped.row(i) = -a.row(3 - i);
  const MatchReport report = match_rows(flipped, a);
  for (int i = 0; i < 4; ++i) {
    CHECK(report.permutation[i] == 3 - i);
    CHECK(report.signs[i] == -1);
  }
  CHECK(report.max_cosine_error() < 1e-12);
}

TEST_CASE("match_rows: perturbed rows report the direct per-row error") {
  const Eigen::MatrixXd truth = unit_rows(random_matrix(5, 14, 5));
  Eigen::MatrixXd noisy = truth;
  RngStream rng(7);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 14; ++j) noisy(i, j) += 1e-3 * rng.normal();
    noisy.row(i) /= noisy.row(i).norm();
  }
  const MatchReport report = match_rows(noisy, truth);
  for (int i = 0; i < 5; ++i) {
    CHECK(report.permutation[i] == i);
    // direct-formula oracle for the same pair of rows
    const double direct = 1.0 - std::abs(noisy.row(i).dot(truth.row(i)));
    CHECK(report.per_row_cosine_error(i) == doctest::Approx(direct));
    CHECK(report.per_row_cosine_error(i) < 2e-3);
  }
}

TEST_CASE("match_rows is symmetric under simultaneous row permutation") {
  const Eigen::MatrixXd truth = unit_rows(random_matrix(5, 10, 9));
  const Eigen::MatrixXd guess = unit_rows(random_matrix(5, 10, 11));
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.setIdentity();
  std::swap(perm.indices()(1), perm.indices()(3));
  std::swap(perm.indices()(0), perm.indices()(2));
  const MatchReport base = match_rows(guess, truth);
  const MatchReport permuted = match_rows(perm * guess, perm * truth);
  CHECK(base.mean_cosine_error() ==
        doctest::Approx(permuted.mean_cosine_error()).epsilon(1e-12));
}

TEST_CASE("match_rows rejects shape mismatches") {
  CHECK_THROWS_AS(
      match_rows(random_matrix(3, 5, 1), random_matrix(3, 6, 2)), ConfigError);
}

TEST_CASE("principal_angles: identical spans give zero angles") {
  const Eigen::MatrixXd a1 = generate_first_layer({5, 18, 0.3, 13});
  const auto angles = principal_angles(a1, a1, 5);
  CHECK(angles.back() < 1e-8);
}

TEST_CASE("principal_angles: full-rank mixing preserves the row space") {
  const Eigen::MatrixXd a1 = generate_first_layer({5, 18, 0.3, 17});
  const Eigen::MatrixXd b = random_matrix(8, 5, 19);
  const auto angles = principal_angles(b * a1, a1, 5);
  CHECK(angles.back() < 1e-8);
  CHECK(std::is_sorted(angles.begin(), angles.end()));
}

TEST_CASE("principal_angles invariant to invertible left-multiplication") {
  const Eigen::MatrixXd a1 = generate_first_layer({4, 15, 0.3, 23});
  const Eigen::MatrixXd m = random_matrix(6, 4, 29) * a1;
  Eigen::MatrixXd t = random_matrix(6, 6, 31);
  t += 6.0 * Eigen::MatrixXd::Identity(6, 6);  // safely invertible
  const auto base = principal_angles(m, a1, 4);
  const auto transformed = principal_angles(t * m, a1, 4);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(std::abs(base[i] - transformed[i]) < 1e-8);
}

TEST_CASE("principal_angles raises on rank deficiency") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(3, 8);
  flat.row(0).setOnes();
  flat.row(1) = 2.0 * flat.row(0);
  flat.row(2) = -flat.row(0);
  CHECK_THROWS_AS(principal_angles(flat, random_matrix(3, 8, 37), 3),
                  RankError);
}

TEST_CASE("project_inputs: full-dimension projection preserves norms") {
  const Eigen::MatrixXd m = random_matrix(6, 6, 41);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(random_matrix(6, 1, 50 + i).col(0));
  const auto projected = project_inputs(m, xs, 6);
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(projected[i].norm() - xs[i].norm()) < 1e-12);
}

TEST_CASE("project_inputs: orthogonal-complement inputs project to zero") {
  const Eigen::MatrixXd a1 = generate_first_layer({3, 8, 0.5, 43});
  const Eigen::MatrixXd basis = top_right_singular_basis(a1, 3);
  // vector orthogonal to the span: residual of a random vector
  Eigen::VectorXd x = random_matrix(8, 1, 47).col(0);
  x -= basis * (basis.transpose() * x);
  const auto projected = project_inputs(a1, {x}, 3);
  CHECK(projected[0].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("learn_second_layer: loss decreases monotonically, gradient checks") {
  const ClassificationFixture fixture =
      classification_fixture(4, 10, 3, 1500, 500, 51, 2.0);
  SoftmaxFitConfig config;
  config.max_iterations = 60;
  const SoftmaxFitResult fit =
      learn_second_layer(fixture.net.weights[0], fixture.train, config);
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i)
    CHECK(fit.loss_history[i] <= fit.loss_history[i - 1]);

  // finite-difference check of the analytic gradient at the fitted point
  Eigen::MatrixXd features(4, fixture.train.size());
  Eigen::MatrixXd labels(3, fixture.train.size());
  for (std::size_t i = 0; i < fixture.train.size(); ++i) {
    features.col(i) =
        activate(ActivationKind::sigmoid, fixture.net.weights[0] * fixture.train[i].x);
    labels.col(i) = fixture.train[i].y;
  }
  Eigen::MatrixXd analytic(3, 4);
  Eigen::MatrixXd probe = random_matrix(3, 4, 53, 0.3);
  softmax_cross_entropy(probe, features, labels, &analytic);
  Eigen::MatrixXd numeric(3, 4);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      Eigen::MatrixXd up = probe, down = probe;
      up(i, j) += h;
      down(i, j) -= h;
      numeric(i, j) = (softmax_cross_entropy(up, features, labels) -
                       softmax_cross_entropy(down, features, labels)) /
                      (2.0 * h);
    }
  }
  CHECK((analytic - numeric).norm() / numeric.norm() < 1e-5);
}

TEST_CASE("softmax cross-entropy is convex along segments") {
  RngStream rng(99);
  Eigen::MatrixXd features = random_matrix(4, 200, 101);
  Eigen::MatrixXd labels = Eigen::MatrixXd::Zero(3, 200);
  for (int i = 0; i < 200; ++i)
    labels(static_cast<int>(rng.uniform() * 3), i) = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_matrix(3, 4, 200 + trial);
    const Eigen::MatrixXd b = random_matrix(3, 4, 300 + trial);
    const double mid = softmax_cross_entropy(0.5 * (a + b), features, labels);
    const double ends = 0.5 * (softmax_cross_entropy(a, features, labels) +
                               softmax_cross_entropy(b, features, labels));
    CHECK(mid <= ends + 1e-12);
  }
}

TEST_CASE("learn_second_layer: zero init on uniform labels starts at log n_y") {
  std::vector<LabeledSample> samples;
  RngStream rng(59);
  for (int i = 0; i < 64; ++i) {
    LabeledSample s;
    s.x = random_matrix(6, 1, 60 + i).col(0);
    s.y = Eigen::VectorXd::Zero(4);
    s.y(i % 4) = 1.0;
    samples.push_back(std::move(s));
  }
  SoftmaxFitConfig config;
  config.max_iterations = 0;  // just evaluate the starting point
  const SoftmaxFitResult fit =
      learn_second_layer(random_matrix(3, 6, 61), samples, config);
  CHECK(fit.loss_history.front() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(std::isfinite(fit.grad_norm));
}

TEST_CASE("learn_second_layer: true first layer reaches above-chance accuracy") {
  const int n_y = 6;
  const ClassificationFixture fixture =
      classification_fixture(4, 12, n_y, 3000, 1500, 63, 3.0);
  SoftmaxFitConfig config;
  config.max_iterations = 300;
  const SoftmaxFitResult fit =
      learn_second_layer(fixture.net.weights[0], fixture.train, config);
  const double acc = held_out_accuracy(fixture.net.weights[0], fit,
                                       fixture.test, ActivationKind::sigmoid);
  CHECK(acc > 1.0 / n_y + 0.2);
}

TEST_CASE("projected features classify within 2 points of raw features") {
  const int k = 4, n_x = 12, n_y = 5;
  const ClassificationFixture fixture =
      classification_fixture(k, n_x, n_y, 3000, 1500, 67, 3.0);
  const ScoreModel model = ScoreModel::standard_normal(n_x);
  const MomentMatrix moment =
      estimate_moment(fixture.net, model, 100000, 71);

  // projected features: coordinates in the top-k right singular basis of M,
  // expressed as a linear "first layer" with identity activation
  const Eigen::MatrixXd basis = top_right_singular_basis(moment.values, k);
  SoftmaxFitConfig config;
  config.feature_activation = ActivationKind::identity;
  config.max_iterations = 300;
  const SoftmaxFitResult projected_fit =
      learn_second_layer(basis.transpose(), fixture.train, config);
  const double projected_acc =
      held_out_accuracy(basis.transpose(), projected_fit, fixture.test,
                        ActivationKind::identity);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n_x, n_x);
  const SoftmaxFitResult raw_fit =
      learn_second_layer(identity, fixture.train, config);
  const double raw_acc = held_out_accuracy(identity, raw_fit, fixture.test,
                                           ActivationKind::identity);

  CHECK(projected_acc > raw_acc - 0.02);
}
