#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "steinrec/simplex.hpp"

using namespace steinrec;

TEST_CASE("simplex solves a textbook LP") {
  // min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x,y >= 0
  // optimum at (2, 6), objective -36. Slack columns give the start basis.
  Eigen::MatrixXd a(3, 5);
  a << 1, 0, 1, 0, 0,
       0, 2, 0, 1, 0,
       3, 2, 0, 0, 1;
  Eigen::VectorXd b(3);
  b << 4, 12, 18;
  Eigen::VectorXd c(5);
  c << -3, -5, 0, 0, 0;
  const LpSolution sol = solve_standard_form_lp(a, b, c, {2, 3, 4});
  CHECK(sol.objective == doctest::Approx(-36.0).epsilon(1e-10));
  CHECK(sol.x(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.x(1) == doctest::Approx(6.0).epsilon(1e-10));
  CHECK(sol.max_dual_infeasibility < 1e-9);
  CHECK(sol.complementarity_gap < 1e-9);
}

TEST_CASE("simplex with artificials handles equality rows") {
  // min x + y s.t. x + y = 2, x - y = 0  ->  x = y = 1.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1,
       1, -1;
  Eigen::VectorXd b(2);
  b << 2, 0;
  Eigen::VectorXd c(2);
  c << 1, 1;
  const LpSolution sol = solve_standard_form_lp(a, b, c, {-1, -1});
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("simplex detects infeasible programs") {
  // x + y = 1 and x + y = 3 cannot both hold with x, y >= 0.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1,
       1, 1;
  Eigen::VectorXd b(2);
  b << 1, 3;
  Eigen::VectorXd c(2);
  c << 1, 1;
  CHECK_THROWS_AS(solve_standard_form_lp(a, b, c, {-1, -1}), SolverError);
}

TEST_CASE("simplex detects unbounded programs") {
  // min -x s.t. x - y = 0: x can grow without bound.
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  Eigen::VectorXd b(1);
  b << 0;
  Eigen::VectorXd c(2);
  c << -1, 0;
  CHECK_THROWS_AS(solve_standard_form_lp(a, b, c, {-1}), SolverError);
}

TEST_CASE("simplex drops redundant equality rows") {
  // Second row duplicates the first; optimum unaffected.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1,
       1, 1;
  Eigen::VectorXd b(2);
  b << 2, 2;
  Eigen::VectorXd c(2);
  c << 3, 1;
  const LpSolution sol = solve_standard_form_lp(a, b, c, {-1, -1});
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.x(1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("simplex iteration cap throws with best iterate attached") {
  Eigen::MatrixXd a(2, 4);
  a << 1, 0, 1, 0,
       0, 1, 0, 1;
  Eigen::VectorXd b(2);
  b << 1, 1;
  Eigen::VectorXd c(4);
  c << -1, -1, 0, 0;
  LpOptions options;
  options.max_iterations = 1;
  CHECK_THROWS_AS(solve_standard_form_lp(a, b, c, {2, 3}, options),
                  LpIterationLimit);
}

TEST_CASE("degenerate LP still terminates (zero rhs block)") {
  // All-zero rhs rows: the start is fully degenerate, as in the l1 tableau.
  Eigen::MatrixXd a(3, 6);
  a << 1, -1, 1, 0, 0, 0,
       1, 1, 0, 1, 0, 0,
       2, -1, 0, 0, 1, 1;
  Eigen::VectorXd b(3);
  b << 0, 0, 1;
  Eigen::VectorXd c(6);
  c << 0, 0, 1, 1, 1, 1;
  const LpSolution sol = solve_standard_form_lp(a, b, c, {2, 3, -1});
  CHECK(sol.objective >= -1e-12);
  CHECK(sol.iterations > 0);
}
