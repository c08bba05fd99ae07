#ifndef STEINREC_MOMENTS_HPP
#define STEINREC_MOMENTS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "steinrec/network.hpp"
#include "steinrec/score_model.hpp"

namespace steinrec {

enum class LabelMode { sampled, expected };
enum class MomentSource { empirical_score, empirical_derivative, closed_form_mc };

const char* to_string(MomentSource source);

// Label-score cross-moment matrix, n_y x n_x.
struct MomentMatrix {
  Eigen::MatrixXd values;
  std::int64_t sample_count = 0;
  MomentSource source = MomentSource::empirical_score;
  std::uint64_t seed = 0;
};

struct EstimateOptions {
  LabelMode label_mode = LabelMode::expected;
  double score_noise = 0.0;  // stddev of additive corruption on score outputs
  int workers = 0;           // 0 = default pool size
};

// M^ = (1/n) sum_i y_i score(x_i)^T. Expected-label mode substitutes
// E[y|x_i] for the drawn label; both modes target the same population M.
MomentMatrix estimate_moment(const NetworkSpec& net, const ScoreModel& model,
                             std::int64_t n, std::uint64_t seed,
                             const EstimateOptions& options = {});

// -(1/n) sum_i d g(x_i)/dx, the derivative side of the Stein identity,
// estimated on its own input stream.
MomentMatrix derivative_moment(const NetworkSpec& net, const ScoreModel& model,
                               std::int64_t n, std::uint64_t seed,
                               int workers = 0);

struct MomentFactors {
  Eigen::MatrixXd mixing;       // B, n_y x k
  Eigen::MatrixXd first_layer;  // the true A_1
};

// Monte Carlo estimate of B = -E[(product of upper-layer Jacobians and
// weights) D(sigma_1'(x~_1))], paired with A_1 so mixing * first_layer is the
// factored form of the derivative moment. Shares the derivative estimator's
// sample stream, so the factorization matches it to rounding error.
MomentFactors population_moment_factors(const NetworkSpec& net,
                                        const ScoreModel& model,
                                        std::int64_t n, std::uint64_t seed,
                                        int workers = 0);

struct RankReport {
  bool full_column_rank = false;
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
};

// sigma_min vs threshold * sigma_max; the full-column-rank condition the
// factor B must satisfy for the row span of M to carry A_1.
RankReport check_nondegeneracy(const Eigen::MatrixXd& b,
                               double rel_threshold = 1e-8);

}  // namespace steinrec

#endif
