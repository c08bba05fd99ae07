#include "steinrec/moments.hpp"

#include <vector>

#include "steinrec/errors.hpp"
#include "steinrec/linalg.hpp"
#include "steinrec/parallel.hpp"

namespace steinrec {

namespace {

constexpr std::int64_t kBlockSize = 4096;

// Streamed mean over n samples: per-block sums in index order, blocks
// combined on a fixed pairwise tree. Parallel and serial runs agree bitwise.
template <typename PerSample>
Eigen::MatrixXd monte_carlo_mean(std::int64_t n, int rows, int cols,
                                 int workers, const PerSample& add_sample) {
  if (n < 1) throw ConfigError("sample count must be at least 1");
  const std::size_t n_blocks =
      static_cast<std::size_t>((n + kBlockSize - 1) / kBlockSize);
  std::vector<Eigen::MatrixXd> partials(n_blocks);
  parallel_for(n_blocks, workers, [&](std::size_t b) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
    const std::int64_t lo = static_cast<std::int64_t>(b) * kBlockSize;
    const std::int64_t hi = std::min<std::int64_t>(lo + kBlockSize, n);
    for (std::int64_t i = lo; i < hi; ++i) add_sample(i, acc);
    partials[b] = std::move(acc);
  });
  Eigen::MatrixXd total = pairwise_combine(partials, 0, n_blocks);
  total /= static_cast<double>(n);
  if (!total.allFinite())
    throw NumericError("moment accumulation produced non-finite entries");
  return total;
}

void check_dims(const NetworkSpec& net, const ScoreModel& model) {
  net.validate();
  if (net.input_dim() != model.dim())
    throw ConfigError("network input dim does not match score model dim");
}

}  // namespace

const char* to_string(MomentSource source) {
  switch (source) {
    case MomentSource::empirical_score: return "empirical_score";
    case MomentSource::empirical_derivative: return "empirical_derivative";
    case MomentSource::closed_form_mc: return "closed_form_mc";
  }
  return "unknown";
}

MomentMatrix estimate_moment(const NetworkSpec& net, const ScoreModel& model,
                             std::int64_t n, std::uint64_t seed,
                             const EstimateOptions& options) {
  check_dims(net, model);
  if (options.label_mode == LabelMode::sampled) net.validate_task_head();

  const int n_y = net.output_dim();
  const int n_x = net.input_dim();
  const bool sampled = options.label_mode == LabelMode::sampled;
  const double noise = options.score_noise;

  MomentMatrix out;
  out.values = monte_carlo_mean(
      n, n_y, n_x, options.workers,
      [&](std::int64_t i, Eigen::MatrixXd& acc) {
        const auto idx = static_cast<std::uint64_t>(i);
        RngStream input_rng(seed, rng_stream::kMomentInputs, idx);
        const Eigen::VectorXd x = model.sample(input_rng);
        Eigen::VectorXd y = forward_expected(net, x);
        if (sampled) {
          RngStream label_rng(seed, rng_stream::kLabels, idx);
          y = net.task == TaskKind::multiclass ? sample_one_hot(y, label_rng)
                                               : sample_bernoulli(y, label_rng);
        }
        Eigen::VectorXd s = model.score(x);
        if (noise > 0.0) {
          RngStream noise_rng(seed, rng_stream::kScoreNoise, idx);
          for (Eigen::Index j = 0; j < s.size(); ++j)
            s(j) += noise * noise_rng.normal();
        }
        acc.noalias() += y * s.transpose();
      });
  out.sample_count = n;
  out.source = MomentSource::empirical_score;
  out.seed = seed;
  return out;
}

MomentMatrix derivative_moment(const NetworkSpec& net, const ScoreModel& model,
                               std::int64_t n, std::uint64_t seed,
                               int workers) {
  check_dims(net, model);
  const Eigen::MatrixXd& a1 = net.weights.front();

  MomentMatrix out;
  out.values = monte_carlo_mean(
      n, net.output_dim(), net.input_dim(), workers,
      [&](std::int64_t i, Eigen::MatrixXd& acc) {
        RngStream rng(seed, rng_stream::kDerivativeInputs,
                      static_cast<std::uint64_t>(i));
        const Eigen::VectorXd x = model.sample(rng);
        const Eigen::MatrixXd upper = upper_jacobian_factor(net, forward_trace(net, x));
        acc.noalias() += upper * a1;
      });
  out.values = -out.values;
  out.sample_count = n;
  out.source = MomentSource::empirical_derivative;
  out.seed = seed;
  return out;
}

MomentFactors population_moment_factors(const NetworkSpec& net,
                                        const ScoreModel& model,
                                        std::int64_t n, std::uint64_t seed,
                                        int workers) {
  check_dims(net, model);

  MomentFactors out;
  out.mixing = monte_carlo_mean(
      n, net.output_dim(), net.hidden_dim(), workers,
      [&](std::int64_t i, Eigen::MatrixXd& acc) {
        RngStream rng(seed, rng_stream::kDerivativeInputs,
                      static_cast<std::uint64_t>(i));
        const Eigen::VectorXd x = model.sample(rng);
        acc += upper_jacobian_factor(net, forward_trace(net, x));
      });
  out.mixing = -out.mixing;
  out.first_layer = net.weights.front();
  return out;
}

RankReport check_nondegeneracy(const Eigen::MatrixXd& b, double rel_threshold) {
  if (!(rel_threshold > 0.0))
    throw ConfigError("rank threshold must be positive");
  const Eigen::VectorXd sv = singular_values(b);
  RankReport report;
  report.largest_singular_value = sv.size() ? sv(0) : 0.0;
  // sigma_min of a full-column-rank matrix is the cols()-th singular value.
  if (sv.size() < b.cols()) {
    report.smallest_singular_value = 0.0;
    report.full_column_rank = false;
    return report;
  }
  report.smallest_singular_value = sv(b.cols() - 1);
  report.full_column_rank = report.smallest_singular_value >
                            rel_threshold * report.largest_singular_value;
  return report;
}

}  // namespace steinrec
