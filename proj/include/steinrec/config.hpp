#ifndef STEINREC_CONFIG_HPP
#define STEINREC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinrec/network.hpp"
#include "steinrec/recovery.hpp"
#include "steinrec/score_model.hpp"

namespace steinrec {

enum class EstimationMode { sampled, expected, closed_form };
EstimationMode estimation_mode_from_string(const std::string& name);
const char* to_string(EstimationMode mode);

struct NetworkSection {
  int k = 0;
  int n_x = 0;
  int n_y = 0;
  int depth = 2;
  ActivationKind hidden_activation = ActivationKind::sigmoid;
  TaskKind task = TaskKind::multilabel;
  double theta = 0.25;
  double alpha = 1.0;            // sparsity-band constant for warnings
  double head_weight_scale = 1.0;
  // Optional target for each head row's entry sum. Sigmoid hidden units emit
  // values near 1/2, so a row's sum sets its pre-activation offset; large
  // random offsets saturate the head derivative and bury the cross-moment,
  // while a mildly negative common offset also shrinks the label means and
  // with them the dominant noise term of the score-side estimator.
  std::optional<double> head_row_sum;
  std::uint64_t seed = 1;
};

struct ScoreModelSection {
  std::string kind = "standard_normal";
  Eigen::VectorXd mean;                     // gaussian
  Eigen::MatrixXd covariance;               // gaussian
  Eigen::VectorXd weights;                  // mixture
  std::vector<Eigen::VectorXd> means;       // mixture
  std::vector<Eigen::MatrixXd> covariances; // mixture
};

struct EstimationSection {
  std::int64_t n = 100000;
  EstimationMode mode = EstimationMode::expected;
  double score_noise = 0.0;
  std::string closed_form_b = "estimated";  // or "random"
};

struct RecoverySection {
  int k = 0;
  double zero_threshold_rel = 1e-6;
  double rank_rel_threshold = 1e-8;
  double lp_tolerance = 1e-9;
  int column_limit = 0;
  bool pair_sum_r = false;
  bool truncate_to_rank_k = true;
  double selection_rank_tol = 1e-8;
  std::string backend = "simplex";
};

struct EvaluationSection {
  double success_cosine_error = 1e-6;
  double support_threshold_rel = 1e-6;
};

struct ExperimentConfig {
  NetworkSection network;
  ScoreModelSection score_model;
  EstimationSection estimation;
  RecoverySection recovery;
  EvaluationSection evaluation;
  std::string output_dir = "out";
  int workers = 0;

  // Cross-section dimension consistency; throws ConfigError on violations.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

ScoreModel build_score_model(const ScoreModelSection& section, int n_x);

// Deterministic network construction: A1 from the Bernoulli-Gaussian prior,
// upper layers Gaussian with 1/sqrt(fan_in) scaling (head additionally by
// head_weight_scale). Returns the network plus the raw (unnormalized) A1 draw.
struct BuiltNetwork {
  NetworkSpec net;
  Eigen::MatrixXd first_layer_raw;
};
BuiltNetwork build_network(const NetworkSection& section);

RecoveryConfig recovery_config_from_section(const RecoverySection& section,
                                            int workers);

}  // namespace steinrec

#endif
