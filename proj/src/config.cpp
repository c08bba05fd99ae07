#include "steinrec/config.hpp"

#include <cmath>
#include <fstream>

#include "steinrec/errors.hpp"
#include "steinrec/matrix_io.hpp"

namespace steinrec {

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.size();
  if (rows == 0) return Eigen::MatrixXd();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols)
      throw ConfigError("ragged matrix in config json");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    j.push_back(row);
  }
  return j;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

EstimationMode estimation_mode_from_string(const std::string& name) {
  if (name == "sampled") return EstimationMode::sampled;
  if (name == "expected") return EstimationMode::expected;
  if (name == "closed_form") return EstimationMode::closed_form;
  throw ConfigError("unknown estimation mode: " + name);
}

const char* to_string(EstimationMode mode) {
  switch (mode) {
    case EstimationMode::sampled: return "sampled";
    case EstimationMode::expected: return "expected";
    case EstimationMode::closed_form: return "closed_form";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;

  if (j.contains("network")) {
    const auto& n = j.at("network");
    read_field(n, "k", cfg.network.k);
    read_field(n, "n_x", cfg.network.n_x);
    read_field(n, "n_y", cfg.network.n_y);
    read_field(n, "depth", cfg.network.depth);
    read_field(n, "theta", cfg.network.theta);
    read_field(n, "alpha", cfg.network.alpha);
    read_field(n, "head_weight_scale", cfg.network.head_weight_scale);
    if (n.contains("head_row_sum"))
      cfg.network.head_row_sum = n.at("head_row_sum").get<double>();
    read_field(n, "seed", cfg.network.seed);
    if (n.contains("hidden_activation"))
      cfg.network.hidden_activation =
          activation_from_string(n.at("hidden_activation").get<std::string>());
    if (n.contains("task"))
      cfg.network.task = task_from_string(n.at("task").get<std::string>());
  }

  if (j.contains("score_model")) {
    const auto& s = j.at("score_model");
    read_field(s, "kind", cfg.score_model.kind);
    if (s.contains("mean")) cfg.score_model.mean = vector_from_json(s.at("mean"));
    if (s.contains("covariance"))
      cfg.score_model.covariance = matrix_from_json(s.at("covariance"));
    if (s.contains("weights"))
      cfg.score_model.weights = vector_from_json(s.at("weights"));
    if (s.contains("components")) {
      for (const auto& comp : s.at("components")) {
        cfg.score_model.means.push_back(vector_from_json(comp.at("mean")));
        cfg.score_model.covariances.push_back(
            matrix_from_json(comp.at("covariance")));
      }
    }
  }

  if (j.contains("estimation")) {
    const auto& e = j.at("estimation");
    read_field(e, "n", cfg.estimation.n);
    read_field(e, "score_noise", cfg.estimation.score_noise);
    read_field(e, "closed_form_b", cfg.estimation.closed_form_b);
    if (e.contains("mode"))
      cfg.estimation.mode =
          estimation_mode_from_string(e.at("mode").get<std::string>());
  }

  if (j.contains("recovery")) {
    const auto& r = j.at("recovery");
    read_field(r, "k", cfg.recovery.k);
    read_field(r, "zero_threshold_rel", cfg.recovery.zero_threshold_rel);
    read_field(r, "rank_rel_threshold", cfg.recovery.rank_rel_threshold);
    read_field(r, "lp_tolerance", cfg.recovery.lp_tolerance);
    read_field(r, "column_limit", cfg.recovery.column_limit);
    read_field(r, "pair_sum_r", cfg.recovery.pair_sum_r);
    read_field(r, "truncate_to_rank_k", cfg.recovery.truncate_to_rank_k);
    read_field(r, "selection_rank_tol", cfg.recovery.selection_rank_tol);
    read_field(r, "backend", cfg.recovery.backend);
  }

  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    read_field(e, "success_cosine_error", cfg.evaluation.success_cosine_error);
    read_field(e, "support_threshold_rel", cfg.evaluation.support_threshold_rel);
  }

  read_field(j, "output_dir", cfg.output_dir);
  read_field(j, "workers", cfg.workers);

  if (cfg.recovery.k == 0) cfg.recovery.k = cfg.network.k;
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["network"] = {
      {"k", cfg.network.k},
      {"n_x", cfg.network.n_x},
      {"n_y", cfg.network.n_y},
      {"depth", cfg.network.depth},
      {"hidden_activation", to_string(cfg.network.hidden_activation)},
      {"task", to_string(cfg.network.task)},
      {"theta", cfg.network.theta},
      {"alpha", cfg.network.alpha},
      {"head_weight_scale", cfg.network.head_weight_scale},
      {"seed", cfg.network.seed},
  };
  if (cfg.network.head_row_sum)
    j["network"]["head_row_sum"] = *cfg.network.head_row_sum;
  nlohmann::json s;
  s["kind"] = cfg.score_model.kind;
  if (cfg.score_model.kind == "gaussian") {
    s["mean"] = vector_to_json(cfg.score_model.mean);
    s["covariance"] = matrix_to_json(cfg.score_model.covariance);
  } else if (cfg.score_model.kind == "gaussian_mixture") {
    s["weights"] = vector_to_json(cfg.score_model.weights);
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t c = 0; c < cfg.score_model.means.size(); ++c)
      comps.push_back({{"mean", vector_to_json(cfg.score_model.means[c])},
                       {"covariance",
                        matrix_to_json(cfg.score_model.covariances[c])}});
    s["components"] = comps;
  }
  j["score_model"] = s;
  j["estimation"] = {
      {"n", cfg.estimation.n},
      {"mode", to_string(cfg.estimation.mode)},
      {"score_noise", cfg.estimation.score_noise},
      {"closed_form_b", cfg.estimation.closed_form_b},
  };
  j["recovery"] = {
      {"k", cfg.recovery.k},
      {"zero_threshold_rel", cfg.recovery.zero_threshold_rel},
      {"rank_rel_threshold", cfg.recovery.rank_rel_threshold},
      {"lp_tolerance", cfg.recovery.lp_tolerance},
      {"column_limit", cfg.recovery.column_limit},
      {"pair_sum_r", cfg.recovery.pair_sum_r},
      {"truncate_to_rank_k", cfg.recovery.truncate_to_rank_k},
      {"selection_rank_tol", cfg.recovery.selection_rank_tol},
      {"backend", cfg.recovery.backend},
  };
  j["evaluation"] = {
      {"success_cosine_error", cfg.evaluation.success_cosine_error},
      {"support_threshold_rel", cfg.evaluation.support_threshold_rel},
  };
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " +
                      e.what());
  }
  return config_from_json(j);
}

void ExperimentConfig::validate() const {
  if (network.k < 2) throw ConfigError("network.k must be at least 2");
  if (network.n_x < network.k)
    throw ConfigError("network.n_x must be at least k (full row rank)");
  if (network.n_y < 1) throw ConfigError("network.n_y must be positive");
  if (network.depth < 2) throw ConfigError("network.depth must be at least 2");
  if (!(network.theta > 0.0) || network.theta > 1.0)
    throw ConfigError("network.theta must lie in (0, 1]");
  if (estimation.n < 1) throw ConfigError("estimation.n must be at least 1");
  if (estimation.score_noise < 0.0)
    throw ConfigError("estimation.score_noise must be nonnegative");
  if (estimation.closed_form_b != "estimated" &&
      estimation.closed_form_b != "random")
    throw ConfigError("estimation.closed_form_b must be estimated or random");
  if (recovery.k != network.k)
    throw ConfigError("recovery.k must agree with network.k");
  if (!(recovery.zero_threshold_rel > 0.0))
    throw ConfigError("recovery.zero_threshold_rel must be positive");
  if (!(recovery.lp_tolerance > 0.0))
    throw ConfigError("recovery.lp_tolerance must be positive");
  (void)l1_backend_from_string(recovery.backend);
  if (!(evaluation.success_cosine_error > 0.0))
    throw ConfigError("evaluation.success_cosine_error must be positive");

  // Score model dimensions must agree with the network input.
  if (score_model.kind == "gaussian") {
    if (score_model.mean.size() != network.n_x)
      throw ConfigError("score_model.mean length must equal network.n_x");
    if (score_model.covariance.rows() != network.n_x ||
        score_model.covariance.cols() != network.n_x)
      throw ConfigError("score_model.covariance must be n_x by n_x");
  } else if (score_model.kind == "gaussian_mixture") {
    if (score_model.weights.size() == 0 ||
        score_model.means.size() !=
            static_cast<std::size_t>(score_model.weights.size()) ||
        score_model.covariances.size() != score_model.means.size())
      throw ConfigError("mixture sections must align");
    for (const auto& mean : score_model.means)
      if (mean.size() != network.n_x)
        throw ConfigError("mixture component mean length must equal n_x");
  } else if (score_model.kind != "standard_normal") {
    throw ConfigError("unknown score model kind: " + score_model.kind);
  }

  if (workers < 0) throw ConfigError("workers must be nonnegative");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

ScoreModel build_score_model(const ScoreModelSection& section, int n_x) {
  if (section.kind == "standard_normal") return ScoreModel::standard_normal(n_x);
  if (section.kind == "gaussian")
    return ScoreModel::gaussian(section.mean, section.covariance);
  if (section.kind == "gaussian_mixture")
    return ScoreModel::gaussian_mixture(section.weights, section.means,
                                        section.covariances);
  throw ConfigError("unknown score model kind: " + section.kind);
}

BuiltNetwork build_network(const NetworkSection& section) {
  if (section.depth < 2) throw ConfigError("network.depth must be at least 2");

  FirstLayerPrior prior;
  prior.k = section.k;
  prior.n_x = section.n_x;
  prior.theta = section.theta;
  prior.seed = section.seed;
  FirstLayerDraw draw = draw_first_layer(prior);

  BuiltNetwork built;
  built.first_layer_raw = std::move(draw.raw);
  built.net.task = section.task;
  built.net.weights.push_back(std::move(draw.normalized));
  built.net.activations.push_back(section.hidden_activation);

  for (int layer = 1; layer < section.depth; ++layer) {
    const bool head = layer == section.depth - 1;
    const int rows = head ? section.n_y : section.k;
    const int cols = section.k;
    RngStream rng(section.seed, rng_stream::kWeights,
                  1000 + static_cast<std::uint64_t>(layer));
    Eigen::MatrixXd w(rows, cols);
    const double scale = (head ? section.head_weight_scale : 1.0) /
                         std::sqrt(static_cast<double>(cols));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.normal();
    if (head && section.head_row_sum) {
      for (int i = 0; i < rows; ++i)
        w.row(i).array() += (*section.head_row_sum - w.row(i).sum()) / cols;
    }
    built.net.weights.push_back(std::move(w));
    if (head) {
      built.net.activations.push_back(section.task == TaskKind::multiclass
                                          ? ActivationKind::softmax
                                          : ActivationKind::sigmoid);
    } else {
      built.net.activations.push_back(section.hidden_activation);
    }
  }
  built.net.validate_task_head();
  return built;
}

RecoveryConfig recovery_config_from_section(const RecoverySection& section,
                                            int workers) {
  RecoveryConfig cfg;
  cfg.zero_threshold_rel = section.zero_threshold_rel;
  cfg.rank_rel_threshold = section.rank_rel_threshold;
  cfg.lp_tolerance = section.lp_tolerance;
  cfg.column_limit = section.column_limit;
  cfg.pair_sum_r = section.pair_sum_r;
  cfg.truncate_to_rank_k = section.truncate_to_rank_k;
  cfg.selection_rank_tol = section.selection_rank_tol;
  cfg.backend = l1_backend_from_string(section.backend);
  cfg.workers = workers;
  return cfg;
}

}  // namespace steinrec
