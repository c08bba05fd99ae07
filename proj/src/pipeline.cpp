#include "steinrec/pipeline.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "steinrec/linalg.hpp"
#include "steinrec/matrix_io.hpp"
#include "steinrec/parallel.hpp"

namespace steinrec {

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const ExperimentConfig& config) {
  return fs::path(config.output_dir);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed json in " + path.string() + ": " + e.what());
  }
}

std::string network_hash(const ExperimentConfig& config) {
  return fnv1a_hex(config_to_json(config)["network"].dump());
}

std::string model_hash(const ExperimentConfig& config) {
  return fnv1a_hex(config_to_json(config)["score_model"].dump());
}

// Identity of the experiment, not of the run: where outputs land and how
// many threads computed them cannot change any artifact byte.
std::string experiment_hash(const ExperimentConfig& config) {
  nlohmann::json j = config_to_json(config);
  j.erase("output_dir");
  j.erase("workers");
  return fnv1a_hex(j.dump());
}

// Random full-column-rank mixing matrix for closed-form runs; redrawn (with a
// bumped stream index) in the measure-zero event of rank deficiency.
Eigen::MatrixXd random_mixing_matrix(int n_y, int k, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream rng(seed, rng_stream::kMixingMatrix, attempt);
    Eigen::MatrixXd b(n_y, k);
    for (int i = 0; i < n_y; ++i)
      for (int j = 0; j < k; ++j) b(i, j) = rng.normal();
    if (check_nondegeneracy(b).full_column_rank) return b;
  }
}

nlohmann::json match_report_to_json(const MatchReport& report,
                                    double success_bound) {
  nlohmann::json j;
  j["permutation"] = report.permutation;
  j["signs"] = report.signs;
  nlohmann::json errors = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.per_row_cosine_error.size(); ++i)
    errors.push_back(report.per_row_cosine_error(i));
  j["per_row_cosine_error"] = errors;
  j["mean_cosine_error"] = report.mean_cosine_error();
  j["max_cosine_error"] = report.max_cosine_error();
  j["support_precision"] = report.support_precision;
  j["support_recall"] = report.support_recall;
  j["max_principal_angle_deg"] = report.max_principal_angle_deg;
  j["success"] = report.mean_cosine_error() < success_bound;
  return j;
}

}  // namespace

void write_network_files(const fs::path& dir, const BuiltNetwork& built,
                         const NetworkSection& section) {
  const NetworkSpec& net = built.net;
  nlohmann::json j;
  j["depth"] = net.depth();
  j["task"] = to_string(net.task);
  j["seed"] = section.seed;
  j["theta"] = section.theta;
  nlohmann::json acts = nlohmann::json::array();
  for (ActivationKind kind : net.activations) acts.push_back(to_string(kind));
  j["activations"] = acts;
  nlohmann::json dims = nlohmann::json::array();
  for (const Eigen::MatrixXd& w : net.weights)
    dims.push_back({w.rows(), w.cols()});
  j["layer_dims"] = dims;
  write_json_file(dir / "network.json", j);

  for (int i = 0; i < net.depth(); ++i) {
    std::ostringstream name;
    name << "layer_" << (i + 1) << ".csv";
    write_matrix_csv(dir / name.str(), net.weights[i]);
  }
  write_matrix_csv(dir / "A1_true.csv", net.weights.front());
  write_matrix_csv(dir / "A1_raw.csv", built.first_layer_raw);
}

NetworkSpec read_network_files(const fs::path& dir) {
  const nlohmann::json j = read_json_file(dir / "network.json");
  NetworkSpec net;
  net.task = task_from_string(j.at("task").get<std::string>());
  const int depth = j.at("depth").get<int>();
  for (const auto& act : j.at("activations"))
    net.activations.push_back(activation_from_string(act.get<std::string>()));
  for (int i = 0; i < depth; ++i) {
    std::ostringstream name;
    name << "layer_" << (i + 1) << ".csv";
    net.weights.push_back(read_matrix_csv(dir / name.str()));
  }
  net.validate();
  return net;
}

std::vector<std::string> run_generate(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = out_dir(config);
  ensure_dir(dir);

  const BuiltNetwork built = build_network(config.network);
  write_network_files(dir, built, config.network);

  FirstLayerPrior prior;
  prior.k = config.network.k;
  prior.n_x = config.network.n_x;
  prior.theta = config.network.theta;
  prior.seed = config.network.seed;
  const std::vector<std::string> warnings =
      prior_band_warnings(prior, config.network.alpha);

  nlohmann::json report;
  report["warnings"] = warnings;
  report["network_hash"] = network_hash(config);
  write_json_file(dir / "generate_report.json", report);
  return warnings;
}

MomentMatrix run_moment(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = out_dir(config);
  const NetworkSpec net = read_network_files(dir);
  const ScoreModel model =
      build_score_model(config.score_model, config.network.n_x);

  MomentMatrix moment;
  if (config.estimation.mode == EstimationMode::closed_form) {
    Eigen::MatrixXd mixing;
    if (config.estimation.closed_form_b == "random") {
      mixing = random_mixing_matrix(net.output_dim(), net.hidden_dim(),
                                    config.network.seed);
    } else {
      mixing = population_moment_factors(net, model, config.estimation.n,
                                         config.network.seed, config.workers)
                   .mixing;
    }
    moment.values = mixing * net.weights.front();
    moment.sample_count = config.estimation.n;
    moment.source = MomentSource::closed_form_mc;
    moment.seed = config.network.seed;
  } else {
    EstimateOptions options;
    options.label_mode = config.estimation.mode == EstimationMode::sampled
                             ? LabelMode::sampled
                             : LabelMode::expected;
    options.score_noise = config.estimation.score_noise;
    options.workers = config.workers;
    moment = estimate_moment(net, model, config.estimation.n,
                             config.network.seed, options);
  }

  write_matrix_csv(dir / "moment.csv", moment.values);
  nlohmann::json meta;
  meta["source"] = to_string(moment.source);
  meta["n"] = moment.sample_count;
  meta["seed"] = moment.seed;
  meta["net_hash"] = network_hash(config);
  meta["model_hash"] = model_hash(config);
  write_json_file(dir / "moment_meta.json", meta);
  return moment;
}

RecoveryResult run_recover(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = out_dir(config);

  MomentMatrix moment;
  moment.values = read_matrix_csv(dir / "moment.csv");
  const nlohmann::json meta = read_json_file(dir / "moment_meta.json");
  moment.sample_count = meta.at("n").get<std::int64_t>();
  moment.seed = meta.at("seed").get<std::uint64_t>();

  const RecoveryConfig rec_config =
      recovery_config_from_section(config.recovery, config.workers);
  RecoveryResult result =
      recover_first_layer(moment, config.recovery.k, rec_config);

  write_matrix_csv(dir / "A1_hat.csv", result.first_layer);

  nlohmann::json trace;
  nlohmann::json sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < result.moment_singular_values.size(); ++i)
    sv.push_back(result.moment_singular_values(i));
  trace["moment_singular_values"] = sv;
  trace["residuals"] = result.residuals;
  nlohmann::json columns = nlohmann::json::array();
  for (const CandidateRecord& rec : result.trace) {
    columns.push_back({{"column", rec.column},
                       {"objective", rec.objective},
                       {"sparsity", rec.sparsity},
                       {"selected", rec.selected},
                       {"skipped_zero_column", rec.skipped_zero_column},
                       {"merged_into", rec.merged_into},
                       {"lp_iterations", rec.lp_iterations},
                       {"lp_gap", rec.lp_gap}});
  }
  trace["columns"] = columns;
  write_json_file(dir / "recovery_trace.json", trace);
  return result;
}

nlohmann::json run_evaluate(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = out_dir(config);

  const Eigen::MatrixXd recovered = read_matrix_csv(dir / "A1_hat.csv");
  const Eigen::MatrixXd truth = read_matrix_csv(dir / "A1_true.csv");
  MatchReport report =
      match_rows(recovered, truth, config.evaluation.support_threshold_rel);

  // Span diagnostic against the moment matrix when one is present.
  double moment_angle = std::numeric_limits<double>::quiet_NaN();
  if (fs::exists(dir / "moment.csv")) {
    const Eigen::MatrixXd moment = read_matrix_csv(dir / "moment.csv");
    try {
      moment_angle =
          principal_angles(moment, truth, config.recovery.k).back();
    } catch (const RankError&) {
      moment_angle = 90.0;
    }
  }

  nlohmann::json j =
      match_report_to_json(report, config.evaluation.success_cosine_error);
  if (std::isfinite(moment_angle)) j["moment_span_angle_deg"] = moment_angle;
  write_json_file(dir / "match_report.json", j);
  return j;
}

nlohmann::json run_pipeline(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = out_dir(config);
  ensure_dir(dir);

  std::string stage = "generate";
  try {
    const std::vector<std::string> warnings = run_generate(config);
    stage = "moment";
    const MomentMatrix moment = run_moment(config);
    stage = "recover";
    const RecoveryResult recovery = run_recover(config);
    stage = "evaluate";
    const nlohmann::json report = run_evaluate(config);

    nlohmann::json summary;
    summary["config_hash"] = experiment_hash(config);
    summary["mode"] = to_string(config.estimation.mode);
    summary["n"] = config.estimation.n;
    summary["seed"] = config.network.seed;
    summary["k"] = config.network.k;
    summary["n_x"] = config.network.n_x;
    summary["n_y"] = config.network.n_y;
    summary["theta"] = config.network.theta;
    summary["warnings"] = warnings;
    summary["success"] = report.at("success");
    summary["mean_cosine_error"] = report.at("mean_cosine_error");
    summary["max_cosine_error"] = report.at("max_cosine_error");
    summary["support_precision"] = report.at("support_precision");
    summary["support_recall"] = report.at("support_recall");
    if (report.contains("moment_span_angle_deg"))
      summary["moment_span_angle_deg"] = report.at("moment_span_angle_deg");
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index i = 0; i < recovery.moment_singular_values.size(); ++i)
      sv.push_back(recovery.moment_singular_values(i));
    summary["moment_singular_values"] = sv;
    write_json_file(dir / "summary.json", summary);
    return summary;
  } catch (const std::exception& e) {
    // Keep partial artifacts; mark the failure and rethrow for the caller.
    nlohmann::json failure;
    failure["stage"] = stage;
    failure["error"] = e.what();
    write_json_file(dir / "failure.json", failure);
    throw;
  }
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "n") return SweepAxis::n;
  if (name == "theta") return SweepAxis::theta;
  if (name == "n_x") return SweepAxis::n_x;
  throw ConfigError("unknown sweep axis: " + name);
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n: return "n";
    case SweepAxis::theta: return "theta";
    case SweepAxis::n_x: return "n_x";
  }
  return "unknown";
}

nlohmann::json run_sweep(const ExperimentConfig& config, SweepAxis axis,
                         const std::vector<double>& values,
                         int seeds_per_value) {
  config.validate();
  if (values.empty()) throw ConfigError("sweep values list is empty");
  if (seeds_per_value < 1)
    throw ConfigError("sweep needs at least one seed per value");

  const fs::path dir = out_dir(config);
  ensure_dir(dir);

  struct Cell {
    ExperimentConfig cfg;
    bool ok = false;
    std::string error;
    nlohmann::json summary;
  };
  std::vector<Cell> cells;
  for (double value : values) {
    for (int s = 0; s < seeds_per_value; ++s) {
      Cell cell;
      cell.cfg = config;
      cell.cfg.network.seed = config.network.seed + static_cast<std::uint64_t>(s);
      switch (axis) {
        case SweepAxis::n:
          cell.cfg.estimation.n = static_cast<std::int64_t>(value);
          break;
        case SweepAxis::theta:
          cell.cfg.network.theta = value;
          break;
        case SweepAxis::n_x:
          cell.cfg.network.n_x = static_cast<int>(value);
          break;
      }
      std::ostringstream sub;
      sub << "sweep_" << to_string(axis) << "_" << format_double(value)
          << "_seed_" << cell.cfg.network.seed;
      cell.cfg.output_dir = (dir / sub.str()).string();
      cell.cfg.workers = 1;  // cells are the unit of parallelism
      cells.push_back(std::move(cell));
    }
  }

  parallel_for(cells.size(), config.workers, [&](std::size_t i) {
    try {
      cells[i].summary = run_pipeline(cells[i].cfg);
      cells[i].ok = true;
    } catch (const std::exception& e) {
      cells[i].error = e.what();
    }
  });

  std::ostringstream csv;
  csv << "seed,n,theta,k,n_x,success,max_angle_deg,mean_cosine_error\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const Cell& cell : cells) {
    nlohmann::json row;
    row["seed"] = cell.cfg.network.seed;
    row["n"] = cell.cfg.estimation.n;
    row["theta"] = cell.cfg.network.theta;
    row["k"] = cell.cfg.network.k;
    row["n_x"] = cell.cfg.network.n_x;
    double angle = std::numeric_limits<double>::quiet_NaN();
    double mean_err = std::numeric_limits<double>::quiet_NaN();
    bool success = false;
    if (cell.ok) {
      success = cell.summary.at("success").get<bool>();
      mean_err = cell.summary.at("mean_cosine_error").get<double>();
      if (cell.summary.contains("moment_span_angle_deg"))
        angle = cell.summary.at("moment_span_angle_deg").get<double>();
    } else {
      row["error"] = cell.error;
    }
    row["success"] = success;
    row["max_angle_deg"] = angle;
    row["mean_cosine_error"] = mean_err;
    rows.push_back(row);

    csv << cell.cfg.network.seed << "," << cell.cfg.estimation.n << ","
        << format_double(cell.cfg.network.theta) << "," << cell.cfg.network.k
        << "," << cell.cfg.network.n_x << "," << (success ? 1 : 0) << ","
        << format_double(angle) << "," << format_double(mean_err) << "\n";
  }
  write_text_file(dir / "sweep.csv", csv.str());

  nlohmann::json out;
  out["axis"] = to_string(axis);
  out["rows"] = rows;
  write_json_file(dir / "sweep_summary.json", out);
  return out;
}

}  // namespace steinrec
