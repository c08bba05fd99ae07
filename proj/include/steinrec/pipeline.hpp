#ifndef STEINREC_PIPELINE_HPP
#define STEINREC_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinrec/config.hpp"
#include "steinrec/eval.hpp"
#include "steinrec/moments.hpp"
#include "steinrec/recovery.hpp"

namespace steinrec {

// Stages communicate through files under config.output_dir so each can be
// rerun independently:
//   generate -> network.json, layer_<i>.csv, A1_true.csv, A1_raw.csv,
//               generate_report.json
//   moment   -> moment.csv, moment_meta.json
//   recover  -> A1_hat.csv, recovery_trace.json   (never touches A1_true)
//   evaluate -> match_report.json
//   pipeline -> all of the above plus summary.json

std::vector<std::string> run_generate(const ExperimentConfig& config);
MomentMatrix run_moment(const ExperimentConfig& config);
RecoveryResult run_recover(const ExperimentConfig& config);
nlohmann::json run_evaluate(const ExperimentConfig& config);
nlohmann::json run_pipeline(const ExperimentConfig& config);

enum class SweepAxis { n, theta, n_x };
SweepAxis sweep_axis_from_string(const std::string& name);
const char* to_string(SweepAxis axis);

// Pipeline per (value, seed) cell; each cell owns an output subdirectory and
// a seed offset. Failures are recorded per cell and the sweep continues.
// Returns the aggregate table also written to sweep.csv.
nlohmann::json run_sweep(const ExperimentConfig& config, SweepAxis axis,
                         const std::vector<double>& values,
                         int seeds_per_value);

// Serialization helpers shared by stages and tests.
void write_network_files(const std::filesystem::path& dir,
                         const BuiltNetwork& built,
                         const NetworkSection& section);
NetworkSpec read_network_files(const std::filesystem::path& dir);

}  // namespace steinrec

#endif
