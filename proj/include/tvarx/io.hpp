#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tvarx/frozen.hpp"
#include "tvarx/nonparametric.hpp"
#include "tvarx/selection.hpp"
#include "tvarx/signal.hpp"
#include "tvarx/surrogate.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx {

/// Shortest decimal string that reads back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

/// Writes `content` to a sibling temporary file and renames it over `path`.
/// Refuses to replace an existing file unless `force`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content, bool force);
std::string read_file(const std::filesystem::path& path);

/// `time_s,value` rows. The sampling interval is recovered from the first
/// and last time stamps.
std::string signal_to_csv(const Signal& sig);
Signal signal_from_csv(const std::string& text);
Signal read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const Signal& sig, bool force);

/// First row: corner label then column coordinates; following rows: row
/// coordinate then values. `values` is indexed (column, row), matching the
/// (frequency, time) layout of the spectral grids.
std::string grid_to_csv(std::string_view corner, std::span<const double> row_coords,
                        std::span<const double> col_coords, const Eigen::MatrixXd& values);

/// Modal rows: one row per mode, one column per instant.
std::string modal_to_csv(const std::vector<double>& times, const Eigen::MatrixXd& values);

std::string grid_results_to_csv(const std::vector<CandidateScore>& ranked);

SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& cfg);

std::string model_to_json(const ParameterTrajectory& traj);
ParameterTrajectory model_from_json(const std::string& text);

std::string surrogate_to_json(const SurrogateModel& m);
SurrogateModel surrogate_from_json(const std::string& text);

}  // namespace tvarx
