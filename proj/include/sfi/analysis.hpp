#pragma once

#include "sfi/discretize.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sfi {

/// Magnitude responses, one row per output channel.
struct ResponseMatrix {
  Eigen::MatrixXd magnitudes;
  Eigen::VectorXd bin_frequencies;
  double fs = 0.0;
  bool decibels = false;
};

inline constexpr double kDecibelFloor = -100.0;

/// n_bins uniformly spaced frequencies covering [0, upper] inclusive.
Eigen::VectorXd uniform_grid(double upper, Index n_bins);

/// |sum_{l=1}^{L} h[l] exp(-j 2 pi f l T)| by direct summation at the given frequencies.
Eigen::MatrixXd magnitude_response(const WeightTensor& weights, const Eigen::Ref<const Eigen::VectorXd>& frequencies);

/// Linear magnitude responses on n_bins points over [0, fs/2].
ResponseMatrix frequency_response(const WeightTensor& weights, Index n_bins);

/// 20 log10 |H| clamped below at `floor`.
ResponseMatrix to_decibels(ResponseMatrix response, double floor = kDecibelFloor);

struct ChannelDeviation {
  Index channel = 0;
  double center_frequency = 0.0;
  /// Lowest rate of the pair at which the channel is zeroed by aliasing reduction.
  std::optional<double> blocked_at;
  double max_abs_db = 0.0;
  double mean_abs_db = 0.0;
  double peak_frequency_a = 0.0;
  double peak_frequency_b = 0.0;
  double peak_difference_hz = 0.0;
  Index peak_difference_bins = 0;
};

struct RatePairReport {
  double fs_a = 0.0;
  double fs_b = 0.0;
  Eigen::VectorXd common_grid;  // [0, min(fs_a, fs_b) / 2]
  std::vector<ChannelDeviation> channels;
};

struct ConsistencyReport {
  Index n_bins = 0;
  std::vector<RatePairReport> pairs;
};

/// Regenerates the bank at each rate and compares every pair of rates on their
/// common band in dB (floored). Channels zeroed at either rate are reported as
/// blocked instead of compared.
ConsistencyReport consistency_report(const FilterbankSpec& spec, const std::vector<double>& fs_list, Index n_bins,
                                     const WeightOptions& options = {});

/// One row per (channel, bin): channel,fs,f_bin,magnitude_db.
void write_response_csv(std::ostream& out, const std::vector<ResponseMatrix>& responses_db);
std::string to_json(const ConsistencyReport& report);

}  // namespace sfi
