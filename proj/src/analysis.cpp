#include "sfi/analysis.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace sfi {

Eigen::VectorXd uniform_grid(double upper, Index n_bins) {
  if (n_bins < 2) throw std::invalid_argument("frequency grid needs at least 2 bins");
  Eigen::VectorXd grid(n_bins);
  for (Index k = 0; k < n_bins; ++k) grid[k] = upper * static_cast<double>(k) / static_cast<double>(n_bins - 1);
  return grid;
}

Eigen::MatrixXd magnitude_response(const WeightTensor& weights, const Eigen::Ref<const Eigen::VectorXd>& frequencies) {
  const Index rows = weights.data.rows();
  const Index taps = weights.taps;
  const double period = 1.0 / weights.fs;
  Eigen::MatrixXcd basis(taps, frequencies.size());
  for (Index b = 0; b < frequencies.size(); ++b) {
    for (Index l = 1; l <= taps; ++l) {
      const double angle = -2.0 * std::numbers::pi * frequencies[b] * static_cast<double>(l) * period;
      basis(l - 1, b) = std::polar(1.0, angle);
    }
  }
  Eigen::MatrixXd out(rows, frequencies.size());
  out = (weights.data.cast<std::complex<double>>() * basis).cwiseAbs();
  return out;
}

ResponseMatrix frequency_response(const WeightTensor& weights, Index n_bins) {
  ResponseMatrix response;
  response.fs = weights.fs;
  response.bin_frequencies = uniform_grid(weights.fs / 2.0, n_bins);
  response.magnitudes = magnitude_response(weights, response.bin_frequencies);
  return response;
}

ResponseMatrix to_decibels(ResponseMatrix response, double floor) {
  if (response.decibels) return response;
  response.magnitudes = response.magnitudes.unaryExpr([floor](double m) {
    return m > 0.0 ? std::max(floor, 20.0 * std::log10(m)) : floor;
  });
  response.decibels = true;
  return response;
}

ConsistencyReport consistency_report(const FilterbankSpec& spec, const std::vector<double>& fs_list, Index n_bins,
                                     const WeightOptions& options) {
  if (fs_list.size() < 2) throw std::invalid_argument("consistency_report: need at least two sampling frequencies");
  std::vector<WeightTensor> tensors;
  for (double fs : fs_list) tensors.push_back(assemble_weights(spec, frame_params(fs), options));

  ConsistencyReport report;
  report.n_bins = n_bins;
  for (std::size_t a = 0; a < fs_list.size(); ++a) {
    for (std::size_t b = a + 1; b < fs_list.size(); ++b) {
      RatePairReport pair;
      pair.fs_a = fs_list[a];
      pair.fs_b = fs_list[b];
      pair.common_grid = uniform_grid(std::min(pair.fs_a, pair.fs_b) / 2.0, n_bins);
      auto db = [&](const WeightTensor& w) {
        ResponseMatrix r{magnitude_response(w, pair.common_grid), pair.common_grid, w.fs, false};
        return to_decibels(std::move(r)).magnitudes;
      };
      const Eigen::MatrixXd resp_a = db(tensors[a]);
      const Eigen::MatrixXd resp_b = db(tensors[b]);

      for (Index c = 0; c < spec.size(); ++c) {
        ChannelDeviation dev;
        dev.channel = c;
        dev.center_frequency = spec.center_frequency(c);
        const bool zeroed_a = tensors[a].channels[static_cast<std::size_t>(c)].zeroed;
        const bool zeroed_b = tensors[b].channels[static_cast<std::size_t>(c)].zeroed;
        if (zeroed_a || zeroed_b) {
          dev.blocked_at = zeroed_a && zeroed_b ? std::min(pair.fs_a, pair.fs_b) : (zeroed_a ? pair.fs_a : pair.fs_b);
          pair.channels.push_back(dev);
          continue;
        }
        const Eigen::ArrayXd diff = (resp_a.row(c) - resp_b.row(c)).array().abs();
        dev.max_abs_db = diff.maxCoeff();
        dev.mean_abs_db = diff.mean();
        Index peak_a = 0, peak_b = 0;
        resp_a.row(c).maxCoeff(&peak_a);
        resp_b.row(c).maxCoeff(&peak_b);
        dev.peak_frequency_a = pair.common_grid[peak_a];
        dev.peak_frequency_b = pair.common_grid[peak_b];
        dev.peak_difference_hz = std::abs(dev.peak_frequency_a - dev.peak_frequency_b);
        dev.peak_difference_bins = std::abs(peak_a - peak_b);
        pair.channels.push_back(dev);
      }
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

void write_response_csv(std::ostream& out, const std::vector<ResponseMatrix>& responses_db) {
  out << "channel,fs,f_bin,magnitude_db\n" << std::setprecision(17);
  for (const auto& response : responses_db) {
    const ResponseMatrix db = to_decibels(response);
    for (Index c = 0; c < db.magnitudes.rows(); ++c) {
      for (Index k = 0; k < db.magnitudes.cols(); ++k) {
        out << c << ',' << db.fs << ',' << db.bin_frequencies[k] << ',' << db.magnitudes(c, k) << '\n';
      }
    }
  }
}

std::string to_json(const ConsistencyReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pair : report.pairs) {
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& dev : pair.channels) {
      nlohmann::json entry{{"channel", dev.channel}, {"center_frequency", dev.center_frequency}};
      if (dev.blocked_at) {
        entry["status"] = "blocked";
        entry["blocked_at"] = *dev.blocked_at;
      } else {
        entry["status"] = "compared";
        entry["max_abs_db"] = dev.max_abs_db;
        entry["mean_abs_db"] = dev.mean_abs_db;
        entry["peak_frequency_a"] = dev.peak_frequency_a;
        entry["peak_frequency_b"] = dev.peak_frequency_b;
        entry["peak_difference_hz"] = dev.peak_difference_hz;
        entry["peak_difference_bins"] = dev.peak_difference_bins;
      }
      channels.push_back(std::move(entry));
    }
    pairs.push_back({{"fs_a", pair.fs_a},
                     {"fs_b", pair.fs_b},
                     {"grid_max_hz", pair.common_grid[pair.common_grid.size() - 1]},
                     {"channels", std::move(channels)}});
  }
  nlohmann::json doc{{"n_bins", report.n_bins}, {"db_floor", kDecibelFloor}, {"pairs", std::move(pairs)}};
  return doc.dump(1);
}

}  // namespace sfi
