#include "sfi/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace sfi {

double central_difference(const std::function<double(double)>& fn, double x, double step) {
  return (fn(x - 2 * step) - 8 * fn(x - step) + 8 * fn(x + step) - fn(x + 2 * step)) / (12 * step);
}

namespace {

FilterbankSpec random_bank(std::mt19937_64& rng, double fs, int n) {
  std::uniform_real_distribution<double> freq(50.0, std::min(8000.0, 0.45 * fs));
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  FilterbankSpec spec;
  for (int m = 0; m < n; ++m) spec.base.push_back(AnalogFilterParams<double>::mpgtf(freq(rng), phase(rng)));
  return spec;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return denom > 0.0 ? std::abs(analytic - numeric) / denom : 0.0;
}

}  // namespace

GradCheckResult run_gradient_check(const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> rate(8000.0, 48000.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradCheckResult result;

  for (int config = 0; config < options.configurations; ++config) {
    const double fs = std::round(rate(rng));
    const int channels = std::uniform_int_distribution<int>(1, 4)(rng);
    SfiLayer encoder(random_bank(rng, fs, channels));
    SfiLayer decoder(random_bank(rng, fs, channels));
    encoder.set_sampling_frequency(fs);
    decoder.set_sampling_frequency(fs);
    // At least five frames; with a single frame SI-SNR cannot see the encoder gain.
    const Index taps = encoder.frame().kernel_size;
    const Index min_length = taps + 4 * encoder.frame().stride;
    std::uniform_int_distribution<Index> length(min_length, min_length + 5 * taps);
    Eigen::VectorXd signal(length(rng));
    for (Index i = 0; i < signal.size(); ++i) signal[i] = normal(rng);

    const auto analytic = reconstruction_gradients(encoder, decoder, signal);

    for (int which = 0; which < 2; ++which) {
      const bool is_encoder = which == 0;
      const SfiLayer& layer = is_encoder ? encoder : decoder;
      const GradientBundle& bundle = is_encoder ? analytic.encoder : analytic.decoder;
      const double f_floor =
          std::max(options.absolute_floor, options.floor_fraction * bundle.d_center_frequency.cwiseAbs().maxCoeff());
      const double phi_floor =
          std::max(options.absolute_floor, options.floor_fraction * bundle.d_phase.cwiseAbs().maxCoeff());

      for (Index m = 0; m < layer.spec().base_count(); ++m) {
        for (int kind = 0; kind < 2; ++kind) {
          const bool is_f = kind == 0;
          auto loss_at = [&](double value) {
            auto spec = layer.spec();
            auto& p = spec.base[static_cast<std::size_t>(m)];
            if (is_f) p.set_center_frequency(value);
            else p.phase = value;
            SfiLayer probe(spec, layer.options());
            probe.set_sampling_frequency(fs);
            return is_encoder ? reconstruction_loss(probe, decoder, signal)
                              : reconstruction_loss(encoder, probe, signal);
          };
          const auto& p = layer.spec().base[static_cast<std::size_t>(m)];
          const double x = is_f ? p.center_frequency : p.phase;
          const double step = is_f ? options.f_step * std::max(1.0, std::abs(x)) : options.phase_step;
          const double numeric = central_difference(loss_at, x, step);
          const double exact = is_f ? bundle.d_center_frequency[m] : bundle.d_phase[m];
          result.max_relative_error =
              std::max(result.max_relative_error, relative_error(exact, numeric, is_f ? f_floor : phi_floor));
          ++result.parameters_checked;
        }
      }
    }
    ++result.configurations;
  }
  return result;
}

}  // namespace sfi
