// Acceptance suite: one PASS/FAIL line per property, nonzero exit on any failure.

#include "sfi/analysis.hpp"
#include "sfi/grad.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... values) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, values...);
  return buf;
}

Outcome impulse_invariance() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> fs_dist(8000.0, 48000.0), unit(0.0, 1.0);
  std::uniform_int_distribution<sfi::Index> taps(1, 240);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const double fs = fs_dist(rng);
    const double f = 20.0 + unit(rng) * (fs / 2.0 - 20.0);
    const double phi = unit(rng) * 2.0 * std::numbers::pi;
    const int order = 1 + static_cast<int>(unit(rng) * 4.0);
    const double amplitude = 0.1 + 10.0 * unit(rng);
    const sfi::Index l_taps = taps(rng);
    auto params = sfi::AnalogFilterParams<double>::mpgtf(f, phi, amplitude, order);
    const auto frame = sfi::frame_params(fs, l_taps, std::max<sfi::Index>(1, l_taps / 2));
    const Eigen::VectorXd h = sfi::impulse_invariant(params, frame);
    const auto ref = oracle::gammatone_samples(amplitude, order, params.bandwidth, f, phi, frame.period, l_taps);
    oracle::Real scale = 0;
    for (const auto& v : ref) scale = std::max(scale, oracle::Real(abs(v)));
    for (sfi::Index l = 0; l < l_taps; ++l) {
      const double err = static_cast<double>(abs(oracle::Real(h[l]) - ref[static_cast<std::size_t>(l)]) / scale);
      worst = std::max(worst, err);
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-14 && elapsed < 5.0,
          fmt("1000 draws, max error relative to row peak %.3g (tol 1e-14), %.2f s (limit 5 s)", worst, elapsed)};
}

Outcome frame_parameters() {
  struct Row {
    double fs;
    sfi::Index taps, stride;
  };
  std::ostringstream detail;
  bool ok = true;
  for (const Row& r : {Row{16000, 80, 40}, Row{8000, 40, 20}, Row{32000, 160, 80}, Row{44100, 221, 110},
                       Row{48000, 240, 120}}) {
    const auto p = sfi::frame_params(r.fs);
    ok = ok && p.kernel_size == r.taps && p.stride == r.stride && p.period == 1.0 / r.fs;
    detail << r.fs << "->(" << p.kernel_size << "," << p.stride << ") ";
  }
  return {ok, detail.str()};
}

double erb_rate(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }
double erb_rate_inverse(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

std::vector<double> reference_centers() {
  std::vector<double> c(48);
  const double lo = erb_rate(50.0), hi = erb_rate(8000.0);
  for (int i = 0; i < 48; ++i) c[static_cast<std::size_t>(i)] = erb_rate_inverse(lo + (hi - lo) * i / 47.0);
  c.front() = 50.0;
  c.back() = 8000.0;
  return c;
}

Outcome bank_configuration() {
  const auto spec = sfi::init_filterbank();
  const auto centers = reference_centers();
  bool ok = spec.size() == 440 && spec.base_count() == 220 && spec.pair_offset() == 220;
  double worst_center = 0.0;
  for (sfi::Index m = 0; m < 220 && ok; ++m) {
    const int center = m < 140 ? static_cast<int>(m / 5) : 28 + static_cast<int>((m - 140) / 4);
    const int k = m < 140 ? static_cast<int>(m % 5) : static_cast<int>((m - 140) % 4);
    const int variants = m < 140 ? 5 : 4;
    const auto a = spec.channel(m);
    const auto b = spec.channel(m + 220);
    worst_center = std::max(worst_center, std::abs(a.center_frequency - centers[static_cast<std::size_t>(center)]) /
                                              centers[static_cast<std::size_t>(center)]);
    ok = ok && std::abs(a.phase - k * std::numbers::pi / variants) <= 1e-15 &&
         b.center_frequency == a.center_frequency && b.phase == a.phase + std::numbers::pi;
  }
  ok = ok && worst_center <= 1e-12 && spec.channel(0).center_frequency == 50.0 &&
       spec.channel(219).center_frequency == 8000.0;
  return {ok, fmt("440 channels, 28x5 + 20x4 partition, pairs at +220, endpoints %.17g / %.17g Hz, "
                  "center error %.2g",
                  spec.channel(0).center_frequency, spec.channel(219).center_frequency, worst_center)};
}

Outcome gradient_fidelity() {
  const auto start = Clock::now();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int parameters = 0;
  for (int config = 0; config < 50; ++config) {
    const double fs = 8000.0 + 40000.0 * unit(rng);
    const int n = 1 + static_cast<int>(unit(rng) * 4.0);
    const bool paired = unit(rng) < 0.5;
    auto bank = [&] {
      sfi::FilterbankSpec s;
      s.paired = paired;
      const double f_hi = std::min(8000.0, 0.45 * fs);
      for (int m = 0; m < n; ++m)
        s.base.push_back(sfi::AnalogFilterParams<double>::mpgtf(50.0 + unit(rng) * (f_hi - 50.0),
                                                               unit(rng) * 2.0 * std::numbers::pi));
      return s;
    };
    sfi::SfiLayer enc(bank()), dec(bank());
    enc.set_sampling_frequency(fs);
    dec.set_sampling_frequency(fs);
    const auto frame = enc.frame();
    const auto samples = frame.kernel_size + frame.stride * (4 + static_cast<sfi::Index>(unit(rng) * 8.0));
    const Eigen::VectorXd x = oracle::white_noise(samples, 1000 + static_cast<std::uint64_t>(config));
    const auto result = sfi::reconstruction_gradients(enc, dec, x);

    for (int layer = 0; layer < 2; ++layer) {
      const sfi::SfiLayer& target = layer == 0 ? enc : dec;
      const auto& bundle = layer == 0 ? result.encoder : result.decoder;
      auto loss_with = [&](int m, double f, double phi) {
        auto s = target.spec();
        s.base[static_cast<std::size_t>(m)].set_center_frequency(f);
        s.base[static_cast<std::size_t>(m)].phase = phi;
        sfi::SfiLayer probe(std::move(s));
        probe.set_sampling_frequency(fs);
        return layer == 0 ? sfi::reconstruction_loss(probe, dec, x) : sfi::reconstruction_loss(enc, probe, x);
      };
      const double floor_f = std::max(1e-9, 1e-3 * bundle.d_center_frequency.cwiseAbs().maxCoeff());
      const double floor_phi = std::max(1e-9, 1e-3 * bundle.d_phase.cwiseAbs().maxCoeff());
      for (int m = 0; m < n; ++m) {
        const auto& p = target.spec().base[static_cast<std::size_t>(m)];
        const double nf = oracle::derivative([&](double f) { return loss_with(m, f, p.phase); }, p.center_frequency,
                                             1e-6 * std::max(1.0, p.center_frequency));
        const double np = oracle::derivative([&](double v) { return loss_with(m, p.center_frequency, v); }, p.phase,
                                             1e-6);
        worst = std::max(worst, oracle::relative_error(bundle.d_center_frequency[m], nf, floor_f));
        worst = std::max(worst, oracle::relative_error(bundle.d_phase[m], np, floor_phi));
        parameters += 2;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-5 && elapsed < 60.0, fmt("50 configurations, %d parameters, max relative error %.3g (tol 1e-5), "
                                              "%.2f s (limit 60 s)",
                                              parameters, worst, elapsed)};
}

Outcome aliasing_reduction() {
  const auto spec = sfi::init_filterbank();
  std::set<sfi::Index> expected;
  const auto centers = reference_centers();
  sfi::Index base = 0;
  for (int c = 0; c < 48; ++c) {
    const int variants = c < 28 ? 5 : 4;
    for (int k = 0; k < variants; ++k, ++base) {
      if (centers[static_cast<std::size_t>(c)] >= 4000.0) {
        expected.insert(base);
        expected.insert(base + 220);
      }
    }
  }
  auto zero_rows = [&](double fs) {
    const auto w = sfi::assemble_weights(spec, sfi::frame_params(fs));
    std::set<sfi::Index> zeros;
    for (sfi::Index r = 0; r < w.out_channels; ++r)
      if ((w.data.row(r).array() == 0.0).all()) zeros.insert(r);
    return zeros;
  };
  const auto at8 = zero_rows(8000);
  const auto at48 = zero_rows(48000);
  return {at8 == expected && at48.empty(),
          fmt("fs=8000: %zu zeroed, %zu expected from the ERB grid; fs=48000: %zu zeroed", at8.size(), expected.size(),
              at48.size())};
}

Outcome response_consistency() {
  const auto start = Clock::now();
  const auto report = sfi::consistency_report(sfi::init_filterbank(), {16000.0, 32000.0}, 512);
  sfi::Index worst_bins = 0;
  double worst_mean = 0.0;
  int checked = 0;
  bool blocked = false;
  for (const auto& dev : report.pairs.at(0).channels) {
    if (dev.center_frequency > 6000.0) continue;
    ++checked;
    blocked = blocked || dev.blocked_at.has_value();
    worst_bins = std::max(worst_bins, dev.peak_difference_bins);
    worst_mean = std::max(worst_mean, dev.mean_abs_db);
  }
  const double elapsed = seconds_since(start);
  return {!blocked && worst_bins <= 1 && worst_mean <= 3.0 && elapsed < 30.0,
          fmt("%d channels <= 6 kHz, max peak offset %td bins (tol 1), max mean deviation %.3f dB (tol 3), "
              "%.2f s (limit 30 s)",
              checked, static_cast<std::ptrdiff_t>(worst_bins), worst_mean, elapsed)};
}

Outcome pair_antisymmetry() {
  double worst = 0.0;
  for (double fs : {8000.0, 16000.0, 22050.0, 44100.0}) {
    sfi::SfiLayer layer(sfi::init_filterbank());
    layer.set_sampling_frequency(fs);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto x = oracle::white_noise(static_cast<sfi::Index>(fs / 20), seed);
      const auto y = sfi::encode_linear(x, layer).values;
      const double scale = std::max(y.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      worst = std::max(worst, (y.topRows(220) + y.bottomRows(220)).cwiseAbs().maxCoeff() / scale);
    }
  }
  return {worst <= 1e-12, fmt("max |y_m + y_m+220| / max |y| = %.3g (tol 1e-12)", worst)};
}

Outcome si_snr_invariance() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = oracle::white_noise(1000, seed);
    const Eigen::VectorXd est = s + (0.1 + 0.1 * static_cast<double>(seed)) * oracle::white_noise(1000, seed + 100);
    const double base = sfi::si_snr(est, s);
    for (double alpha : {1e-3, 1.0, 1e3}) worst = std::max(worst, std::abs(sfi::si_snr(alpha * est, s) - base));
  }
  return {worst <= 1e-9, fmt("max drift %.3g dB over 20 signals (tol 1e-9)", worst)};
}

Outcome toy_training() {
  const auto start = Clock::now();
  const sfi::ToyConfig config;
  const auto trace = sfi::train_toy(config);
  const double elapsed = seconds_since(start);
  const double reduction = 1.0 - trace.losses.back() / trace.losses.front();
  std::size_t violations = 0;
  for (std::size_t k = 10; k + 1 < trace.losses.size(); ++k)
    if (trace.losses[k + 1] > trace.losses[k]) ++violations;
  return {config.steps == 500 && reduction >= 0.9 && violations == 0 && elapsed < 30.0,
          fmt("%d steps at lr %g (f in %g Hz units), f %g -> %.6f Hz, loss reduced by %.6f%% (min 90%%), "
              "%zu increases after step 10, %.2f s (limit 30 s)",
              config.steps, config.learning_rate, config.frequency_scale, config.initial_frequency,
              trace.parameters.back()[0], 100.0 * reduction, violations, elapsed)};
}

Outcome shape_contracts() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> rates{8000, 11025, 16000, 22050, 32000, 44100, 48000};
  sfi::FilterbankSpec spec;
  for (int m = 0; m < 6; ++m) spec.base.push_back(sfi::AnalogFilterParams<double>::mpgtf(100.0 + 600.0 * m, 0.3 * m));
  sfi::SfiLayer enc(spec), dec(spec);
  double current = 0.0;
  int failures = 0, regenerations = 0, changes = 0, short_inputs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double fs = unit(rng) < 0.5 ? rates[static_cast<std::size_t>(unit(rng) * 7.0)] : 8000.0 + 40000.0 * unit(rng);
    const auto before = enc.generation();
    enc.set_sampling_frequency(fs);
    enc.set_sampling_frequency(fs);
    dec.set_sampling_frequency(fs);
    const auto delta = enc.generation() - before;
    if (fs != current) ++changes;
    regenerations += static_cast<int>(delta);
    if (delta != (fs != current ? 1u : 0u)) ++failures;
    current = fs;

    const auto& frame = enc.frame();
    const auto samples = static_cast<sfi::Index>(unit(rng) * 20.0 * static_cast<double>(frame.kernel_size));
    const Eigen::VectorXd x = oracle::white_noise(samples, static_cast<std::uint64_t>(trial));
    if (samples < frame.kernel_size) {
      bool rejected = false;
      try {
        sfi::encode(x, enc);
      } catch (const std::invalid_argument&) {
        rejected = true;
      }
      if (!rejected) ++failures;
      ++short_inputs;
      continue;
    }
    const sfi::Index expected_frames = (samples - frame.kernel_size) / frame.stride + 1;
    const auto latent = sfi::encode(x, enc);
    if (latent.values.rows() != spec.size() || latent.values.cols() != expected_frames ||
        sfi::frame_count(samples, frame) != expected_frames) {
      ++failures;
      continue;
    }
    const auto y = sfi::decode(latent, dec);
    const sfi::Index expected_length = (expected_frames - 1) * frame.stride + frame.kernel_size;
    if (y.size() != expected_length || y.size() > samples) ++failures;
  }
  return {failures == 0, fmt("200 trials (%d shorter than the kernel), %d fs changes, %d regenerations, %d contract "
                             "violations",
                             short_inputs, changes, regenerations, failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"impulse-invariant exactness", impulse_invariance},
      {"frame parameters", frame_parameters},
      {"bank configuration", bank_configuration},
      {"gradient fidelity", gradient_fidelity},
      {"aliasing reduction", aliasing_reduction},
      {"cross-rate response consistency", response_consistency},
      {"phase-pair antisymmetry", pair_antisymmetry},
      {"SI-SNR scale invariance", si_snr_invariance},
      {"toy training", toy_training},
      {"pipeline shape contracts", shape_contracts},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("%s  %-32s %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
