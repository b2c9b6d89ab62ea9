#include "sfi/cli.hpp"

#include "sfi/analysis.hpp"
#include "sfi/gradcheck.hpp"
#include "sfi/wav.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>

namespace sfi {

namespace {

struct WeightFlags {
  bool no_aliasing_reduction = false;
  bool no_normalize = false;
  bool no_time_reverse = false;
  double reference_fs = 16000.0;

  void add_to(CLI::App* app) {
    app->add_flag("--no-aliasing-reduction", no_aliasing_reduction, "Keep channels centered at or above Nyquist");
    app->add_flag("--no-normalize", no_normalize, "Skip l2 normalization of generated rows");
    app->add_flag("--no-time-reverse", no_time_reverse, "Store impulse responses in natural order");
    app->add_option("--reference-fs", reference_fs, "Rate at which normalized rows have unit norm (0: every rate)");
  }

  WeightOptions options(int threads) const {
    WeightOptions o;
    o.aliasing_reduction = !no_aliasing_reduction;
    o.normalize = !no_normalize;
    o.time_reverse = !no_time_reverse;
    o.reference_fs = reference_fs;
    o.threads = threads;
    return o;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  return file;
}

int default_threads() {
  if (const char* env = std::getenv("SFI_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw Error(std::string("SFI_THREADS is not an integer: '") + env + "'");
    }
  }
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling-frequency-independent gammatone filterbank tools", "sfi"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for per-channel generation (default: $SFI_THREADS or 1)");

  // init-bank
  auto* init = app.add_subcommand("init-bank", "Write the default 440-channel filterbank");
  std::string init_out;
  std::uint64_t init_seed = 0;
  double init_jitter = 0.0;
  init->add_option("--out", init_out, "Bank JSON path")->required();
  init->add_option("--seed", init_seed, "Seed for phase jitter");
  init->add_option("--phase-jitter", init_jitter, "Random phase offset as a fraction of pi/K")->check(CLI::Range(0.0, 1.0));

  // gen-weights
  auto* gen = app.add_subcommand("gen-weights", "Materialize weights at one sampling frequency");
  std::string gen_bank, gen_out, gen_sidecar;
  double gen_fs = 0.0;
  WeightFlags gen_flags;
  gen->add_option("--bank", gen_bank, "Bank JSON path")->required();
  gen->add_option("--fs", gen_fs, "Sampling frequency in Hz")->required();
  gen->add_option("--out", gen_out, "Binary weight path (float64 little-endian)")->required();
  gen->add_option("--sidecar", gen_sidecar, "JSON sidecar path (default: <out>.json)");
  gen_flags.add_to(gen);

  // response
  auto* resp = app.add_subcommand("response", "Frequency responses and cross-rate consistency");
  std::string resp_bank, resp_out, resp_report;
  std::vector<double> resp_fs;
  Index resp_bins = 512;
  WeightFlags resp_flags;
  resp->add_option("--bank", resp_bank, "Bank JSON path")->required();
  resp->add_option("--fs", resp_fs, "Comma-separated sampling frequencies")->required()->delimiter(',');
  resp->add_option("--bins", resp_bins, "Frequency bins over [0, fs/2]")->check(CLI::PositiveNumber);
  resp->add_option("--out", resp_out, "Response CSV path")->required();
  resp->add_option("--report", resp_report, "Consistency JSON path");
  resp_flags.add_to(resp);

  // passthrough
  auto* pass = app.add_subcommand("passthrough", "Encode, apply an identity mask, decode a WAV at its own rate");
  std::string pass_in, pass_out, pass_bank, pass_decoder_bank;
  int pass_depth = 32;
  bool pass_raw = false;
  WeightFlags pass_flags;
  pass->add_option("--in", pass_in, "Input WAV")->required();
  pass->add_option("--out", pass_out, "Output WAV")->required();
  pass->add_option("--bank", pass_bank, "Encoder bank JSON (default: init-bank output)");
  pass->add_option("--decoder-bank", pass_decoder_bank, "Decoder bank JSON (default: same as encoder)");
  pass->add_option("--depth", pass_depth, "Output bit depth: 16 or 32 (float)")->check(CLI::IsMember({16, 32}));
  pass->add_flag("--raw", pass_raw, "Write the decoder output without least-squares gain matching");
  pass_flags.add_to(pass);

  // check-grad
  auto* check = app.add_subcommand("check-grad", "Compare analytic gradients with finite differences");
  GradCheckOptions check_options;
  double check_tolerance = 1e-5;
  check->add_option("--configs", check_options.configurations, "Random configurations")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_options.seed, "Random seed");
  check->add_option("--tolerance", check_tolerance, "Exit nonzero above this relative error");

  // train-toy
  auto* train = app.add_subcommand("train-toy", "Plain gradient descent on a toy objective");
  ToyConfig train_config;
  std::string train_objective = "filter-recovery", train_out;
  WeightFlags train_flags;
  train->add_option("--objective", train_objective, "filter-recovery or reconstruction")
      ->check(CLI::IsMember({"filter-recovery", "reconstruction"}));
  train->add_option("--lr", train_config.learning_rate, "Learning rate");
  train->add_option("--steps", train_config.steps, "Gradient steps")->check(CLI::NonNegativeNumber);
  train->add_option("--fs", train_config.fs, "Sampling frequency in Hz");
  train->add_option("--f-scale", train_config.frequency_scale, "Frequency step unit in Hz");
  train->add_option("--seed", train_config.seed, "Noise seed (reconstruction)");
  train->add_option("--target-f", train_config.target_frequency, "Target center frequency (filter-recovery)");
  train->add_option("--init-f", train_config.initial_frequency, "Initial center frequency (filter-recovery)");
  train->add_option("--out", train_out, "Trace CSV path (default: stdout)");
  train_flags.add_to(train);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sfi: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  out << std::setprecision(17);
  try {
    if (threads <= 0) threads = default_threads();

    if (init->parsed()) {
      InitOptions options;
      options.seed = init_seed;
      options.phase_jitter = init_jitter;
      const auto spec = init_filterbank(options);
      save_filterbank(init_out, spec);
      out << "wrote " << spec.size() << " channels to " << init_out << '\n';
    } else if (gen->parsed()) {
      const auto spec = load_filterbank(gen_bank);
      const auto frame = frame_params(gen_fs);
      const auto weights = assemble_weights(spec, frame, gen_flags.options(threads));
      const std::string sidecar = gen_sidecar.empty() ? gen_out + ".json" : gen_sidecar;
      write_weights(gen_out, sidecar, weights, frame);
      out << "fs=" << frame.fs << " L=" << frame.kernel_size << " W=" << frame.stride << " shape=" << weights.in_channels
          << 'x' << weights.out_channels << 'x' << weights.taps << '\n';
    } else if (resp->parsed()) {
      if (resp_bins < 2) throw std::invalid_argument("--bins must be at least 2");
      const auto spec = load_filterbank(resp_bank);
      const auto options = resp_flags.options(threads);
      std::vector<ResponseMatrix> responses;
      for (double fs : resp_fs) {
        responses.push_back(to_decibels(frequency_response(assemble_weights(spec, frame_params(fs), options), resp_bins)));
      }
      auto csv = open_output(resp_out);
      write_response_csv(csv, responses);
      out << "wrote responses at " << resp_fs.size() << " rates to " << resp_out << '\n';
      if (!resp_report.empty()) {
        if (resp_fs.size() < 2) throw std::invalid_argument("--report needs at least two --fs values");
        auto json = open_output(resp_report);
        json << to_json(consistency_report(spec, resp_fs, resp_bins, options)) << '\n';
        out << "wrote consistency report to " << resp_report << '\n';
      }
    } else if (pass->parsed()) {
      const auto input = read_wav(pass_in);
      const auto options = pass_flags.options(threads);
      const auto enc_spec = pass_bank.empty() ? init_filterbank() : load_filterbank(pass_bank);
      const auto dec_spec = pass_decoder_bank.empty() ? enc_spec : load_filterbank(pass_decoder_bank);
      SfiLayer encoder(enc_spec, options);
      SfiLayer decoder(dec_spec, options);
      encoder.set_sampling_frequency(input.fs);
      decoder.set_sampling_frequency(input.fs);

      AudioBuffer output;
      output.fs = input.fs;
      // Stereo channels go through the layers independently.
      for (Index c = 0; c < input.channel_count(); ++c) {
        const Eigen::VectorXd& x = input.channels[static_cast<std::size_t>(c)];
        const auto latent = encode(x, encoder);
        const Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(latent.values.rows(), latent.values.cols());
        Eigen::VectorXd y = decode(apply_mask(latent, mask), decoder);
        const auto reference = x.head(y.size());
        const double denom = y.norm() * reference.norm();
        const double correlation = denom > 0.0 ? y.dot(reference) / denom : 0.0;
        double gain = 1.0;
        if (!pass_raw && y.squaredNorm() > 0.0) gain = y.dot(reference) / y.squaredNorm();
        y *= gain;
        out << "channel " << c << ": samples_in=" << x.size() << " samples_out=" << y.size()
            << " frames=" << latent.values.cols() << " correlation=" << correlation << " gain=" << gain
            << " si_snr_db=" << (reference.squaredNorm() > 0.0 ? si_snr(y, reference) : 0.0) << '\n';
        output.channels.push_back(std::move(y));
      }
      write_wav(pass_out, output, pass_depth == 16 ? WavEncoding::kPcm16 : WavEncoding::kFloat32);
    } else if (check->parsed()) {
      const auto result = run_gradient_check(check_options);
      out << "configurations=" << result.configurations << " parameters=" << result.parameters_checked
          << " max_relative_error=" << result.max_relative_error << '\n';
      if (!(result.max_relative_error < check_tolerance)) {
        err << "sfi: gradient check exceeded tolerance " << check_tolerance << '\n';
        return 1;
      }
    } else if (train->parsed()) {
      train_config.objective =
          train_objective == "reconstruction" ? ToyObjective::kReconstruction : ToyObjective::kFilterRecovery;
      train_config.weights = train_flags.options(threads);
      TrainingTrace trace;
      int status = 0;
      try {
        trace = train_toy(train_config);
      } catch (const TrainingAborted& e) {
        err << "sfi: " << e.what() << '\n';
        trace = e.trace();
        status = 1;
      }
      if (train_out.empty()) {
        write_trace_csv(out, trace);
      } else {
        auto csv = open_output(train_out);
        write_trace_csv(csv, trace);
        out << "initial_loss=" << trace.losses.front() << " final_loss=" << trace.losses.back() << '\n';
      }
      return status;
    }
  } catch (const std::exception& e) {
    err << "sfi: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sfi
