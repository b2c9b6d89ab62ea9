#include "sfi/grad.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

namespace sfi {

WeightJacobian weight_jacobian(const AnalogFilterParams<double>& params, const FrameParams& frame,
                               const WeightOptions& options) {
  const Index taps = frame.kernel_size;
  WeightJacobian jac{Eigen::VectorXd(taps), Eigen::VectorXd(taps)};
  const double period = frame.period;
  for (Index l = 1; l <= taps; ++l) {
    const double step = static_cast<double>(l);
    const double t = step * period;
    const auto g = detail::grad_g(params, t, std::fma(step, period, -t));
    jac.d_center_frequency[l - 1] = period * g.d_center_frequency;
    jac.d_phase[l - 1] = period * g.d_phase;
  }
  if (!options.normalize) return jac;

  const Eigen::VectorXd h = impulse_invariant(params, frame);
  const double norm = h.norm();
  if (!(norm > 0.0)) throw DegenerateFilterError("weight_jacobian: all-zero impulse response");
  const Eigen::VectorXd unit = h / norm;
  const double scale = normalization_gain(frame, options) / norm;
  for (Eigen::VectorXd* d : {&jac.d_center_frequency, &jac.d_phase}) {
    *d = scale * (*d - unit * unit.dot(*d));
  }
  return jac;
}

GradientBundle backprop_filter_params(const RowMatrix& weight_grad, const FilterbankSpec& spec,
                                      const FrameParams& frame, const WeightOptions& options) {
  if (weight_grad.rows() != spec.size() || weight_grad.cols() != frame.kernel_size)
    throw std::invalid_argument("backprop_filter_params: gradient shape does not match the weights");
  const Index n_base = spec.base_count();
  GradientBundle bundle{Eigen::VectorXd::Zero(n_base), Eigen::VectorXd::Zero(n_base), 0};
  for (Index m = 0; m < n_base; ++m) {
    const auto& params = spec.base[static_cast<std::size_t>(m)];
    if (options.aliasing_reduction && is_aliased(params.center_frequency, frame.fs)) continue;
    // A phase-reversed copy stores the negated row of its base channel.
    Eigen::VectorXd upstream = weight_grad.row(m).transpose();
    if (spec.paired) upstream -= weight_grad.row(m + spec.pair_offset()).transpose();
    if (upstream.isZero(0.0)) continue;
    if (options.time_reverse) upstream.reverseInPlace();
    const auto jac = weight_jacobian(params, frame, options);
    bundle.d_center_frequency[m] = upstream.dot(jac.d_center_frequency);
    bundle.d_phase[m] = upstream.dot(jac.d_phase);
  }
  return bundle;
}

GradientBundle backprop_filter_params(const RowMatrix& weight_grad, std::uint64_t generation_id,
                                      const SfiLayer& layer) {
  if (generation_id != layer.generation())
    throw StaleGenerationError("backprop_filter_params: gradient belongs to weight generation " +
                               std::to_string(generation_id) + ", current is " +
                               std::to_string(layer.generation()));
  auto bundle = backprop_filter_params(weight_grad, layer.spec(), layer.frame(), layer.options());
  bundle.generation_id = generation_id;
  return bundle;
}

RowMatrix correlation_weight_grad(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                  const Eigen::Ref<const Eigen::MatrixXd>& output_grad, Index stride, Index taps) {
  const Index frames = output_grad.cols();
  if (frames > 0 && (frames - 1) * stride + taps > signal.size())
    throw std::invalid_argument("correlation_weight_grad: signal too short for the frame count");
  RowMatrix grad = RowMatrix::Zero(output_grad.rows(), taps);
  for (Index k = 0; k < frames; ++k) {
    grad.noalias() += output_grad.col(k) * signal.segment(k * stride, taps).transpose();
  }
  return grad;
}

RowMatrix overlap_add_weight_grad(const Eigen::Ref<const Eigen::MatrixXd>& latent,
                                  const Eigen::Ref<const Eigen::VectorXd>& output_grad, Index stride, Index taps) {
  const Index frames = latent.cols();
  if (frames > 0 && (frames - 1) * stride + taps != output_grad.size())
    throw std::invalid_argument("overlap_add_weight_grad: output length does not match the frame count");
  RowMatrix grad = RowMatrix::Zero(latent.rows(), taps);
  for (Index k = 0; k < frames; ++k) {
    grad.noalias() += latent.col(k) * output_grad.segment(k * stride, taps).transpose();
  }
  return grad;
}

Eigen::MatrixXd overlap_add_latent_grad(const RowMatrix& weights, const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                                        Index stride) {
  return strided_correlation(weights, output_grad, stride);
}

Eigen::MatrixXd relu_grad(const Eigen::Ref<const Eigen::MatrixXd>& pre_activation,
                          const Eigen::Ref<const Eigen::MatrixXd>& output_grad) {
  return (pre_activation.array() > 0.0).select(output_grad, 0.0);
}

namespace {

struct SiSnrTerms {
  Eigen::VectorXd target;  // projection onto the reference
  Eigen::VectorXd noise;
  double target_energy;
  double noise_energy;
  double guard;  // kSiSnrGuard * |estimate|^2
};

SiSnrTerms si_snr_terms(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                        const Eigen::Ref<const Eigen::VectorXd>& reference) {
  if (estimate.size() != reference.size() || estimate.size() < 1)
    throw std::invalid_argument("si_snr: signals must have equal non-zero length");
  const double ref_energy = reference.squaredNorm();
  if (!(ref_energy > 0.0)) throw std::invalid_argument("si_snr: reference is identically zero");
  SiSnrTerms terms;
  terms.target = (estimate.dot(reference) / ref_energy) * reference;
  terms.noise = estimate - terms.target;
  terms.target_energy = terms.target.squaredNorm();
  terms.noise_energy = terms.noise.squaredNorm();
  terms.guard = kSiSnrGuard * estimate.squaredNorm();
  return terms;
}

}  // namespace

double si_snr(const Eigen::Ref<const Eigen::VectorXd>& estimate, const Eigen::Ref<const Eigen::VectorXd>& reference) {
  const auto t = si_snr_terms(estimate, reference);
  if (t.guard == 0.0) return 10.0 * std::log10(kSiSnrGuard / (1.0 + kSiSnrGuard));
  return 10.0 * std::log10((t.target_energy + t.guard) / (t.noise_energy + t.guard));
}

Eigen::VectorXd si_snr_grad(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                            const Eigen::Ref<const Eigen::VectorXd>& reference) {
  const auto t = si_snr_terms(estimate, reference);
  if (t.guard == 0.0) return Eigen::VectorXd::Zero(estimate.size());
  const double c = 20.0 / std::numbers::ln10;
  const Eigen::VectorXd guarded = kSiSnrGuard * estimate;
  return c * ((t.target + guarded) / (t.target_energy + t.guard) - (t.noise + guarded) / (t.noise_energy + t.guard));
}

double reconstruction_loss(const SfiLayer& encoder, const SfiLayer& decoder,
                           const Eigen::Ref<const Eigen::VectorXd>& signal) {
  const auto latent = encode(signal, encoder);
  const Eigen::VectorXd output = decode(latent, decoder);
  return -si_snr(output, signal.head(output.size()));
}

ReconstructionResult reconstruction_gradients(const SfiLayer& encoder, const SfiLayer& decoder,
                                              const Eigen::Ref<const Eigen::VectorXd>& signal) {
  if (!(encoder.frame() == decoder.frame()))
    throw std::invalid_argument("reconstruction: encoder and decoder run at different rates");
  const auto& frame = encoder.frame();
  const auto pre = encode_linear(signal, encoder);
  LatentRepresentation latent{pre.values.cwiseMax(0.0), frame};

  ReconstructionResult result;
  result.output = decode(latent, decoder);
  const auto reference = signal.head(result.output.size());
  result.loss = -si_snr(result.output, reference);

  const Eigen::VectorXd d_output = -si_snr_grad(result.output, reference);
  const RowMatrix d_decoder_weights = overlap_add_weight_grad(latent.values, d_output, frame.stride, frame.kernel_size);
  const Eigen::MatrixXd d_latent = overlap_add_latent_grad(decoder.weights().data, d_output, frame.stride);
  const Eigen::MatrixXd d_pre = relu_grad(pre.values, d_latent);
  const RowMatrix d_encoder_weights = correlation_weight_grad(signal, d_pre, frame.stride, frame.kernel_size);

  result.decoder = backprop_filter_params(d_decoder_weights, decoder.generation(), decoder);
  result.encoder = backprop_filter_params(d_encoder_weights, encoder.generation(), encoder);
  return result;
}

namespace {

void descend(FilterbankSpec& spec, const GradientBundle& grad, const ToyConfig& config) {
  const double f_step = config.learning_rate * config.frequency_scale * config.frequency_scale;
  for (Index m = 0; m < spec.base_count(); ++m) {
    auto& params = spec.base[static_cast<std::size_t>(m)];
    if (params.trainable.center_frequency) {
      params.set_center_frequency(std::max(0.0, params.center_frequency - f_step * grad.d_center_frequency[m]));
    }
    if (params.trainable.phase) params.phase -= config.learning_rate * grad.d_phase[m];
  }
}

void record(TrainingTrace& trace, double loss, const FilterbankSpec& spec, int tracked) {
  trace.losses.push_back(loss);
  std::vector<double> values;
  for (int m = 0; m < tracked; ++m) {
    values.push_back(spec.base[static_cast<std::size_t>(m)].center_frequency);
    values.push_back(spec.base[static_cast<std::size_t>(m)].phase);
  }
  trace.parameters.push_back(std::move(values));
}

void check_finite(double loss, int step, TrainingTrace& trace) {
  if (!std::isfinite(loss))
    throw TrainingAborted("train_toy: non-finite loss at step " + std::to_string(step), std::move(trace));
}

TrainingTrace train_filter_recovery(const ToyConfig& config) {
  const auto frame = frame_params(config.fs);
  FilterbankSpec target;
  target.paired = false;
  target.base.push_back(AnalogFilterParams<double>::mpgtf(config.target_frequency, config.target_phase));
  const RowMatrix target_row = assemble_weights(target, frame, config.weights).data;

  FilterbankSpec spec;
  spec.paired = false;
  spec.base.push_back(AnalogFilterParams<double>::mpgtf(config.initial_frequency, config.initial_phase));

  TrainingTrace trace;
  trace.parameter_names = {"f_0", "phi_0"};
  for (int step = 0; step <= config.steps; ++step) {
    const RowMatrix residual = assemble_weights(spec, frame, config.weights).data - target_row;
    const double loss = residual.squaredNorm();
    check_finite(loss, step, trace);
    record(trace, loss, spec, 1);
    if (step == config.steps) break;
    descend(spec, backprop_filter_params(2.0 * residual, spec, frame, config.weights), config);
  }
  return trace;
}

TrainingTrace train_reconstruction(const ToyConfig& config) {
  SfiLayer encoder(init_filterbank(), config.weights);
  SfiLayer decoder(init_filterbank(), config.weights);
  encoder.set_sampling_frequency(config.fs);
  decoder.set_sampling_frequency(config.fs);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto samples = static_cast<Index>(std::llround(config.signal_seconds * config.fs));
  Eigen::VectorXd signal(samples);
  for (Index i = 0; i < samples; ++i) signal[i] = normal(rng);

  const int tracked = std::min<int>(config.tracked_channels, static_cast<int>(encoder.spec().base_count()));
  TrainingTrace trace;
  for (int m = 0; m < tracked; ++m) {
    trace.parameter_names.push_back("enc_f_" + std::to_string(m));
    trace.parameter_names.push_back("enc_phi_" + std::to_string(m));
  }
  for (int step = 0; step <= config.steps; ++step) {
    const auto result = reconstruction_gradients(encoder, decoder, signal);
    check_finite(result.loss, step, trace);
    record(trace, result.loss, encoder.spec(), tracked);
    if (step == config.steps) break;
    auto enc_spec = encoder.spec();
    auto dec_spec = decoder.spec();
    descend(enc_spec, result.encoder, config);
    descend(dec_spec, result.decoder, config);
    encoder.set_spec(std::move(enc_spec));
    decoder.set_spec(std::move(dec_spec));
  }
  return trace;
}

}  // namespace

TrainingTrace train_toy(const ToyConfig& config) {
  if (config.steps < 0 || !(config.learning_rate >= 0.0) || !(config.frequency_scale > 0.0))
    throw std::invalid_argument("train_toy: steps and learning rate must be non-negative");
  return config.objective == ToyObjective::kFilterRecovery ? train_filter_recovery(config)
                                                           : train_reconstruction(config);
}

void write_trace_csv(std::ostream& out, const TrainingTrace& trace) {
  out << "step,loss";
  for (const auto& name : trace.parameter_names) out << ',' << name;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < trace.losses.size(); ++k) {
    out << k << ',' << trace.losses[k];
    for (double v : trace.parameters[k]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace sfi
