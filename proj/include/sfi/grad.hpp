#pragma once

#include "sfi/layers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sfi {

/// dh/df and dh/dphi of one generated row, in impulse-response order (l = 1..L).
struct WeightJacobian {
  Eigen::VectorXd d_center_frequency;
  Eigen::VectorXd d_phase;
};

/// Jacobian of the generated row with respect to (f, phi). With normalization
/// enabled the row is u = gain * h / |h| and the Jacobian is projected onto the
/// tangent space of the sphere.
WeightJacobian weight_jacobian(const AnalogFilterParams<double>& params, const FrameParams& frame,
                               const WeightOptions& options = {});

/// Loss gradient with respect to every base channel's (f, phi).
struct GradientBundle {
  Eigen::VectorXd d_center_frequency;
  Eigen::VectorXd d_phase;
  std::uint64_t generation_id = 0;
};

/// Chain rule from dLoss/dWeights (stored orientation, one row per output
/// channel) to the base parameters. Phase-reversed copies contribute through
/// their negated rows; zeroed channels get exactly 0.
GradientBundle backprop_filter_params(const RowMatrix& weight_grad, const FilterbankSpec& spec,
                                      const FrameParams& frame, const WeightOptions& options = {});

/// Same, checked against the layer's weight cache. Throws StaleGenerationError
/// when generation_id is not the layer's current generation.
GradientBundle backprop_filter_params(const RowMatrix& weight_grad, std::uint64_t generation_id,
                                      const SfiLayer& layer);

// Adjoints of the layer primitives.

/// dLoss/dW of strided_correlation given dLoss/dY.
RowMatrix correlation_weight_grad(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                  const Eigen::Ref<const Eigen::MatrixXd>& output_grad, Index stride, Index taps);
/// dLoss/dW of overlap_add given dLoss/dx.
RowMatrix overlap_add_weight_grad(const Eigen::Ref<const Eigen::MatrixXd>& latent,
                                  const Eigen::Ref<const Eigen::VectorXd>& output_grad, Index stride, Index taps);
/// dLoss/dY of overlap_add given dLoss/dx.
Eigen::MatrixXd overlap_add_latent_grad(const RowMatrix& weights, const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                                        Index stride);
Eigen::MatrixXd relu_grad(const Eigen::Ref<const Eigen::MatrixXd>& pre_activation,
                          const Eigen::Ref<const Eigen::MatrixXd>& output_grad);

/// Relative guard of the SI-SNR ratio; bounds the value to about +-120 dB.
inline constexpr double kSiSnrGuard = 1e-12;

/// Scale-invariant SNR in dB, without mean removal:
///   s_t = <e, s> s / |s|^2,  n = e - s_t,
///   10 log10((|s_t|^2 + g |e|^2) / (|n|^2 + g |e|^2)),  g = kSiSnrGuard.
/// Every term scales with |e|^2, so the value does not depend on the estimate's gain.
double si_snr(const Eigen::Ref<const Eigen::VectorXd>& estimate, const Eigen::Ref<const Eigen::VectorXd>& reference);
/// d si_snr / d estimate.
Eigen::VectorXd si_snr_grad(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                            const Eigen::Ref<const Eigen::VectorXd>& reference);

/// Encoder -> identity mask -> decoder, scored by -SI-SNR against the input
/// trimmed to the decoder output length.
struct ReconstructionResult {
  double loss = 0.0;
  Eigen::VectorXd output;
  GradientBundle encoder;
  GradientBundle decoder;
};

double reconstruction_loss(const SfiLayer& encoder, const SfiLayer& decoder,
                           const Eigen::Ref<const Eigen::VectorXd>& signal);
ReconstructionResult reconstruction_gradients(const SfiLayer& encoder, const SfiLayer& decoder,
                                              const Eigen::Ref<const Eigen::VectorXd>& signal);

enum class ToyObjective { kFilterRecovery, kReconstruction };

struct ToyConfig {
  ToyObjective objective = ToyObjective::kFilterRecovery;
  double learning_rate = 0.1;
  int steps = 500;
  double fs = 16000.0;
  /// Center frequencies are updated in units of this many Hz:
  /// f <- f - lr * scale^2 * dLoss/df, i.e. plain descent on f / scale.
  double frequency_scale = 100.0;
  WeightOptions weights{};

  // filter recovery
  double target_frequency = 1000.0;
  double target_phase = 0.0;
  double initial_frequency = 1100.0;
  double initial_phase = 0.0;

  // reconstruction
  std::uint64_t seed = 0;
  double signal_seconds = 0.1;
  int tracked_channels = 2;
};

struct TrainingTrace {
  std::vector<std::string> parameter_names;
  /// losses[k] is the loss after k updates; losses.size() == steps + 1.
  std::vector<double> losses;
  std::vector<std::vector<double>> parameters;
};

class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, TrainingTrace trace) : Error(what), trace_(std::move(trace)) {}
  const TrainingTrace& trace() const { return trace_; }

 private:
  TrainingTrace trace_;
};

/// Plain gradient descent on (f, phi). Throws TrainingAborted on a non-finite loss.
TrainingTrace train_toy(const ToyConfig& config);

/// CSV with header step,loss,<parameter names>.
void write_trace_csv(std::ostream& out, const TrainingTrace& trace);

}  // namespace sfi
