#include "sfi/layers.hpp"

#include <string>

namespace sfi {

Index frame_count(Index samples, const FrameParams& frame) {
  if (samples < frame.kernel_size) return 0;
  return (samples - frame.kernel_size) / frame.stride + 1;
}

Index synthesis_length(Index frames, const FrameParams& frame) {
  if (frames < 1) return 0;
  return (frames - 1) * frame.stride + frame.kernel_size;
}

SfiLayer::SfiLayer(FilterbankSpec spec, WeightOptions options)
    : spec_(std::move(spec)), options_(options) {
  spec_.validate();
}

void SfiLayer::set_sampling_frequency(double fs) {
  if (frame_ && frame_->fs == fs) return;
  regenerate(frame_params(fs));
}

void SfiLayer::set_spec(FilterbankSpec spec) {
  spec.validate();
  spec_ = std::move(spec);
  if (frame_) regenerate(*frame_);
}

const FrameParams& SfiLayer::frame() const {
  if (!frame_) throw Error("SfiLayer: sampling frequency not set");
  return *frame_;
}

const WeightTensor& SfiLayer::weights() const {
  if (!weights_) throw Error("SfiLayer: sampling frequency not set");
  return *weights_;
}

void SfiLayer::regenerate(const FrameParams& frame) {
  auto weights = assemble_weights(spec_, frame, options_);
  frame_ = frame;
  weights_ = std::move(weights);
  ++generation_;
}

Eigen::MatrixXd strided_correlation(const RowMatrix& weights, const Eigen::Ref<const Eigen::VectorXd>& signal,
                                    Index stride) {
  const Index taps = weights.cols();
  const Index frames = signal.size() < taps ? 0 : (signal.size() - taps) / stride + 1;
  Eigen::MatrixXd out(weights.rows(), frames);
  // Plain loops keep the summation order independent of the frame position,
  // so shifted inputs give bit-identical frames.
  for (Index k = 0; k < frames; ++k) {
    const double* x = signal.data() + k * stride;
    for (Index n = 0; n < weights.rows(); ++n) {
      const double* w = weights.data() + n * taps;
      double acc = 0.0;
      for (Index j = 0; j < taps; ++j) acc += w[j] * x[j];
      out(n, k) = acc;
    }
  }
  return out;
}

Eigen::VectorXd overlap_add(const RowMatrix& weights, const Eigen::Ref<const Eigen::MatrixXd>& latent,
                            Index stride) {
  if (latent.rows() != weights.rows()) throw std::invalid_argument("overlap_add: channel count mismatch");
  const Index taps = weights.cols();
  const Index frames = latent.cols();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(frames < 1 ? 0 : (frames - 1) * stride + taps);
  for (Index k = 0; k < frames; ++k) {
    double* x = out.data() + k * stride;
    for (Index n = 0; n < weights.rows(); ++n) {
      const double y = latent(n, k);
      if (y == 0.0) continue;
      const double* w = weights.data() + n * taps;
      for (Index j = 0; j < taps; ++j) x[j] += y * w[j];
    }
  }
  return out;
}

LatentRepresentation encode_linear(const Eigen::Ref<const Eigen::VectorXd>& signal, const SfiLayer& layer) {
  const auto& frame = layer.frame();
  if (signal.size() < frame.kernel_size)
    throw std::invalid_argument("encode: signal of " + std::to_string(signal.size()) +
                                " samples is shorter than the kernel (" + std::to_string(frame.kernel_size) + ")");
  return {strided_correlation(layer.weights().data, signal, frame.stride), frame};
}

LatentRepresentation encode(const Eigen::Ref<const Eigen::VectorXd>& signal, const SfiLayer& layer) {
  auto latent = encode_linear(signal, layer);
  latent.values = latent.values.cwiseMax(0.0);
  return latent;
}

Eigen::VectorXd decode(const LatentRepresentation& latent, const SfiLayer& layer) {
  const auto& frame = layer.frame();
  if (!(latent.frame == frame)) throw std::invalid_argument("decode: latent framing does not match the layer");
  if (latent.values.rows() != layer.weights().out_channels)
    throw std::invalid_argument("decode: latent channel count does not match the layer");
  return overlap_add(layer.weights().data, latent.values, frame.stride);
}

LatentRepresentation apply_mask(const LatentRepresentation& latent, const Eigen::Ref<const Eigen::MatrixXd>& mask) {
  if (mask.rows() != latent.values.rows() || mask.cols() != latent.values.cols())
    throw std::invalid_argument("apply_mask: mask shape does not match the latent");
  if (!((mask.array() >= 0.0) && (mask.array() <= 1.0)).all())
    throw std::invalid_argument("apply_mask: mask entries must lie in [0, 1]");
  return {latent.values.cwiseProduct(mask), latent.frame};
}

}  // namespace sfi
