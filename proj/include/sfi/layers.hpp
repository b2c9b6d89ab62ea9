#pragma once

#include "sfi/discretize.hpp"

#include <cstdint>
#include <optional>

namespace sfi {

/// Frames produced by valid-mode strided convolution of `samples` samples.
Index frame_count(Index samples, const FrameParams& frame);
/// Samples produced by overlap-add synthesis of `frames` frames.
Index synthesis_length(Index frames, const FrameParams& frame);

/// N x K latent frames and the framing they were computed with.
struct LatentRepresentation {
  Eigen::MatrixXd values;
  FrameParams frame;
};

/// Weight cache of one SFI layer.
///
/// Holds the analog filterbank and regenerates the discrete weights whenever the
/// sampling frequency or the parameters change. Forward passes only read the
/// cache; mutating calls need exclusive access.
class SfiLayer {
 public:
  explicit SfiLayer(FilterbankSpec spec, WeightOptions options = {});

  /// Regenerates framing and weights unless fs equals the cached rate.
  void set_sampling_frequency(double fs);

  /// Replaces the analog parameters; regenerates if a rate is set.
  void set_spec(FilterbankSpec spec);

  bool ready() const { return weights_.has_value(); }
  const FilterbankSpec& spec() const { return spec_; }
  const WeightOptions& options() const { return options_; }
  const FrameParams& frame() const;
  const WeightTensor& weights() const;
  /// Incremented on every regeneration.
  std::uint64_t generation() const { return generation_; }

 private:
  void regenerate(const FrameParams& frame);

  FilterbankSpec spec_;
  WeightOptions options_;
  std::optional<FrameParams> frame_;
  std::optional<WeightTensor> weights_;
  std::uint64_t generation_ = 0;
};

/// Strided cross-correlation y[n, k] = sum_j w[n, j] x[k W + j] without the rectifier.
Eigen::MatrixXd strided_correlation(const RowMatrix& weights, const Eigen::Ref<const Eigen::VectorXd>& signal,
                                    Index stride);

/// Overlap-add x[s] = sum_{n,k} y[n, k] w[n, s - k W].
Eigen::VectorXd overlap_add(const RowMatrix& weights, const Eigen::Ref<const Eigen::MatrixXd>& latent,
                            Index stride);

/// Encoder output before the ReLU.
LatentRepresentation encode_linear(const Eigen::Ref<const Eigen::VectorXd>& signal, const SfiLayer& layer);
/// Encoder: strided convolution followed by ReLU.
LatentRepresentation encode(const Eigen::Ref<const Eigen::VectorXd>& signal, const SfiLayer& layer);
/// Decoder: transposed convolution with the layer's stored weights.
Eigen::VectorXd decode(const LatentRepresentation& latent, const SfiLayer& layer);

/// Elementwise mask in [0, 1].
LatentRepresentation apply_mask(const LatentRepresentation& latent, const Eigen::Ref<const Eigen::MatrixXd>& mask);

}  // namespace sfi
