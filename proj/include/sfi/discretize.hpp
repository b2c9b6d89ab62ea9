#pragma once

#include "sfi/analog_filter.hpp"
#include "sfi/filterbank.hpp"

#include <string>
#include <vector>

namespace sfi {

/// Frame length and shift held fixed in continuous time.
inline constexpr double kFrameLengthSeconds = 0.005;
inline constexpr double kFrameShiftSeconds = 0.0025;

/// Discrete framing at one sampling frequency.
struct FrameParams {
  double fs = 0.0;
  double period = 0.0;  // 1 / fs
  Index kernel_size = 0;
  Index stride = 0;

  friend bool operator==(const FrameParams&, const FrameParams&) = default;
};

/// L = round(5 ms * fs), W = round(2.5 ms * fs), halves rounded away from zero.
/// Throws std::invalid_argument when fs is too small for L, W >= 1.
FrameParams frame_params(double fs);

/// Explicit kernel size and stride, e.g. for tests of the convolution arithmetic.
FrameParams frame_params(double fs, Index kernel_size, Index stride);

/// Impulse invariant sampling h[l] = T g(l T), l = 1..L, of an arbitrary
/// impulse response. g is called as g(t, t_err) where t + t_err is l*T carried
/// to twice the working precision.
template <typename Scalar, typename Response>
VectorX<Scalar> sample_impulse_invariant(Response&& g, const FrameParams& frame) {
  if (frame.kernel_size < 1) throw std::invalid_argument("impulse_invariant: kernel size must be >= 1");
  const Scalar period = static_cast<Scalar>(frame.period);
  VectorX<Scalar> h(frame.kernel_size);
  for (Index l = 1; l <= frame.kernel_size; ++l) {
    const Scalar step = static_cast<Scalar>(l);
    const Scalar t = step * period;
    const Scalar t_err = std::fma(step, period, -t);
    h[l - 1] = period * g(t, t_err);
  }
  return h;
}

template <typename Scalar>
VectorX<Scalar> impulse_invariant(const AnalogFilterParams<Scalar>& params, const FrameParams& frame) {
  return sample_impulse_invariant<Scalar>(
      [&](Scalar t, Scalar t_err) { return detail::eval_g(params, t, t_err); }, frame);
}

struct ChannelMeta {
  double center_frequency = 0.0;
  bool zeroed = false;

  friend bool operator==(const ChannelMeta&, const ChannelMeta&) = default;
};

/// Convolution weights at one sampling frequency, shape in x out x taps.
/// Row i * out_channels + o of data holds the taps of (i, o); this is also the
/// order of the binary export.
struct WeightTensor {
  Index in_channels = 0;
  Index out_channels = 0;
  Index taps = 0;
  RowMatrix data;
  double fs = 0.0;
  std::vector<ChannelMeta> channels;  // one per output channel

  auto row(Index in, Index out) { return data.row(in * out_channels + out); }
  auto row(Index in, Index out) const { return data.row(in * out_channels + out); }

  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

struct WeightOptions {
  bool aliasing_reduction = true;
  bool normalize = true;
  bool time_reverse = true;
  /// Normalized rows get l2 norm sqrt(reference_fs / fs): unit norm at the
  /// reference rate and a rate-independent frequency response elsewhere.
  /// Zero or negative means unit norm at every rate.
  double reference_fs = 16000.0;
  /// Worker threads for per-channel generation.
  int threads = 1;
};

/// Target l2 norm of a normalized row at this frame rate.
double normalization_gain(const FrameParams& frame, const WeightOptions& options);

/// A channel is aliased when its center frequency reaches the Nyquist frequency.
inline bool is_aliased(double center_frequency, double fs) { return center_frequency >= fs / 2.0; }

/// Generates, optionally zeroes aliased channels, optionally normalizes,
/// optionally time-reverses, and stacks into a 1 x N x L tensor.
/// Phase-reversed channels are the exact negation of their base channel.
WeightTensor assemble_weights(const FilterbankSpec& spec, const FrameParams& frame,
                              const WeightOptions& options = {});

/// Zeroes every output channel with f >= fs/2 and flags it; other rows are untouched.
WeightTensor reduce_aliasing(WeightTensor tensor, double fs);

/// Flat little-endian float64 dump in (in, out, tap) order plus a JSON sidecar at
/// sidecar_path describing shape, fs and channel metadata.
void write_weights(const std::string& bin_path, const std::string& sidecar_path,
                   const WeightTensor& tensor, const FrameParams& frame);
WeightTensor read_weights(const std::string& bin_path, const std::string& sidecar_path);

}  // namespace sfi
