#pragma once

#include "sfi/types.hpp"

#include <string>
#include <vector>

namespace sfi {

/// Samples in [-1, 1], one vector per channel, all of equal length.
struct AudioBuffer {
  std::vector<Eigen::VectorXd> channels;
  double fs = 0.0;

  Index channel_count() const { return static_cast<Index>(channels.size()); }
  Index frames() const { return channels.empty() ? 0 : channels.front().size(); }
  void validate() const;
};

enum class WavEncoding { kPcm16, kFloat32 };

class WavError : public Error {
 public:
  using Error::Error;
};
/// The file is a valid RIFF/WAVE container in an encoding we do not read.
class UnsupportedWavEncoding : public WavError {
 public:
  using WavError::WavError;
};
/// The RIFF structure or fmt chunk is broken.
class MalformedWavHeader : public WavError {
 public:
  using WavError::WavError;
};

/// PCM16 (scaled by 1/32768) or IEEE float32, mono or stereo.
AudioBuffer read_wav(const std::string& path);
/// Samples are clipped to [-1, 1]; PCM16 uses round(x * 32768) limited to 32767.
void write_wav(const std::string& path, const AudioBuffer& buffer, WavEncoding encoding);

}  // namespace sfi
