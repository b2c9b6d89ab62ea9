#include "sfi/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sfi {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

}  // namespace

void AudioBuffer::validate() const {
  if (!(fs > 0.0)) throw std::invalid_argument("AudioBuffer: fs must be positive");
  for (const auto& ch : channels) {
    if (ch.size() != frames()) throw std::invalid_argument("AudioBuffer: channels differ in length");
  }
}

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open '" + path + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw MalformedWavHeader("'" + path + "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      // Some writers leave the data size unpatched; take what is there.
      if (std::memcmp(chunk, "data", 4) != 0) throw MalformedWavHeader("chunk runs past end of file");
    }
    const std::size_t available = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw MalformedWavHeader("fmt chunk too short");
      const unsigned char* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      block_align = le16(f + 12);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (available < 40) throw MalformedWavHeader("extensible fmt chunk too short");
        format = le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = available;
    }
    pos = body + available + (available & 1);
  }
  if (!have_fmt) throw MalformedWavHeader("missing fmt chunk");
  if (!data) throw MalformedWavHeader("missing data chunk");
  if (channels == 0 || rate == 0) throw MalformedWavHeader("zero channels or sample rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw UnsupportedWavEncoding("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits); expected PCM16 or float32");
  if (channels > 2) throw UnsupportedWavEncoding("only mono and stereo WAV files are supported");
  const std::size_t sample_bytes = bits / 8;
  if (block_align != channels * sample_bytes) throw MalformedWavHeader("block alignment disagrees with format");

  const auto frames = static_cast<Index>(data_size / block_align);
  AudioBuffer buffer;
  buffer.fs = rate;
  buffer.channels.assign(channels, Eigen::VectorXd(frames));
  for (Index i = 0; i < frames; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + static_cast<std::size_t>(i) * block_align + c * sample_bytes;
      double value;
      if (pcm16) {
        value = static_cast<double>(static_cast<std::int16_t>(le16(p))) / 32768.0;
      } else {
        value = static_cast<double>(std::bit_cast<float>(le32(p)));
      }
      buffer.channels[c][i] = value;
    }
  }
  return buffer;
}

void write_wav(const std::string& path, const AudioBuffer& buffer, WavEncoding encoding) {
  buffer.validate();
  if (buffer.channels.empty()) throw std::invalid_argument("write_wav: no channels");
  const std::uint16_t channels = static_cast<std::uint16_t>(buffer.channel_count());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const auto rate = static_cast<std::uint32_t>(std::lround(buffer.fs));
  const auto data_size = static_cast<std::uint32_t>(buffer.frames() * block_align);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put32(out, 36 + data_size);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put16(out, channels);
  put32(out, rate);
  put32(out, rate * block_align);
  put16(out, block_align);
  put16(out, bits);
  out += "data";
  put32(out, data_size);
  for (Index i = 0; i < buffer.frames(); ++i) {
    for (const auto& ch : buffer.channels) {
      const double x = std::isnan(ch[i]) ? 0.0 : std::clamp(ch[i], -1.0, 1.0);
      if (encoding == WavEncoding::kPcm16) {
        const double q = std::min(std::round(x * 32768.0), 32767.0);
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      }
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw WavError("cannot open '" + path + "' for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw WavError("failed writing '" + path + "'");
}

}  // namespace sfi
