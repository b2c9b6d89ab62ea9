#include "sfi/wav.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>

namespace {

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t fs, std::uint16_t bits,
                      const std::string& data) {
  std::string fmt;
  put16(fmt, format);
  put16(fmt, channels);
  put32(fmt, fs);
  put32(fmt, fs * channels * bits / 8);
  put16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put16(fmt, bits);
  std::string body = "WAVEfmt ";
  put32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  put32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("PCM16 decoding") {
  oracle::TempDir dir;
  std::string data;
  for (std::int16_t v : {std::int16_t{32767}, std::int16_t{-32768}, std::int16_t{0}, std::int16_t{16384}})
    put16(data, static_cast<std::uint16_t>(v));
  write_file(dir.file("a.wav"), wav_bytes(1, 1, 22050, 16, data));
  const auto buf = sfi::read_wav(dir.file("a.wav"));
  CHECK(buf.fs == 22050.0);
  REQUIRE(buf.channel_count() == 1);
  REQUIRE(buf.frames() == 4);
  CHECK(buf.channels[0][0] == 0.999969482421875);
  CHECK(buf.channels[0][1] == -1.0);
  CHECK(buf.channels[0][2] == 0.0);
  CHECK(buf.channels[0][3] == 0.5);
}

TEST_CASE("stereo is deinterleaved") {
  oracle::TempDir dir;
  std::string data;
  for (std::int16_t v : {1, 2, 3, 4, 5, 6}) put16(data, static_cast<std::uint16_t>(v));
  write_file(dir.file("s.wav"), wav_bytes(1, 2, 8000, 16, data));
  const auto buf = sfi::read_wav(dir.file("s.wav"));
  REQUIRE(buf.channel_count() == 2);
  CHECK(buf.frames() == 3);
  CHECK(buf.channels[0][1] == 3.0 / 32768.0);
  CHECK(buf.channels[1][2] == 6.0 / 32768.0);
}

TEST_CASE("round trips") {
  oracle::TempDir dir;
  sfi::AudioBuffer in;
  in.fs = 44100;
  in.channels.push_back(oracle::white_noise(300, 3) * 0.2);
  in.channels.back()[0] = 1.5;
  in.channels.back()[1] = -7.0;

  SUBCASE("float32 keeps the float-rounded value and clips") {
    sfi::write_wav(dir.file("f.wav"), in, sfi::WavEncoding::kFloat32);
    const auto out = sfi::read_wav(dir.file("f.wav"));
    CHECK(out.fs == 44100.0);
    CHECK(out.channels[0][0] == 1.0);
    CHECK(out.channels[0][1] == -1.0);
    for (Eigen::Index i = 2; i < 300; ++i)
      CHECK(out.channels[0][i] == static_cast<double>(static_cast<float>(in.channels[0][i])));
  }
  SUBCASE("PCM16 clips to the representable range") {
    sfi::write_wav(dir.file("p.wav"), in, sfi::WavEncoding::kPcm16);
    const auto out = sfi::read_wav(dir.file("p.wav"));
    CHECK(out.channels[0][0] == 32767.0 / 32768.0);
    CHECK(out.channels[0][1] == -1.0);
    for (Eigen::Index i = 2; i < 300; ++i) CHECK(std::abs(out.channels[0][i] - in.channels[0][i]) <= 0.5 / 32768.0);
  }
  SUBCASE("silence") {
    sfi::AudioBuffer z;
    z.fs = 16000;
    z.channels = {Eigen::VectorXd::Zero(100), Eigen::VectorXd::Zero(100)};
    sfi::write_wav(dir.file("z.wav"), z, sfi::WavEncoding::kPcm16);
    const auto out = sfi::read_wav(dir.file("z.wav"));
    CHECK(out.channel_count() == 2);
    CHECK(out.channels[1].isZero(0.0));
  }
}

TEST_CASE("unsupported and malformed files") {
  oracle::TempDir dir;
  write_file(dir.file("24.wav"), wav_bytes(1, 1, 16000, 24, std::string(6, '\0')));
  CHECK_THROWS_AS(sfi::read_wav(dir.file("24.wav")), sfi::UnsupportedWavEncoding);
  write_file(dir.file("3ch.wav"), wav_bytes(1, 3, 16000, 16, std::string(6, '\0')));
  CHECK_THROWS_AS(sfi::read_wav(dir.file("3ch.wav")), sfi::UnsupportedWavEncoding);

  write_file(dir.file("junk.wav"), "not a wave file at all");
  CHECK_THROWS_AS(sfi::read_wav(dir.file("junk.wav")), sfi::MalformedWavHeader);
  auto truncated = wav_bytes(1, 1, 16000, 16, std::string(8, '\0'));
  truncated.resize(30);
  write_file(dir.file("trunc.wav"), truncated);
  CHECK_THROWS_AS(sfi::read_wav(dir.file("trunc.wav")), sfi::MalformedWavHeader);
  CHECK_THROWS_AS(sfi::read_wav(dir.file("missing.wav")), sfi::WavError);
}
