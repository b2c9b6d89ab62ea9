#include "sfi/discretize.hpp"

#include "hexfloat.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace sfi {

namespace {

Index round_samples(double seconds_times_fs) {
  return static_cast<Index>(std::llround(seconds_times_fs));
}

template <typename Fn>
void for_each_index(Index count, int threads, Fn&& fn) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(count, 1));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Index i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

FrameParams frame_params(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("frame_params: fs must be positive");
  // fs * 5 / 1000 rather than fs * 0.005 so that exact halves stay exact.
  return frame_params(fs, round_samples(fs * 5.0 / 1000.0), round_samples(fs * 2.5 / 1000.0));
}

FrameParams frame_params(double fs, Index kernel_size, Index stride) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("frame_params: fs must be positive");
  if (kernel_size < 1)
    throw std::invalid_argument("frame_params: fs = " + std::to_string(fs) + " gives an empty kernel");
  if (stride < 1 || stride > kernel_size)
    throw std::invalid_argument("frame_params: stride must lie in [1, kernel size]");
  return FrameParams{fs, 1.0 / fs, kernel_size, stride};
}

double normalization_gain(const FrameParams& frame, const WeightOptions& options) {
  return options.reference_fs > 0.0 ? std::sqrt(options.reference_fs / frame.fs) : 1.0;
}

WeightTensor assemble_weights(const FilterbankSpec& spec, const FrameParams& frame,
                              const WeightOptions& options) {
  if (spec.base.empty()) throw std::invalid_argument("assemble_weights: empty filterbank");
  const Index n_base = spec.base_count();
  const Index n_out = spec.size();
  const Index taps = frame.kernel_size;
  const double gain = normalization_gain(frame, options);

  WeightTensor tensor;
  tensor.in_channels = 1;
  tensor.out_channels = n_out;
  tensor.taps = taps;
  tensor.fs = frame.fs;
  tensor.data = RowMatrix::Zero(n_out, taps);
  tensor.channels.resize(static_cast<std::size_t>(n_out));

  std::vector<char> degenerate(static_cast<std::size_t>(n_base), 0);
  for_each_index(n_base, options.threads, [&](Index m) {
    const auto& params = spec.base[static_cast<std::size_t>(m)];
    const bool zeroed = options.aliasing_reduction && is_aliased(params.center_frequency, frame.fs);
    if (zeroed) return;
    VectorX<double> h = impulse_invariant(params, frame);
    if (options.normalize) {
      const double norm = h.norm();
      if (!(norm > 0.0)) {
        degenerate[static_cast<std::size_t>(m)] = 1;
        return;
      }
      h *= gain / norm;
    }
    if (options.time_reverse) h.reverseInPlace();
    tensor.data.row(m) = h.transpose();
  });

  for (Index m = 0; m < n_base; ++m) {
    if (degenerate[static_cast<std::size_t>(m)])
      throw DegenerateFilterError("assemble_weights: channel " + std::to_string(m) +
                                  " has an all-zero impulse response");
  }
  for (Index c = 0; c < n_out; ++c) {
    const Index m = spec.base_index(c);
    if (m != c) tensor.data.row(c) = -tensor.data.row(m);
    auto& meta = tensor.channels[static_cast<std::size_t>(c)];
    meta.center_frequency = spec.center_frequency(c);
    meta.zeroed = options.aliasing_reduction && is_aliased(meta.center_frequency, frame.fs);
  }
  return tensor;
}

WeightTensor reduce_aliasing(WeightTensor tensor, double fs) {
  for (Index o = 0; o < tensor.out_channels; ++o) {
    auto& meta = tensor.channels[static_cast<std::size_t>(o)];
    if (!is_aliased(meta.center_frequency, fs)) continue;
    meta.zeroed = true;
    for (Index i = 0; i < tensor.in_channels; ++i) tensor.row(i, o).setZero();
  }
  return tensor;
}

void write_weights(const std::string& bin_path, const std::string& sidecar_path,
                   const WeightTensor& tensor, const FrameParams& frame) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot open '" + bin_path + "' for writing");
  for (Index r = 0; r < tensor.data.rows(); ++r) {
    for (Index c = 0; c < tensor.data.cols(); ++c) {
      auto bits = std::bit_cast<std::uint64_t>(tensor.data(r, c));
      unsigned char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
      bin.write(reinterpret_cast<const char*>(bytes), 8);
    }
  }
  if (!bin) throw Error("failed writing '" + bin_path + "'");

  nlohmann::json channels = nlohmann::json::array();
  for (const auto& meta : tensor.channels) {
    channels.push_back({{"center_frequency", detail::to_hexfloat(meta.center_frequency)},
                        {"center_frequency_hz", meta.center_frequency},
                        {"zeroed", meta.zeroed}});
  }
  nlohmann::json doc{{"format", "sfi-weights"},
                     {"dtype", "float64-le"},
                     {"layout", {"in", "out", "tap"}},
                     {"shape", {tensor.in_channels, tensor.out_channels, tensor.taps}},
                     {"fs", detail::to_hexfloat(tensor.fs)},
                     {"fs_hz", tensor.fs},
                     {"kernel_size", frame.kernel_size},
                     {"stride", frame.stride},
                     {"channels", std::move(channels)}};
  std::ofstream side(sidecar_path);
  if (!side) throw Error("cannot open '" + sidecar_path + "' for writing");
  side << doc.dump(1) << '\n';
  if (!side) throw Error("failed writing '" + sidecar_path + "'");
}

WeightTensor read_weights(const std::string& bin_path, const std::string& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw Error("cannot open '" + sidecar_path + "'");
  std::stringstream text;
  text << side.rdbuf();
  WeightTensor tensor;
  try {
    const auto doc = nlohmann::json::parse(text.str());
    const auto& shape = doc.at("shape");
    tensor.in_channels = shape.at(0).get<Index>();
    tensor.out_channels = shape.at(1).get<Index>();
    tensor.taps = shape.at(2).get<Index>();
    tensor.fs = detail::from_hexfloat(doc.at("fs").get<std::string>());
    for (const auto& c : doc.at("channels")) {
      tensor.channels.push_back(
          {detail::from_hexfloat(c.at("center_frequency").get<std::string>()), c.at("zeroed").get<bool>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("weight sidecar: ") + e.what());
  }
  if (static_cast<Index>(tensor.channels.size()) != tensor.out_channels)
    throw Error("weight sidecar: channel metadata does not match shape");

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot open '" + bin_path + "'");
  tensor.data.resize(tensor.in_channels * tensor.out_channels, tensor.taps);
  for (Index r = 0; r < tensor.data.rows(); ++r) {
    for (Index c = 0; c < tensor.data.cols(); ++c) {
      unsigned char bytes[8];
      if (!bin.read(reinterpret_cast<char*>(bytes), 8)) throw Error("weight binary is truncated");
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      tensor.data(r, c) = std::bit_cast<double>(bits);
    }
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw Error("weight binary has trailing data");
  return tensor;
}

}  // namespace sfi
