#pragma once

#include "sfi/analog_filter.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sfi {

/// ERB-number (Glasberg-Moore), E(f) = 21.4 log10(1 + 0.00437 f).
double erb_number(double f);
double erb_number_inverse(double e);

/// n frequencies in [f_min, f_max] whose ERB numbers are uniformly spaced.
/// Both endpoints are returned exactly.
std::vector<double> erb_space(double f_min, double f_max, Index n);

/// An ordered bank of analog gammatone filters.
///
/// Only the independent ("base") filters are stored. When paired, channel
/// m + base_count() is the phase-reversed copy of base channel m, so the
/// constraint f' = f, phi' = phi + pi holds by construction and survives any
/// update of the base parameters.
struct FilterbankSpec {
  std::vector<AnalogFilterParams<double>> base;
  /// Index into the ERB center grid per base filter; -1 when not grid-derived.
  std::vector<int> center_index;
  bool paired = true;

  Index base_count() const { return static_cast<Index>(base.size()); }
  Index size() const { return paired ? 2 * base_count() : base_count(); }
  /// Channel offset between a base filter and its phase-reversed copy (0 when unpaired).
  Index pair_offset() const { return paired ? base_count() : 0; }

  Index base_index(Index channel) const;
  /// +1 for base channels, -1 for phase-reversed copies.
  int polarity(Index channel) const { return base_index(channel) == channel ? 1 : -1; }
  /// Phase added on top of the base phase: 0 or exactly pi.
  double phase_offset(Index channel) const;
  double center_frequency(Index channel) const;
  /// Expanded parameters of one channel (phase-reversed copies carry phi + pi).
  AnalogFilterParams<double> channel(Index channel) const;

  void validate() const;

  friend bool operator==(const FilterbankSpec&, const FilterbankSpec&) = default;
};

/// Center-frequency grid and phase multiplicities of the default bank.
struct BankLayout {
  double f_min = 50.0;
  double f_max = 8000.0;
  /// (number of centers, phases per center), consumed in order from the lowest center.
  std::vector<std::pair<int, int>> groups{{28, 5}, {20, 4}};
  bool paired = true;

  int center_count() const;
  int base_channel_count() const;
};

struct InitOptions {
  std::uint64_t seed = 0;
  /// Random phase offset as a fraction of the grid spacing pi/K; 0 keeps the
  /// deterministic grid k pi / K.
  double phase_jitter = 0.0;
  BankLayout layout{};
};

/// Default 440-channel bank: 48 ERB-spaced centers from 50 to 8000 Hz, 5 phases
/// for the lowest 28 centers and 4 for the rest, plus phase-reversed copies.
FilterbankSpec init_filterbank(const InitOptions& options = {});
FilterbankSpec init_filterbank(std::uint64_t seed);

/// Bank JSON. Doubles are written as hex-float strings so loading reproduces them bit for bit.
std::string to_json(const FilterbankSpec& spec);
FilterbankSpec filterbank_from_json(const std::string& text);
void save_filterbank(const std::string& path, const FilterbankSpec& spec);
FilterbankSpec load_filterbank(const std::string& path);

}  // namespace sfi
