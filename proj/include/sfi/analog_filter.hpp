#pragma once

#include "sfi/types.hpp"

#include <cmath>
#include <numbers>

namespace sfi {

/// Slope of the bandwidth rule b(f) = ERB(f) / 1.57 with respect to f.
inline constexpr double kBandwidthSlope = 1.0 / (9.265 * 1.57);

/// Equivalent rectangular bandwidth in Hz, ERB(f) = 24.7 + f / 9.265.
template <typename Scalar>
Scalar erb(Scalar f) {
  if (!(f >= Scalar(0))) throw std::invalid_argument("erb: frequency must be non-negative");
  return Scalar(24.7) + f / Scalar(9.265);
}

template <typename Scalar>
Scalar bandwidth_from_f(Scalar f) {
  return erb(f) / Scalar(1.57);
}

/// Which continuous-time parameters a filter exposes to training.
/// Amplitude, order and bandwidth are never trained.
struct Trainable {
  bool center_frequency = true;
  bool phase = true;

  friend bool operator==(const Trainable&, const Trainable&) = default;
};

/// Continuous-time multi-phase gammatone filter
///
///   g(t) = a t^(p-1) exp(-2 pi b t) cos(2 pi f t + phi),   t >= 0.
///
/// The bandwidth is kept in sync with the center frequency through
/// bandwidth_from_f(); use set_center_frequency() rather than writing both.
template <typename Scalar>
struct AnalogFilterParams {
  Scalar amplitude = Scalar(1);
  int order = 2;
  Scalar bandwidth = bandwidth_from_f(Scalar(0));
  Scalar center_frequency = Scalar(0);
  Scalar phase = Scalar(0);
  Trainable trainable{};

  /// Gammatone with a = 1, p = 2 and the ERB bandwidth rule.
  static AnalogFilterParams mpgtf(Scalar f, Scalar phi, Scalar a = Scalar(1), int p = 2) {
    AnalogFilterParams params;
    params.amplitude = a;
    params.order = p;
    params.phase = phi;
    params.set_center_frequency(f);
    params.validate();
    return params;
  }

  void set_center_frequency(Scalar f) {
    center_frequency = f;
    bandwidth = bandwidth_from_f(f);
  }

  void validate() const {
    if (!(center_frequency >= Scalar(0)))
      throw std::invalid_argument("AnalogFilterParams: center frequency must be >= 0");
    if (!(bandwidth > Scalar(0)))
      throw std::invalid_argument("AnalogFilterParams: bandwidth must be > 0");
    if (!(amplitude > Scalar(0)))
      throw std::invalid_argument("AnalogFilterParams: amplitude must be > 0");
    if (order < 1) throw std::invalid_argument("AnalogFilterParams: order must be >= 1");
  }

  friend bool operator==(const AnalogFilterParams&, const AnalogFilterParams&) = default;
};

/// Partial derivatives of g at a fixed time.
template <typename Scalar>
struct FilterGradient {
  Scalar d_center_frequency = Scalar(0);
  Scalar d_phase = Scalar(0);
};

namespace detail {

template <typename Scalar>
Scalar integer_power(Scalar base, int exponent) {
  Scalar out(1);
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

// Fractional part of f * (t + t_err) in cycles. The rounding error of the
// product is recovered with an fma so that the carrier phase stays accurate
// for long kernels at high center frequencies.
template <typename Scalar>
Scalar reduced_cycles(Scalar f, Scalar t, Scalar t_err) {
  const Scalar hi = f * t;
  const Scalar lo = std::fma(f, t, -hi) + f * t_err;
  const Scalar whole = std::nearbyint(hi);
  return (hi - whole) + lo;
}

template <typename Scalar>
struct Carrier {
  Scalar envelope;  // a t^(p-1) exp(-2 pi b t)
  Scalar cos_term;
  Scalar sin_term;
};

template <typename Scalar>
Carrier<Scalar> carrier(const AnalogFilterParams<Scalar>& params, Scalar t, Scalar t_err) {
  if (!(t >= Scalar(0))) throw std::invalid_argument("gammatone: time must be non-negative");
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar envelope = params.amplitude * integer_power(t, params.order - 1) *
                          std::exp(-two_pi * params.bandwidth * t);
  const Scalar theta = two_pi * reduced_cycles(params.center_frequency, t, t_err) + params.phase;
  return {envelope, std::cos(theta), std::sin(theta)};
}

template <typename Scalar>
Scalar eval_g(const AnalogFilterParams<Scalar>& params, Scalar t, Scalar t_err) {
  const auto c = carrier(params, t, t_err);
  return c.envelope * c.cos_term;
}

template <typename Scalar>
FilterGradient<Scalar> grad_g(const AnalogFilterParams<Scalar>& params, Scalar t, Scalar t_err) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const auto c = carrier(params, t, t_err);
  const Scalar dt = two_pi * (t + t_err);
  FilterGradient<Scalar> out;
  out.d_phase = -c.envelope * c.sin_term;
  out.d_center_frequency =
      c.envelope * (-dt * c.sin_term - dt * Scalar(kBandwidthSlope) * c.cos_term);
  return out;
}

}  // namespace detail

/// Impulse response g(t).
template <typename Scalar>
Scalar eval_g(const AnalogFilterParams<Scalar>& params, Scalar t) {
  return detail::eval_g(params, t, Scalar(0));
}

/// (dg/df, dg/dphi) at time t. The bandwidth is treated as a function of f,
/// so dg/df includes the db/df term.
template <typename Scalar>
FilterGradient<Scalar> grad_g(const AnalogFilterParams<Scalar>& params, Scalar t) {
  return detail::grad_g(params, t, Scalar(0));
}

}  // namespace sfi
