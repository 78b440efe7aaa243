#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <string>

#include "ramzm/error.hpp"
#include "ramzm/units.hpp"

namespace ramzm {

/// Optical operating point of a ring-assisted MZ modulator.
///
/// `phi_bias` is the static phase between the MZ arms, `theta_dc` the ring
/// round-trip bias, `tau` the ring coupler through-transmission and `alpha`
/// the round-trip field survival factor. `psi_path` collects the arm
/// path-length mismatch kn(L2 - L1) into a single phase.
template <std::floating_point Real>
struct BasicBiasPoint {
  Real phi_bias{};
  Real theta_dc{};
  Real tau{};
  Real alpha{1};
  Real psi_path{0};

  /// Coupling coefficient, tau = sqrt(1 - kappa^2).
  Real kappa() const { return std::sqrt(Real(1) - tau * tau); }

  template <std::floating_point Other>
  BasicBiasPoint<Other> as() const {
    return {Other(phi_bias), Other(theta_dc), Other(tau), Other(alpha), Other(psi_path)};
  }

  friend bool operator==(const BasicBiasPoint&, const BasicBiasPoint&) = default;
};

using BiasPoint = BasicBiasPoint<double>;

template <std::floating_point Real>
void validate(const BasicBiasPoint<Real>& bias) {
  if (!std::isfinite(bias.phi_bias) || !std::isfinite(bias.theta_dc) ||
      !std::isfinite(bias.psi_path)) {
    throw Error(ErrorKind::InvalidArgument, "bias angles must be finite");
  }
  if (!(bias.tau >= 0 && bias.tau < 1)) {
    throw Error(ErrorKind::InvalidArgument, "tau must lie in [0, 1)");
  }
  if (!(bias.alpha > 0 && bias.alpha <= 1)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  }
}

enum class Drive { RamzmMatched, RamzmLumped, MzmSingle, MzmPushPull };

inline bool is_ramzm(Drive drive) {
  return drive == Drive::RamzmMatched || drive == Drive::RamzmLumped;
}

/// Voltage-to-phase scale. A lumped electrode at low frequency sees the
/// fully reflected wave (|Gamma_m| ~ 1), doubling the drive voltage.
inline double drive_voltage_gain(Drive drive) { return drive == Drive::RamzmLumped ? 2.0 : 1.0; }

inline const char* to_string(Drive drive) {
  switch (drive) {
    case Drive::RamzmMatched: return "ramzm-matched";
    case Drive::RamzmLumped: return "ramzm-lumped";
    case Drive::MzmSingle: return "mzm-single";
    case Drive::MzmPushPull: return "mzm-push-pull";
  }
  return "unknown";
}

struct ModulatorSpec {
  double v_pi = 5.0;            // V
  double insertion_loss = 10.0; // linear power ratio, >= 1
  double electrode_r = 5.0;     // ohm
  double electrode_c = 200e-15; // F
  Drive drive = Drive::RamzmMatched;

  friend bool operator==(const ModulatorSpec&, const ModulatorSpec&) = default;
};

inline void validate(const ModulatorSpec& mod) {
  if (!(mod.v_pi > 0)) throw Error(ErrorKind::InvalidArgument, "v_pi must be positive");
  if (!(mod.insertion_loss >= 1))
    throw Error(ErrorKind::InvalidArgument, "insertion_loss must be >= 1 (linear)");
  if (!(mod.electrode_r >= 0)) throw Error(ErrorKind::InvalidArgument, "electrode_r must be >= 0");
  if (!(mod.electrode_c > 0)) throw Error(ErrorKind::InvalidArgument, "electrode_c must be positive");
}

/// Coefficients of the output power expansion around the bias point,
///
///   T(theta_mod) = g0/2 - g1*t - g2*t^2 + g3*t^3 + g4*t^4 + O(t^5).
///
/// The sign pattern is fixed; the values carry whatever sign the physics gives.
struct TaylorCoefficients {
  double gamma0 = 0;
  double gamma1 = 0;
  double gamma2 = 0;
  double gamma3 = 0;
  double gamma4 = 0;

  double operator[](int k) const {
    switch (k) {
      case 0: return gamma0;
      case 1: return gamma1;
      case 2: return gamma2;
      case 3: return gamma3;
      case 4: return gamma4;
      default: throw Error(ErrorKind::InvalidArgument, "Taylor order out of range");
    }
  }

  /// Plain power-series coefficient c_k of T(theta_mod) = sum c_k t^k.
  double series(int k) const {
    constexpr double sign[] = {0.5, -1.0, -1.0, 1.0, 1.0};
    return sign[k] * (*this)[k];
  }

  static TaylorCoefficients from_series(const double (&c)[5]) {
    return {2.0 * c[0], -c[1], -c[2], c[3], c[4]};
  }
};

// All-pass ring response a_r(theta) = (tau - alpha e^{-j theta}) / (1 - tau alpha e^{-j theta}).
template <std::floating_point Real>
std::complex<Real> ring_response(Real theta, Real tau, Real alpha) {
  const std::complex<Real> e = std::polar(alpha, -theta);
  return (tau - e) / (Real(1) - tau * e);
}

template <std::floating_point Real>
std::complex<Real> ring_response(Real theta, const BasicBiasPoint<Real>& bias) {
  return ring_response(theta, bias.tau, bias.alpha);
}

/// Phase of the ring response. Uses the two-argument arctangent of the
/// rationalized numerator so the result is exactly arg(ring_response) and is
/// continuous on (0, 2*pi).
template <std::floating_point Real>
Real ring_phase(Real theta, const BasicBiasPoint<Real>& bias) {
  const Real t = bias.tau;
  const Real a = bias.alpha;
  const Real im = a * (Real(1) - t * t) * std::sin(theta);
  const Real re = t * (Real(1) + a * a) - a * (Real(1) + t * t) * std::cos(theta);
  return std::atan2(im, re);
}

/// Output field of the RAMZM for differential drive: upper ring at
/// theta_dc + theta_mod carrying phi_bias, lower ring at theta_dc - theta_mod.
/// The common propagation phase of the lower arm is dropped.
template <std::floating_point Real>
std::complex<Real> output_field(Real theta_mod, const BasicBiasPoint<Real>& bias,
                                std::complex<Real> e_in = Real(1)) {
  const auto upper = ring_response(bias.theta_dc + theta_mod, bias);
  const auto lower = ring_response(bias.theta_dc - theta_mod, bias);
  // |a| e^{-j arg a} == conj(a)
  const auto arm1 = std::polar(Real(1), -(bias.phi_bias - bias.psi_path)) * std::conj(upper);
  const auto arm2 = std::conj(lower);
  return e_in / Real(2) * (arm1 + arm2);
}

/// Power transmission |E_out/E_in|^2 of the RAMZM. The equal-arm lossless case
/// uses the raised-cosine closed form; otherwise the full field superposition.
template <std::floating_point Real>
Real transmission(Real theta_mod, const BasicBiasPoint<Real>& bias) {
  if (bias.alpha == Real(1) && bias.psi_path == Real(0)) {
    const Real phi1 = ring_phase(bias.theta_dc + theta_mod, bias);
    const Real phi2 = ring_phase(bias.theta_dc - theta_mod, bias);
    return Real(0.5) * (Real(1) + std::cos(bias.phi_bias + phi1 - phi2));
  }
  return std::norm(output_field(theta_mod, bias));
}

/// Reference MZM transmission. Single drive puts theta_mod on one arm,
/// push-pull puts +/- theta_mod on both, doubling the differential phase.
template <std::floating_point Real>
Real mzm_transmission(Real theta_mod, Real phi_bias, Drive drive) {
  if (drive == Drive::MzmSingle) return Real(0.5) * (Real(1) + std::cos(phi_bias + theta_mod));
  if (drive == Drive::MzmPushPull)
    return Real(0.5) * (Real(1) + std::cos(phi_bias + Real(2) * theta_mod));
  throw Error(ErrorKind::InvalidArgument, "mzm_transmission needs an MZM drive");
}

/// Transmission of whichever modulator family `drive` selects.
template <std::floating_point Real>
Real modulator_transmission(Real theta_mod, const BasicBiasPoint<Real>& bias, Drive drive) {
  if (is_ramzm(drive)) return transmission(theta_mod, bias);
  return mzm_transmission(theta_mod, bias.phi_bias, drive);
}

/// b = tau^2 - 2 tau cos(theta_dc) + 1, the ring denominator that recurs in
/// every closed form.
inline double ring_denominator(double theta_dc, double tau) {
  return tau * tau - 2.0 * tau * std::cos(theta_dc) + 1.0;
}

/// Bracket that multiplies gamma3; it vanishes on the third-order null
/// (e.g. theta_dc = pi, tau = 1/2).
inline double third_order_bracket(double theta_dc, double tau) {
  const double c = std::cos(theta_dc);
  const double t2 = tau * tau;
  return 2.0 * c * c * t2 + (t2 * tau + tau) * c + 2.0 * t2 * t2 - 8.0 * t2 + 2.0;
}

inline double fourth_order_bracket(double theta_dc, double tau) {
  const double c = std::cos(theta_dc);
  const double t2 = tau * tau;
  return 4.0 * c * c * t2 + 2.0 * c * t2 * tau + t2 * t2 + 2.0 * c * tau - 10.0 * t2 + 1.0;
}

/// Closed-form expansion coefficients of the lossless RAMZM.
///
namespace detail {

// sin/cos of the bias phase with rounding residue removed, so that the double
// nearest pi/2 (or pi) gives exact quadrature (or null) and the coefficients
// that should vanish there are exactly zero.
struct BiasTrig {
  double s, c;
};

inline BiasTrig bias_trig(double phi) {
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(phi));
  double s = std::sin(phi), c = std::cos(phi);
  if (std::fabs(s) <= tol) s = 0.0;
  if (std::fabs(c) <= tol) c = 0.0;
  return {s, c};
}

}  // namespace detail

/// gamma4 carries a factor 1/3 relative to the often-quoted form; the
/// finite-difference oracle and the tau = 0 limit (T = cos^2(theta_mod))
/// both require it.
inline TaylorCoefficients taylor_coefficients(const BiasPoint& bias) {
  validate(bias);
  if (bias.alpha != 1.0) {
    throw Error(ErrorKind::AlphaNotUnity,
                "closed-form coefficients assume lossless rings; use the numeric oracle "
                "(finite_diff_coeffs / --numeric) for alpha < 1");
  }
  if (bias.psi_path != 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "closed-form coefficients assume equal arms; use the numeric oracle for psi_path != 0");
  }
  const double t = bias.tau;
  const double b = ring_denominator(bias.theta_dc, t);
  const double m = t * t - 1.0;
  const auto [s, c] = detail::bias_trig(bias.phi_bias);
  TaylorCoefficients g;
  g.gamma0 = 1.0 + c;
  g.gamma1 = m * s / b;
  g.gamma2 = m * m * c / (b * b);
  g.gamma3 = m * third_order_bracket(bias.theta_dc, t) * s / (3.0 * b * b * b);
  g.gamma4 = m * m * fourth_order_bracket(bias.theta_dc, t) * c / (3.0 * b * b * b * b);
  return g;
}

/// Expansion of the raised-cosine MZM response in the same sign convention.
inline TaylorCoefficients mzm_taylor_coefficients(double phi_bias, Drive drive) {
  double k = 0;
  if (drive == Drive::MzmSingle) k = 1.0;
  else if (drive == Drive::MzmPushPull) k = 2.0;
  else throw Error(ErrorKind::InvalidArgument, "mzm_taylor_coefficients needs an MZM drive");
  const auto [s, c] = detail::bias_trig(phi_bias);
  // 1/2 [1 + cos(phi + k t)] expanded in t.
  return {1.0 + c, 0.5 * k * s, 0.25 * k * k * c, k * k * k * s / 12.0,
          k * k * k * k * c / 48.0};
}

/// Distance from the real axis to the nearest pole of T(theta_mod), i.e. the
/// radius of convergence of the expansion. Infinite for the MZM family.
inline double expansion_radius(const BiasPoint& bias, Drive drive) {
  if (!is_ramzm(drive)) return kInf;
  const double ta = bias.tau * bias.alpha;
  if (ta <= 0.0) return kInf;
  return -std::log(ta);
}

}  // namespace ramzm
