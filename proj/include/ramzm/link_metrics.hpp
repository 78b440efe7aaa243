#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "ramzm/device_models.hpp"
#include "ramzm/error.hpp"
#include "ramzm/link_params.hpp"
#include "ramzm/numeric_oracle.hpp"
#include "ramzm/units.hpp"

namespace ramzm {

/// Where expansion coefficients come from. `Analytic` uses the closed forms
/// (and therefore rejects lossy rings and unequal arms); `Numeric` always goes
/// through the finite-difference oracle.
enum class CoefficientSource { Analytic, Numeric };

/// Finite-difference step matched to the analyticity radius of T(theta_mod).
inline double default_fd_step(const BiasPoint& bias, Drive drive) {
  return std::clamp(expansion_radius(bias, drive) / 20.0, 1e-4, 1e-2);
}

/// gamma0..gamma4 for any modulator family.
inline TaylorCoefficients modulator_coefficients(const BiasPoint& bias, Drive drive,
                                                 CoefficientSource src = CoefficientSource::Analytic) {
  if (!is_ramzm(drive)) {
    validate(bias);
    return mzm_taylor_coefficients(bias.phi_bias, drive);
  }
  if (src == CoefficientSource::Numeric)
    return finite_diff_coeffs(bias, drive, 4, default_fd_step(bias, drive));
  return taylor_coefficients(bias);
}

/// V_pi as seen from the source: the voltage that produces pi of theta_mod.
inline double effective_v_pi(const ModulatorSpec& mod) {
  return mod.v_pi / drive_voltage_gain(mod.drive);
}

/// s = dP_out/dv_m * R_s (W/V), at the modulator output, before the channel.
inline double slope_efficiency(const TaylorCoefficients& g, const ModulatorSpec& mod,
                               const LinkParams& link) {
  return kPi * std::fabs(g.gamma1) * link.p_laser * link.r_source /
         (effective_v_pi(mod) * mod.insertion_loss);
}

inline double slope_efficiency(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                               CoefficientSource src = CoefficientSource::Analytic) {
  return slope_efficiency(modulator_coefficients(bias, mod.drive, src), mod, link);
}

/// Small-signal link gain G = G_M * G_ch^2 * G_det, with G_M = s^2 / R_s and
/// G_det = r_d^2 R_L.
inline double link_gain(const TaylorCoefficients& g, const ModulatorSpec& mod, const LinkParams& link) {
  const double s = slope_efficiency(g, mod, link);
  const double g_m = s * s / link.r_source;
  const double g_ch = link.channel_gain();
  const double g_det = link.responsivity * link.responsivity * link.r_load;
  return g_m * g_ch * g_ch * g_det;
}

inline double link_gain(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                        CoefficientSource src = CoefficientSource::Analytic) {
  return link_gain(modulator_coefficients(bias, mod.drive, src), mod, link);
}

/// Gain normalization used when referring noise to the input.
///
/// `ClosedForm` is the small-signal expression above. `AvailablePower` takes
/// G_M as (output optical amplitude)^2 over the available source power
/// v_m^2 / (4 R_s), which is 4x the closed form; it is what reproduces the
/// reference dynamic-range figures and is the default for SFDR.
enum class GainConvention { ClosedForm, AvailablePower };

inline const char* to_string(GainConvention c) {
  return c == GainConvention::ClosedForm ? "closed-form" : "available-power";
}

inline double convention_factor(GainConvention c) {
  return c == GainConvention::AvailablePower ? 4.0 : 1.0;
}

/// Mean photocurrent I_D = r_d P_I T(0) / (L L_ch).
inline double avg_photocurrent(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link) {
  validate(bias);
  double t0;
  if (!is_ramzm(mod.drive) || (bias.alpha == 1.0 && bias.psi_path == 0.0)) {
    t0 = 0.5 * (1.0 + std::cos(bias.phi_bias));
  } else {
    t0 = transmission(0.0, bias);
  }
  return link.responsivity * link.p_laser * t0 / (mod.insertion_loss * link.channel_loss);
}

struct NoiseDensities {
  double rin = 0;              // A^2/Hz
  double shot = 0;             // A^2/Hz
  double thermal_load = 0;     // W/Hz
  double modulator_input = 0;  // W/Hz, equivalent input noise of the electrode
  double modulator_bandwidth_hz = 0;
};

inline NoiseDensities noise_densities(double photocurrent, const ModulatorSpec& mod,
                                      const LinkParams& link) {
  NoiseDensities n;
  n.rin = 0.5 * photocurrent * photocurrent * link.rin;
  n.shot = 2.0 * constants::kElementaryCharge * photocurrent;
  n.thermal_load = link.kt();
  n.modulator_input = link.kt();
  n.modulator_bandwidth_hz = 1.0 / (kPi * (link.r_source + 2.0 * mod.electrode_r) * mod.electrode_c);
  return n;
}

inline NoiseDensities noise_densities(const BiasPoint& bias, const ModulatorSpec& mod,
                                      const LinkParams& link) {
  return noise_densities(avg_photocurrent(bias, mod, link), mod, link);
}

enum class Matching { LossyMatch, Transformer };

struct NfOptions {
  Matching matching = Matching::LossyMatch;
  GainConvention convention = GainConvention::ClosedForm;
  bool include_modulator_noise = false;
};

/// Detector noise power density delivered to the load (W/Hz) for a matching scheme.
inline double detector_noise_power(const NoiseDensities& n, const LinkParams& link, Matching matching) {
  const double csd = n.rin + n.shot;
  if (matching == Matching::Transformer) {
    if (!link.transformer_turns)
      throw Error(ErrorKind::InvalidArgument, "transformer matching needs transformer_turns");
    const double nd = *link.transformer_turns;
    return nd * nd * link.r_source * csd;
  }
  return 0.25 * link.r_load * csd;
}

/// Noise factor F = 1 + N_det / (kT G) + 1/G. Zero gain gives +inf.
inline double noise_factor(double gain, double detector_noise_w_hz, double kt) {
  if (!(gain > 0)) return kInf;
  return 1.0 + detector_noise_w_hz / (kt * gain) + 1.0 / gain;
}

inline double noise_figure_db(double gain, double detector_noise_w_hz, double kt) {
  return to_db(noise_factor(gain, detector_noise_w_hz, kt));
}

inline double noise_figure(const TaylorCoefficients& g, const BiasPoint& bias, const ModulatorSpec& mod,
                           const LinkParams& link, const NfOptions& opt = {}) {
  const double gain = link_gain(g, mod, link) * convention_factor(opt.convention);
  const auto n = noise_densities(bias, mod, link);
  double f = noise_factor(gain, detector_noise_power(n, link, opt.matching), link.kt());
  if (opt.include_modulator_noise && std::isfinite(f))
    f += std::min(1.0, n.modulator_bandwidth_hz / link.bandwidth_hz);
  return to_db(f);
}

/// Link noise figure in dB; +inf when the bias kills the small-signal gain.
inline double noise_figure(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                           const NfOptions& opt = {},
                           CoefficientSource src = CoefficientSource::Analytic) {
  return noise_figure(modulator_coefficients(bias, mod.drive, src), bias, mod, link, opt);
}

/// Output noise power density N_out = G kT F (W/Hz).
inline double output_noise_density(double gain, double nf_db, double kt) {
  if (!std::isfinite(nf_db)) return gain > 0 ? kInf : kt;  // no gain: load noise only
  return gain * kt * from_db(nf_db);
}

struct LumpedReflection {
  std::complex<double> gamma;
  double gamma_mag = 0;
  double v_gain = 1;
};

/// Reflection of a series r_M + C_M electrode terminating a line of impedance z0.
inline LumpedReflection lumped_reflection(const ModulatorSpec& mod, double z0, double omega) {
  if (!(omega > 0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  if (!(z0 > 0)) throw Error(ErrorKind::InvalidArgument, "z0 must be positive");
  const std::complex<double> zm(mod.electrode_r, -1.0 / (omega * mod.electrode_c));
  LumpedReflection r;
  r.gamma = (zm - z0) / (zm + z0);
  r.gamma_mag = std::abs(r.gamma);
  r.v_gain = 1.0 + r.gamma_mag;
  return r;
}

}  // namespace ramzm
