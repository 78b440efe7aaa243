#pragma once

#include <optional>

#include "ramzm/device_models.hpp"
#include "ramzm/error.hpp"
#include "ramzm/units.hpp"

namespace ramzm {

/// End-to-end link constants, all in linear SI units.
struct LinkParams {
  double p_laser = 0.019952623149688795;  // W (13 dBm)
  double rin = 3.1622776601683795e-15;    // 1/Hz (-145 dB/Hz)
  double r_source = 50.0;                 // ohm
  double r_load = 50.0;                   // ohm
  double responsivity = 1.1;              // A/W
  double channel_loss = 1.0;              // linear, >= 1
  double bandwidth_hz = 1.0;
  double temperature_k = constants::kStandardTemperature;
  std::optional<double> transformer_turns;
  double pd_sat_current = 15.5e-3;  // A

  double kt() const { return constants::kBoltzmann * temperature_k; }
  double channel_gain() const { return 1.0 / channel_loss; }

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

inline void validate(const LinkParams& link) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
  };
  positive(link.p_laser, "p_laser");
  positive(link.rin, "rin");
  positive(link.r_source, "r_source");
  positive(link.r_load, "r_load");
  positive(link.responsivity, "responsivity");
  positive(link.bandwidth_hz, "bandwidth_hz");
  positive(link.temperature_k, "temperature_k");
  positive(link.pd_sat_current, "pd_sat_current");
  if (!(link.channel_loss >= 1))
    throw Error(ErrorKind::InvalidArgument, "channel_loss must be >= 1 (linear)");
  if (link.transformer_turns && !(*link.transformer_turns > 0))
    throw Error(ErrorKind::InvalidArgument, "transformer_turns must be positive");
}

// Reference configuration: 13 dBm laser, -145 dB/Hz RIN, 5 V V_pi, 10 dB
// insertion loss, 50 ohm source and load, 1.1 A/W, 1 Hz bandwidth.
inline LinkParams reference_link() { return LinkParams{}; }

inline ModulatorSpec reference_modulator(Drive drive = Drive::RamzmMatched) {
  ModulatorSpec mod;
  mod.drive = drive;
  return mod;
}

namespace bias_presets {
/// Third-order null: quadrature arms, anti-resonant rings, tau = 1/2.
inline BiasPoint linearized() { return {kPi / 2, kPi, 0.5, 1.0, 0.0}; }
/// Gain-enhanced: rings on resonance, gamma1 = 3 at tau = 1/2.
inline BiasPoint gain_enhanced() { return {kPi / 2, 0.0, 0.5, 1.0, 0.0}; }
/// MZMs only read phi_bias.
inline BiasPoint quadrature() { return {kPi / 2, kPi, 0.5, 1.0, 0.0}; }
}  // namespace bias_presets

}  // namespace ramzm
