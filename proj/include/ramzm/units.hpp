#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace ramzm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace constants {
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
inline constexpr double kStandardTemperature = 290.0;         // K
}  // namespace constants

// Power-ratio helpers. Core models take linear SI inputs; these are used at the
// reporting edge and by the configuration layer.
inline double to_db(double ratio) {
  if (ratio == kInf) return kInf;
  if (ratio <= 0.0) return -kInf;
  return 10.0 * std::log10(ratio);
}
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double watts_to_dbm(double watts) { return to_db(watts * 1e3); }
inline double dbm_to_watts(double dbm) { return from_db(dbm) * 1e-3; }

}  // namespace ramzm
