#pragma once

// Brute-force checks that share nothing with the closed forms except the exact
// transfer function: finite-difference expansion coefficients and a
// leakage-free two-tone simulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numeric>
#include <span>
#include <vector>

#include "ramzm/device_models.hpp"
#include "ramzm/error.hpp"
#include "ramzm/link_params.hpp"

namespace ramzm {

namespace detail {

// Sixth-order accurate central stencils for derivatives 1..4, offsets -4..4.
inline constexpr std::array<std::array<long double, 9>, 5> kCentralStencil = {{
    {0, 0, 0, 0, 1, 0, 0, 0, 0},
    {0, -1.0L / 60, 3.0L / 20, -3.0L / 4, 0, 3.0L / 4, -3.0L / 20, 1.0L / 60, 0},
    {0, 1.0L / 90, -3.0L / 20, 3.0L / 2, -49.0L / 18, 3.0L / 2, -3.0L / 20, 1.0L / 90, 0},
    {-7.0L / 240, 3.0L / 10, -169.0L / 120, 61.0L / 30, 0, -61.0L / 30, 169.0L / 120,
     -3.0L / 10, 7.0L / 240},
    {7.0L / 240, -2.0L / 5, 169.0L / 60, -122.0L / 15, 91.0L / 8, -122.0L / 15, 169.0L / 60,
     -2.0L / 5, 7.0L / 240},
}};

inline constexpr long double kFactorial[] = {1, 1, 2, 6, 24};

template <class F>
std::array<long double, 5> series_estimate(const F& f, long double h) {
  std::array<long double, 9> samples{};
  for (int i = -4; i <= 4; ++i) samples[i + 4] = f(i * h);
  std::array<long double, 5> c{};
  for (int k = 0; k <= 4; ++k) {
    long double acc = 0;
    for (int i = 0; i < 9; ++i) acc += kCentralStencil[k][i] * samples[i];
    c[k] = acc / (std::pow(h, static_cast<long double>(k)) * kFactorial[k]);
  }
  return c;
}

}  // namespace detail

/// Expansion coefficients of an arbitrary transfer function T(theta_mod) from
/// central differences, Richardson-extrapolated over {h, h/2}. Evaluated in
/// extended precision; `order` bounds the highest coefficient reported.
template <class F>
TaylorCoefficients finite_diff_coeffs(const F& transfer, int order, double h) {
  if (order < 0 || order > 4) throw Error(ErrorKind::InvalidArgument, "order must be in [0, 4]");
  if (!(h >= 1e-4 && h <= 1e-2)) throw Error(ErrorKind::InvalidArgument, "h must be in [1e-4, 1e-2]");

  auto f = [&](long double x) -> long double { return transfer(x); };
  const auto coarse = detail::series_estimate(f, static_cast<long double>(h));
  const auto fine = detail::series_estimate(f, static_cast<long double>(h) / 2);

  constexpr long double kGain = 64.0L;  // 2^6 for the sixth-order stencils
  long double scale = 0;
  for (int k = 0; k <= order; ++k) scale = std::max(scale, std::fabs(fine[k]));

  double c[5] = {0, 0, 0, 0, 0};
  for (int k = 0; k <= order; ++k) {
    const long double change = std::fabs(fine[k] - coarse[k]);
    const long double ref = std::max(std::fabs(fine[k]), 1e-6L * scale);
    if (change > 1e-3L * ref) {
      throw Error(ErrorKind::StepTooSmall,
                  "coefficient " + std::to_string(k) + " moved by more than 1e-3 between h and h/2; "
                  "the step is mismatched to the curvature of the transfer function");
    }
    c[k] = static_cast<double>((kGain * fine[k] - coarse[k]) / (kGain - 1));
  }
  return TaylorCoefficients::from_series(c);
}

inline TaylorCoefficients finite_diff_coeffs(const BiasPoint& bias, int order, double h = 1e-2) {
  validate(bias);
  const auto ext = bias.as<long double>();
  return finite_diff_coeffs([&](long double x) { return transmission(x, ext); }, order, h);
}

inline TaylorCoefficients finite_diff_coeffs(const BiasPoint& bias, Drive drive, int order,
                                             double h = 1e-2) {
  validate(bias);
  const auto ext = bias.as<long double>();
  return finite_diff_coeffs(
      [&](long double x) { return modulator_transmission(x, ext, drive); }, order, h);
}

// ---------------------------------------------------------------------------
// Two-tone simulation

/// Two equal tones of amplitude v_amp driving the modulator,
/// theta_mod(t) = (pi v_amp / v_pi) [sin(w1 t) + sin(w2 t)].
struct ToneStimulus {
  double v_amp = 0.0;
  double f1 = 0.9e9;
  double f2 = 1.0e9;
  double v_pi = 5.0;

  double theta_amplitude() const { return kPi * v_amp / v_pi; }

  /// Available input power per tone, P_in = V_m^2 / (2 R_s).
  double input_power(double r_source) const { return v_amp * v_amp / (2.0 * r_source); }

  static ToneStimulus from_input_power(double p_in, double r_source, double v_pi,
                                       double f1 = 0.9e9, double f2 = 1.0e9) {
    return {std::sqrt(2.0 * p_in * r_source), f1, f2, v_pi};
  }

  static ToneStimulus from_theta_amplitude(double theta, double v_pi, double f1 = 0.9e9,
                                           double f2 = 1.0e9) {
    return {theta * v_pi / kPi, f1, f2, v_pi};
  }
};

inline void validate(const ToneStimulus& stim) {
  if (!(stim.v_amp > 0)) throw Error(ErrorKind::InvalidArgument, "tone amplitude must be positive");
  if (!(stim.v_pi > 0)) throw Error(ErrorKind::InvalidArgument, "v_pi must be positive");
  if (!(stim.f1 > 0 && stim.f2 > 0) || stim.f1 == stim.f2)
    throw Error(ErrorKind::InvalidArgument, "tone frequencies must be positive and distinct");
  if (!(stim.theta_amplitude() < kPi))
    throw Error(ErrorKind::InvalidArgument, "phase amplitude pi*V_m/V_pi must stay below pi");
}

/// Integer tone grid: f1 = m1 * base, f2 = m2 * base with m1 < m2.
struct ToneGrid {
  int m1 = 9;
  int m2 = 10;
  double base = 0.1e9;
};

/// Smallest integer pair reproducing f1/f2 to 1e-12 (continued fractions).
inline ToneGrid tone_grid(double f1, double f2) {
  const bool swapped = f1 > f2;
  const double lo = swapped ? f2 : f1;
  const double hi = swapped ? f1 : f2;
  const double ratio = lo / hi;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = ratio;
  for (int iter = 0; iter < 64; ++iter) {
    const long a = static_cast<long>(std::floor(x));
    const long p2 = a * p1 + p0;
    const long q2 = a * q1 + q0;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (q1 > 100000) break;
    if (std::fabs(static_cast<double>(p1) / q1 - ratio) <= 1e-12 * ratio) {
      ToneGrid g{static_cast<int>(p1), static_cast<int>(q1), hi / q1};
      if (swapped) std::swap(g.m1, g.m2);
      return g;
    }
    const double frac = x - a;
    if (frac == 0) break;
    x = 1.0 / frac;
  }
  throw Error(ErrorKind::AliasError, "tone frequencies are not commensurate on a small integer grid");
}

/// Intermodulation products tracked by the extractor, as k1*f1 + k2*f2.
enum class Product { F1, F2, Im2Diff, Im2Sum, Im3Low, Im3High, Im3Sum, Im5Low, Im5High };

inline constexpr std::array<Product, 9> kAllProducts = {
    Product::F1,     Product::F2,      Product::Im2Diff, Product::Im2Sum, Product::Im3Low,
    Product::Im3High, Product::Im3Sum, Product::Im5Low,  Product::Im5High};

struct ProductIndex {
  int k1;
  int k2;
  int order;
};

inline constexpr ProductIndex product_index(Product p) {
  switch (p) {
    case Product::F1: return {1, 0, 1};
    case Product::F2: return {0, 1, 1};
    case Product::Im2Diff: return {-1, 1, 2};
    case Product::Im2Sum: return {1, 1, 2};
    case Product::Im3Low: return {2, -1, 3};
    case Product::Im3High: return {-1, 2, 3};
    case Product::Im3Sum: return {2, 1, 3};
    case Product::Im5Low: return {3, -2, 5};
    case Product::Im5High: return {-2, 3, 5};
  }
  return {0, 0, 0};
}

inline const char* to_string(Product p) {
  switch (p) {
    case Product::F1: return "f1";
    case Product::F2: return "f2";
    case Product::Im2Diff: return "f2-f1";
    case Product::Im2Sum: return "f1+f2";
    case Product::Im3Low: return "2f1-f2";
    case Product::Im3High: return "2f2-f1";
    case Product::Im3Sum: return "2f1+f2";
    case Product::Im5Low: return "3f1-2f2";
    case Product::Im5High: return "3f2-2f1";
  }
  return "?";
}

/// Extracted tones of one simulation run, indexed like kAllProducts.
/// `amps` are amplitudes of the normalized optical transmission; `powers_w`
/// are the matching average electrical powers delivered to R_L.
struct ToneExtraction {
  std::vector<double> freqs;
  std::vector<double> amps;
  std::vector<int> orders;
  std::vector<std::complex<double>> phasors;
  std::vector<double> powers_w;

  double amp(Product p) const { return amps.at(static_cast<std::size_t>(p)); }
  double power(Product p) const { return powers_w.at(static_cast<std::size_t>(p)); }
  std::complex<double> phasor(Product p) const { return phasors.at(static_cast<std::size_t>(p)); }
};

/// Average RF power in R_L for an optical transmission amplitude `amp`:
/// half the photocurrent reaches the matched load, P = (1/2) (r_d P_o amp / 2)^2 R_L.
inline double detected_power(double amp, const ModulatorSpec& mod, const LinkParams& link) {
  const double optical = link.p_laser / (mod.insertion_loss * link.channel_loss) * amp;
  const double current = 0.5 * link.responsivity * optical;
  return 0.5 * current * current * link.r_load;
}

namespace detail {

inline void check_alias(const ToneGrid& grid, int n_periods, int samples_per_period) {
  if (n_periods < 1 || samples_per_period < 4)
    throw Error(ErrorKind::InvalidArgument, "need at least one period and four samples per period");
  if (2 * grid.m1 - grid.m2 <= 0 && 2 * grid.m2 - grid.m1 <= 0)
    throw Error(ErrorKind::AliasError, "tone grid places third-order products at DC");
  if (2 * std::min(grid.m1, grid.m2) - std::max(grid.m1, grid.m2) <= 0)
    throw Error(ErrorKind::AliasError, "need 2*m_low - m_high > 0 for in-band products");
  if (5 * std::max(grid.m1, grid.m2) >= samples_per_period / 2)
    throw Error(ErrorKind::AliasError, "fifth-order products exceed the Nyquist bin");
}

/// Sampled transmission over an exactly periodic record.
template <std::floating_point Real>
std::vector<Real> sample_record(const BasicBiasPoint<Real>& bias, Drive drive, Real theta_amp,
                                const ToneGrid& grid, int n_periods, int samples_per_period) {
  const int n = n_periods * samples_per_period;
  std::vector<Real> y(static_cast<std::size_t>(n));
  const Real w = Real(2) * std::numbers::pi_v<Real> / Real(samples_per_period);
  for (int i = 0; i < n; ++i) {
    // reduce the phase index modulo the period so long records stay exact
    const Real a1 = w * Real((static_cast<long>(grid.m1) * i) % samples_per_period);
    const Real a2 = w * Real((static_cast<long>(grid.m2) * i) % samples_per_period);
    const Real theta = theta_amp * (std::sin(a1) + std::sin(a2));
    y[static_cast<std::size_t>(i)] = modulator_transmission(theta, bias, drive);
  }
  return y;
}

/// Projection onto one exact tone (2/N) sum y_n e^{-j 2 pi k n / N}.
template <std::floating_point Real>
std::complex<Real> project(std::span<const Real> y, long cycles) {
  const long n = static_cast<long>(y.size());
  const Real w = Real(2) * std::numbers::pi_v<Real> / Real(n);
  std::complex<Real> acc{};
  const long k = ((cycles % n) + n) % n;
  for (long i = 0; i < n; ++i) {
    const Real a = w * Real((k * i) % n);
    acc += y[static_cast<std::size_t>(i)] * std::complex<Real>(std::cos(a), -std::sin(a));
  }
  return acc * (Real(2) / Real(n));
}

}  // namespace detail

/// Drives the exact transmission with a two-tone stimulus and extracts the
/// fundamental and intermodulation tones by projection on the tone basis.
inline ToneExtraction two_tone_simulate(const ToneStimulus& stim, const BiasPoint& bias,
                                        const ModulatorSpec& mod, const LinkParams& link,
                                        int n_periods = 1, int samples_per_period = 256) {
  validate(stim);
  validate(bias);
  const ToneGrid grid = tone_grid(stim.f1, stim.f2);
  detail::check_alias(grid, n_periods, samples_per_period);

  // extended precision keeps fifth-order spurs of small stimuli above the
  // rounding floor of the record
  const long double theta_amp = static_cast<long double>(stim.theta_amplitude()) * drive_voltage_gain(mod.drive);
  const auto y = detail::sample_record<long double>(bias.as<long double>(), mod.drive, theta_amp, grid,
                                                    n_periods, samples_per_period);
  ToneExtraction out;
  for (Product p : kAllProducts) {
    const auto idx = product_index(p);
    const long cycles = static_cast<long>(idx.k1 * grid.m1 + idx.k2 * grid.m2) * n_periods;
    const auto phl = detail::project<long double>(y, cycles);
    const std::complex<double> ph(static_cast<double>(phl.real()), static_cast<double>(phl.imag()));
    out.freqs.push_back(std::fabs(idx.k1 * grid.m1 + idx.k2 * grid.m2) * grid.base);
    out.amps.push_back(std::abs(ph));
    out.orders.push_back(idx.order);
    out.phasors.push_back(ph);
    out.powers_w.push_back(detected_power(std::abs(ph), mod, link));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intercepts

/// Input power where the extrapolated fundamental (slope 1) and order-n
/// (slope n) lines cross. Slopes are verified by least squares first; the
/// intercept then uses the ideal slopes fitted to the same points.
inline double intercept_from_powers(std::span<const double> p_in, std::span<const double> p_fund,
                                    std::span<const double> p_spur, int order) {
  const std::size_t n = p_in.size();
  if (n < 4 || p_fund.size() != n || p_spur.size() != n)
    throw Error(ErrorKind::InvalidArgument, "need at least four matching sweep points");
  if (order < 2) throw Error(ErrorKind::InvalidArgument, "intercept order must be >= 2");

  std::vector<double> x(n), yf(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p_in[i] > 0 && p_fund[i] > 0 && p_spur[i] > 0))
      throw Error(ErrorKind::NotInSmallSignal, "non-positive power in sweep (spur below numerical floor)");
    x[i] = std::log10(p_in[i]);
    yf[i] = std::log10(p_fund[i]);
    ys[i] = std::log10(p_spur[i]);
  }
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  auto slope = [&](const std::vector<double>& y) {
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (x[i] - xm) * (y[i] - ym);
      sxx += (x[i] - xm) * (x[i] - xm);
    }
    if (sxx == 0) throw Error(ErrorKind::InvalidArgument, "sweep powers must differ");
    return sxy / sxx;
  };
  const double s1 = slope(yf);
  const double sn = slope(ys);
  if (std::fabs(s1 - 1.0) > 0.01 || std::fabs(sn - order) > 0.05) {
    throw Error(ErrorKind::NotInSmallSignal,
                "fitted slopes " + std::to_string(s1) + " / " + std::to_string(sn) +
                    " outside small-signal bounds; reduce the stimulus");
  }
  double c1 = 0, cn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    c1 += yf[i] - x[i];
    cn += ys[i] - order * x[i];
  }
  c1 /= n;
  cn /= n;
  return std::pow(10.0, (c1 - cn) / (order - 1));
}

/// Intercept for a sweep of extractions. Picks, among products whose parity
/// matches `order`, the strongest one whose growth rate is `order`; for a
/// third-order null that is the fifth-order content of 2f1 - f2.
inline double intercept_from_sweep(std::span<const ToneExtraction> extractions,
                                   std::span<const double> p_in, int order) {
  if (extractions.size() != p_in.size())
    throw Error(ErrorKind::InvalidArgument, "one input power per extraction required");
  std::vector<double> fund(p_in.size());
  for (std::size_t i = 0; i < p_in.size(); ++i) fund[i] = extractions[i].power(Product::F1);

  double best = -1;
  double best_level = -1;
  std::string last_error = "no product of matching parity";
  for (Product p : kAllProducts) {
    const auto idx = product_index(p);
    if (idx.order < 2 || idx.order > order || (idx.order - order) % 2 != 0) continue;
    std::vector<double> spur(p_in.size());
    for (std::size_t i = 0; i < p_in.size(); ++i) spur[i] = extractions[i].power(p);
    try {
      const double ip = intercept_from_powers(p_in, fund, spur, order);
      if (spur.front() > best_level) {
        best_level = spur.front();
        best = ip;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotInSmallSignal) throw;
      last_error = e.message();
    }
  }
  if (best < 0) throw Error(ErrorKind::NotInSmallSignal, last_error);
  return best;
}

/// Stimulus level in phase amplitude (radians) for a given input power.
inline double theta_for_input_power(double p_in, double r_source, double v_pi) {
  return kPi * std::sqrt(2.0 * p_in * r_source) / v_pi;
}

inline double input_power_for_theta(double theta, double r_source, double v_pi) {
  const double v = theta * v_pi / kPi;
  return v * v / (2.0 * r_source);
}

struct InterceptFit {
  double intercept_w = 0;
  std::vector<double> p_in;
  std::vector<ToneExtraction> extractions;
  double top_theta = 0;  // largest phase amplitude in the accepted sweep
};

/// Intercept with stimulus auto-ranging: a one-decade sweep whose top phase
/// amplitude starts at 1e-2 rad and halves until the slope checks pass.
inline InterceptFit fit_intercept(const BiasPoint& bias, const ModulatorSpec& mod,
                                  const LinkParams& link, int order, double f1 = 0.9e9,
                                  double f2 = 1.0e9, int points = 5) {
  std::string last = "auto-ranging exhausted";
  double top = std::min(1e-2, 0.1 * expansion_radius(bias, mod.drive));
  for (int attempt = 0; attempt < 24; ++attempt, top *= 0.5) {
    InterceptFit fit;
    fit.top_theta = top;
    for (int i = 0; i < points; ++i) {
      const double theta = top * std::pow(10.0, -static_cast<double>(i) / (points - 1));
      const double p = input_power_for_theta(theta, link.r_source, mod.v_pi);
      fit.p_in.push_back(p);
      fit.extractions.push_back(two_tone_simulate(
          ToneStimulus::from_theta_amplitude(theta, mod.v_pi, f1, f2), bias, mod, link));
    }
    try {
      fit.intercept_w = intercept_from_sweep(fit.extractions, fit.p_in, order);
      return fit;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotInSmallSignal) throw;
      last = e.message();
    }
  }
  throw Error(ErrorKind::NotInSmallSignal, last);
}

// ---------------------------------------------------------------------------
// Order separation

/// Small-signal growth coefficients of the two-tone products, separated by
/// order: for phase amplitude A the fundamental grows as fund*A, the f2-f1
/// product as im2*A^2, 2f1-f2 as im3*A^3 + im5_at_im3*A^5 and 3f1-2f2 as
/// im5*A^5 (all as amplitudes of the normalized transmission).
struct SpurCoefficients {
  double fund = 0;
  double im2 = 0;
  double im3 = 0;
  double im5_at_im3 = 0;
  double im5 = 0;

  /// Strongest fifth-order growth among the in-band products.
  double dominant_im5() const { return std::max(im5_at_im3, im5); }
};

namespace detail {

// Solves y(A)/A^p = c0 + c1 u + c2 u^2 (u = A^2) through three levels.
inline std::array<std::complex<long double>, 3> separate(
    const std::array<long double, 3>& amp, const std::array<std::complex<long double>, 3>& y,
    int power) {
  std::array<std::complex<long double>, 3> r;
  std::array<long double, 3> u;
  for (int i = 0; i < 3; ++i) {
    u[i] = amp[i] * amp[i];
    r[i] = y[i] / std::pow(amp[i], static_cast<long double>(power));
  }
  // Newton divided differences
  const auto d01 = (r[1] - r[0]) / (u[1] - u[0]);
  const auto d12 = (r[2] - r[1]) / (u[2] - u[1]);
  const auto d012 = (d12 - d01) / (u[2] - u[0]);
  const auto c2 = d012;
  const auto c1 = d01 - c2 * (u[0] + u[1]);
  const auto c0 = r[0] - c1 * u[0] - c2 * u[0] * u[0];
  return {c0, c1, c2};
}

}  // namespace detail

/// Order-separated growth coefficients from three small two-tone runs in
/// extended precision.
inline SpurCoefficients spur_coefficients(const BiasPoint& bias, Drive drive,
                                          double base_theta = 0.0) {
  validate(bias);
  if (base_theta <= 0) base_theta = std::min(2e-2, 0.1 * expansion_radius(bias, drive));
  const ToneGrid grid{9, 10, 1.0};
  constexpr int kSamples = 256;
  const auto ext = bias.as<long double>();

  const std::array<long double, 3> amp = {base_theta, 1.5L * base_theta, 2.0L * base_theta};
  std::array<std::complex<long double>, 3> fund, im2, im3, im5;
  for (int i = 0; i < 3; ++i) {
    const auto y = detail::sample_record<long double>(ext, drive, amp[i], grid, 1, kSamples);
    fund[i] = detail::project<long double>(y, grid.m1);
    im2[i] = detail::project<long double>(y, grid.m2 - grid.m1);
    im3[i] = detail::project<long double>(y, 2 * grid.m1 - grid.m2);
    im5[i] = detail::project<long double>(y, 3 * grid.m1 - 2 * grid.m2);
  }
  const auto f = detail::separate(amp, fund, 1);
  const auto s2 = detail::separate(amp, im2, 2);
  const auto s3 = detail::separate(amp, im3, 3);
  const auto s5 = detail::separate(amp, im5, 5);
  SpurCoefficients c;
  c.fund = static_cast<double>(std::abs(f[0]));
  c.im2 = static_cast<double>(std::abs(s2[0]));
  c.im3 = static_cast<double>(std::abs(s3[0]));
  c.im5_at_im3 = static_cast<double>(std::abs(s3[1]));
  c.im5 = static_cast<double>(std::abs(s5[0]));
  return c;
}

/// Input intercept of an order-n product growing as spur*A^n against a
/// fundamental growing as fund*A, with A = pi sqrt(2 P_in R_s) / V_pi.
inline double intercept_from_growth(double fund, double spur, int order, double r_source,
                                    double v_pi) {
  if (spur <= 0) return kInf;
  if (fund <= 0) return 0.0;
  const double theta = std::pow(fund / spur, 1.0 / (order - 1));
  return input_power_for_theta(theta, r_source, v_pi);
}

}  // namespace ramzm
