#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "ramzm/device_models.hpp"
#include "ramzm/error.hpp"
#include "ramzm/link_metrics.hpp"
#include "ramzm/link_params.hpp"
#include "ramzm/numeric_oracle.hpp"
#include "ramzm/units.hpp"

namespace ramzm {

/// Threshold on the third-order bracket below which the bias is treated as
/// sitting on the third-order null.
inline constexpr double kThirdOrderNullEps = 1e-9;

/// Relative threshold for treating a numerically estimated coefficient as zero.
inline constexpr double kCoefficientNullRel = 1e-9;

struct TonePowers {
  double p_fund = 0;  // W, per tone
  double p_im2 = 0;   // W, at f2 - f1
  double p_im3 = 0;   // W, at 2f1 - f2
};

/// Small-signal two-tone output powers from the expansion coefficients.
/// Amplitudes in theta_mod: fundamental |g1| A, f2 - f1 |g2| A^2, 2f1 - f2
/// (3/4)|g3| A^3; each detected into the matched load like the simulator does.
inline TonePowers tone_powers(const ToneStimulus& stim, const TaylorCoefficients& g,
                              const ModulatorSpec& mod, const LinkParams& link) {
  validate(stim);
  const double a = stim.theta_amplitude() * drive_voltage_gain(mod.drive);
  TonePowers p;
  p.p_fund = detected_power(std::fabs(g.gamma1) * a, mod, link);
  p.p_im2 = detected_power(std::fabs(g.gamma2) * a * a, mod, link);
  p.p_im3 = detected_power(0.75 * std::fabs(g.gamma3) * a * a * a, mod, link);
  return p;
}

inline TonePowers tone_powers(const ToneStimulus& stim, const BiasPoint& bias, const ModulatorSpec& mod,
                              const LinkParams& link, CoefficientSource src = CoefficientSource::Analytic) {
  return tone_powers(stim, modulator_coefficients(bias, mod.drive, src), mod, link);
}

namespace detail {

// gamma1 / gamma3 of the raised-cosine MZM does not depend on the bias.
inline double mzm_ratio13(Drive drive) {
  const auto g = mzm_taylor_coefficients(kPi / 2, drive);
  return g.gamma1 / g.gamma3;
}

}  // namespace detail

/// Input third-order intercept (W). Infinite on the third-order null.
inline double iip3(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                   CoefficientSource src = CoefficientSource::Analytic) {
  const double vpi = effective_v_pi(mod);
  if (!is_ramzm(mod.drive)) {
    validate(bias);
    return 2.0 * vpi * vpi * std::fabs(detail::mzm_ratio13(mod.drive)) /
           (3.0 * kPi * kPi * link.r_source);
  }
  if (src == CoefficientSource::Analytic) {
    taylor_coefficients(bias);  // validates alpha and the arm mismatch
    const double b = ring_denominator(bias.theta_dc, bias.tau);
    const double d = third_order_bracket(bias.theta_dc, bias.tau);
    if (std::fabs(d) < kThirdOrderNullEps) return kInf;
    return 2.0 * vpi * vpi * b * b / (kPi * kPi * link.r_source * std::fabs(d));
  }
  const auto g = modulator_coefficients(bias, mod.drive, src);
  if (std::fabs(g.gamma3) <= kCoefficientNullRel * std::fabs(g.gamma1)) return kInf;
  return 2.0 * vpi * vpi * std::fabs(g.gamma1) / (3.0 * kPi * kPi * link.r_source * std::fabs(g.gamma3));
}

/// Input second-order intercept (W); infinite at quadrature.
inline double iip2(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                   CoefficientSource src = CoefficientSource::Analytic) {
  const double vpi = effective_v_pi(mod);
  const auto g = modulator_coefficients(bias, mod.drive, src);
  const double tol = src == CoefficientSource::Numeric ? kCoefficientNullRel * std::fabs(g.gamma1) : 0.0;
  if (std::fabs(g.gamma2) <= tol || std::fabs(std::cos(bias.phi_bias)) < 1e-12) return kInf;
  if (is_ramzm(mod.drive) && src == CoefficientSource::Analytic) {
    const double b = ring_denominator(bias.theta_dc, bias.tau);
    const double m = bias.tau * bias.tau - 1.0;
    const double t = std::tan(bias.phi_bias);
    return vpi * vpi * b * b * t * t / (2.0 * kPi * kPi * link.r_source * m * m);
  }
  return vpi * vpi * g.gamma1 * g.gamma1 / (2.0 * kPi * kPi * link.r_source * g.gamma2 * g.gamma2);
}

/// Input fifth-order intercept (W) from the oracle's order-separated growth
/// of the strongest in-band fifth-order product.
inline double iip5(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link) {
  const auto c = spur_coefficients(bias, mod.drive);
  return intercept_from_growth(c.fund, c.dominant_im5(), 5, link.r_source, effective_v_pi(mod));
}

inline double oip(double iip_w, double gain) { return iip_w * gain; }

enum class LimitingOrder { Second, Third, Fifth, Undefined };

inline const char* to_string(LimitingOrder o) {
  switch (o) {
    case LimitingOrder::Second: return "second";
    case LimitingOrder::Third: return "third";
    case LimitingOrder::Fifth: return "fifth";
    case LimitingOrder::Undefined: return "undefined";
  }
  return "undefined";
}

inline int order_number(LimitingOrder o) {
  switch (o) {
    case LimitingOrder::Second: return 2;
    case LimitingOrder::Third: return 3;
    case LimitingOrder::Fifth: return 5;
    case LimitingOrder::Undefined: return 0;
  }
  return 0;
}

enum class SfdrMethod { Intercept, TwoTone };

inline const char* to_string(SfdrMethod m) { return m == SfdrMethod::Intercept ? "intercept" : "two-tone"; }

struct SfdrOptions {
  SfdrMethod method = SfdrMethod::Intercept;
  GainConvention convention = GainConvention::AvailablePower;
  Matching matching = Matching::LossyMatch;
  bool include_modulator_noise = false;
  CoefficientSource source = CoefficientSource::Analytic;
};

struct SfdrResult {
  double sfdr_db = -kInf;
  LimitingOrder limiting_order = LimitingOrder::Undefined;
  double sfdr2_db = kInf;
  double sfdr3_db = kInf;
  double sfdr5_db = kInf;
  double nf_db = kInf;             // NF under the chosen gain convention
  double input_noise_w = kInf;     // kT * bandwidth * F
};

/// (n-1)/n * 10 log10(IIPn / N_in).
inline double sfdr_from_intercept(double iip_w, double input_noise_w, int order) {
  if (!(input_noise_w < kInf)) return -kInf;
  if (iip_w == kInf) return kInf;
  return (order - 1.0) / order * to_db(iip_w / input_noise_w);
}

/// SFDR from already-computed intercepts: the smallest of the second-,
/// third- and fifth-order ranges, whichever spur reaches the noise floor first.
inline SfdrResult sfdr_from_intercepts(double iip2_w, double iip3_w, double iip5_w, double nf_db,
                                       const LinkParams& link) {
  SfdrResult r;
  r.nf_db = nf_db;
  r.input_noise_w = std::isfinite(nf_db) ? link.kt() * link.bandwidth_hz * from_db(nf_db) : kInf;
  r.sfdr2_db = sfdr_from_intercept(iip2_w, r.input_noise_w, 2);
  r.sfdr3_db = sfdr_from_intercept(iip3_w, r.input_noise_w, 3);
  r.sfdr5_db = sfdr_from_intercept(iip5_w, r.input_noise_w, 5);
  if (!(r.input_noise_w < kInf)) return r;
  const std::array<std::pair<double, LimitingOrder>, 3> cand = {{{r.sfdr2_db, LimitingOrder::Second},
                                                                 {r.sfdr3_db, LimitingOrder::Third},
                                                                 {r.sfdr5_db, LimitingOrder::Fifth}}};
  for (const auto& [v, o] : cand) {
    if (v < r.sfdr_db || r.limiting_order == LimitingOrder::Undefined) {
      if (v == kInf) continue;
      r.sfdr_db = v;
      r.limiting_order = o;
    }
  }
  if (r.limiting_order == LimitingOrder::Undefined) r.sfdr_db = kInf;
  return r;
}

/// Direct two-tone SFDR: raises the stimulus until the strongest spur,
/// referred to the input through the simulated fundamental gain, reaches the
/// input noise floor; SFDR is then P_in / N_in at that point.
inline SfdrResult sfdr_two_tone(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                                double nf_db) {
  SfdrResult r;
  r.nf_db = nf_db;
  if (!std::isfinite(nf_db)) return r;
  r.input_noise_w = link.kt() * link.bandwidth_hz * from_db(nf_db);
  const double vpi = effective_v_pi(mod);
  const double r_s = link.r_source;

  struct Probe {
    double excess;  // input-referred spur over noise floor, dB
    Product worst;
  };
  auto probe = [&](double theta) {
    const auto x = two_tone_simulate(ToneStimulus::from_theta_amplitude(theta / drive_voltage_gain(mod.drive),
                                                                        mod.v_pi),
                                     bias, mod, link);
    const double p_in = input_power_for_theta(theta, r_s, vpi);
    const double fund = x.power(Product::F1);
    Probe pr{-kInf, Product::Im3Low};
    for (Product p : {Product::Im2Diff, Product::Im3Low, Product::Im3High, Product::Im5Low, Product::Im5High}) {
      const double ref = fund > 0 ? x.power(p) * p_in / fund : kInf;
      const double e = to_db(ref / r.input_noise_w);
      if (e > pr.excess) pr = {e, p};
    }
    return pr;
  };

  const double theta_max = std::min(1.0, 0.9 * expansion_radius(bias, mod.drive));
  double lo = theta_for_input_power(r.input_noise_w, r_s, vpi);
  if (!(lo < theta_max)) return r;
  // step up 0.25 dB in power (theta * 10^(0.25/20)) until the first crossing
  const double step = std::pow(10.0, 0.25 / 20.0);
  double hi = lo;
  Probe ph = probe(hi);
  while (ph.excess < 0) {
    lo = hi;
    hi *= step;
    if (hi > theta_max) {
      r.sfdr_db = kInf;
      return r;
    }
    ph = probe(hi);
  }
  for (int i = 0; i < 60 && hi / lo > 1 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    const Probe pm = probe(mid);
    if (pm.excess < 0) lo = mid;
    else { hi = mid; ph = pm; }
  }
  r.sfdr_db = to_db(input_power_for_theta(hi, r_s, vpi) / r.input_noise_w);
  // Label by measured growth, not by bin: on the third-order null the
  // 2f1 - f2 spur grows at fifth order. Input-referred spurs rise n dB per dB.
  const double growth = ph.excess - probe(hi / std::pow(10.0, 1.0 / 20.0)).excess;
  r.limiting_order = growth < 2.5 ? LimitingOrder::Second : growth < 4.0 ? LimitingOrder::Third : LimitingOrder::Fifth;
  return r;
}

/// Derived link figures at one bias point.
struct LinkMetrics {
  double slope_efficiency = 0;       // W/V
  double gain_linear = 0;            // closed-form small-signal gain
  double gain_available = 0;         // available-power convention
  double avg_photocurrent = 0;       // A
  NoiseDensities noise;
  double noise_out_w_per_hz = 0;
  double nf_db = kInf;               // closed-form convention
  double iip2_w = kInf;
  double iip3_w = kInf;
  double iip5_w = kInf;
  SfdrResult sfdr;                   // under the options' convention and method
  double sfdr_closed_form_db = -kInf;  // intercept method, closed-form gain

  double sfdr_db() const { return sfdr.sfdr_db; }
  LimitingOrder limiting_order() const { return sfdr.limiting_order; }
  double oip2_w() const { return oip(iip2_w, gain_linear); }
  double oip3_w() const { return oip(iip3_w, gain_linear); }
};

inline LinkMetrics compute_link_metrics(const BiasPoint& bias, const ModulatorSpec& mod,
                                        const LinkParams& link, const SfdrOptions& opt = {}) {
  validate(mod);
  validate(link);
  const auto g = modulator_coefficients(bias, mod.drive, opt.source);
  LinkMetrics m;
  m.slope_efficiency = slope_efficiency(g, mod, link);
  m.gain_linear = link_gain(g, mod, link);
  m.gain_available = m.gain_linear * convention_factor(GainConvention::AvailablePower);
  m.avg_photocurrent = avg_photocurrent(bias, mod, link);
  m.noise = noise_densities(m.avg_photocurrent, mod, link);

  NfOptions nf{opt.matching, GainConvention::ClosedForm, opt.include_modulator_noise};
  m.nf_db = noise_figure(g, bias, mod, link, nf);
  m.noise_out_w_per_hz = output_noise_density(m.gain_linear, m.nf_db, link.kt());

  m.iip2_w = iip2(bias, mod, link, opt.source);
  m.iip3_w = iip3(bias, mod, link, opt.source);
  m.iip5_w = iip5(bias, mod, link);

  m.sfdr_closed_form_db = sfdr_from_intercepts(m.iip2_w, m.iip3_w, m.iip5_w, m.nf_db, link).sfdr_db;

  nf.convention = opt.convention;
  const double nf_sfdr = noise_figure(g, bias, mod, link, nf);
  m.sfdr = opt.method == SfdrMethod::Intercept ? sfdr_from_intercepts(m.iip2_w, m.iip3_w, m.iip5_w, nf_sfdr, link)
                                               : sfdr_two_tone(bias, mod, link, nf_sfdr);
  return m;
}

/// SFDR alone, skipping the unused figures.
inline SfdrResult sfdr(const BiasPoint& bias, const ModulatorSpec& mod, const LinkParams& link,
                       const SfdrOptions& opt = {}) {
  const auto g = modulator_coefficients(bias, mod.drive, opt.source);
  const double nf = noise_figure(g, bias, mod, link, {opt.matching, opt.convention, opt.include_modulator_noise});
  if (opt.method == SfdrMethod::TwoTone) return sfdr_two_tone(bias, mod, link, nf);
  return sfdr_from_intercepts(iip2(bias, mod, link, opt.source), iip3(bias, mod, link, opt.source),
                              iip5(bias, mod, link), nf, link);
}

}  // namespace ramzm
