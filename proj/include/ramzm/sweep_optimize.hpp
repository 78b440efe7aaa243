#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ramzm/distortion.hpp"
#include "ramzm/link_metrics.hpp"
#include "ramzm/link_params.hpp"

namespace ramzm {

inline constexpr const char* kToolVersion = "0.1.0";

enum class SweepParam { ThetaDc, Tau, PhiBias, PLaser, ChannelLoss, VPi };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::ThetaDc: return "theta_dc";
    case SweepParam::Tau: return "tau";
    case SweepParam::PhiBias: return "phi_bias";
    case SweepParam::PLaser: return "p_laser";
    case SweepParam::ChannelLoss: return "channel_loss";
    case SweepParam::VPi: return "v_pi";
  }
  return "?";
}

enum class Metric { Gain, NF, SFDR, IIP3, IIP2, NoisePSD, Photocurrent };

inline constexpr Metric kAllMetrics[] = {Metric::Gain, Metric::NF,       Metric::SFDR,        Metric::IIP3,
                                         Metric::IIP2, Metric::NoisePSD, Metric::Photocurrent};

// Names double as CSV file stems. Units follow LinkMetrics: gain linear, NF and
// SFDR in dB, intercepts in W, output noise in W/Hz, photocurrent in A.
inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::Gain: return "gain";
    case Metric::NF: return "nf";
    case Metric::SFDR: return "sfdr";
    case Metric::IIP3: return "iip3";
    case Metric::IIP2: return "iip2";
    case Metric::NoisePSD: return "noise_psd";
    case Metric::Photocurrent: return "photocurrent";
  }
  return "?";
}

struct SweepAxis {
  SweepParam param = SweepParam::ThetaDc;
  double start = 0;
  double stop = 1;
  int count = 2;
  // Optional explicit coordinates (e.g. laser powers evenly spaced in dBm);
  // when set they replace the linear spacing and must match start/stop/count.
  std::vector<double> points;

  /// Evenly spaced, both ends exact.
  std::vector<double> values() const {
    if (!points.empty()) return points;
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[i] = start + (stop - start) * i / (count - 1);
    v.back() = stop;
    return v;
  }

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct SweepSpec {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  BiasPoint bias = bias_presets::linearized();
  ModulatorSpec mod;
  LinkParams link;
  std::vector<Metric> metrics = {Metric::Gain, Metric::NF, Metric::SFDR};
  SfdrOptions sfdr;
  std::string timestamp;   // copied verbatim into the grid metadata
  unsigned threads = 0;    // 0: hardware concurrency
};

inline void validate(const SweepSpec& spec) {
  auto check = [](const SweepAxis& a) {
    if (a.count < 2) throw Error(ErrorKind::InvalidArgument, std::string("axis ") + to_string(a.param) + ": count must be >= 2");
    if (!(a.start < a.stop))
      throw Error(ErrorKind::InvalidArgument, std::string("axis ") + to_string(a.param) + ": start must be < stop");
    if (!a.points.empty() && a.points.size() != static_cast<std::size_t>(a.count))
      throw Error(ErrorKind::InvalidArgument, std::string("axis ") + to_string(a.param) + ": points/count mismatch");
  };
  check(spec.axis1);
  if (spec.axis2) {
    check(*spec.axis2);
    if (spec.axis2->param == spec.axis1.param)
      throw Error(ErrorKind::InvalidArgument, "swept parameters must be distinct");
  }
  if (spec.metrics.empty()) throw Error(ErrorKind::InvalidArgument, "no metrics requested");
}

/// Metric matrices over one or two axes, row-major (axis1 rows, axis2 columns).
/// A 1D sweep has a single column. Cells whose evaluation failed hold NaN and
/// are listed in `cell_errors`.
struct SweepGrid {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  std::vector<double> x1;
  std::vector<double> x2;
  std::map<Metric, std::vector<double>> data;
  std::vector<std::string> cell_errors;
  BiasPoint bias;
  ModulatorSpec mod;
  LinkParams link;
  std::string timestamp;
  std::string tool_version = kToolVersion;

  std::size_t rows() const { return x1.size(); }
  std::size_t cols() const { return x2.empty() ? 1 : x2.size(); }
  double at(Metric m, std::size_t i, std::size_t j = 0) const { return data.at(m).at(i * cols() + j); }

  /// First (row-major) cell holding the largest finite-or-inf value, ignoring NaN.
  std::pair<std::size_t, std::size_t> argmax(Metric m) const {
    const auto& v = data.at(m);
    std::size_t best = v.size();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (std::isnan(v[k])) continue;
      if (best == v.size() || v[k] > v[best]) best = k;
    }
    if (best == v.size()) throw Error(ErrorKind::InvalidArgument, "metric has no valid cells");
    return {best / cols(), best % cols()};
  }
};

inline void apply_param(SweepParam p, double value, BiasPoint& bias, ModulatorSpec& mod, LinkParams& link) {
  switch (p) {
    case SweepParam::ThetaDc: bias.theta_dc = value; break;
    case SweepParam::Tau: bias.tau = value; break;
    case SweepParam::PhiBias: bias.phi_bias = value; break;
    case SweepParam::PLaser: link.p_laser = value; break;
    case SweepParam::ChannelLoss: link.channel_loss = value; break;
    case SweepParam::VPi: mod.v_pi = value; break;
  }
}

/// Requested metrics at one operating point, computing only what they need.
inline std::map<Metric, double> evaluate_metrics(const BiasPoint& bias, const ModulatorSpec& mod,
                                                 const LinkParams& link, const std::vector<Metric>& metrics,
                                                 const SfdrOptions& opt) {
  validate(mod);
  validate(link);
  const auto g = modulator_coefficients(bias, mod.drive, opt.source);
  const NfOptions nf_opt{opt.matching, GainConvention::ClosedForm, opt.include_modulator_noise};
  std::map<Metric, double> out;
  for (Metric m : metrics) {
    switch (m) {
      case Metric::Gain: out[m] = link_gain(g, mod, link); break;
      case Metric::NF: out[m] = noise_figure(g, bias, mod, link, nf_opt); break;
      case Metric::SFDR: out[m] = sfdr(bias, mod, link, opt).sfdr_db; break;
      case Metric::IIP3: out[m] = iip3(bias, mod, link, opt.source); break;
      case Metric::IIP2: out[m] = iip2(bias, mod, link, opt.source); break;
      case Metric::NoisePSD:
        out[m] = output_noise_density(link_gain(g, mod, link), noise_figure(g, bias, mod, link, nf_opt), link.kt());
        break;
      case Metric::Photocurrent: out[m] = avg_photocurrent(bias, mod, link); break;
    }
  }
  return out;
}

namespace detail {

// Runs body(k) for k in [0, n) on up to `threads` workers with a static
// interleaved partition; the result is independent of the partition.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, const Body& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t k = t; k < n; k += threads) body(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline SweepGrid run_sweep(const SweepSpec& spec) {
  validate(spec);
  SweepGrid grid;
  grid.axis1 = spec.axis1;
  grid.axis2 = spec.axis2;
  grid.x1 = spec.axis1.values();
  if (spec.axis2) grid.x2 = spec.axis2->values();
  grid.bias = spec.bias;
  grid.mod = spec.mod;
  grid.link = spec.link;
  grid.timestamp = spec.timestamp;

  const std::size_t n = grid.rows() * grid.cols();
  for (Metric m : spec.metrics) grid.data[m].assign(n, std::nan(""));
  std::vector<std::string> errors(n);
  std::vector<std::map<Metric, double>> cells(n);

  detail::parallel_for(n, spec.threads, [&](std::size_t k) {
    BiasPoint bias = spec.bias;
    ModulatorSpec mod = spec.mod;
    LinkParams link = spec.link;
    apply_param(spec.axis1.param, grid.x1[k / grid.cols()], bias, mod, link);
    if (spec.axis2) apply_param(spec.axis2->param, grid.x2[k % grid.cols()], bias, mod, link);
    try {
      cells[k] = evaluate_metrics(bias, mod, link, spec.metrics, spec.sfdr);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });

  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& [m, v] : cells[k]) grid.data[m][k] = v;
    if (!errors[k].empty())
      grid.cell_errors.push_back(std::to_string(k / grid.cols()) + "," + std::to_string(k % grid.cols()) + ": " +
                                 errors[k]);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Optimization

enum class Objective { MaxSFDR, MaxGain, MinNF };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::MaxSFDR: return "max-sfdr";
    case Objective::MaxGain: return "max-gain";
    case Objective::MinNF: return "min-nf";
  }
  return "?";
}

struct Constraints {
  std::optional<double> min_gain;          // linear
  std::optional<double> max_nf_db;
  std::optional<double> max_photocurrent;  // A
};

struct Interval {
  double lo = 0;
  double hi = 0;
};

struct BiasBounds {
  Interval phi_bias{0.0, kPi};
  Interval theta_dc{0.0, 2.0 * kPi};
  Interval tau{0.05, 0.95};
};

struct OptimizerSettings {
  int phi_points = 17;
  int theta_points = 17;
  int tau_points = 19;
  int levels = 3;
  int refine_points = 5;  // per axis, odd
  int starts = 8;         // best coarse cells refined independently
  unsigned threads = 0;
};

struct OptimizeResult {
  BiasPoint bias;
  LinkMetrics metrics;
  double objective = -kInf;  // in the objective's own units (dB or linear gain)
  double coarse_best = -kInf;
  int evaluations = 0;
};

namespace detail {

inline std::vector<double> axis_points(const Interval& iv, int count) {
  if (iv.hi == iv.lo || count < 2) return {iv.lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = iv.lo + (iv.hi - iv.lo) * i / (count - 1);
  v.back() = iv.hi;
  return v;
}

inline std::vector<double> refine_points(double center, double step, const Interval& iv, int count) {
  if (iv.hi == iv.lo) return {iv.lo};
  std::vector<double> v;
  const int half = count / 2;
  for (int i = -half; i <= half; ++i) {
    const double x = std::clamp(center + i * step, iv.lo, iv.hi);
    if (v.empty() || x != v.back()) v.push_back(x);
  }
  return v;
}

struct Candidate {
  double score = -kInf;  // larger is better
  double objective = -kInf;
  std::array<double, 3> x{};
  bool feasible = false;
};

inline bool better(const Candidate& a, const Candidate& b) {
  if (!a.feasible) return false;
  if (!b.feasible) return true;
  if (a.score != b.score) return a.score > b.score;
  return a.x < b.x;  // lexicographic (phi, theta, tau)
}

}  // namespace detail

/// Grid scan plus bisection refinement over (phi_bias, theta_dc, tau).
/// The non-swept fields of `base` (alpha, psi_path) are kept.
inline OptimizeResult optimize_bias(Objective objective, const Constraints& cons, const BiasBounds& bounds,
                                    const BiasPoint& base, const ModulatorSpec& mod, const LinkParams& link,
                                    const SfdrOptions& sfdr_opt = {}, const OptimizerSettings& cfg = {}) {
  for (const Interval* iv : {&bounds.phi_bias, &bounds.theta_dc, &bounds.tau}) {
    if (!(iv->lo <= iv->hi)) throw Error(ErrorKind::InvalidArgument, "bounds must satisfy lo <= hi");
  }
  if (!(bounds.tau.lo >= 0 && bounds.tau.hi < 1)) throw Error(ErrorKind::InvalidArgument, "tau bounds must lie in [0, 1)");

  std::vector<Metric> needed = {Metric::Gain, Metric::NF, Metric::Photocurrent};
  if (objective == Objective::MaxSFDR) needed.push_back(Metric::SFDR);

  auto evaluate = [&](const std::array<double, 3>& x) {
    detail::Candidate c;
    c.x = x;
    BiasPoint b = base;
    b.phi_bias = x[0];
    b.theta_dc = x[1];
    b.tau = x[2];
    std::map<Metric, double> v;
    try {
      v = evaluate_metrics(b, mod, link, needed, sfdr_opt);
    } catch (const Error&) {
      return c;
    }
    if (cons.min_gain && !(v[Metric::Gain] >= *cons.min_gain)) return c;
    if (cons.max_nf_db && !(v[Metric::NF] <= *cons.max_nf_db)) return c;
    if (cons.max_photocurrent && !(v[Metric::Photocurrent] <= *cons.max_photocurrent)) return c;
    switch (objective) {
      case Objective::MaxSFDR: c.objective = v[Metric::SFDR]; c.score = c.objective; break;
      case Objective::MaxGain: c.objective = v[Metric::Gain]; c.score = c.objective; break;
      case Objective::MinNF: c.objective = v[Metric::NF]; c.score = -c.objective; break;
    }
    c.feasible = !std::isnan(c.score);
    return c;
  };

  auto scan = [&](const std::vector<double>& p, const std::vector<double>& t, const std::vector<double>& u,
                  int& evals) {
    const std::size_t n = p.size() * t.size() * u.size();
    std::vector<detail::Candidate> res(n);
    detail::parallel_for(n, cfg.threads, [&](std::size_t k) {
      const std::size_t iu = k % u.size();
      const std::size_t it = (k / u.size()) % t.size();
      const std::size_t ip = k / (u.size() * t.size());
      res[k] = evaluate({p[ip], t[it], u[iu]});
    });
    evals += static_cast<int>(n);
    return res;
  };
  auto best_of = [](const std::vector<detail::Candidate>& res) {
    detail::Candidate best;
    for (const auto& c : res)
      if (detail::better(c, best)) best = c;
    return best;
  };

  OptimizeResult out;
  auto p = detail::axis_points(bounds.phi_bias, cfg.phi_points);
  auto t = detail::axis_points(bounds.theta_dc, cfg.theta_points);
  auto u = detail::axis_points(bounds.tau, cfg.tau_points);
  auto coarse = scan(p, t, u, out.evaluations);
  std::stable_sort(coarse.begin(), coarse.end(), detail::better);
  if (coarse.empty() || !coarse.front().feasible)
    throw Error(ErrorKind::Infeasible, "no grid point satisfies the constraints");
  auto best = coarse.front();
  out.coarse_best = best.objective;

  // Narrow optima (the third-order null is a thin ridge) can sit next to a
  // coarse cell that is not the incumbent, so several starts are refined.
  const double dp0 = p.size() > 1 ? p[1] - p[0] : 0;
  const double dt0 = t.size() > 1 ? t[1] - t[0] : 0;
  const double du0 = u.size() > 1 ? u[1] - u[0] : 0;
  const std::size_t starts = std::min<std::size_t>(std::max(cfg.starts, 1), coarse.size());
  for (std::size_t sidx = 0; sidx < starts && coarse[sidx].feasible; ++sidx) {
    auto local = coarse[sidx];
    double dp = dp0, dt = dt0, du = du0;
    for (int level = 0; level < cfg.levels; ++level) {
      dp /= 2;
      dt /= 2;
      du /= 2;
      const auto c = best_of(scan(detail::refine_points(local.x[0], dp, bounds.phi_bias, cfg.refine_points),
                                  detail::refine_points(local.x[1], dt, bounds.theta_dc, cfg.refine_points),
                                  detail::refine_points(local.x[2], du, bounds.tau, cfg.refine_points),
                                  out.evaluations));
      if (detail::better(c, local)) local = c;
    }
    if (detail::better(local, best)) best = local;
  }

  out.bias = base;
  out.bias.phi_bias = best.x[0];
  out.bias.theta_dc = best.x[1];
  out.bias.tau = best.x[2];
  out.objective = best.objective;
  out.metrics = compute_link_metrics(out.bias, mod, link, sfdr_opt);
  return out;
}

// ---------------------------------------------------------------------------
// Null biasing

/// Arm bias that draws `target_current` from a laser of power p_laser:
/// phi = arccos(2 L L_ch I / (r_d P_I) - 1). Exact for equal-arm lossless rings.
inline double iso_current_phi(double p_laser, double target_current, const ModulatorSpec& mod,
                              const LinkParams& link) {
  if (!(target_current >= 0)) throw Error(ErrorKind::InvalidArgument, "target current must be >= 0");
  const double arg = 2.0 * mod.insertion_loss * link.channel_loss * target_current /
                         (link.responsivity * p_laser) - 1.0;
  if (arg > 1.0) {
    throw Error(ErrorKind::NoSolution, "laser power too low to reach the target photocurrent at any phi_bias");
  }
  return std::acos(std::max(arg, -1.0));
}

struct IsoCurrentPoint {
  double p_laser = 0;  // W
  double phi_bias = kInf;
  double gain = 0;     // linear, closed form
  double photocurrent = 0;
  bool valid = false;
};

struct NullBiasResult {
  SweepGrid gain;  // axis1 phi_bias, axis2 p_laser
  std::vector<IsoCurrentPoint> curve;
  double target_current = 0;
};

/// Gain over (phi_bias, P_I) at fixed ring bias, plus the curve of constant
/// photocurrent (the photodiode saturation limit by default) and the gain
/// along it.
inline NullBiasResult null_bias_analysis(const LinkParams& link, const ModulatorSpec& mod, const BiasPoint& ring_bias,
                                         const SweepAxis& p_laser_axis, const SweepAxis& phi_axis,
                                         std::optional<double> target_current = std::nullopt,
                                         unsigned threads = 0) {
  NullBiasResult out;
  out.target_current = target_current.value_or(link.pd_sat_current);

  SweepSpec spec;
  spec.axis1 = phi_axis;
  spec.axis1.param = SweepParam::PhiBias;
  spec.axis2 = p_laser_axis;
  spec.axis2->param = SweepParam::PLaser;
  spec.bias = ring_bias;
  spec.mod = mod;
  spec.link = link;
  spec.metrics = {Metric::Gain, Metric::Photocurrent};
  spec.threads = threads;
  out.gain = run_sweep(spec);

  for (double p : p_laser_axis.values()) {
    IsoCurrentPoint pt;
    pt.p_laser = p;
    LinkParams l = link;
    l.p_laser = p;
    try {
      pt.phi_bias = iso_current_phi(p, out.target_current, mod, l);
      BiasPoint b = ring_bias;
      b.phi_bias = pt.phi_bias;
      pt.gain = link_gain(b, mod, l);
      pt.photocurrent = avg_photocurrent(b, mod, l);
      pt.valid = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoSolution) throw;
    }
    out.curve.push_back(pt);
  }
  return out;
}

}  // namespace ramzm
