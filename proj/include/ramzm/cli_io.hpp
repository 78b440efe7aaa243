#pragma once

// Configuration parsing, serialization and the command implementations behind
// the ramzm command-line tool. This is the only layer that sees dB values and
// angles in units of pi; everything handed to the models is linear SI.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ramzm/distortion.hpp"
#include "ramzm/error.hpp"
#include "ramzm/link_params.hpp"
#include "ramzm/numeric_oracle.hpp"
#include "ramzm/sweep_optimize.hpp"
#include "ramzm/units.hpp"

namespace ramzm {

using json = nlohmann::ordered_json;

enum class AngleUnit { Pi, Rad };

/// A value with two accepted spellings, e.g. p_laser_dbm / p_laser_w.
/// `alt` selects the first (dB or multiples-of-pi) form.
struct DualValue {
  double value = 0;
  bool alt = true;
  friend bool operator==(const DualValue&, const DualValue&) = default;
};

/// Axis as written in a config: the key names the parameter and its unit.
struct AxisConfig {
  std::string param;  // e.g. "theta_dc_pi", "tau", "p_laser_dbm"
  double start = 0;
  double stop = 1;
  int count = 2;
  friend bool operator==(const AxisConfig&, const AxisConfig&) = default;
};

struct SweepConfig {
  AxisConfig axis1;
  std::optional<AxisConfig> axis2;
  std::vector<std::string> metrics = {"gain", "nf", "sfdr"};
  std::string timestamp;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct ToneConfig {
  double f1_hz = 0.9e9;
  double f2_hz = 1.0e9;
  double p_in_start_dbm = -50;
  double p_in_stop_dbm = -20;
  int points = 7;
  int n_periods = 1;
  int samples_per_period = 256;
  friend bool operator==(const ToneConfig&, const ToneConfig&) = default;
};

struct OptimizeConfig {
  std::string objective = "max-sfdr";
  std::optional<double> min_gain_db;
  std::optional<double> max_nf_db;
  std::optional<double> max_photocurrent_a;
  std::optional<std::array<double, 2>> phi_bias;  // config angle unit
  std::optional<std::array<double, 2>> theta_dc;  // config angle unit
  std::optional<std::array<double, 2>> tau;
  friend bool operator==(const OptimizeConfig&, const OptimizeConfig&) = default;
};

struct NullBiasConfig {
  AxisConfig p_laser{"p_laser_dbm", 10, 30, 21};
  AxisConfig phi_bias{"phi_bias", 0.5, 1.0, 51};  // config angle unit; param name fixed
  std::optional<double> target_current_a;
  friend bool operator==(const NullBiasConfig&, const NullBiasConfig&) = default;
};

/// Everything one run needs, stored as written so that serializing and
/// re-parsing reproduces it exactly.
struct RunConfig {
  // link
  DualValue p_laser{13.0, true};        // dBm | W
  DualValue rin{-145.0, true};          // dB/Hz | 1/Hz
  double r_source = 50;
  double r_load = 50;
  double responsivity = 1.1;
  DualValue channel_loss{0.0, true};    // dB | linear
  double bandwidth_hz = 1;
  double temperature_k = constants::kStandardTemperature;
  std::optional<double> transformer_turns;
  double pd_sat_current = 15.5e-3;
  // modulator
  double v_pi = 5;
  DualValue insertion_loss{10.0, true}; // dB | linear
  double electrode_r = 5;
  double electrode_c = 200e-15;
  Drive drive = Drive::RamzmMatched;
  // bias, in angle_unit
  AngleUnit angle_unit = AngleUnit::Pi;
  double phi_bias = 0.5;
  double theta_dc = 1.0;
  double tau = 0.5;
  double alpha = 1.0;
  double psi_path = 0.0;
  // analysis
  SfdrMethod sfdr_method = SfdrMethod::Intercept;
  GainConvention gain_convention = GainConvention::AvailablePower;
  Matching matching = Matching::LossyMatch;
  bool include_modulator_noise = false;
  // command blocks
  std::optional<SweepConfig> sweep;
  std::optional<ToneConfig> two_tone;
  std::optional<OptimizeConfig> optimize;
  std::optional<NullBiasConfig> null_bias;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  double angle(double v) const { return angle_unit == AngleUnit::Pi ? v * kPi : v; }

  LinkParams link() const {
    LinkParams l;
    l.p_laser = p_laser.alt ? dbm_to_watts(p_laser.value) : p_laser.value;
    l.rin = rin.alt ? from_db(rin.value) : rin.value;
    l.r_source = r_source;
    l.r_load = r_load;
    l.responsivity = responsivity;
    l.channel_loss = channel_loss.alt ? from_db(channel_loss.value) : channel_loss.value;
    l.bandwidth_hz = bandwidth_hz;
    l.temperature_k = temperature_k;
    l.transformer_turns = transformer_turns;
    l.pd_sat_current = pd_sat_current;
    return l;
  }

  ModulatorSpec modulator() const {
    ModulatorSpec m;
    m.v_pi = v_pi;
    m.insertion_loss = insertion_loss.alt ? from_db(insertion_loss.value) : insertion_loss.value;
    m.electrode_r = electrode_r;
    m.electrode_c = electrode_c;
    m.drive = drive;
    return m;
  }

  BiasPoint bias() const { return {angle(phi_bias), angle(theta_dc), tau, alpha, angle(psi_path)}; }

  SfdrOptions sfdr_options(bool numeric) const {
    SfdrOptions o;
    o.method = sfdr_method;
    o.convention = gain_convention;
    o.matching = matching;
    o.include_modulator_noise = include_modulator_noise;
    o.source = numeric ? CoefficientSource::Numeric : CoefficientSource::Analytic;
    return o;
  }
};

// ---------------------------------------------------------------------------
// Enum spellings

inline Drive parse_drive(const std::string& s) {
  for (Drive d : {Drive::RamzmMatched, Drive::RamzmLumped, Drive::MzmSingle, Drive::MzmPushPull})
    if (s == to_string(d)) return d;
  throw Error(ErrorKind::ConfigError,
              "unknown drive '" + s + "' (ramzm-matched, ramzm-lumped, mzm-single, mzm-push-pull)");
}

inline const char* to_string(Matching m) { return m == Matching::LossyMatch ? "lossy-match" : "transformer"; }

inline Metric parse_metric(const std::string& s) {
  for (Metric m : kAllMetrics)
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::ConfigError, "unknown metric '" + s + "'");
}

inline Objective parse_objective(const std::string& s) {
  if (s == "max-sfdr" || s == "sfdr") return Objective::MaxSFDR;
  if (s == "max-gain" || s == "gain") return Objective::MaxGain;
  if (s == "min-nf" || s == "nf") return Objective::MinNF;
  throw Error(ErrorKind::ConfigError, "unknown objective '" + s + "' (max-sfdr, max-gain, min-nf)");
}

// ---------------------------------------------------------------------------
// Strict reader

namespace detail {

inline bool is_angle_name(const std::string& base) {
  return base == "phi_bias" || base == "theta_dc" || base == "psi_path";
}

// Strips a _pi/_rad suffix from an angle key; returns the unit if present.
inline std::optional<AngleUnit> angle_suffix(const std::string& key, std::string* base = nullptr) {
  for (auto [suffix, unit] : {std::pair{"_pi", AngleUnit::Pi}, std::pair{"_rad", AngleUnit::Rad}}) {
    const std::string sfx = suffix;
    if (key.size() > sfx.size() && key.compare(key.size() - sfx.size(), sfx.size(), sfx) == 0) {
      const std::string b = key.substr(0, key.size() - sfx.size());
      if (is_angle_name(b)) {
        if (base) *base = b;
        return unit;
      }
    }
  }
  return std::nullopt;
}

class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "must be a JSON object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error(ErrorKind::ConfigError, "field '" + field(key) + "': " + msg);
  }

  std::string field(const std::string& key) const { return key.empty() ? path_ : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  void number_into(const std::string& key, double& dst) {
    if (has(key)) dst = number(key);
  }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::array<double, 2> pair(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(key, "expected [lo, hi]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  /// Exactly one of two spellings; returns alt=true for the first.
  std::optional<DualValue> dual(const std::string& alt_key, const std::string& plain_key) {
    const bool a = has(alt_key), p = has(plain_key);
    if (a && p) fail(alt_key, "give either '" + alt_key + "' or '" + plain_key + "', not both");
    if (a) return DualValue{number(alt_key), true};
    if (p) return DualValue{number(plain_key), false};
    return std::nullopt;
  }

  /// Angle under either suffix, checked against the file-wide unit.
  std::optional<double> angle(const std::string& base, AngleUnit unit) {
    const std::string pi_key = base + "_pi", rad_key = base + "_rad";
    const bool p = has(pi_key), r = has(rad_key);
    if (p && r) fail(pi_key, "angle given twice");
    if (!p && !r) return std::nullopt;
    if ((p && unit != AngleUnit::Pi) || (r && unit != AngleUnit::Rad))
      fail(p ? pi_key : rad_key, "mixed angle units in one file");
    return number(p ? pi_key : rad_key);
  }

  std::optional<std::array<double, 2>> angle_pair(const std::string& base, AngleUnit unit) {
    const std::string pi_key = base + "_pi", rad_key = base + "_rad";
    const bool p = has(pi_key), r = has(rad_key);
    if (p && r) fail(pi_key, "angle given twice");
    if (!p && !r) return std::nullopt;
    if ((p && unit != AngleUnit::Pi) || (r && unit != AngleUnit::Rad))
      fail(p ? pi_key : rad_key, "mixed angle units in one file");
    return pair(p ? pi_key : rad_key);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

// Collects every angle unit used anywhere in the document: keys such as
// "theta_dc_pi" and axis parameters such as {"param": "phi_bias_rad"}.
inline void collect_angle_units(const json& j, std::set<AngleUnit>& units) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (auto u = angle_suffix(it.key())) units.insert(*u);
      if (it.key() == "param" && it.value().is_string())
        if (auto u = angle_suffix(it.value().get<std::string>())) units.insert(*u);
      collect_angle_units(it.value(), units);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_angle_units(v, units);
  }
}

inline std::string angle_key(const std::string& base, AngleUnit u) {
  return base + (u == AngleUnit::Pi ? "_pi" : "_rad");
}

inline AxisConfig read_axis(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  AxisConfig a;
  a.param = r.string("param");
  a.start = r.number("start");
  a.stop = r.number("stop");
  a.count = r.integer("count");
  r.finish();
  return a;
}

inline json write_axis(const AxisConfig& a) {
  return json{{"param", a.param}, {"start", a.start}, {"stop", a.stop}, {"count", a.count}};
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Converts a config axis to model units. Returns the model axis and the
/// coordinates as the user wrote them (for CSV headers).
inline std::pair<SweepAxis, std::vector<double>> resolve_axis(const AxisConfig& a, const RunConfig& cfg) {
  std::string base;
  SweepAxis out;
  out.count = a.count;
  if (a.count < 2) throw Error(ErrorKind::ConfigError, "axis '" + a.param + "': count must be >= 2");
  if (!(a.start < a.stop)) throw Error(ErrorKind::ConfigError, "axis '" + a.param + "': start must be < stop");
  std::vector<double> user(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) user[i] = a.start + (a.stop - a.start) * i / (a.count - 1);
  user.back() = a.stop;

  std::function<double(double)> conv = [](double v) { return v; };
  if (auto unit = detail::angle_suffix(a.param, &base)) {
    if (*unit != cfg.angle_unit) throw Error(ErrorKind::ConfigError, "axis '" + a.param + "': mixed angle units");
    if (base == "phi_bias") out.param = SweepParam::PhiBias;
    else if (base == "theta_dc") out.param = SweepParam::ThetaDc;
    else throw Error(ErrorKind::ConfigError, "axis '" + a.param + "' is not sweepable");
    conv = [&cfg](double v) { return cfg.angle(v); };
  } else if (a.param == "tau") {
    out.param = SweepParam::Tau;
  } else if (a.param == "p_laser_dbm") {
    out.param = SweepParam::PLaser;
    conv = dbm_to_watts;
  } else if (a.param == "p_laser_w") {
    out.param = SweepParam::PLaser;
  } else if (a.param == "channel_loss_db") {
    out.param = SweepParam::ChannelLoss;
    conv = from_db;
  } else if (a.param == "channel_loss") {
    out.param = SweepParam::ChannelLoss;
  } else if (a.param == "v_pi") {
    out.param = SweepParam::VPi;
  } else {
    throw Error(ErrorKind::ConfigError,
                "axis param '" + a.param +
                    "' (theta_dc_pi|_rad, phi_bias_pi|_rad, tau, p_laser_dbm|_w, channel_loss_db|channel_loss, v_pi)");
  }
  for (double v : user) out.points.push_back(conv(v));
  out.start = out.points.front();
  out.stop = out.points.back();
  return {out, user};
}

inline void validate(const RunConfig& cfg) {
  auto wrap = [](auto&& f, const char* block) {
    try {
      f();
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, std::string(block) + ": " + e.message());
    }
  };
  wrap([&] { validate(cfg.link()); }, "link");
  wrap([&] { validate(cfg.modulator()); }, "modulator");
  wrap([&] { validate(cfg.bias()); }, "bias");
  if (cfg.matching == Matching::Transformer && !cfg.transformer_turns)
    throw Error(ErrorKind::ConfigError, "field 'link.transformer_turns': required for transformer matching");
  if (cfg.sweep) {
    resolve_axis(cfg.sweep->axis1, cfg);
    if (cfg.sweep->axis2) {
      resolve_axis(*cfg.sweep->axis2, cfg);
      if (resolve_axis(*cfg.sweep->axis2, cfg).first.param == resolve_axis(cfg.sweep->axis1, cfg).first.param)
        throw Error(ErrorKind::ConfigError, "field 'sweep': axes must sweep distinct parameters");
    }
    if (cfg.sweep->metrics.empty()) throw Error(ErrorKind::ConfigError, "field 'sweep.metrics': empty");
    for (const auto& m : cfg.sweep->metrics) parse_metric(m);
  }
  if (cfg.two_tone) {
    const auto& t = *cfg.two_tone;
    if (!(t.p_in_start_dbm < t.p_in_stop_dbm))
      throw Error(ErrorKind::ConfigError, "field 'two_tone': p_in_start_dbm must be < p_in_stop_dbm");
    if (t.points < 4) throw Error(ErrorKind::ConfigError, "field 'two_tone.points': need at least 4");
    if (!(t.f1_hz > 0 && t.f2_hz > 0) || t.f1_hz == t.f2_hz)
      throw Error(ErrorKind::ConfigError, "field 'two_tone': f1_hz and f2_hz must be positive and distinct");
  }
  if (cfg.optimize) parse_objective(cfg.optimize->objective);
  if (cfg.null_bias) {
    if (cfg.null_bias->p_laser.count < 2 || cfg.null_bias->phi_bias.count < 2)
      throw Error(ErrorKind::ConfigError, "field 'null_bias': axis counts must be >= 2");
  }
}

/// Strict parse: unknown keys, type mismatches and mixed angle units are
/// errors naming the offending field.
inline RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte);
    throw Error(ErrorKind::ConfigError, "JSON syntax error at line " + std::to_string(line) + ", column " +
                                            std::to_string(col) + ": " + e.what());
  }
  RunConfig cfg;
  std::set<AngleUnit> units;
  detail::collect_angle_units(doc, units);
  if (units.size() > 1) throw Error(ErrorKind::ConfigError, "mixed angle units: use either *_pi or *_rad keys throughout");
  if (!units.empty()) cfg.angle_unit = *units.begin();
  if (doc.contains("angle_unit")) {
    const auto& au = doc["angle_unit"];
    if (!au.is_string() || (au != "pi" && au != "rad"))
      throw Error(ErrorKind::ConfigError, "field 'angle_unit': expected \"pi\" or \"rad\"");
    const AngleUnit declared = au == "pi" ? AngleUnit::Pi : AngleUnit::Rad;
    if (!units.empty() && declared != cfg.angle_unit)
      throw Error(ErrorKind::ConfigError, "field 'angle_unit': disagrees with the angle keys used");
    cfg.angle_unit = declared;
  }

  detail::ObjectReader top(doc, "config");
  if (top.has("angle_unit")) top.raw("angle_unit");

  if (top.has("link")) {
    detail::ObjectReader r(top.raw("link"), "link");
    if (auto v = r.dual("p_laser_dbm", "p_laser_w")) cfg.p_laser = *v;
    if (auto v = r.dual("rin_db_hz", "rin_per_hz")) cfg.rin = *v;
    r.number_into("r_source", cfg.r_source);
    r.number_into("r_load", cfg.r_load);
    r.number_into("responsivity", cfg.responsivity);
    if (auto v = r.dual("channel_loss_db", "channel_loss")) cfg.channel_loss = *v;
    r.number_into("bandwidth_hz", cfg.bandwidth_hz);
    r.number_into("temperature_k", cfg.temperature_k);
    cfg.transformer_turns = r.opt_number("transformer_turns");
    r.number_into("pd_sat_current", cfg.pd_sat_current);
    r.finish();
  }
  if (top.has("modulator")) {
    detail::ObjectReader r(top.raw("modulator"), "modulator");
    if (!r.has("v_pi")) r.fail("v_pi", "required");
    cfg.v_pi = r.number("v_pi");
    if (auto v = r.dual("insertion_loss_db", "insertion_loss")) cfg.insertion_loss = *v;
    r.number_into("electrode_r", cfg.electrode_r);
    r.number_into("electrode_c", cfg.electrode_c);
    if (r.has("drive")) cfg.drive = parse_drive(r.string("drive"));
    r.finish();
  }
  if (top.has("bias")) {
    detail::ObjectReader r(top.raw("bias"), "bias");
    auto phi = r.angle("phi_bias", cfg.angle_unit);
    auto th = r.angle("theta_dc", cfg.angle_unit);
    if (!phi) r.fail("phi_bias_pi", "required (phi_bias_pi or phi_bias_rad)");
    if (!th) r.fail("theta_dc_pi", "required (theta_dc_pi or theta_dc_rad)");
    if (!r.has("tau")) r.fail("tau", "required");
    cfg.phi_bias = *phi;
    cfg.theta_dc = *th;
    cfg.tau = r.number("tau");
    r.number_into("alpha", cfg.alpha);
    if (auto psi = r.angle("psi_path", cfg.angle_unit)) cfg.psi_path = *psi;
    r.finish();
  } else if (cfg.angle_unit == AngleUnit::Rad) {
    cfg.phi_bias *= kPi;
    cfg.theta_dc *= kPi;
  }
  if (top.has("analysis")) {
    detail::ObjectReader r(top.raw("analysis"), "analysis");
    if (r.has("sfdr_method")) {
      const auto m = r.string("sfdr_method");
      if (m == "intercept") cfg.sfdr_method = SfdrMethod::Intercept;
      else if (m == "two-tone") cfg.sfdr_method = SfdrMethod::TwoTone;
      else r.fail("sfdr_method", "expected \"intercept\" or \"two-tone\"");
    }
    if (r.has("gain_convention")) {
      const auto m = r.string("gain_convention");
      if (m == "available-power") cfg.gain_convention = GainConvention::AvailablePower;
      else if (m == "closed-form") cfg.gain_convention = GainConvention::ClosedForm;
      else r.fail("gain_convention", "expected \"available-power\" or \"closed-form\"");
    }
    if (r.has("matching")) {
      const auto m = r.string("matching");
      if (m == "lossy-match") cfg.matching = Matching::LossyMatch;
      else if (m == "transformer") cfg.matching = Matching::Transformer;
      else r.fail("matching", "expected \"lossy-match\" or \"transformer\"");
    }
    if (r.has("include_modulator_noise")) cfg.include_modulator_noise = r.boolean("include_modulator_noise");
    r.finish();
  }
  if (top.has("sweep")) {
    detail::ObjectReader r(top.raw("sweep"), "sweep");
    SweepConfig s;
    if (!r.has("axis1")) r.fail("axis1", "required");
    s.axis1 = detail::read_axis(r.raw("axis1"), "sweep.axis1");
    if (r.has("axis2")) s.axis2 = detail::read_axis(r.raw("axis2"), "sweep.axis2");
    if (r.has("metrics")) {
      const json& m = r.raw("metrics");
      if (!m.is_array()) r.fail("metrics", "expected a list of metric names");
      s.metrics.clear();
      for (const auto& x : m) {
        if (!x.is_string()) r.fail("metrics", "expected a list of metric names");
        s.metrics.push_back(x.get<std::string>());
      }
    }
    if (r.has("timestamp")) s.timestamp = r.string("timestamp");
    r.finish();
    cfg.sweep = s;
  }
  if (top.has("two_tone")) {
    detail::ObjectReader r(top.raw("two_tone"), "two_tone");
    ToneConfig t;
    r.number_into("f1_hz", t.f1_hz);
    r.number_into("f2_hz", t.f2_hz);
    r.number_into("p_in_start_dbm", t.p_in_start_dbm);
    r.number_into("p_in_stop_dbm", t.p_in_stop_dbm);
    if (r.has("points")) t.points = r.integer("points");
    if (r.has("n_periods")) t.n_periods = r.integer("n_periods");
    if (r.has("samples_per_period")) t.samples_per_period = r.integer("samples_per_period");
    r.finish();
    cfg.two_tone = t;
  }
  if (top.has("optimize")) {
    detail::ObjectReader r(top.raw("optimize"), "optimize");
    OptimizeConfig o;
    if (r.has("objective")) o.objective = r.string("objective");
    o.min_gain_db = r.opt_number("min_gain_db");
    o.max_nf_db = r.opt_number("max_nf_db");
    o.max_photocurrent_a = r.opt_number("max_photocurrent_a");
    o.phi_bias = r.angle_pair("phi_bias", cfg.angle_unit);
    o.theta_dc = r.angle_pair("theta_dc", cfg.angle_unit);
    if (r.has("tau")) o.tau = r.pair("tau");
    r.finish();
    cfg.optimize = o;
  }
  if (top.has("null_bias")) {
    detail::ObjectReader r(top.raw("null_bias"), "null_bias");
    NullBiasConfig n;
    if (cfg.angle_unit == AngleUnit::Rad) {
      n.phi_bias.start *= kPi;
      n.phi_bias.stop *= kPi;
    }
    auto range = [&](const std::string& key, AxisConfig& dst) {
      detail::ObjectReader a(r.raw(key), "null_bias." + key);
      dst.start = a.number("start");
      dst.stop = a.number("stop");
      dst.count = a.integer("count");
      a.finish();
    };
    if (r.has("p_laser_dbm")) range("p_laser_dbm", n.p_laser);
    const std::string phi_key = detail::angle_key("phi_bias", cfg.angle_unit);
    if (r.has(phi_key)) range(phi_key, n.phi_bias);
    n.target_current_a = r.opt_number("target_current_a");
    r.finish();
    cfg.null_bias = n;
  }
  top.finish();
  validate(cfg);
  return cfg;
}

inline json to_json(const RunConfig& cfg) {
  auto dual = [](json& j, const DualValue& v, const char* alt, const char* plain) { j[v.alt ? alt : plain] = v.value; };
  const AngleUnit u = cfg.angle_unit;
  json j;
  j["angle_unit"] = u == AngleUnit::Pi ? "pi" : "rad";
  json link;
  dual(link, cfg.p_laser, "p_laser_dbm", "p_laser_w");
  dual(link, cfg.rin, "rin_db_hz", "rin_per_hz");
  link["r_source"] = cfg.r_source;
  link["r_load"] = cfg.r_load;
  link["responsivity"] = cfg.responsivity;
  dual(link, cfg.channel_loss, "channel_loss_db", "channel_loss");
  link["bandwidth_hz"] = cfg.bandwidth_hz;
  link["temperature_k"] = cfg.temperature_k;
  if (cfg.transformer_turns) link["transformer_turns"] = *cfg.transformer_turns;
  link["pd_sat_current"] = cfg.pd_sat_current;
  j["link"] = link;

  json mod;
  mod["v_pi"] = cfg.v_pi;
  dual(mod, cfg.insertion_loss, "insertion_loss_db", "insertion_loss");
  mod["electrode_r"] = cfg.electrode_r;
  mod["electrode_c"] = cfg.electrode_c;
  mod["drive"] = to_string(cfg.drive);
  j["modulator"] = mod;

  json bias;
  bias[detail::angle_key("phi_bias", u)] = cfg.phi_bias;
  bias[detail::angle_key("theta_dc", u)] = cfg.theta_dc;
  bias["tau"] = cfg.tau;
  bias["alpha"] = cfg.alpha;
  bias[detail::angle_key("psi_path", u)] = cfg.psi_path;
  j["bias"] = bias;

  j["analysis"] = json{{"sfdr_method", to_string(cfg.sfdr_method)},
                       {"gain_convention", to_string(cfg.gain_convention)},
                       {"matching", to_string(cfg.matching)},
                       {"include_modulator_noise", cfg.include_modulator_noise}};

  if (cfg.sweep) {
    json s;
    s["axis1"] = detail::write_axis(cfg.sweep->axis1);
    if (cfg.sweep->axis2) s["axis2"] = detail::write_axis(*cfg.sweep->axis2);
    s["metrics"] = cfg.sweep->metrics;
    s["timestamp"] = cfg.sweep->timestamp;
    j["sweep"] = s;
  }
  if (cfg.two_tone) {
    const auto& t = *cfg.two_tone;
    j["two_tone"] = json{{"f1_hz", t.f1_hz},           {"f2_hz", t.f2_hz},   {"p_in_start_dbm", t.p_in_start_dbm},
                         {"p_in_stop_dbm", t.p_in_stop_dbm}, {"points", t.points}, {"n_periods", t.n_periods},
                         {"samples_per_period", t.samples_per_period}};
  }
  if (cfg.optimize) {
    const auto& o = *cfg.optimize;
    json oj;
    oj["objective"] = o.objective;
    if (o.min_gain_db) oj["min_gain_db"] = *o.min_gain_db;
    if (o.max_nf_db) oj["max_nf_db"] = *o.max_nf_db;
    if (o.max_photocurrent_a) oj["max_photocurrent_a"] = *o.max_photocurrent_a;
    if (o.phi_bias) oj[detail::angle_key("phi_bias", u)] = *o.phi_bias;
    if (o.theta_dc) oj[detail::angle_key("theta_dc", u)] = *o.theta_dc;
    if (o.tau) oj["tau"] = *o.tau;
    j["optimize"] = oj;
  }
  if (cfg.null_bias) {
    const auto& n = *cfg.null_bias;
    json nj;
    nj["p_laser_dbm"] = json{{"start", n.p_laser.start}, {"stop", n.p_laser.stop}, {"count", n.p_laser.count}};
    nj[detail::angle_key("phi_bias", u)] =
        json{{"start", n.phi_bias.start}, {"stop", n.phi_bias.stop}, {"count", n.phi_bias.count}};
    if (n.target_current_a) nj["target_current_a"] = *n.target_current_a;
    j["null_bias"] = nj;
  }
  return j;
}

inline std::string serialize_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.message());
  }
}

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest round-trip decimal; infinities as "inf" / "-inf", NaN as "nan".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// JSON value for a double; non-finite values become strings.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

/// Sweep outputs are written in reporting units: gain in dB, intercepts in
/// dBm, output noise in dBm/Hz; NF, SFDR and photocurrent unchanged.
inline double display_value(Metric m, double v) {
  switch (m) {
    case Metric::Gain: return to_db(v);
    case Metric::IIP3:
    case Metric::IIP2:
    case Metric::NoisePSD: return std::isnan(v) ? v : watts_to_dbm(v);
    default: return v;
  }
}

inline const char* display_unit(Metric m) {
  switch (m) {
    case Metric::Gain:
    case Metric::NF:
    case Metric::SFDR: return "dB";
    case Metric::IIP3:
    case Metric::IIP2: return "dBm";
    case Metric::NoisePSD: return "dBm/Hz";
    case Metric::Photocurrent: return "A";
  }
  return "";
}

inline std::string grid_csv(const SweepGrid& grid, Metric m, const std::string& axis1_label,
                            const std::vector<double>& x1, const std::string& axis2_label,
                            const std::vector<double>& x2) {
  std::string out = axis1_label;
  if (grid.axis2) {
    out += "\\" + axis2_label;
    for (double x : x2) out += "," + format_number(x);
  } else {
    out += std::string(",") + to_string(m);
  }
  out += "\n";
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    out += format_number(x1[i]);
    for (std::size_t j = 0; j < grid.cols(); ++j) out += "," + format_number(display_value(m, grid.at(m, i, j)));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct CommandOptions {
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir = ".";
  std::vector<std::string> metrics;  // overrides sweep metrics / optimize objective
  bool numeric = false;
  std::string format = "csv";
  std::optional<std::string> modulator;  // drive override
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 2;
inline constexpr int kModel = 3;
inline constexpr int kOracle = 4;
}  // namespace exit_code

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError: return exit_code::kConfig;
    case ErrorKind::StepTooSmall:
    case ErrorKind::AliasError:
    case ErrorKind::NotInSmallSignal: return exit_code::kOracle;
    default: return exit_code::kModel;
  }
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path.string() + "'");
  out << text;
}

inline std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return format_number(v);
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

inline std::string sfdr_unit(LimitingOrder o) {
  switch (o) {
    case LimitingOrder::Second: return "dB Hz^(1/2)";
    case LimitingOrder::Third: return "dB Hz^(2/3)";
    case LimitingOrder::Fifth: return "dB Hz^(4/5)";
    case LimitingOrder::Undefined: return "dB";
  }
  return "dB";
}

inline std::string key_value_csv(const json& flat) {
  std::string out = "field,value\n";
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    out += it.key() + ",";
    if (it->is_number()) out += format_number(it->get<double>());
    else if (it->is_string()) out += it->get<std::string>();
    else out += it->dump();
    out += "\n";
  }
  return out;
}

inline json bias_json(const BiasPoint& b) {
  return json{{"phi_bias_rad", b.phi_bias}, {"theta_dc_rad", b.theta_dc}, {"tau", b.tau},
              {"alpha", b.alpha},           {"psi_path_rad", b.psi_path}};
}

}  // namespace detail

inline RunConfig effective_config(RunConfig cfg, const CommandOptions& opt) {
  if (opt.modulator) cfg.drive = parse_drive(*opt.modulator);
  return cfg;
}

inline json metrics_json(const LinkMetrics& m, const SfdrOptions& opt) {
  json j;
  j["slope_efficiency_w_per_v"] = json_number(m.slope_efficiency);
  j["gain_linear"] = json_number(m.gain_linear);
  j["gain_db"] = json_number(to_db(m.gain_linear));
  j["gain_available_db"] = json_number(to_db(m.gain_available));
  j["avg_photocurrent_a"] = json_number(m.avg_photocurrent);
  j["noise_rin_a2_per_hz"] = json_number(m.noise.rin);
  j["noise_shot_a2_per_hz"] = json_number(m.noise.shot);
  j["noise_thermal_load_w_per_hz"] = json_number(m.noise.thermal_load);
  j["noise_modulator_input_w_per_hz"] = json_number(m.noise.modulator_input);
  j["modulator_bandwidth_hz"] = json_number(m.noise.modulator_bandwidth_hz);
  j["noise_out_w_per_hz"] = json_number(m.noise_out_w_per_hz);
  j["nf_db"] = json_number(m.nf_db);
  j["iip2_dbm"] = json_number(watts_to_dbm(m.iip2_w));
  j["iip3_dbm"] = json_number(watts_to_dbm(m.iip3_w));
  j["iip5_dbm"] = json_number(watts_to_dbm(m.iip5_w));
  j["oip2_dbm"] = json_number(watts_to_dbm(m.oip2_w()));
  j["oip3_dbm"] = json_number(watts_to_dbm(m.oip3_w()));
  j["sfdr_db"] = json_number(m.sfdr_db());
  j["sfdr_unit"] = detail::sfdr_unit(m.limiting_order());
  j["limiting_order"] = to_string(m.limiting_order());
  j["sfdr2_db"] = json_number(m.sfdr.sfdr2_db);
  j["sfdr3_db"] = json_number(m.sfdr.sfdr3_db);
  j["sfdr5_db"] = json_number(m.sfdr.sfdr5_db);
  j["sfdr_method"] = to_string(opt.method);
  j["sfdr_gain_convention"] = to_string(opt.convention);
  j["sfdr_nf_db"] = json_number(m.sfdr.nf_db);
  j["sfdr_closed_form_db"] = json_number(m.sfdr_closed_form_db);
  return j;
}

inline int cmd_report(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto bias = cfg.bias();
  const auto mod = cfg.modulator();
  const auto link = cfg.link();
  const auto sopt = cfg.sfdr_options(opt.numeric);
  const auto m = compute_link_metrics(bias, mod, link, sopt);

  out << "drive            " << to_string(mod.drive) << "\n"
      << "bias             phi=" << detail::fixed(bias.phi_bias / kPi, 4) << "pi theta_dc="
      << detail::fixed(bias.theta_dc / kPi, 4) << "pi tau=" << detail::fixed(bias.tau, 4)
      << " alpha=" << detail::fixed(bias.alpha, 4) << "\n"
      << "slope efficiency " << format_number(m.slope_efficiency) << " W/V\n"
      << "gain             " << detail::fixed(to_db(m.gain_linear), 3) << " dB\n"
      << "noise figure     " << detail::fixed(m.nf_db, 3) << " dB\n"
      << "photocurrent     " << detail::fixed(m.avg_photocurrent * 1e3, 4) << " mA\n"
      << "IIP2             " << detail::fixed(watts_to_dbm(m.iip2_w), 3) << " dBm\n"
      << "IIP3             " << detail::fixed(watts_to_dbm(m.iip3_w), 3) << " dBm\n"
      << "IIP5             " << detail::fixed(watts_to_dbm(m.iip5_w), 3) << " dBm\n"
      << "SFDR             " << detail::fixed(m.sfdr_db(), 3) << " " << detail::sfdr_unit(m.limiting_order()) << " ("
      << to_string(m.limiting_order()) << "-order limited, " << to_string(sopt.method) << ", "
      << to_string(sopt.convention) << " gain)\n"
      << "SFDR closed-form " << detail::fixed(m.sfdr_closed_form_db, 3) << " dB\n";

  json rec;
  rec["tool_version"] = kToolVersion;
  rec["command"] = "report";
  rec["drive"] = to_string(mod.drive);
  rec["bias"] = detail::bias_json(bias);
  rec["coefficients"] = opt.numeric ? "numeric" : "analytic";
  rec["metrics"] = metrics_json(m, sopt);
  rec["config"] = to_json(cfg);
  if (opt.format == "json") {
    detail::write_file(opt.out_dir / "report.json", rec.dump(2) + "\n");
  } else {
    detail::write_file(opt.out_dir / "report.csv", detail::key_value_csv(rec["metrics"]));
  }
  return exit_code::kOk;
}

inline int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  if (!cfg.sweep) throw Error(ErrorKind::ConfigError, "field 'sweep': required for the sweep command");
  const auto& sc = *cfg.sweep;
  SweepSpec spec;
  auto [ax1, user1] = resolve_axis(sc.axis1, cfg);
  spec.axis1 = ax1;
  std::vector<double> user2;
  if (sc.axis2) {
    auto [ax2, u2] = resolve_axis(*sc.axis2, cfg);
    spec.axis2 = ax2;
    user2 = u2;
  }
  spec.bias = cfg.bias();
  spec.mod = cfg.modulator();
  spec.link = cfg.link();
  spec.sfdr = cfg.sfdr_options(opt.numeric);
  spec.timestamp = sc.timestamp;
  spec.metrics.clear();
  for (const auto& name : opt.metrics.empty() ? sc.metrics : opt.metrics) spec.metrics.push_back(parse_metric(name));

  const auto grid = run_sweep(spec);
  const std::string l2 = sc.axis2 ? sc.axis2->param : "";
  if (opt.format == "json") {
    json j;
    j["tool_version"] = grid.tool_version;
    j["timestamp"] = grid.timestamp;
    j["axis1"] = json{{"param", sc.axis1.param}, {"values", user1}};
    if (sc.axis2) j["axis2"] = json{{"param", l2}, {"values", user2}};
    json data;
    for (Metric m : spec.metrics) {
      json rows = json::array();
      for (std::size_t i = 0; i < grid.rows(); ++i) {
        json row = json::array();
        for (std::size_t jx = 0; jx < grid.cols(); ++jx) row.push_back(json_number(display_value(m, grid.at(m, i, jx))));
        rows.push_back(row);
      }
      data[to_string(m)] = json{{"unit", display_unit(m)}, {"values", rows}};
    }
    j["data"] = data;
    j["cell_errors"] = grid.cell_errors;
    j["config"] = to_json(cfg);
    detail::write_file(opt.out_dir / "sweep.json", j.dump(2) + "\n");
    out << "wrote " << (opt.out_dir / "sweep.json").string() << "\n";
  } else {
    for (Metric m : spec.metrics) {
      const auto path = opt.out_dir / (std::string("sweep_") + to_string(m) + ".csv");
      detail::write_file(path, grid_csv(grid, m, sc.axis1.param, user1, l2, user2));
      out << "wrote " << path.string() << "\n";
    }
  }
  if (!grid.cell_errors.empty())
    out << grid.cell_errors.size() << " cell(s) could not be evaluated (stored as nan); first: "
        << grid.cell_errors.front() << "\n";
  return exit_code::kOk;
}

inline int cmd_two_tone(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  if (!cfg.two_tone) throw Error(ErrorKind::ConfigError, "field 'two_tone': required for the two-tone command");
  const auto& tc = *cfg.two_tone;
  const auto bias = cfg.bias();
  const auto mod = cfg.modulator();
  const auto link = cfg.link();

  std::vector<double> p_in;
  std::vector<ToneExtraction> rows;
  for (int i = 0; i < tc.points; ++i) {
    const double dbm = tc.p_in_start_dbm + (tc.p_in_stop_dbm - tc.p_in_start_dbm) * i / (tc.points - 1);
    const double w = dbm_to_watts(dbm);
    p_in.push_back(w);
    rows.push_back(two_tone_simulate(ToneStimulus::from_input_power(w, link.r_source, mod.v_pi, tc.f1_hz, tc.f2_hz),
                                     bias, mod, link, tc.n_periods, tc.samples_per_period));
  }

  // Third-order content separated from fifth-order growth in the same bin.
  const auto spur = spur_coefficients(bias, mod.drive);
  const bool third_null = spur.im3 <= 1e-10 * spur.fund;
  double iip3_fit = kInf;
  if (!third_null) {
    try {
      iip3_fit = intercept_from_sweep(rows, p_in, 3);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotInSmallSignal) throw;
      std::string hint;
      try {
        const auto ranged = fit_intercept(bias, mod, link, 3, tc.f1_hz, tc.f2_hz);
        const double top_dbm = watts_to_dbm(*std::max_element(ranged.p_in.begin(), ranged.p_in.end()));
        hint = "; a sweep topping out at " + detail::fixed(top_dbm, 1) + " dBm passes (p_in_stop_dbm " +
               detail::fixed(top_dbm - tc.p_in_stop_dbm, 1) + " dB)";
      } catch (const Error&) {
      }
      throw Error(ErrorKind::NotInSmallSignal, e.message() + hint);
    }
  }
  const auto fit5 = fit_intercept(bias, mod, link, 5, tc.f1_hz, tc.f2_hz);

  std::string csv = "p_in_dbm,fund_dbm,im2_dbm,im3_dbm,im5_dbm\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += format_number(watts_to_dbm(p_in[i])) + "," + format_number(watts_to_dbm(rows[i].power(Product::F1))) + "," +
           format_number(watts_to_dbm(rows[i].power(Product::Im2Diff))) + "," +
           format_number(watts_to_dbm(rows[i].power(Product::Im3Low))) + "," +
           format_number(watts_to_dbm(rows[i].power(Product::Im5Low))) + "\n";
  }

  json fit;
  fit["tool_version"] = kToolVersion;
  fit["command"] = "two-tone";
  fit["drive"] = to_string(mod.drive);
  fit["bias"] = detail::bias_json(bias);
  fit["f1_hz"] = tc.f1_hz;
  fit["f2_hz"] = tc.f2_hz;
  fit["third_order_null"] = third_null;
  fit["iip3_fit_dbm"] = json_number(watts_to_dbm(iip3_fit));
  fit["iip5_fit_dbm"] = json_number(watts_to_dbm(fit5.intercept_w));
  fit["iip5_fit_top_theta_rad"] = fit5.top_theta;
  fit["growth"] = json{{"fund", spur.fund},
                       {"im2", spur.im2},
                       {"im3", spur.im3},
                       {"im5_at_2f1_f2", spur.im5_at_im3},
                       {"im5_at_3f1_2f2", spur.im5}};
  {
    const bool closed_form = !opt.numeric && (!is_ramzm(mod.drive) || (bias.alpha == 1.0 && bias.psi_path == 0.0));
    const auto src = closed_form ? CoefficientSource::Analytic : CoefficientSource::Numeric;
    fit["iip3_model_dbm"] = json_number(watts_to_dbm(iip3(bias, mod, link, src)));
  }

  if (opt.format == "json") {
    json rj = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rj.push_back(json{{"p_in_dbm", json_number(watts_to_dbm(p_in[i]))},
                        {"fund_dbm", json_number(watts_to_dbm(rows[i].power(Product::F1)))},
                        {"im2_dbm", json_number(watts_to_dbm(rows[i].power(Product::Im2Diff)))},
                        {"im3_dbm", json_number(watts_to_dbm(rows[i].power(Product::Im3Low)))},
                        {"im5_dbm", json_number(watts_to_dbm(rows[i].power(Product::Im5Low)))}});
    }
    fit["rows"] = rj;
    fit["config"] = to_json(cfg);
    detail::write_file(opt.out_dir / "two_tone.json", fit.dump(2) + "\n");
  } else {
    detail::write_file(opt.out_dir / "two_tone.csv", csv);
    fit["config"] = to_json(cfg);
    detail::write_file(opt.out_dir / "two_tone_intercepts.json", fit.dump(2) + "\n");
  }
  out << csv << "IIP3 (fit) " << detail::fixed(watts_to_dbm(iip3_fit), 3) << " dBm"
      << (third_null ? " (third-order null)" : "") << "\nIIP5 (fit) "
      << detail::fixed(watts_to_dbm(fit5.intercept_w), 3) << " dBm\n";
  return exit_code::kOk;
}

inline int cmd_optimize(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const OptimizeConfig oc = cfg.optimize.value_or(OptimizeConfig{});
  Objective objective = parse_objective(oc.objective);
  if (opt.metrics.size() > 1) throw Error(ErrorKind::ConfigError, "optimize takes a single --metric");
  if (opt.metrics.size() == 1) objective = parse_objective(opt.metrics.front());

  Constraints cons;
  if (oc.min_gain_db) cons.min_gain = from_db(*oc.min_gain_db);
  cons.max_nf_db = oc.max_nf_db;
  cons.max_photocurrent = oc.max_photocurrent_a;
  BiasBounds bounds;
  if (oc.phi_bias) bounds.phi_bias = {cfg.angle((*oc.phi_bias)[0]), cfg.angle((*oc.phi_bias)[1])};
  if (oc.theta_dc) bounds.theta_dc = {cfg.angle((*oc.theta_dc)[0]), cfg.angle((*oc.theta_dc)[1])};
  if (oc.tau) bounds.tau = {(*oc.tau)[0], (*oc.tau)[1]};

  const auto sopt = cfg.sfdr_options(opt.numeric);
  const auto r = optimize_bias(objective, cons, bounds, cfg.bias(), cfg.modulator(), cfg.link(), sopt);

  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = "optimize";
  j["objective"] = to_string(objective);
  j["objective_value"] = json_number(objective == Objective::MaxGain ? to_db(r.objective) : r.objective);
  j["coarse_best"] = json_number(objective == Objective::MaxGain ? to_db(r.coarse_best) : r.coarse_best);
  j["evaluations"] = r.evaluations;
  j["bias"] = detail::bias_json(r.bias);
  j["bias_pi"] = json{{"phi_bias_pi", r.bias.phi_bias / kPi}, {"theta_dc_pi", r.bias.theta_dc / kPi}, {"tau", r.bias.tau}};
  j["metrics"] = metrics_json(r.metrics, sopt);
  j["config"] = to_json(cfg);
  if (opt.format == "json") {
    detail::write_file(opt.out_dir / "optimize.json", j.dump(2) + "\n");
  } else {
    json flat;
    flat["objective"] = j["objective"];
    flat["objective_value"] = j["objective_value"];
    flat["phi_bias_rad"] = r.bias.phi_bias;
    flat["theta_dc_rad"] = r.bias.theta_dc;
    flat["tau"] = r.bias.tau;
    for (auto it = j["metrics"].begin(); it != j["metrics"].end(); ++it) flat[it.key()] = *it;
    detail::write_file(opt.out_dir / "optimize.csv", detail::key_value_csv(flat));
  }
  out << "objective  " << to_string(objective) << " = "
      << detail::fixed(objective == Objective::MaxGain ? to_db(r.objective) : r.objective, 4) << " dB\n"
      << "bias       phi=" << detail::fixed(r.bias.phi_bias / kPi, 5) << "pi theta_dc="
      << detail::fixed(r.bias.theta_dc / kPi, 5) << "pi tau=" << detail::fixed(r.bias.tau, 5) << "\n"
      << "gain       " << detail::fixed(to_db(r.metrics.gain_linear), 3) << " dB\n"
      << "NF         " << detail::fixed(r.metrics.nf_db, 3) << " dB\n"
      << "SFDR       " << detail::fixed(r.metrics.sfdr_db(), 3) << " dB\n";
  return exit_code::kOk;
}

inline int cmd_null_bias(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  NullBiasConfig nc = cfg.null_bias.value_or(NullBiasConfig{});
  if (!cfg.null_bias && cfg.angle_unit == AngleUnit::Rad) {
    nc.phi_bias.start *= kPi;
    nc.phi_bias.stop *= kPi;
  }
  const auto mod = cfg.modulator();
  const auto link = cfg.link();
  auto [p_axis, p_user] = resolve_axis(nc.p_laser, cfg);
  AxisConfig phi_cfg = nc.phi_bias;
  phi_cfg.param = detail::angle_key("phi_bias", cfg.angle_unit);
  auto [phi_axis, phi_user] = resolve_axis(phi_cfg, cfg);

  const auto res = null_bias_analysis(link, mod, cfg.bias(), p_axis, phi_axis, nc.target_current_a);

  std::string curve = "p_laser_dbm,phi_bias_rad,gain_db,photocurrent_a,valid\n";
  for (std::size_t i = 0; i < res.curve.size(); ++i) {
    const auto& c = res.curve[i];
    curve += format_number(p_user[i]) + "," + format_number(c.valid ? c.phi_bias : std::nan("")) + "," +
             format_number(c.valid ? to_db(c.gain) : std::nan("")) + "," +
             format_number(c.valid ? c.photocurrent : std::nan("")) + "," + (c.valid ? "1" : "0") + "\n";
  }
  if (opt.format == "json") {
    json j;
    j["tool_version"] = kToolVersion;
    j["command"] = "null-bias";
    j["target_current_a"] = res.target_current;
    j["p_laser_dbm"] = p_user;
    j[phi_cfg.param] = phi_user;
    json rows = json::array();
    for (std::size_t i = 0; i < res.gain.rows(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < res.gain.cols(); ++k) row.push_back(json_number(to_db(res.gain.at(Metric::Gain, i, k))));
      rows.push_back(row);
    }
    j["gain_db"] = rows;
    json cj = json::array();
    for (std::size_t i = 0; i < res.curve.size(); ++i) {
      const auto& c = res.curve[i];
      cj.push_back(json{{"p_laser_dbm", p_user[i]},
                        {"valid", c.valid},
                        {"phi_bias_rad", json_number(c.valid ? c.phi_bias : std::nan(""))},
                        {"gain_db", json_number(c.valid ? to_db(c.gain) : std::nan(""))}});
    }
    j["curve"] = cj;
    j["config"] = to_json(cfg);
    detail::write_file(opt.out_dir / "null_bias.json", j.dump(2) + "\n");
  } else {
    detail::write_file(opt.out_dir / "null_bias_gain.csv",
                       grid_csv(res.gain, Metric::Gain, phi_cfg.param, phi_user, "p_laser_dbm", p_user));
    detail::write_file(opt.out_dir / "null_bias_curve.csv", curve);
  }
  out << "iso-photocurrent " << detail::fixed(res.target_current * 1e3, 3) << " mA\n" << curve;
  return exit_code::kOk;
}

/// Loads the config (or defaults), runs one command and maps failures onto
/// exit codes. Diagnostics go to `err`.
inline int run_command(const std::string& command, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.format != "csv" && opt.format != "json")
      throw Error(ErrorKind::ConfigError, "--format must be csv or json");
    RunConfig cfg = opt.config_path ? load_config(*opt.config_path) : RunConfig{};
    cfg = effective_config(cfg, opt);
    validate(cfg);
    if (command == "report") return cmd_report(cfg, opt, out);
    if (command == "sweep") return cmd_sweep(cfg, opt, out);
    if (command == "two-tone") return cmd_two_tone(cfg, opt, out);
    if (command == "optimize") return cmd_optimize(cfg, opt, out);
    if (command == "null-bias") return cmd_null_bias(cfg, opt, out);
    throw Error(ErrorKind::ConfigError, "unknown command '" + command + "'");
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.message() << "\n";
    if (e.kind() == ErrorKind::AlphaNotUnity) err << "hint: rerun with --numeric\n";
    return exit_code_for(e.kind());
  }
}

}  // namespace ramzm
