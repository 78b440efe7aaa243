#include <gtest/gtest.h>

#include <cmath>

#include "ramzm/sweep_optimize.hpp"

using namespace ramzm;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

SweepSpec ring_grid(int n1, int n2, std::vector<Metric> metrics) {
  SweepSpec s;
  s.axis1 = {SweepParam::ThetaDc, 0.0, 2 * kPi, n1, {}};
  s.axis2 = SweepAxis{SweepParam::Tau, 0.05, 0.95, n2, {}};
  s.bias = bias_presets::linearized();
  s.metrics = std::move(metrics);
  s.threads = 1;
  return s;
}

BiasBounds quadrature_only() {
  BiasBounds b;
  b.phi_bias = {kPi / 2, kPi / 2};
  return b;
}

}  // namespace

TEST(Sweep, ShapeAndAxes) {
  const auto g = run_sweep(ring_grid(3, 3, {Metric::Gain, Metric::NF, Metric::SFDR}));
  EXPECT_EQ(g.rows(), 3u);
  EXPECT_EQ(g.cols(), 3u);
  EXPECT_EQ(g.x1.back(), 2 * kPi);
  EXPECT_EQ(g.x2.back(), 0.95);
  EXPECT_EQ(g.data.size(), 3u);
  for (const auto& [m, v] : g.data) EXPECT_EQ(v.size(), 9u) << to_string(m);
  EXPECT_EQ(g.tool_version, std::string(kToolVersion));
}

TEST(Sweep, OneDimensional) {
  SweepSpec s;
  s.axis1 = {SweepParam::PhiBias, 0.1, 3.0, 7, {}};
  s.metrics = {Metric::Photocurrent};
  const auto g = run_sweep(s);
  EXPECT_EQ(g.cols(), 1u);
  for (std::size_t i = 1; i < g.rows(); ++i) EXPECT_LT(g.at(Metric::Photocurrent, i), g.at(Metric::Photocurrent, i - 1));
}

TEST(Sweep, GainPeaksOnResonance) {
  const auto g = run_sweep(ring_grid(41, 19, {Metric::Gain}));
  const auto [i, j] = g.argmax(Metric::Gain);
  EXPECT_NEAR(std::cos(g.x1[i]), 1.0, 1e-12);
  EXPECT_EQ(g.x2[j], 0.95);  // gamma1 = (1 + tau) / (1 - tau) grows toward the pole
  // every tau column peaks at theta_dc = 0 (or its 2 pi image)
  for (std::size_t c = 0; c < g.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < g.rows(); ++r)
      if (g.at(Metric::Gain, r, c) > g.at(Metric::Gain, best, c)) best = r;
    EXPECT_NEAR(std::cos(g.x1[best]), 1.0, 1e-12) << c;
  }
}

TEST(Sweep, NoiseFigureIsLowestWhereGainIsHighest) {
  // the surface has its NF minimum, not maximum, on the theta_dc = 0 edge:
  // both the detector term and 1/G fall as the gain rises
  const auto g = run_sweep(ring_grid(41, 19, {Metric::Gain, Metric::NF}));
  std::size_t lo = 0;
  const auto& nf = g.data.at(Metric::NF);
  for (std::size_t k = 1; k < nf.size(); ++k)
    if (nf[k] < nf[lo]) lo = k;
  EXPECT_EQ(g.argmax(Metric::Gain), std::make_pair(lo / g.cols(), lo % g.cols()));
  for (std::size_t c = 0; c < g.cols(); ++c)
    EXPECT_LT(g.at(Metric::NF, 0, c), g.at(Metric::NF, 20, c)) << c;
}

TEST(Sweep, DeterministicAndPartitionIndependent) {
  auto s = ring_grid(13, 11, {Metric::Gain, Metric::NF, Metric::SFDR, Metric::IIP3, Metric::NoisePSD});
  const auto a = run_sweep(s);
  const auto b = run_sweep(s);
  s.threads = 4;
  const auto c = run_sweep(s);
  s.threads = 7;
  const auto d = run_sweep(s);
  for (const auto& [m, v] : a.data) {
    for (const auto* other : {&b, &c, &d}) {
      const auto& w = other->data.at(m);
      ASSERT_EQ(v.size(), w.size());
      for (std::size_t k = 0; k < v.size(); ++k)
        EXPECT_TRUE(v[k] == w[k] || (std::isnan(v[k]) && std::isnan(w[k]))) << to_string(m) << " " << k;
    }
  }
}

TEST(Sweep, ArgmaxSameInDbAndLinear) {
  const auto g = run_sweep(ring_grid(21, 21, {Metric::SFDR}));
  SweepGrid lin = g;
  for (auto& v : lin.data.at(Metric::SFDR)) v = from_db(v);
  EXPECT_EQ(g.argmax(Metric::SFDR), lin.argmax(Metric::SFDR));
  const auto [i, j] = g.argmax(Metric::SFDR);
  EXPECT_NEAR(g.x1[i], kPi, 1e-12);
  EXPECT_NEAR(g.x2[j], 0.5, 1e-12);
}

TEST(Sweep, CellErrorsAreFlaggedNotFatal) {
  auto s = ring_grid(3, 4, {Metric::Gain});
  s.bias.alpha = 0.97;  // closed forms refuse lossy rings
  const auto g = run_sweep(s);
  EXPECT_EQ(g.cell_errors.size(), 12u);
  for (double v : g.data.at(Metric::Gain)) EXPECT_TRUE(std::isnan(v));
  EXPECT_NE(g.cell_errors.front().find("AlphaNotUnity"), std::string::npos);
  s.sfdr.source = CoefficientSource::Numeric;
  const auto n = run_sweep(s);
  EXPECT_TRUE(n.cell_errors.empty());
  for (double v : n.data.at(Metric::Gain)) EXPECT_TRUE(std::isfinite(v));
}

TEST(Sweep, SpecValidation) {
  auto s = ring_grid(3, 3, {Metric::Gain});
  s.axis1.count = 1;
  EXPECT_EQ(kind_of([&] { run_sweep(s); }), ErrorKind::InvalidArgument);
  s = ring_grid(3, 3, {Metric::Gain});
  s.axis2->start = 0.95;
  EXPECT_EQ(kind_of([&] { run_sweep(s); }), ErrorKind::InvalidArgument);
  s = ring_grid(3, 3, {Metric::Gain});
  s.axis2->param = SweepParam::ThetaDc;
  EXPECT_EQ(kind_of([&] { run_sweep(s); }), ErrorKind::InvalidArgument);
  s = ring_grid(3, 3, {});
  EXPECT_EQ(kind_of([&] { run_sweep(s); }), ErrorKind::InvalidArgument);
}

TEST(Sweep, LinkParametersAreSweepable) {
  SweepSpec s;
  s.axis1 = {SweepParam::ChannelLoss, 1.0, 4.0, 4, {}};
  s.axis2 = SweepAxis{SweepParam::VPi, 2.5, 5.0, 2, {}};
  s.metrics = {Metric::Gain, Metric::IIP3};
  s.bias = bias_presets::gain_enhanced();
  const auto g = run_sweep(s);
  EXPECT_NEAR(g.at(Metric::Gain, 0, 0) / g.at(Metric::Gain, 1, 0), 4.0, 1e-12);
  EXPECT_NEAR(g.at(Metric::Gain, 0, 0) / g.at(Metric::Gain, 0, 1), 4.0, 1e-12);
  EXPECT_NEAR(g.at(Metric::IIP3, 0, 1) / g.at(Metric::IIP3, 0, 0), 4.0, 1e-12);
}

TEST(Optimize, MaxSfdrFindsTheNull) {
  const auto r = optimize_bias(Objective::MaxSFDR, {}, {}, bias_presets::linearized(), reference_modulator(),
                               reference_link());
  // final refinement step is 1/8 of the coarse one; the result sits in that
  // last window, a hair up the null ridge from (pi, 1/2)
  const double dt = 2 * kPi / 16 / 8, du = 0.9 / 18 / 8;
  EXPECT_NEAR(r.bias.phi_bias, kPi / 2, 1e-12);
  EXPECT_NEAR(r.bias.theta_dc, kPi, 2 * dt + 1e-12);
  EXPECT_NEAR(r.bias.tau, 0.5, 2 * du + 1e-12);
  EXPECT_GE(r.objective, r.coarse_best);
  EXPECT_EQ(r.metrics.limiting_order(), LimitingOrder::Fifth);
  EXPECT_NEAR(r.objective, 128.0386, 0.01);
}

TEST(Optimize, MaxGainRunsToResonance) {
  const auto r = optimize_bias(Objective::MaxGain, {}, quadrature_only(), bias_presets::linearized(),
                               reference_modulator(), reference_link());
  EXPECT_EQ(r.bias.theta_dc, 0.0);
  EXPECT_EQ(r.bias.tau, 0.95);
  EXPECT_NEAR(r.metrics.gain_linear, r.objective, 0.0);
}

TEST(Optimize, MinNfMatchesMaxGainCorner) {
  const auto r = optimize_bias(Objective::MinNF, {}, quadrature_only(), bias_presets::linearized(),
                               reference_modulator(), reference_link());
  EXPECT_EQ(r.bias.theta_dc, 0.0);
  EXPECT_EQ(r.bias.tau, 0.95);
  EXPECT_EQ(r.objective, r.metrics.nf_db);
}

TEST(Optimize, TieBreakIsLexicographic) {
  // an MZM ignores the rings, so every (theta_dc, tau) ties at phi = pi/2
  const auto r = optimize_bias(Objective::MaxGain, {}, {}, bias_presets::linearized(),
                               reference_modulator(Drive::MzmSingle), reference_link());
  EXPECT_NEAR(r.bias.phi_bias, kPi / 2, 1e-15);
  EXPECT_EQ(r.bias.theta_dc, 0.0);
  EXPECT_EQ(r.bias.tau, 0.05);
}

TEST(Optimize, GainFloorGolden) {
  // +3 dB over the linearized gain excludes the null. The refined point was
  // confirmed independently (tools/oracle/sfdr_ridge.py: 127.3495759).
  const auto mod = reference_modulator();
  const auto link = reference_link();
  Constraints c;
  c.min_gain = from_db(3.0) * link_gain(bias_presets::linearized(), mod, link);
  const auto r = optimize_bias(Objective::MaxSFDR, c, quadrature_only(), bias_presets::linearized(), mod, link);
  EXPECT_NEAR(r.bias.theta_dc, 1.421875 * kPi, 1e-12);
  EXPECT_NEAR(r.bias.tau, 0.5, 1e-12);
  EXPECT_NEAR(r.objective, 127.349575741, 1e-6);
  EXPECT_NEAR(r.objective, 127.3495759, 1e-6);
  EXPECT_EQ(r.evaluations, 923);
  EXPECT_GE(r.metrics.gain_linear, *c.min_gain);
  EXPECT_EQ(r.metrics.limiting_order(), LimitingOrder::Third);
  EXPECT_GE(r.objective, r.coarse_best);

  // refinement soundness: an exhaustive local scan may beat the result, but
  // by less than the metric varies across one final refinement cell
  const double dt = 2 * kPi / 16 / 8, du = 0.9 / 18 / 8;
  auto eval = [&](double th, double tau) {
    const BiasPoint b{kPi / 2, th, tau, 1.0, 0.0};
    return link_gain(b, mod, link) >= *c.min_gain ? sfdr(b, mod, link).sfdr_db : -kInf;
  };
  double variation = 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      const double v = eval(r.bias.theta_dc + i * dt, r.bias.tau + j * du);
      if (std::isfinite(v)) variation = std::max(variation, std::fabs(v - r.objective));
    }
  double exhaustive = -kInf;
  const int n = 21;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      exhaustive = std::max(exhaustive, eval(r.bias.theta_dc + dt * (4.0 * i / (n - 1) - 2),
                                             r.bias.tau + du * (4.0 * j / (n - 1) - 2)));
  EXPECT_LE(exhaustive - r.objective, variation);
}

TEST(Optimize, DeeperRefinementClimbsTheRidge) {
  const auto mod = reference_modulator();
  const auto link = reference_link();
  Constraints c;
  c.min_gain = from_db(3.0) * link_gain(bias_presets::linearized(), mod, link);
  OptimizerSettings deep;
  deep.levels = 10;
  const auto r = optimize_bias(Objective::MaxSFDR, c, quadrature_only(), bias_presets::linearized(), mod, link, {},
                               deep);
  EXPECT_GT(r.objective, 127.349575741);
  EXPECT_NEAR(r.objective, 127.903036781, 1e-6);
}

TEST(Optimize, InfeasibleAndBadBounds) {
  Constraints c;
  c.min_gain = 1e6;
  EXPECT_EQ(kind_of([&] {
              optimize_bias(Objective::MaxGain, c, quadrature_only(), bias_presets::linearized(), reference_modulator(),
                            reference_link());
            }),
            ErrorKind::Infeasible);
  BiasBounds b;
  b.tau = {0.5, 1.0};
  EXPECT_EQ(kind_of([&] {
              optimize_bias(Objective::MaxGain, {}, b, bias_presets::linearized(), reference_modulator(), reference_link());
            }),
            ErrorKind::InvalidArgument);
}

TEST(Optimize, PhotocurrentCap) {
  Constraints c;
  c.max_photocurrent = 0.5e-3;
  const auto r = optimize_bias(Objective::MaxGain, c, {}, bias_presets::linearized(), reference_modulator(),
                               reference_link());
  EXPECT_LE(r.metrics.avg_photocurrent, 0.5e-3);
  EXPECT_GT(r.bias.phi_bias, kPi / 2);
}

TEST(NullBias, GainAdvantageAlongSaturationCurve) {
  SweepAxis p_axis{SweepParam::PLaser, dbm_to_watts(25), dbm_to_watts(30), 2, {dbm_to_watts(25), dbm_to_watts(30)}};
  SweepAxis phi_axis{SweepParam::PhiBias, kPi / 2, kPi, 5, {}};
  const auto r = null_bias_analysis(reference_link(), reference_modulator(), bias_presets::linearized(), p_axis, phi_axis);
  ASSERT_EQ(r.curve.size(), 2u);
  ASSERT_TRUE(r.curve[0].valid && r.curve[1].valid);
  EXPECT_GT(to_db(r.curve[1].gain / r.curve[0].gain), 6.0);
  EXPECT_GT(r.curve[1].phi_bias, r.curve[0].phi_bias);
  EXPECT_EQ(r.target_current, 15.5e-3);
  EXPECT_EQ(r.gain.rows(), 5u);
  EXPECT_EQ(r.gain.cols(), 2u);
}

TEST(NullBias, IsoCurrentCurveIsExact) {
  std::vector<double> p;
  for (int i = 0; i <= 20; ++i) p.push_back(dbm_to_watts(10 + i));
  SweepAxis p_axis{SweepParam::PLaser, p.front(), p.back(), 21, p};
  SweepAxis phi_axis{SweepParam::PhiBias, kPi / 2, kPi, 3, {}};
  const auto r = null_bias_analysis(reference_link(), reference_modulator(), bias_presets::linearized(), p_axis, phi_axis);
  int valid = 0;
  for (const auto& pt : r.curve) {
    // even at phi = 0 the current is r_d P / L, so 15.5 mA needs 141 mW
    EXPECT_EQ(pt.valid, pt.p_laser >= 10 * 15.5e-3 / 1.1);
    if (!pt.valid) continue;
    ++valid;
    EXPECT_NEAR(pt.photocurrent / 15.5e-3, 1.0, 1e-12);
  }
  EXPECT_EQ(valid, 9);  // 22..30 dBm
}

TEST(NullBias, ZeroTargetMeansFullNull) {
  for (double dbm : {10.0, 20.0, 30.0})
    EXPECT_EQ(iso_current_phi(dbm_to_watts(dbm), 0.0, reference_modulator(), reference_link()), kPi);
  EXPECT_EQ(kind_of([] { iso_current_phi(1e-3, 15.5e-3, reference_modulator(), reference_link()); }), ErrorKind::NoSolution);
  EXPECT_EQ(kind_of([] { iso_current_phi(1e-3, -1.0, reference_modulator(), reference_link()); }), ErrorKind::InvalidArgument);
}
