// Follows the third-order null curve through (theta_dc, tau) and prints the
// SFDR along it. The null is a curve, not a point; the fifth-order limited
// SFDR varies along it, which is why a fine grid's maximum lands on the
// curve away from theta_dc = pi.
//   demo_linearization_ridge

#include <cstdio>
#include <optional>

#include "ramzm/ramzm.hpp"

using namespace ramzm;

namespace {

// tau in (0, 1) with a vanishing third-order bracket, nearest 1/2
std::optional<double> null_tau(double theta) {
  std::optional<double> best;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    double lo = double(i) / n, hi = double(i + 1) / n;
    double flo = third_order_bracket(theta, lo);
    if ((flo > 0) == (third_order_bracket(theta, hi) > 0)) continue;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double fm = third_order_bracket(theta, mid);
      if ((fm > 0) == (flo > 0)) lo = mid, flo = fm;
      else hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    if (!best || std::abs(t - 0.5) < std::abs(*best - 0.5)) best = t;
  }
  return best;
}

}  // namespace

int main() {
  const auto mod = reference_modulator();
  const auto link = reference_link();

  std::printf("%10s %10s %12s %10s\n", "theta/pi", "tau", "SFDR", "gain dB");
  double best_sfdr = -kInf, best_theta = 0, best_tau = 0;
  for (int i = 0; i <= 100; ++i) {
    const double th = kPi * (0.5 + 0.01 * i);
    const auto tau = null_tau(th);
    if (!tau || *tau < 0.05 || *tau > 0.95) continue;
    const BiasPoint b{kPi / 2, th, *tau, 1.0, 0.0};
    const double s = sfdr(b, mod, link).sfdr_db;
    if (s > best_sfdr) best_sfdr = s, best_theta = th, best_tau = *tau;
    if (i % 4 == 0) std::printf("%10.3f %10.6f %12.6f %10.3f\n", th / kPi, *tau, s, to_db(link_gain(b, mod, link)));
  }
  std::printf("\nhighest on the null curve: theta %.3f pi, tau %.6f, SFDR %.6f\n", best_theta / kPi, best_tau,
              best_sfdr);
  std::printf("at (pi, 0.5):                                   SFDR %.6f\n",
              sfdr(bias_presets::linearized(), mod, link).sfdr_db);

  BiasBounds bounds;
  bounds.phi_bias = {kPi / 2, kPi / 2};
  const auto opt = optimize_bias(Objective::MaxSFDR, {}, bounds, bias_presets::linearized(), mod, link);
  std::printf("optimizer (default settings): theta %.6f pi, tau %.6f, SFDR %.6f, %d evaluations\n",
              opt.bias.theta_dc / kPi, opt.bias.tau, opt.objective, opt.evaluations);
}
