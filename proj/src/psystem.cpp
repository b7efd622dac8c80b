#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "idp/format.hpp"
#include "idp/systems.hpp"

namespace idp {

namespace {

constexpr double kBracketTolerance = 1e-10;
constexpr int kMaxIterations = 100;
// Relative guard applied to the certified bracket end so that round-off in
// the final phi evaluation cannot place it on the wrong side of the root.
constexpr double kRoundoffGuard = 1e-13;
constexpr double kOutwardRounding = 8.0 * std::numeric_limits<double>::epsilon();

}  // namespace

PSystemModel::PSystemModel(double r, double gamma) : r_(r), gamma_(gamma) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error("psystem: r must be positive, got " + format_double(r));
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw Error("psystem: gamma must be >= 1, got " + format_double(gamma));
  }
  if (gamma <= 8.0 && gamma == std::floor(gamma)) integer_gamma_ = static_cast<int>(gamma);
}

double PSystemModel::inverse_power(double v) const {
  if (integer_gamma_ == 0) return std::pow(v, -gamma_);
  double power = v;
  for (int k = 1; k < integer_gamma_; ++k) power *= v;
  return 1.0 / power;
}

double PSystemModel::pressure(double v) const { return r_ * inverse_power(v); }

double PSystemModel::pressure_derivative(double v) const { return -gamma_ * r_ * inverse_power(v) / v; }

double PSystemModel::sound_speed(double v) const { return std::sqrt(gamma_ * r_ * inverse_power(v) / v); }

double PSystemModel::rarefaction_factor() const { return 2.0 * std::sqrt(gamma_ * r_) / (gamma_ - 1.0); }

double PSystemModel::speed_integral(double a, double b) const {
  if (gamma_ == 1.0) return std::sqrt(r_) * std::log(b / a);
  const double k = 0.5 * (gamma_ - 1.0);
  const double tail_b = std::isinf(b) ? 0.0 : std::pow(b, -k);
  return rarefaction_factor() * (std::pow(a, -k) - tail_b);
}

RiemannInvariants PSystemModel::riemann_invariants(double v, double u) const {
  if (!(v > 0.0)) throw InadmissibleState("psystem: specific volume must be positive, got " + format_double(v));
  if (gamma_ == 1.0) {
    const double s = std::sqrt(r_) * std::log(v);
    return {u - s, u + s};
  }
  const double s = speed_integral(v, std::numeric_limits<double>::infinity());
  return {u + s, u - s};
}

double PSystemModel::initial_volume_guess(double vL, double uL, double vR, double uR) const {
  const auto left = riemann_invariants(vL, uL);
  const auto right = riemann_invariants(vR, uR);
  const double w1_max = std::max(left.w1, right.w1);
  const double w2_min = std::min(left.w2, right.w2);
  const double spread = w1_max - w2_min;
  if (!(spread > 0.0)) throw InadmissibleState("psystem: w1_max <= w2_min, inadmissible Riemann pair");
  const double v0 = gamma_ == 1.0 ? std::exp(-spread / (2.0 * std::sqrt(r_)))
                                  : std::pow(gamma_ * r_, 1.0 / (gamma_ - 1.0)) *
                                        std::pow(4.0 / ((gamma_ - 1.0) * spread), 2.0 / (gamma_ - 1.0));
  return v0 * (1.0 - kOutwardRounding);
}

double PSystemModel::phi(double v, double vL, double uL, double vR, double uR) const {
  auto wave = [&](double vz) {
    if (v <= vz) return -std::sqrt((pressure(v) - pressure(vz)) * (vz - v));
    return speed_integral(vz, v);
  };
  return wave(vL) + wave(vR) + uL - uR;
}

double PSystemModel::phi_derivative(double v, double vL, double vR) const {
  auto wave = [&](double vz) {
    if (v >= vz) return sound_speed(v);
    const double jump = pressure(v) - pressure(vz);
    const double g = jump * (vz - v);
    const double dg = pressure_derivative(v) * (vz - v) - jump;
    return -dg / (2.0 * std::sqrt(g));
  };
  return wave(vL) + wave(vR);
}

double PSystemModel::lambda_max(double vL, double uL, double vR, double uR) const {
  if (!(vL > 0.0) || !(vR > 0.0) || !std::isfinite(vL) || !std::isfinite(vR)) {
    throw InadmissibleState("psystem: nonpositive or infinite specific volume");
  }
  const double v_min = std::min(vL, vR);
  // phi(min(vL, vR)) in closed form; it is >= 0 exactly when both waves are shocks.
  const double pL = pressure(vL), pR = pressure(vR);
  const double phi_min = uL - uR - std::sqrt(std::max(0.0, (vL - vR) * (pR - pL)));
  if (phi_min <= 0.0) return std::sqrt(gamma_ * (vL < vR ? pL / vL : pR / vR)) * (1.0 + kOutwardRounding);

  // Two shocks: v* <= v_min and the bound is sqrt(-p'(v_hat)) with v_hat <= v*.
  // On (0, v_min] both waves are shocks, so phi and phi' share one p(v).
  // phi is increasing and convex: Newton steps from the right stay >= v*
  // and underestimate the distance to it, so a probe twice the Newton step
  // below the upper end usually certifies a lower end. Every update is
  // checked against the sign of phi; bisection covers the rest.
  const auto eval = [&](double v, double& slope) {
    const double pv = pressure(v);
    const double dp = -gamma_ * pv / v;
    double value = uL - uR;
    slope = 0.0;
    for (const auto& [vz, pz] : {std::pair{vL, pL}, std::pair{vR, pR}}) {
      const double g = (pv - pz) * (vz - v);
      if (g > 0.0) {
        const double root = std::sqrt(g);
        value -= root;
        slope -= (dp * (vz - v) - (pv - pz)) / (2.0 * root);
      } else {
        slope += std::sqrt(-dp);
      }
    }
    return value;
  };
  double slope = 0.0;
  double hi = v_min;
  double f_hi = phi_min;
  double df_hi = 0.0;
  eval(hi, df_hi);
  double lo = initial_volume_guess(vL, uL, vR, uR);
  double f_lo = eval(lo, slope);
  while (f_lo > 0.0) {
    lo *= 0.5;
    f_lo = eval(lo, slope);
  }
  const auto accept = [&](double v) {
    const double f = eval(v, slope);
    if (f <= 0.0) {
      lo = v;
      f_lo = f;
    }
    if (f >= 0.0) {
      hi = v;
      f_hi = f;
      df_hi = slope;
    }
  };
  for (int it = 0; it < kMaxIterations && hi - lo > kBracketTolerance * hi && f_lo < 0.0 && f_hi > 0.0; ++it) {
    bool moved = false;
    const double newton = hi - f_hi / df_hi;
    if (newton > lo && newton < hi) {
      accept(newton);
      moved = true;
    }
    if (hi - lo <= kBracketTolerance * hi || f_lo == 0.0 || f_hi == 0.0) break;
    const double probe = hi - 2.0 * f_hi / df_hi;
    if (probe > lo && probe < hi) {
      accept(probe);
      moved = true;
    }
    if (!moved) accept(0.5 * (lo + hi));
  }
  if (f_hi == 0.0) lo = hi;
  return sound_speed(lo * (1.0 - kRoundoffGuard)) * (1.0 + kOutwardRounding);
}

std::optional<std::string> PSystemModel::admissibility_violation(const State& u) const {
  if (!std::isfinite(u[0]) || !std::isfinite(u[1])) return "state is not finite";
  if (!(u[0] > 0.0)) return "specific volume v = " + format_double(u[0]) + " is not positive";
  return std::nullopt;
}

Flux PSystemModel::flux(const State& u) const {
  require_admissible(u);
  Flux f{};
  f[0] = {-u[1], 0.0};
  f[1] = {pressure(u[0]), 0.0};
  return f;
}

double PSystemModel::max_wave_speed(const Vec& n, const State& uL, const State& uR) const {
  // Along -x the Riemann problem is the mirror image of (uR, uL) along +x.
  if (n[0] >= 0.0) return lambda_max(uL[0], uL[1], uR[0], uR[1]);
  return lambda_max(uR[0], uR[1], uL[0], uL[1]);
}

EntropyPair PSystemModel::entropy(const State& u) const {
  require_admissible(u);
  const double v = u[0], vel = u[1];
  const double internal = gamma_ == 1.0 ? -r_ * std::log(v) : r_ * std::pow(v, 1.0 - gamma_) / (gamma_ - 1.0);
  return {0.5 * vel * vel + internal, {vel * pressure(v), 0.0}};
}

std::vector<InvariantFunctional> PSystemModel::invariant_functionals() const {
  return {{"w2_min", true}, {"w1_max", true}};
}

void PSystemModel::invariant_values(const State& u, std::span<double> out) const {
  const auto w = riemann_invariants(u[0], u[1]);
  out[0] = w.w2;
  out[1] = -w.w1;
}

bool in_psystem_set(const PSystemModel& model, double v, double u, double a, double b) {
  const auto w = model.riemann_invariants(v, u);
  return a <= w.w2 + 1e-11 && w.w1 <= b + 1e-11;
}

}  // namespace idp
