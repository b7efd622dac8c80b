#pragma once

// Reference wave speeds computed from scratch by bisection in long double.
// Nothing here calls into the solver library.

#include <algorithm>
#include <cmath>

namespace oracle {

using real = long double;

template <class F>
real bisect(const F& f, real lo, real hi, int iterations = 200) {
  for (int it = 0; it < iterations; ++it) {
    const real mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) <= 0 ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// p(v) = r v^-gamma; speeds +-sqrt(-p'(v)).
struct PSystem {
  real r, gamma;

  real p(real v) const { return r * std::pow(v, -gamma); }
  real c(real v) const { return std::sqrt(gamma * r * std::pow(v, -gamma - 1)); }
  real wave(real v, real vz) const {
    if (v <= vz) return -std::sqrt((p(v) - p(vz)) * (vz - v));
    const real k = 0.5L * (gamma - 1);
    return 2 * std::sqrt(gamma * r) / (gamma - 1) * (std::pow(vz, -k) - std::pow(v, -k));
  }
  real phi(real v, real vL, real uL, real vR, real uR) const { return wave(v, vL) + wave(v, vR) + uL - uR; }

  // Root of phi, or +infinity when phi stays negative (vacuum).
  real star_volume(real vL, real uL, real vR, real uR) const {
    const auto f = [&](real v) { return phi(v, vL, uL, vR, uR); };
    real lo = std::min(vL, vR), hi = std::max(vL, vR);
    while (f(lo) > 0) lo *= 0.5L;
    while (f(hi) < 0) {
      hi *= 2;
      if (hi > 1e300L) return INFINITY;
    }
    return bisect(f, lo, hi);
  }

  // sqrt(-p'(v*)) when v* <= min(vL, vR), else sqrt(-p'(min(vL, vR))).
  real lambda_max(real vL, real uL, real vR, real uR) const {
    const real v_min = std::min(vL, vR);
    if (phi(v_min, vL, uL, vR, uR) <= 0) return c(v_min);
    return c(star_volume(vL, uL, vR, uR));
  }
};

struct Euler {
  real gamma;

  real wave(real p, real rho, real pz) const {
    if (p >= pz) {
      const real A = 2 / ((gamma + 1) * rho), B = (gamma - 1) / (gamma + 1) * pz;
      return (p - pz) * std::sqrt(A / (p + B));
    }
    const real a = std::sqrt(gamma * pz / rho);
    return 2 * a / (gamma - 1) * (std::pow(p / pz, (gamma - 1) / (2 * gamma)) - 1);
  }
  real phi(real p, real rhoL, real uL, real pL, real rhoR, real uR, real pR) const {
    return wave(p, rhoL, pL) + wave(p, rhoR, pR) + uR - uL;
  }

  real star_pressure(real rhoL, real uL, real pL, real rhoR, real uR, real pR) const {
    const auto f = [&](real p) { return phi(p, rhoL, uL, pL, rhoR, uR, pR); };
    if (f(0) >= 0) return 0;
    real hi = std::max(pL, pR);
    while (f(hi) < 0) hi *= 2;
    return bisect(f, 0, hi, 400);
  }

  real lambda_max(real rhoL, real uL, real pL, real rhoR, real uR, real pR) const {
    const real ps = star_pressure(rhoL, uL, pL, rhoR, uR, pR);
    const real aL = std::sqrt(gamma * pL / rhoL), aR = std::sqrt(gamma * pR / rhoR);
    const real k = (gamma + 1) / (2 * gamma);
    const real l1 = uL - aL * std::sqrt(1 + k * std::max<real>(0, (ps - pL) / pL));
    const real l3 = uR + aR * std::sqrt(1 + k * std::max<real>(0, (ps - pR) / pR));
    return std::max(std::abs(l1), std::abs(l3));
  }
};

}  // namespace oracle
