#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "idp/format.hpp"
#include "idp/systems.hpp"

namespace idp {

namespace {

constexpr double kRoundoffGuard = 1e-13;
// A few ulps of headroom on the returned speed; the closed forms are not
// correctly rounded.
constexpr double kOutwardRounding = 8.0 * std::numeric_limits<double>::epsilon();

}  // namespace

EulerModel::EulerModel(double gamma, int dim) : gamma_(gamma), dim_(dim) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw Error("euler: gamma must be > 1, got " + format_double(gamma));
  if (dim != 1 && dim != 2) throw Error("euler: dimension must be 1 or 2");
}

std::vector<std::string> EulerModel::component_names() const {
  if (dim_ == 1) return {"rho", "m", "E"};
  return {"rho", "m_x", "m_y", "E"};
}

State EulerModel::from_primitive(double rho, const Vec& velocity, double p) const {
  State u{};
  u[0] = rho;
  double kinetic = 0.0;
  for (int l = 0; l < dim_; ++l) {
    u[1 + l] = rho * velocity[l];
    kinetic += 0.5 * rho * velocity[l] * velocity[l];
  }
  u[dim_ + 1] = p / (gamma_ - 1.0) + kinetic;
  return u;
}

double EulerModel::internal_energy(const State& u) const {
  double m2 = 0.0;
  for (int l = 0; l < dim_; ++l) m2 += u[1 + l] * u[1 + l];
  return u[dim_ + 1] - 0.5 * m2 / u[0];
}

double EulerModel::pressure(const State& u) const { return (gamma_ - 1.0) * internal_energy(u); }

double EulerModel::specific_entropy(const State& u) const {
  require_admissible(u);
  return std::log(pressure(u)) - gamma_ * std::log(u[0]);
}

std::optional<std::string> EulerModel::admissibility_violation(const State& u) const {
  for (int k = 0; k < components(); ++k) {
    if (!std::isfinite(u[k])) return "state is not finite";
  }
  if (!(u[0] > 0.0)) return "density rho = " + format_double(u[0]) + " is not positive";
  const double e = internal_energy(u);
  if (!(e > 0.0)) return "internal energy e = " + format_double(e) + " is not positive";
  return std::nullopt;
}

Flux EulerModel::flux(const State& u) const {
  require_admissible(u);
  const double rho = u[0];
  const double p = pressure(u);
  const double energy = u[dim_ + 1];
  Flux f{};
  Vec vel{};
  for (int l = 0; l < dim_; ++l) vel[l] = u[1 + l] / rho;
  for (int l = 0; l < dim_; ++l) f[0][l] = u[1 + l];
  for (int k = 0; k < dim_; ++k) {
    for (int l = 0; l < dim_; ++l) f[1 + k][l] = u[1 + k] * vel[l] + (k == l ? p : 0.0);
  }
  for (int l = 0; l < dim_; ++l) f[dim_ + 1][l] = vel[l] * (energy + p);
  return f;
}

ProjectedState EulerModel::project(const Vec& n, const State& u) const {
  if (!(u[0] > 0.0)) throw InadmissibleState("euler: density must be positive to project a state");
  double mn = 0.0, m2 = 0.0;
  for (int l = 0; l < dim_; ++l) {
    mn += u[1 + l] * n[l];
    m2 += u[1 + l] * u[1 + l];
  }
  const double perp2 = std::max(0.0, m2 - mn * mn);
  return {u[0], mn, u[dim_ + 1] - 0.5 * perp2 / u[0]};
}

double EulerModel::phi(double p, double rhoL, double uL, double pL, double rhoR, double uR, double pR) const {
  auto wave = [&](double rho, double pz) {
    if (p >= pz) {
      const double A = 2.0 / ((gamma_ + 1.0) * rho);
      const double B = (gamma_ - 1.0) / (gamma_ + 1.0) * pz;
      return (p - pz) * std::sqrt(A / (p + B));
    }
    const double a = std::sqrt(gamma_ * pz / rho);
    return 2.0 * a / (gamma_ - 1.0) * (std::pow(p / pz, (gamma_ - 1.0) / (2.0 * gamma_)) - 1.0);
  };
  return wave(rhoL, pL) + wave(rhoR, pR) + uR - uL;
}

StarPressure EulerModel::star_pressure(double rhoL, double uL, double pL, double rhoR, double uR,
                                       double pR) const {
  const auto wave_derivative = [&](double p, double rho, double pz) {
    if (p >= pz) {
      const double A = 2.0 / ((gamma_ + 1.0) * rho);
      const double B = (gamma_ - 1.0) / (gamma_ + 1.0) * pz;
      return std::sqrt(A / (p + B)) * (1.0 - 0.5 * (p - pz) / (p + B));
    }
    const double a = std::sqrt(gamma_ * pz / rho);
    return std::pow(p / pz, -(gamma_ + 1.0) / (2.0 * gamma_)) / (rho * a);
  };
  const auto f = [&](double p) { return phi(p, rhoL, uL, pL, rhoR, uR, pR); };
  const auto df = [&](double p) { return wave_derivative(p, rhoL, pL) + wave_derivative(p, rhoR, pR); };

  StarPressure out;
  const double aL = std::sqrt(gamma_ * pL / rhoL), aR = std::sqrt(gamma_ * pR / rhoR);
  out.vacuum = !(uR - uL < 2.0 * aL / (gamma_ - 1.0) + 2.0 * aR / (gamma_ - 1.0));
  const double p_min = std::min(pL, pR), p_max = std::max(pL, pR);
  double f_min = f(p_min);
  if (f_min > 0.0) {
    // Two rarefactions, p* < min(pL, pR): the extreme speeds do not depend on p*.
    out.fast_path = true;
    out.upper = p_min;
    out.lower = 0.0;
    return out;
  }
  double lo = p_min, f_lo = f_min;
  double hi = p_max, f_hi = f(p_max);
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = f(hi);
  }
  // phi is increasing and concave: Newton from the left and the chord of the
  // bracket both land on the correct side of p*. Each step is checked
  // against the sign of phi; rejected steps fall back to bisection.
  int it = 0;
  for (; it < kMaxIterations && hi - lo > kRelativeTolerance * hi && f_lo < 0.0 && f_hi > 0.0; ++it) {
    bool moved = false;
    const double newton = lo - f_lo / df(lo);
    if (newton > lo && newton < hi) {
      const double fn = f(newton);
      if (fn <= 0.0) {
        lo = newton;
        f_lo = fn;
      } else {
        hi = newton;
        f_hi = fn;
      }
      moved = true;
    }
    const double chord = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if (f_lo < 0.0 && chord > lo && chord < hi) {
      const double fc = f(chord);
      if (fc >= 0.0) {
        hi = chord;
        f_hi = fc;
      } else {
        lo = chord;
        f_lo = fc;
      }
      moved = true;
    }
    if (!moved) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      (fm <= 0.0 ? lo : hi) = mid;
      (fm <= 0.0 ? f_lo : f_hi) = fm;
    }
  }
  // Bisection on the certified bracket if the safeguarded iteration stalled.
  for (int extra = 0; extra < 200 && hi - lo > kRelativeTolerance * hi && f_lo < 0.0 && f_hi > 0.0; ++extra) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    (fm <= 0.0 ? lo : hi) = mid;
    (fm <= 0.0 ? f_lo : f_hi) = fm;
  }
  out.iterations = it;
  out.lower = lo;
  out.upper = f_lo == 0.0 ? lo : hi * (1.0 + kRoundoffGuard);
  return out;
}

double EulerModel::shock_speed_factor(double p_star, double p) const {
  const double excess = std::max(0.0, (p_star - p) / p);
  return std::sqrt(1.0 + (gamma_ + 1.0) / (2.0 * gamma_) * excess);
}

double EulerModel::lambda_max_1d(double rhoL, double uL, double pL, double rhoR, double uR, double pR) const {
  const double aL = std::sqrt(gamma_ * pL / rhoL), aR = std::sqrt(gamma_ * pR / rhoR);
  const auto star = star_pressure(rhoL, uL, pL, rhoR, uR, pR);
  if (star.fast_path) return std::max(std::abs(uL - aL), std::abs(uR + aR)) * (1.0 + kOutwardRounding);
  const double lambda1 = uL - aL * shock_speed_factor(star.upper, pL);
  const double lambda3 = uR + aR * shock_speed_factor(star.upper, pR);
  return std::max(std::abs(lambda1), std::abs(lambda3)) * (1.0 + kOutwardRounding);
}

double EulerModel::max_wave_speed(const Vec& n, const State& cL, const State& cR) const {
  require_admissible(cL);
  require_admissible(cR);
  const auto L = project(n, cL), R = project(n, cR);
  const double uL = L.m / L.rho, uR = R.m / R.rho;
  const double pL = (gamma_ - 1.0) * (L.energy - 0.5 * L.m * uL);
  const double pR = (gamma_ - 1.0) * (R.energy - 0.5 * R.m * uR);
  if (!(pL > 0.0) || !(pR > 0.0)) throw InadmissibleState("euler: nonpositive pressure in projected state");
  // The mirrored problem has the same speeds; solve whichever ordering comes
  // first so that the result is invariant under (n, cL, cR) -> (-n, cR, cL).
  if (std::tuple(L.rho, uL, pL) <= std::tuple(R.rho, -uR, pR)) return lambda_max_1d(L.rho, uL, pL, R.rho, uR, pR);
  return lambda_max_1d(R.rho, -uR, pR, L.rho, -uL, pL);
}

EntropyPair EulerModel::entropy(const State& u) const {
  const double s = specific_entropy(u);
  EntropyPair pair;
  pair.eta = -u[0] * s / (gamma_ - 1.0);
  for (int l = 0; l < dim_; ++l) pair.q[l] = pair.eta * u[1 + l] / u[0];
  return pair;
}

std::vector<InvariantFunctional> EulerModel::invariant_functionals() const {
  return {{"rho", false}, {"internal_energy", false}, {"specific_entropy", true}};
}

void EulerModel::invariant_values(const State& u, std::span<double> out) const {
  out[0] = u[0];
  out[1] = internal_energy(u);
  out[2] = (u[0] > 0.0 && out[1] > 0.0) ? std::log((gamma_ - 1.0) * out[1]) - gamma_ * std::log(u[0])
                                        : -std::numeric_limits<double>::infinity();
}

bool in_euler_set(const EulerModel& model, const State& u, double r) {
  constexpr double tol = 1e-11;
  if (u[0] < -tol) return false;
  const double e = model.internal_energy(u);
  if (e < -tol) return false;
  if (!(u[0] > 0.0) || !(e > 0.0)) return r == -std::numeric_limits<double>::infinity();
  const double s = std::log((model.gamma() - 1.0) * e) - model.gamma() * std::log(u[0]);
  return s >= r - tol;
}

}  // namespace idp
