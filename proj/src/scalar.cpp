#include <algorithm>
#include <numbers>

#include "idp/format.hpp"
#include "idp/systems.hpp"

namespace idp {

void HyperbolicSystem::require_admissible(const State& u, long node) const {
  if (auto violation = admissibility_violation(u)) throw InadmissibleState(name() + ": " + *violation, node);
}

namespace {

// Adaptive Simpson quadrature of a scalar integrand on [a, b].
template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

ScalarModel::ScalarModel(std::string name, int dim, Callbacks callbacks)
    : name_(std::move(name)), dim_(dim), callbacks_(std::move(callbacks)) {
  if (dim_ != 1 && dim_ != 2) throw Error("scalar model: dimension must be 1 or 2");
  if (!callbacks_.flux) throw Error("scalar model: flux callback is required");
  if (callbacks_.genuinely_nonlinear && !callbacks_.derivative) {
    throw Error("scalar model: the convex-flux wave speed needs a derivative");
  }
}

std::optional<std::string> ScalarModel::admissibility_violation(const State& u) const {
  if (!std::isfinite(u[0])) return "state is not finite";
  return std::nullopt;
}

Flux ScalarModel::flux(const State& u) const {
  require_admissible(u);
  Flux f{};
  f[0] = callbacks_.flux(u[0]);
  return f;
}

double ScalarModel::normal_derivative(const Vec& n, double u) const {
  if (callbacks_.derivative) return dot(n, callbacks_.derivative(u));
  const double step = 1e-6 * std::max(1.0, std::abs(u));
  return (dot(n, callbacks_.flux(u + step)) - dot(n, callbacks_.flux(u - step))) / (2.0 * step);
}

double ScalarModel::lambda_max(const Vec& n, double uL, double uR) const {
  if (!std::isfinite(uL) || !std::isfinite(uR)) throw InadmissibleState(name_ + ": NaN or infinite Riemann data");
  const double lo = std::min(uL, uR), hi = std::max(uL, uR);
  if (callbacks_.lipschitz_bound) return callbacks_.lipschitz_bound(n, lo, hi);
  if (callbacks_.genuinely_nonlinear) {
    const double sL = normal_derivative(n, uL), sR = normal_derivative(n, uR);
    if (sL <= sR) return std::max(std::abs(sL), std::abs(sR));  // rarefaction
    return std::abs(dot(n, callbacks_.flux(uL)) - dot(n, callbacks_.flux(uR))) / std::abs(uL - uR);
  }
  // Heuristic for user fluxes without further structure: dense sampling of
  // |n . f'| over [lo, hi], inflated.
  double bound = 0.0;
  for (int s = 0; s < kLipschitzSamples; ++s) {
    const double u = lo + (hi - lo) * s / (kLipschitzSamples - 1);
    bound = std::max(bound, std::abs(normal_derivative(n, u)));
  }
  return kLipschitzInflation * bound;
}

double ScalarModel::max_wave_speed(const Vec& n, const State& uL, const State& uR) const {
  return lambda_max(n, uL[0], uR[0]);
}

Vec ScalarModel::entropy_flux(double u) const {
  if (callbacks_.entropy_flux) return callbacks_.entropy_flux(u);
  // q(u) = int_0^u s f'(s) ds = u f(u) - int_0^u f(s) ds.
  const Vec fu = callbacks_.flux(u);
  Vec q{};
  for (int l = 0; l < dim_; ++l) {
    const double area = integrate([&](double s) { return callbacks_.flux(s)[l]; }, 0.0, u, 1e-10);
    q[l] = u * fu[l] - area;
  }
  return q;
}

EntropyPair ScalarModel::entropy(const State& u) const {
  require_admissible(u);
  return {0.5 * u[0] * u[0], entropy_flux(u[0])};
}

std::vector<InvariantFunctional> ScalarModel::invariant_functionals() const {
  return {{"u_min", true}, {"u_max", true}};
}

void ScalarModel::invariant_values(const State& u, std::span<double> out) const {
  out[0] = u[0];
  out[1] = -u[0];
}

bool in_interval(double u, double a, double b) { return u >= a - 1e-11 && u <= b + 1e-11; }

std::shared_ptr<ScalarModel> make_linear_advection(const Vec& velocity, int dim) {
  ScalarModel::Callbacks cb;
  cb.flux = [velocity](double u) { return u * velocity; };
  cb.derivative = [velocity](double) { return velocity; };
  cb.entropy_flux = [velocity](double u) { return (0.5 * u * u) * velocity; };
  cb.lipschitz_bound = [velocity](const Vec& n, double, double) { return std::abs(dot(n, velocity)); };
  return std::make_shared<ScalarModel>("linear", dim, std::move(cb));
}

std::shared_ptr<ScalarModel> make_burgers() {
  ScalarModel::Callbacks cb;
  cb.flux = [](double u) { return Vec{0.5 * u * u, 0.0}; };
  cb.derivative = [](double u) { return Vec{u, 0.0}; };
  cb.entropy_flux = [](double u) { return Vec{u * u * u / 3.0, 0.0}; };
  cb.genuinely_nonlinear = true;
  return std::make_shared<ScalarModel>("burgers", 1, std::move(cb));
}

std::shared_ptr<ScalarModel> make_kpp() {
  ScalarModel::Callbacks cb;
  cb.flux = [](double u) { return Vec{std::sin(u), std::cos(u)}; };
  cb.derivative = [](double u) { return Vec{std::cos(u), -std::sin(u)}; };
  cb.entropy_flux = [](double u) {
    return Vec{u * std::sin(u) + std::cos(u) - 1.0, u * std::cos(u) - std::sin(u)};
  };
  // n . f'(u) = |n| cos(u + alpha) with alpha = atan2(n_y, n_x). Its maximal
  // modulus on [lo, hi] is |n| when the shifted interval contains a multiple
  // of pi, and the larger endpoint value otherwise.
  cb.lipschitz_bound = [](const Vec& n, double lo, double hi) {
    const double scale = norm(n);
    const double alpha = std::atan2(n[1], n[0]);
    const double a = lo + alpha, b = hi + alpha;
    if (std::floor(b / std::numbers::pi) > std::floor(a / std::numbers::pi) ||
        std::fmod(a, std::numbers::pi) == 0.0) {
      return scale;
    }
    return scale * std::max(std::abs(std::cos(a)), std::abs(std::cos(b)));
  };
  return std::make_shared<ScalarModel>("kpp", 2, std::move(cb));
}

std::shared_ptr<ScalarModel> make_buckley_leverett() {
  ScalarModel::Callbacks cb;
  cb.flux = [](double u) { return Vec{u * u / (u * u + 0.5 * (1.0 - u) * (1.0 - u)), 0.0}; };
  return std::make_shared<ScalarModel>("buckley_leverett", 1, std::move(cb));
}

}  // namespace idp
