#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "idp/diagnostics.hpp"
#include "idp/systems.hpp"
#include "oracles.hpp"

using namespace idp;

namespace {

State st(double a, double b = 0.0, double c = 0.0, double d = 0.0) { return {a, b, c, d}; }

const Vec kX{1.0, 0.0};
const Vec kMinusX{-1.0, 0.0};

}  // namespace

TEST_CASE("fluxes") {
  const auto kpp = make_kpp();
  const Flux fk = kpp->flux(st(0.0));
  CHECK(fk[0][0] == 0.0);
  CHECK(fk[0][1] == 1.0);

  const EulerModel euler(1.4, 2);
  const State rest = euler.from_primitive(1.0, {0.0, 0.0}, 0.4);
  const Flux fe = euler.flux(rest);
  CHECK(fe[0][0] == 0.0);
  CHECK(fe[1][0] == doctest::Approx(0.4));
  CHECK(fe[1][1] == 0.0);
  CHECK(fe[2][1] == doctest::Approx(0.4));
  CHECK(fe[3][0] == 0.0);
  CHECK(fe[3][1] == 0.0);

  const EulerModel euler1(1.4, 1);
  const State moving = euler1.from_primitive(2.0, {3.0, 0.0}, 5.0);
  const Flux fm = euler1.flux(moving);
  CHECK(fm[0][0] == doctest::Approx(6.0));
  CHECK(fm[1][0] == doctest::Approx(2.0 * 9.0 + 5.0));
  CHECK(fm[2][0] == doctest::Approx(3.0 * (5.0 / 0.4 + 9.0 + 5.0)));

  const PSystemModel ps(1.0, 3.0);
  const Flux fp = ps.flux(st(1.0, 0.0));
  CHECK(fp[0][0] == 0.0);
  CHECK(fp[1][0] == 1.0);
}

TEST_CASE("inadmissible states are rejected with the violated constraint") {
  const PSystemModel ps(1.0, 3.0);
  CHECK_THROWS_WITH_AS(ps.flux(st(-1.0, 0.0)), doctest::Contains("specific volume"), InadmissibleState);
  const EulerModel euler(1.4, 1);
  CHECK_THROWS_WITH_AS(euler.flux(st(1.0, 2.0, 1.0)), doctest::Contains("internal energy"), InadmissibleState);
  CHECK_THROWS_WITH_AS(euler.flux(st(0.0, 0.0, 1.0)), doctest::Contains("density"), InadmissibleState);
  CHECK_THROWS_AS(make_burgers()->flux(st(NAN)), InadmissibleState);
  CHECK_THROWS_AS(make_burgers()->lambda_max(kX, NAN, 0.0), InadmissibleState);
  CHECK_THROWS_AS(ps.lambda_max(0.0, 0.0, 1.0, 0.0), InadmissibleState);
  CHECK_THROWS_AS(ps.riemann_invariants(0.0, 0.0), InadmissibleState);
  CHECK_THROWS_AS(PSystemModel(0.0, 3.0), Error);
  CHECK_THROWS_AS(PSystemModel(1.0, 0.5), Error);
  CHECK_THROWS_AS(EulerModel(1.0, 1), Error);
}

TEST_CASE("scalar wave speeds") {
  const auto linear = make_linear_advection({2.0, -1.0}, 2);
  CHECK(linear->lambda_max({0.6, 0.8}, 0.3, -4.0) == doctest::Approx(std::abs(1.2 - 0.8)));

  const auto burgers = make_burgers();
  CHECK(burgers->lambda_max(kX, 0.0, 1.0) == 1.0);
  CHECK(burgers->lambda_max(kX, 1.0, 0.0) == 0.5);
  CHECK(burgers->lambda_max(kX, -2.0, 1.0) == 2.0);

  // KPP: |n . f'| = |cos(u + alpha)| <= 1 with the maximum reached on the interval.
  const auto kpp = make_kpp();
  CHECK(kpp->lambda_max(kX, -0.5, 0.5) == 1.0);
  CHECK(kpp->lambda_max(kX, 1.0, 1.2) == doctest::Approx(std::cos(1.0)));
  CHECK(kpp->lambda_max({0.0, 1.0}, 0.0, 0.1) == doctest::Approx(std::sin(0.1)));
}

TEST_CASE("sampled Lipschitz bound covers |f'| for a flux without derivative") {
  const auto bl = make_buckley_leverett();
  const auto f = [](double u) { return u * u / (u * u + 0.5 * (1.0 - u) * (1.0 - u)); };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = dist(rng), b = dist(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    double slope = 0.0;
    for (int s = 0; s <= 20000; ++s) {
      const double u = lo + (hi - lo) * s / 20000.0;
      const double step = 1e-7;
      slope = std::max(slope, std::abs(f(u + step) - f(u - step)) / (2.0 * step));
    }
    CHECK(bl->lambda_max(kX, a, b) >= slope * (1.0 - 1e-6));
  }
}

TEST_CASE("p-system wave speed at equal states is sqrt(-p'(v))") {
  const PSystemModel ps(1.0, 3.0);
  CHECK(ps.lambda_max(1.0, 0.0, 1.0, 0.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(ps.pressure_derivative(1.0) == -3.0);
}

TEST_CASE("p-system two shocks agree with bisection") {
  const PSystemModel ps(1.0, 3.0);
  const oracle::PSystem ref{1.0L, 3.0L};
  const double expected = static_cast<double>(ref.lambda_max(1.0L, 1.0L, 1.0L, -1.0L));
  const double got = ps.lambda_max(1.0, 1.0, 1.0, -1.0);
  CHECK(got >= expected);
  CHECK(got - expected <= 1e-12 * expected);
  CHECK(expected > std::sqrt(3.0));
}

TEST_CASE("p-system single rarefaction data") {
  const double gamma = 3.0, r = 1.0 / gamma;
  const PSystemModel ps(r, gamma);
  const double vR = std::pow(2.0, 2.0 / (gamma - 1.0)), uR = 1.0 / (gamma - 1.0);
  CHECK(ps.lambda_max(1.0, 0.0, vR, uR) == doctest::Approx(std::sqrt(gamma * r)).epsilon(1e-15));
  const auto wl = ps.riemann_invariants(1.0, 0.0), wr = ps.riemann_invariants(vR, uR);
  CHECK(std::abs(wl.w1 - wr.w1) <= 1e-14);
  const double v0 = ps.initial_volume_guess(1.0, 0.0, vR, uR);
  CHECK(v0 <= vR);
  CHECK(ps.phi(vR, 1.0, 0.0, vR, uR) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("p-system Riemann invariants") {
  const PSystemModel ps(1.0, 3.0);
  const auto w = ps.riemann_invariants(1.0, 0.0);
  CHECK(w.w1 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(w.w2 == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-15));
  const auto far = ps.riemann_invariants(1e12, 0.5);
  CHECK(far.w1 - far.w2 < 1e-5);
  CHECK(far.w1 - far.w2 > 0.0);
}

TEST_CASE("p-system v0 is a lower bound of v*") {
  const PSystemModel ps(0.7, 1.8);
  CHECK(ps.initial_volume_guess(2.0, 0.3, 2.0, 0.3) <= 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logv(-2.0, 2.0), vel(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double vL = std::exp(logv(rng)), vR = std::exp(logv(rng));
    const double uL = vel(rng), uR = vel(rng);
    const double v0 = ps.initial_volume_guess(vL, uL, vR, uR);
    REQUIRE(v0 > 0.0);
    CHECK(ps.phi(v0, vL, uL, vR, uR) <= 0.0);
  }
}

TEST_CASE("p-system wave speed is certified against bisection") {
  for (const double gamma : {1.4, 3.0}) {
    const double r = 1.0 / gamma;
    const PSystemModel ps(r, gamma);
    const oracle::PSystem ref{r, gamma};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> logv(-2.5, 2.5), vel(-4.0, 4.0);
    for (int trial = 0; trial < 2000; ++trial) {
      const double vL = std::exp(logv(rng)), vR = std::exp(logv(rng));
      const double uL = vel(rng), uR = vel(rng);
      const long double expected = ref.lambda_max(vL, uL, vR, uR);
      const double got = ps.lambda_max(vL, uL, vR, uR);
      CHECK(static_cast<long double>(got) >= expected);
      CHECK(static_cast<long double>(got) <= 1.05L * expected);
    }
  }
}

TEST_CASE("wave speeds are symmetric under the flip (n, uL, uR) -> (-n, uR, uL)") {
  const PSystemModel ps(1.0 / 3.0, 3.0);
  const EulerModel euler(1.4, 2);
  const auto kpp = make_kpp();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const State a = st(0.2 + 3.0 * unit(rng), 2.0 * unit(rng) - 1.0), b = st(0.2 + 3.0 * unit(rng), 2.0 * unit(rng) - 1.0);
    CHECK(ps.max_wave_speed(kX, a, b) == ps.max_wave_speed(kMinusX, b, a));

    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const Vec n{std::cos(angle), std::sin(angle)};
    const State ea = euler.from_primitive(0.1 + unit(rng), {unit(rng) - 0.5, unit(rng) - 0.5}, 0.1 + unit(rng));
    const State eb = euler.from_primitive(0.1 + unit(rng), {unit(rng) - 0.5, unit(rng) - 0.5}, 0.1 + unit(rng));
    CHECK(euler.max_wave_speed(n, ea, eb) == euler.max_wave_speed(-n, eb, ea));

    const double ua = 10.0 * unit(rng), ub = 10.0 * unit(rng);
    CHECK(kpp->max_wave_speed(n, st(ua), st(ub)) == doctest::Approx(kpp->max_wave_speed(-n, st(ub), st(ua))));
  }
}

TEST_CASE("Euler projection") {
  const EulerModel euler(1.4, 2);
  const State u{1.3, 0.7, 0.0, 3.1};
  const auto p = euler.project(kX, u);
  CHECK(p.rho == 1.3);
  CHECK(p.m == 0.7);
  CHECK(p.energy == 3.1);

  const State w{1.3, 0.7, -0.4, 3.1};
  const double angle = 0.9;
  const Vec n{0.6, 0.8};
  const Vec rn{std::cos(angle) * n[0] - std::sin(angle) * n[1], std::sin(angle) * n[0] + std::cos(angle) * n[1]};
  const State rw{w[0], std::cos(angle) * w[1] - std::sin(angle) * w[2], std::sin(angle) * w[1] + std::cos(angle) * w[2],
                 w[3]};
  const auto a = euler.project(n, w), b = euler.project(rn, rw);
  CHECK(a.m == doctest::Approx(b.m).epsilon(1e-14));
  CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-14));
  CHECK(a.energy < w[3]);
}

TEST_CASE("Euler identical states") {
  const EulerModel euler(1.4, 1);
  const double rho = 0.8, u = -0.3, p = 2.0;
  const double a = std::sqrt(1.4 * p / rho);
  CHECK(euler.lambda_max_1d(rho, u, p, rho, u, p) == doctest::Approx(std::abs(u) + a).epsilon(1e-13));
}

TEST_CASE("Sod star pressure matches bisection") {
  const EulerModel euler(1.4, 1);
  const oracle::Euler ref{1.4L};
  const long double p_star = ref.star_pressure(1, 0, 1, 0.125L, 0, 0.1L);
  const auto star = euler.star_pressure(1.0, 0.0, 1.0, 0.125, 0.0, 0.1);
  CHECK(static_cast<double>(p_star) == doctest::Approx(0.30313).epsilon(1e-4));
  CHECK(std::abs(star.upper - static_cast<double>(p_star)) <= 1e-10);
  CHECK(static_cast<long double>(star.upper) >= p_star);
  CHECK(static_cast<long double>(star.lower) <= p_star);
  CHECK_FALSE(star.vacuum);
  // p* < pL: the 1-wave is a rarefaction with head speed -aL.
  const double lambda = euler.lambda_max_1d(1.0, 0.0, 1.0, 0.125, 0.0, 0.1);
  CHECK(lambda >= std::sqrt(1.4));
  CHECK(lambda == doctest::Approx(static_cast<double>(ref.lambda_max(1, 0, 1, 0.125L, 0, 0.1L))).epsilon(1e-10));
}

TEST_CASE("Euler vacuum data uses the rarefaction speeds") {
  const EulerModel euler(1.4, 1);
  const double aL = std::sqrt(1.4 * 1.0 / 1.0), aR = std::sqrt(1.4 * 0.5 / 0.5);
  const double uL = -6.0, uR = 6.0;
  REQUIRE(uR - uL >= 2.0 * aL / 0.4 + 2.0 * aR / 0.4);
  const auto star = euler.star_pressure(1.0, uL, 1.0, 0.5, uR, 0.5);
  CHECK(star.vacuum);
  CHECK(euler.lambda_max_1d(1.0, uL, 1.0, 0.5, uR, 0.5) == doctest::Approx(std::max(std::abs(uL - aL), uR + aR)));
}

TEST_CASE("Euler wave speed is certified against bisection") {
  const EulerModel euler(1.4, 1);
  const oracle::Euler ref{1.4L};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> logr(-3.0, 1.0), logp(-4.0, 1.0), vel(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double rhoL = std::pow(10.0, logr(rng)), rhoR = std::pow(10.0, logr(rng));
    const double pL = std::pow(10.0, logp(rng)), pR = std::pow(10.0, logp(rng));
    const double uL = vel(rng), uR = vel(rng);
    const long double expected = ref.lambda_max(rhoL, uL, pL, rhoR, uR, pR);
    const double got = euler.lambda_max_1d(rhoL, uL, pL, rhoR, uR, pR);
    CHECK(static_cast<long double>(got) >= expected);
    CHECK(static_cast<long double>(got) <= 1.05L * expected);
  }
}

TEST_CASE("Euler specific entropy and invariant set") {
  const EulerModel euler(1.4, 1);
  const State unit = euler.from_primitive(1.0, {0.0, 0.0}, 1.0);
  CHECK(euler.specific_entropy(unit) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(euler.specific_entropy(euler.from_primitive(1.0, {0.0, 0.0}, 2.0)) > 0.0);

  const EulerModel leblanc(5.0 / 3.0, 1);
  const State left = leblanc.from_primitive(1.0, {0.0, 0.0}, 0.1);
  CHECK(in_euler_set(leblanc, left, leblanc.specific_entropy(left)));
  CHECK_FALSE(in_euler_set(leblanc, left, leblanc.specific_entropy(left) + 1e-6));
  CHECK_FALSE(in_euler_set(euler, {1.0, 2.0, 1.0, 0.0}, -INFINITY));
}

TEST_CASE("entropy pairs") {
  const auto kpp = make_kpp();
  const auto zero = kpp->entropy(st(0.0));
  CHECK(zero.eta == 0.0);
  CHECK(zero.q[0] == 0.0);
  CHECK(zero.q[1] == 0.0);

  // q' = u f'(u) for the closed forms.
  for (const double u : {-1.3, 0.4, 2.9, 11.0}) {
    const double h = 1e-6;
    const auto qp = kpp->entropy_flux(u + h), qm = kpp->entropy_flux(u - h);
    CHECK((qp[0] - qm[0]) / (2 * h) == doctest::Approx(u * std::cos(u)).epsilon(1e-6));
    CHECK((qp[1] - qm[1]) / (2 * h) == doctest::Approx(-u * std::sin(u)).epsilon(1e-6));
  }

  ScalarModel::Callbacks cb;
  cb.flux = [](double u) { return Vec{0.5 * u * u, 0.0}; };
  const ScalarModel integrated("burgers_sampled", 1, cb);
  for (const double u : {-2.0, 0.3, 1.7}) {
    CHECK(std::abs(integrated.entropy_flux(u)[0] - u * u * u / 3.0) <= 1e-10);
  }

  const PSystemModel ps(0.5, 1.4);
  const EulerModel euler(1.4, 2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const State a = st(0.1 + 4.0 * unit(rng), 4.0 * unit(rng) - 2.0), b = st(0.1 + 4.0 * unit(rng), 4.0 * unit(rng) - 2.0);
    State mid{};
    for (int k = 0; k < 4; ++k) mid[k] = 0.5 * (a[k] + b[k]);
    CHECK(ps.entropy(mid).eta <= 0.5 * (ps.entropy(a).eta + ps.entropy(b).eta) + 1e-14);

    const State ea = euler.from_primitive(0.1 + unit(rng), {unit(rng) - 0.5, unit(rng) - 0.5}, 0.1 + unit(rng));
    const State eb = euler.from_primitive(0.1 + unit(rng), {unit(rng) - 0.5, unit(rng) - 0.5}, 0.1 + unit(rng));
    State emid{};
    for (int k = 0; k < 4; ++k) emid[k] = 0.5 * (ea[k] + eb[k]);
    CHECK(euler.entropy(emid).eta <= 0.5 * (euler.entropy(ea).eta + euler.entropy(eb).eta) + 1e-14);
  }

  const State lo = euler.from_primitive(1.0, {0.2, 0.0}, 1.0), hi = euler.from_primitive(1.0, {0.2, 0.0}, 2.0);
  CHECK(euler.entropy(hi).eta < euler.entropy(lo).eta);
}

TEST_CASE("invariant set membership") {
  CHECK(in_interval(0.5, 0.0, 1.0));
  CHECK_FALSE(in_interval(1.001, 0.0, 1.0));
  const PSystemModel ps(1.0, 3.0);
  const auto w = ps.riemann_invariants(1.0, 0.0);
  CHECK(in_psystem_set(ps, 1.0, 0.0, w.w2, w.w1));
  CHECK_FALSE(in_psystem_set(ps, 1.0, 0.0, w.w2, w.w1 - 1e-3));
}

TEST_CASE("rarefaction oracle keeps w1 constant across the fan") {
  const double gamma = 3.0, r = 1.0 / gamma;
  const PSystemModel ps(r, gamma);
  const double vR = std::pow(2.0, 2.0 / (gamma - 1.0)), uR = 1.0 / (gamma - 1.0);
  const PSystemRarefaction exact(ps, 0.75, 1.0, 0.0, vR, uR);
  const double t = 0.75;
  const double w1 = ps.riemann_invariants(1.0, 0.0).w1;
  for (int s = 0; s < 100; ++s) {
    const double xi = exact.head_speed() + (exact.tail_speed() - exact.head_speed()) * (s + 0.5) / 100.0;
    const State u = exact({0.75 + xi * t, 0.0}, t);
    CHECK(std::abs(ps.riemann_invariants(u[0], u[1]).w1 - w1) <= 1e-12);
    CHECK(u[0] > 1.0);
    CHECK(u[0] < vR);
  }
  const State left = exact({0.0, 0.0}, t), right = exact({1.0, 0.0}, t);
  CHECK(left[0] == 1.0);
  CHECK(right[0] == vR);
  CHECK_THROWS_AS(PSystemRarefaction(ps, 0.75, 1.0, 0.0, vR, uR + 0.1), Error);
}
