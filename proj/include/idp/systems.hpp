#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idp/types.hpp"

namespace idp {

struct EntropyPair {
  double eta = 0.0;
  Vec q{};
};

/// Scalar functional g(u) used to describe an invariant set as {g(u) >= bound}.
///
/// `neighborhood` functionals take their bound from the smallest set of this
/// family containing a group of states (the minimum of g over the group);
/// the others have the fixed bound 0.
struct InvariantFunctional {
  std::string name;
  bool neighborhood = true;
};

/// Hyperbolic system of conservation laws d_t u + div f(u) = 0.
class HyperbolicSystem {
 public:
  virtual ~HyperbolicSystem() = default;

  virtual std::string name() const = 0;
  virtual int components() const = 0;
  virtual int dimension() const = 0;
  virtual std::vector<std::string> component_names() const = 0;

  /// Empty when u lies in the admissible set, otherwise the violated constraint.
  virtual std::optional<std::string> admissibility_violation(const State& u) const = 0;

  /// Exact flux; throws InadmissibleState on inadmissible input.
  virtual Flux flux(const State& u) const = 0;

  /// Guaranteed upper bound on the maximal wave speed of the 1D Riemann
  /// problem with flux n . f and data (uL, uR).
  virtual double max_wave_speed(const Vec& n, const State& uL, const State& uR) const = 0;

  virtual EntropyPair entropy(const State& u) const = 0;

  virtual std::vector<InvariantFunctional> invariant_functionals() const = 0;
  virtual void invariant_values(const State& u, std::span<double> out) const = 0;

  bool admissible(const State& u) const { return !admissibility_violation(u); }
  void require_admissible(const State& u, long node = -1) const;
};

/// Flux of one component projected on n: n . f_k(u).
inline double normal_flux(const Flux& f, int k, const Vec& n) { return dot(f[k], n); }

// ---------------------------------------------------------------------------
// Scalar conservation laws

class ScalarModel : public HyperbolicSystem {
 public:
  using FluxFn = std::function<Vec(double)>;
  using SpeedBoundFn = std::function<double(const Vec&, double, double)>;

  struct Callbacks {
    FluxFn flux;
    FluxFn derivative;            // optional
    FluxFn entropy_flux;          // optional closed form of q(u) = int_0^u s f'(s) ds
    SpeedBoundFn lipschitz_bound; // optional exact bound of |n . f'| on [min, max]
    bool genuinely_nonlinear = false;  // n . f' monotone for every n
  };

  ScalarModel(std::string name, int dim, Callbacks callbacks);

  std::string name() const override { return name_; }
  int components() const override { return 1; }
  int dimension() const override { return dim_; }
  std::vector<std::string> component_names() const override { return {"u"}; }
  std::optional<std::string> admissibility_violation(const State& u) const override;
  Flux flux(const State& u) const override;
  double max_wave_speed(const Vec& n, const State& uL, const State& uR) const override;
  EntropyPair entropy(const State& u) const override;
  std::vector<InvariantFunctional> invariant_functionals() const override;
  void invariant_values(const State& u, std::span<double> out) const override;

  Vec flux_value(double u) const { return callbacks_.flux(u); }
  double lambda_max(const Vec& n, double uL, double uR) const;
  Vec entropy_flux(double u) const;

  static constexpr int kLipschitzSamples = 1024;
  static constexpr double kLipschitzInflation = 1.01;

 private:
  double normal_derivative(const Vec& n, double u) const;

  std::string name_;
  int dim_;
  Callbacks callbacks_;
};

std::shared_ptr<ScalarModel> make_linear_advection(const Vec& velocity, int dim);
std::shared_ptr<ScalarModel> make_burgers();
std::shared_ptr<ScalarModel> make_kpp();
/// Buckley-Leverett flux u^2 / (u^2 + (1 - u)^2 / 2) along x; non-convex and
/// supplied without derivative, so wave speeds come from Lipschitz sampling.
std::shared_ptr<ScalarModel> make_buckley_leverett();

/// a <= u <= b with absolute tolerance 1e-11.
bool in_interval(double u, double a, double b);

// ---------------------------------------------------------------------------
// p-system, gamma-law pressure p(v) = r v^-gamma, state (v, u).
// Implemented in the hyperbolic form d_t v - d_x u = 0, d_t u + d_x p(v) = 0.

struct RiemannInvariants {
  double w1 = 0.0;
  double w2 = 0.0;
};

class PSystemModel : public HyperbolicSystem {
 public:
  PSystemModel(double r, double gamma);

  std::string name() const override { return "psystem"; }
  int components() const override { return 2; }
  int dimension() const override { return 1; }
  std::vector<std::string> component_names() const override { return {"v", "u"}; }
  std::optional<std::string> admissibility_violation(const State& u) const override;
  Flux flux(const State& u) const override;
  double max_wave_speed(const Vec& n, const State& uL, const State& uR) const override;
  EntropyPair entropy(const State& u) const override;
  std::vector<InvariantFunctional> invariant_functionals() const override;
  void invariant_values(const State& u, std::span<double> out) const override;

  double r() const { return r_; }
  double gamma() const { return gamma_; }
  double pressure(double v) const;
  double pressure_derivative(double v) const;
  /// sqrt(-p'(v)), the characteristic speed magnitude at specific volume v.
  double sound_speed(double v) const;
  /// int_a^b sqrt(-p'(s)) ds in closed form (b may be +infinity when gamma > 1).
  double speed_integral(double a, double b) const;

  RiemannInvariants riemann_invariants(double v, double u) const;
  /// Lower bound v0 <= v* from the extreme Riemann invariants of the pair.
  double initial_volume_guess(double vL, double uL, double vR, double uR) const;
  /// phi(v) = f_L(v) + f_R(v) + uL - uR; increasing, root v*.
  double phi(double v, double vL, double uL, double vR, double uR) const;
  double phi_derivative(double v, double vL, double vR) const;
  /// Guaranteed upper bound on the maximal wave speed for data (vL,uL),(vR,uR)
  /// oriented along +x.
  double lambda_max(double vL, double uL, double vR, double uR) const;

 private:
  double rarefaction_factor() const;  // 2 sqrt(gamma r) / (gamma - 1)
  double inverse_power(double v) const;  // v^-gamma
  double r_, gamma_;
  int integer_gamma_ = 0;  // gamma when it is a small integer, else 0
};

/// a <= w2(u) and w1(u) <= b, absolute tolerance 1e-11.
bool in_psystem_set(const PSystemModel& model, double v, double u, double a, double b);

// ---------------------------------------------------------------------------
// Compressible Euler, ideal gas p = (gamma - 1) rho e, state (rho, m, E).

/// State of the projected 1D Riemann problem.
struct ProjectedState {
  double rho = 0.0;
  double m = 0.0;
  double energy = 0.0;  // E - |m_perp|^2 / (2 rho)
};

struct StarPressure {
  double upper = 0.0;  // certified p_hat >= p*
  double lower = 0.0;  // certified lower end of the final bracket
  int iterations = 0;
  bool vacuum = false;
  bool fast_path = false;
};

class EulerModel : public HyperbolicSystem {
 public:
  EulerModel(double gamma, int dim);

  std::string name() const override { return "euler"; }
  int components() const override { return dim_ + 2; }
  int dimension() const override { return dim_; }
  std::vector<std::string> component_names() const override;
  std::optional<std::string> admissibility_violation(const State& u) const override;
  Flux flux(const State& u) const override;
  double max_wave_speed(const Vec& n, const State& uL, const State& uR) const override;
  EntropyPair entropy(const State& u) const override;
  std::vector<InvariantFunctional> invariant_functionals() const override;
  void invariant_values(const State& u, std::span<double> out) const override;

  double gamma() const { return gamma_; }
  State from_primitive(double rho, const Vec& velocity, double p) const;
  double pressure(const State& u) const;
  double internal_energy(const State& u) const;  // E - |m|^2 / (2 rho)
  double specific_entropy(const State& u) const;  // log(p rho^-gamma)

  ProjectedState project(const Vec& n, const State& u) const;

  /// phi(p) = f(p, L) + f(p, R) + uR - uL for primitive 1D data.
  double phi(double p, double rhoL, double uL, double pL, double rhoR, double uR, double pR) const;
  StarPressure star_pressure(double rhoL, double uL, double pL, double rhoR, double uR, double pR) const;
  /// Upper bound of max(|lambda_1^-|, |lambda_3^+|) for 1D primitive data.
  double lambda_max_1d(double rhoL, double uL, double pL, double rhoR, double uR, double pR) const;

  static constexpr double kRelativeTolerance = 1e-10;
  static constexpr int kMaxIterations = 100;

 private:
  double shock_speed_factor(double p_star, double p) const;
  double gamma_;
  int dim_;
};

/// rho >= 0, e >= 0 and s >= r, absolute tolerance 1e-11 on each inequality.
bool in_euler_set(const EulerModel& model, const State& u, double r);

}  // namespace idp
