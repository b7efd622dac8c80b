#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "idp/mesh.hpp"
#include "idp/solver.hpp"

namespace idp {

/// sum_i m_i U_i per component.
std::vector<double> conserved_totals(const AssembledOperators& ops, const StateField& U);

/// dt sum_j f(U_j) . beta_j with beta_j = sum_i c_ij: the amount leaving the
/// domain through the boundary during one forward-Euler substep.
std::vector<double> boundary_outflow(const AssembledOperators& ops, const HyperbolicSystem& model,
                                     const StateField& U, double dt);

/// Tracks |sum_i m_i U_i^n - sum_i m_i U_i^0 + outflow| / |sum_i m_i U_i^0|
/// per component (absolute when the initial total vanishes). The raw drift
/// without the boundary outflow is tracked alongside.
class ConservationTracker {
 public:
  ConservationTracker(const AssembledOperators& ops, std::shared_ptr<const HyperbolicSystem> model,
                      const StateField& initial);

  void observe_stage(const StageRecord& record);
  void observe_step(const StateField& U);

  const std::vector<std::vector<double>>& drift_series() const { return series_; }
  std::vector<double> max_drift() const { return max_drift_; }
  std::vector<double> max_raw_drift() const { return max_raw_; }
  double worst() const;

 private:
  std::vector<double> relative(const std::vector<double>& delta) const;

  const AssembledOperators& ops_;
  std::shared_ptr<const HyperbolicSystem> model_;
  std::vector<double> initial_;
  std::vector<double> outflow_;
  std::vector<double> max_drift_;
  std::vector<double> max_raw_;
  std::vector<std::vector<double>> series_;
};

struct InvarianceViolation {
  long step = -1;
  int stage = -1;
  int node = -1;
  std::string functional;
  double exceedance = 0.0;
};

struct InvarianceSummary {
  long checks = 0;
  long violations = 0;
  InvarianceViolation worst;
};

/// Compares U^{n+1} against the invariant set spanned by the stencil
/// neighbours in U^n. Neighbourhood functionals g must satisfy
/// g(U_i^{n+1}) >= min_{j in I(S_i)} g(U_j^n) - tolerance; fixed functionals
/// must stay positive.
InvarianceSummary local_invariance(const HyperbolicSystem& model, const Stencils& stencils,
                                   const StateField& before, const StateField& after, double tolerance,
                                   long step = -1, int stage = -1);

/// Default tolerance of the local invariance check for a model.
double invariance_tolerance(const HyperbolicSystem& model);

struct EntropyResiduals {
  /// R_i = m_i/dt (eta_i^{n+1} - eta_i^n) + sum_j q(U_j).c_ij - sum_j d_ij eta(U_j), over all j.
  std::vector<double> full;
  /// Same with the viscous sum restricted to j != i.
  std::vector<double> off_diagonal;
  /// max_i m_i/dt * max_i |eta(U_i^n)|.
  double scale = 0.0;
  /// sum_i m_i eta_i^{n+1} - sum_i m_i eta_i^n + dt sum_j q(U_j).beta_j.
  double global_change = 0.0;
};

EntropyResiduals entropy_residuals(const AssembledOperators& ops, const HyperbolicSystem& model,
                                   const StateField& before, const StateField& after, const ViscosityMatrix& D,
                                   double dt);

/// min_i (1 - 2 dt |d_ii| / m_i), the smallest self-weight of the convex
/// combination behind the update.
double min_convex_coefficient(const AssembledOperators& ops, const ViscosityMatrix& D, double dt);

struct StageDiagnostics {
  bool invariance = true;
  bool entropy = true;
};

/// Observer bundle attached to a Solver: conservation, local invariance,
/// entropy residuals and convex-combination coefficients.
class RunMonitor {
 public:
  static constexpr double kEntropyTolerance = 1e-10;
  static constexpr double kEntropyProductionThreshold = 1e-6;
  static constexpr double kConservationTolerance = 1e-12;

  RunMonitor(const AssembledOperators& ops, std::shared_ptr<const HyperbolicSystem> model,
             const StateField& initial, StageDiagnostics toggles = {});

  void attach(Solver& solver);

  const ConservationTracker& conservation() const { return conservation_; }
  const InvarianceSummary& invariance() const { return invariance_; }
  double invariance_tolerance() const { return invariance_tol_; }
  const StageDiagnostics& toggles() const { return toggles_; }

  long entropy_checks() const { return entropy_checks_; }
  /// Largest max_i R_i / scale over all substeps, for both sum variants.
  double entropy_max_ratio() const { return entropy_max_; }
  double entropy_max_ratio_off_diagonal() const { return entropy_max_off_; }
  /// Substep and node of the largest full-sum residual.
  long entropy_worst_step() const { return entropy_worst_step_; }
  int entropy_worst_node() const { return entropy_worst_node_; }
  /// Node-substeps with R_i > kEntropyProductionThreshold * scale.
  long entropy_production_count() const { return entropy_production_; }
  /// Largest global_change / (scale dt).
  double entropy_global_max_ratio() const { return entropy_global_max_; }
  double min_convex_coefficient() const { return min_convex_; }

  void observe_stage(const StageRecord& record);
  void observe_step(const StateField& U);

 private:
  const AssembledOperators& ops_;
  std::shared_ptr<const HyperbolicSystem> model_;
  StageDiagnostics toggles_;
  ConservationTracker conservation_;
  InvarianceSummary invariance_;
  double invariance_tol_;
  long entropy_checks_ = 0;
  double entropy_max_ = -std::numeric_limits<double>::infinity();
  double entropy_max_off_ = -std::numeric_limits<double>::infinity();
  long entropy_worst_step_ = -1;
  int entropy_worst_node_ = -1;
  long entropy_production_ = 0;
  double entropy_global_max_ = -std::numeric_limits<double>::infinity();
  double min_convex_ = std::numeric_limits<double>::infinity();
};

using ExactSolution = std::function<State(const Vec& x, double t)>;

struct L1Error {
  std::vector<double> error;
  std::vector<bool> absolute;  // the exact solution vanished, error is not normalized
};

/// sum_i m_i |U_i - u(x_i)| / sum_i m_i |u(x_i)| per component, lumped quadrature.
L1Error l1_error(const AssembledOperators& ops, const Mesh& mesh, const StateField& U, const ExactSolution& exact);

/// Exact solution of a p-system Riemann problem that is a single
/// 1-rarefaction centred at x0. Throws if the right state is not on the
/// rarefaction curve of the left one.
class PSystemRarefaction {
 public:
  PSystemRarefaction(const PSystemModel& model, double x0, double vL, double uL, double vR, double uR);
  State operator()(const Vec& x, double t) const;
  double head_speed() const;  // -c(vL)
  double tail_speed() const;  // -c(vR)

 private:
  PSystemModel model_;
  double x0_, vL_, uL_, vR_, uR_;
};

struct ConvergenceRow {
  double one_over_h = 0.0;
  std::vector<double> errors;
  std::vector<std::optional<double>> rates;  // empty on the first row or when undefined
};

/// Fills `rates` from consecutive rows: log(e_coarse/e_fine) / log(h_coarse/h_fine).
void compute_rates(std::vector<ConvergenceRow>& rows);

/// CSV with columns one_over_h, error_<c>, rate_<c> per component; undefined rates are blank.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows,
                           const std::vector<std::string>& component_names);

/// Summary of one run, serialized as the report JSON.
struct RunReport {
  std::string case_name;
  std::string system;
  std::string viscosity;
  std::string integrator;
  std::string kernels;
  int nodes = 0;
  long steps = 0;
  long restarts = 0;
  double final_time = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> components;
  std::vector<double> conservation_max_drift;
  std::vector<double> conservation_max_raw_drift;
  InvarianceSummary invariance;
  double invariance_tolerance = 0.0;
  bool invariance_checked = false;
  bool entropy_checked = false;
  long entropy_checks = 0;
  double entropy_max_ratio = 0.0;
  double entropy_max_ratio_off_diagonal = 0.0;
  long entropy_worst_step = -1;
  int entropy_worst_node = -1;
  long entropy_production_count = 0;
  double entropy_global_max_ratio = 0.0;
  double min_convex_coefficient = 0.0;
  std::optional<L1Error> l1;
  std::vector<std::string> warnings;

  bool conservation_ok() const;
  bool invariance_ok() const;
  bool entropy_ok() const;
  bool ok() const { return conservation_ok() && invariance_ok() && entropy_ok(); }
};

RunReport make_report(const RunMonitor& monitor, const Solver& solver, const StateField& final_state);

nlohmann::json to_json(const RunReport& report);

}  // namespace idp
