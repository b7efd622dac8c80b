#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "idp/assembly.hpp"
#include "idp/systems.hpp"

namespace idp {

/// Nodal conserved variables, node-major (N x m), at one time level.
struct StateField {
  int components = 1;
  std::vector<double> values;
  double time = 0.0;

  StateField() = default;
  StateField(int num_nodes, int m, double t = 0.0)
      : components(m), values(static_cast<std::size_t>(num_nodes) * m, 0.0), time(t) {}

  int num_nodes() const { return components > 0 ? static_cast<int>(values.size()) / components : 0; }
  State state(int i) const;
  void set_state(int i, const State& u);
};

/// Viscosity coefficients d_ij per stencil entry, diagonal included.
/// `diagonal` repeats d_ii contiguously.
struct ViscosityMatrix {
  std::vector<double> values;
  std::vector<double> diagonal;
};

enum class ViscosityMode { graph, cell, algebraic };
enum class Integrator { euler, ssp2, ssp3 };

std::string to_string(ViscosityMode mode);
std::string to_string(Integrator integrator);
ViscosityMode parse_viscosity_mode(const std::string& text);
Integrator parse_integrator(const std::string& text);

struct SolverConfig {
  ViscosityMode viscosity = ViscosityMode::graph;
  double cfl = 0.5;
  Integrator integrator = Integrator::ssp3;
  double final_time = 0.0;
  long max_steps = 10'000'000;
  /// Reuse the first-stage viscosity and time step for the later stages.
  bool freeze_viscosity = false;

  void validate() const;
};

/// Number of stages and the weights b_k that map stage increments to the
/// step increment: U^{n+1} - U^n = sum_k b_k (FE(U^(k)) - U^(k)).
int stage_count(Integrator integrator);
double stage_weight(Integrator integrator, int stage);

/// Checks every node and throws InadmissibleState naming the first bad one.
void require_admissible_field(const HyperbolicSystem& model, const StateField& U);

ViscosityMatrix compute_graph_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                        const StateField& U);

struct CellViscosity {
  std::vector<double> nu;  // per cell
  ViscosityMatrix matrix;
};

CellViscosity compute_cell_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                     const StateField& U);

/// Secant-based viscosity of the algebraic flux-correction literature.
/// Scalar models only; knowingly not entropy-consistent.
ViscosityMatrix compute_algebraic_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                            const StateField& U);

ViscosityMatrix compute_viscosity(ViscosityMode mode, const AssembledOperators& ops,
                                  const HyperbolicSystem& model, const StateField& U);

/// cfl * min_i m_i / (2 |d_ii|); +infinity when every d_ii vanishes.
double cfl_timestep(const AssembledOperators& ops, const ViscosityMatrix& D, double cfl);

/// Fluxes of every node, laid out N x d x m for the update kernel.
std::vector<double> nodal_fluxes(const HyperbolicSystem& model, const StateField& U);

StateField forward_euler_step(const AssembledOperators& ops, const HyperbolicSystem& model, const StateField& U,
                              const ViscosityMatrix& D, double dt);

struct IntermediateState {
  int i = 0;
  int j = 0;
  State value{};
};

/// Ubar_ij = (U_i + U_j)/2 - (f(U_j) - f(U_i)) . c_ij / (2 d_ij) for i != j with d_ij > 0.
std::vector<IntermediateState> intermediate_states(const AssembledOperators& ops, const HyperbolicSystem& model,
                                                   const StateField& U, const ViscosityMatrix& D);

/// One forward-Euler substep as seen by observers.
struct StageRecord {
  const StateField& input;
  const StateField& output;
  const ViscosityMatrix& viscosity;
  double dt;
  long step;
  int stage;
  double weight;
};

class Solver {
 public:
  using StageObserver = std::function<void(const StageRecord&)>;
  using StepObserver = std::function<void(const StateField& state, long step, double dt)>;

  Solver(const AssembledOperators& ops, std::shared_ptr<const HyperbolicSystem> model, SolverConfig config,
         std::vector<std::uint8_t> boundary = {});

  void add_stage_observer(StageObserver observer) { stage_observers_.push_back(std::move(observer)); }
  void add_step_observer(StepObserver observer) { step_observers_.push_back(std::move(observer)); }

  /// Advances U by one full step, never past `stop_time`. Returns dt.
  double step(StateField& U, double stop_time);
  double step(StateField& U) { return step(U, config_.final_time); }

  /// Steps from U.time to `stop_time`, landing on it exactly.
  StateField run_until(StateField U, double stop_time);
  StateField run(StateField U) { return run_until(std::move(U), config_.final_time); }

  long steps_taken() const { return steps_; }
  long restarts() const { return restarts_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const SolverConfig& config() const { return config_; }

 private:
  struct PendingStage {
    StateField input;
    StateField output;
    ViscosityMatrix viscosity;
    double weight;
  };

  bool attempt_step(const StateField& U, double stop_time, double dt, bool fixed_dt, double& next_dt, StateField& result,
                    std::vector<PendingStage>& stages) const;
  void check_boundary(const StateField& before, const StateField& after);

  const AssembledOperators& ops_;
  std::shared_ptr<const HyperbolicSystem> model_;
  SolverConfig config_;
  std::vector<std::uint8_t> boundary_;
  std::vector<StageObserver> stage_observers_;
  std::vector<StepObserver> step_observers_;
  std::vector<std::string> warnings_;
  bool boundary_warned_ = false;
  long steps_ = 0;
  long restarts_ = 0;
};

}  // namespace idp
