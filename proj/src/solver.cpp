#include "idp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idp/format.hpp"
#include "idp/kernels.hpp"

namespace idp {

namespace {

constexpr double kCouplingGuard = 1e-14;
constexpr double kBoundaryChangeTolerance = 1e-10;
constexpr int kMaxRestarts = 50;
// nu_K is rounded up by a few ulps so that the assembled cell viscosity never
// drops below the graph viscosity through round-off.
constexpr double kOutwardRounding = 4.0 * std::numeric_limits<double>::epsilon();

double coupling_threshold(const AssembledOperators& ops) { return kCouplingGuard * ops.metrics.h_min; }

void finish_diagonal(const AssembledOperators& ops, ViscosityMatrix& D) {
  const auto& st = ops.stencils;
  D.diagonal.assign(st.num_rows(), 0.0);
  for (int i = 0; i < st.num_rows(); ++i) {
    double sum = 0.0;
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      if (e != st.diag[i]) sum += D.values[e];
    }
    D.values[st.diag[i]] = -sum;
    D.diagonal[i] = -sum;
  }
}

// lambda_max(n_ij, U_i, U_j) |c_ij| for the entry (i, j), zero for negligible couplings.
double directed_speed(const AssembledOperators& ops, const HyperbolicSystem& model, const StateField& U, int e,
                      int i, int j, double threshold) {
  const double cn = ops.c_norm[e];
  if (!(cn > threshold)) return 0.0;
  const Vec n = (1.0 / cn) * ops.c(e);
  return model.max_wave_speed(n, U.state(i), U.state(j)) * cn;
}

}  // namespace

State StateField::state(int i) const {
  State u{};
  const std::size_t base = static_cast<std::size_t>(i) * components;
  for (int k = 0; k < components; ++k) u[k] = values[base + k];
  return u;
}

void StateField::set_state(int i, const State& u) {
  const std::size_t base = static_cast<std::size_t>(i) * components;
  for (int k = 0; k < components; ++k) values[base + k] = u[k];
}

std::string to_string(ViscosityMode mode) {
  switch (mode) {
    case ViscosityMode::graph: return "graph";
    case ViscosityMode::cell: return "cell";
    case ViscosityMode::algebraic: return "algebraic";
  }
  return "graph";
}

std::string to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::euler: return "euler";
    case Integrator::ssp2: return "ssp2";
    case Integrator::ssp3: return "ssp3";
  }
  return "ssp3";
}

ViscosityMode parse_viscosity_mode(const std::string& text) {
  if (text == "graph") return ViscosityMode::graph;
  if (text == "cell") return ViscosityMode::cell;
  if (text == "algebraic") return ViscosityMode::algebraic;
  throw Error("unknown viscosity mode '" + text + "' (expected graph, cell or algebraic)");
}

Integrator parse_integrator(const std::string& text) {
  if (text == "euler") return Integrator::euler;
  if (text == "ssp2") return Integrator::ssp2;
  if (text == "ssp3") return Integrator::ssp3;
  throw Error("unknown integrator '" + text + "' (expected euler, ssp2 or ssp3)");
}

void SolverConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error("solver: cfl must lie in (0, 1], got " + format_double(cfl));
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) {
    throw Error("solver: final_time must be finite and nonnegative, got " + format_double(final_time));
  }
  if (max_steps <= 0) throw Error("solver: max_steps must be positive");
}

int stage_count(Integrator integrator) {
  switch (integrator) {
    case Integrator::euler: return 1;
    case Integrator::ssp2: return 2;
    case Integrator::ssp3: return 3;
  }
  return 1;
}

double stage_weight(Integrator integrator, int stage) {
  switch (integrator) {
    case Integrator::euler: return 1.0;
    case Integrator::ssp2: return 0.5;
    case Integrator::ssp3: return stage == 2 ? 2.0 / 3.0 : 1.0 / 6.0;
  }
  return 1.0;
}

void require_admissible_field(const HyperbolicSystem& model, const StateField& U) {
  if (U.components != model.components()) {
    throw Error("state has " + std::to_string(U.components) + " components, model " + model.name() + " expects " +
                std::to_string(model.components()));
  }
  for (int i = 0; i < U.num_nodes(); ++i) model.require_admissible(U.state(i), i);
}

ViscosityMatrix compute_graph_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                        const StateField& U) {
  require_admissible_field(model, U);
  const auto& st = ops.stencils;
  const double threshold = coupling_threshold(ops);
  ViscosityMatrix D;
  D.values.assign(st.num_entries(), 0.0);
  for (int i = 0; i < st.num_rows(); ++i) {
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      const int j = st.cols[e];
      if (j <= i) continue;
      const int t = st.transpose[e];
      const double d = std::max(directed_speed(ops, model, U, e, i, j, threshold),
                                directed_speed(ops, model, U, t, j, i, threshold));
      D.values[e] = d;
      D.values[t] = d;
    }
  }
  finish_diagonal(ops, D);
  return D;
}

CellViscosity compute_cell_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                     const StateField& U) {
  require_admissible_field(model, U);
  const auto& st = ops.stencils;
  const double threshold = coupling_threshold(ops);
  const int nv = ops.dim + 1;
  CellViscosity out;
  out.nu.assign(ops.cells.size(), 0.0);
  for (std::size_t k = 0; k < ops.cells.size(); ++k) {
    const auto& cell = ops.cells[k];
    double nu = 0.0;
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        const int i = cell[a], j = cell[b];
        if (i == j) continue;
        const int e = st.find(i, j);
        const double speed = directed_speed(ops, model, U, e, i, j, threshold);
        if (speed > 0.0) nu = std::max(nu, speed / ops.shared_form_weight(e));
      }
    }
    out.nu[k] = nu * (1.0 + kOutwardRounding);
  }
  out.matrix.values.assign(st.num_entries(), 0.0);
  for (int i = 0; i < st.num_rows(); ++i) {
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      const int j = st.cols[e];
      if (j <= i) continue;
      double d = 0.0;
      for (int p = st.entry_cell_ptr[e]; p < st.entry_cell_ptr[e + 1]; ++p) {
        const int k = st.entry_cells[p];
        d += out.nu[k] * ops.cell_forms[k].theta * ops.cell_forms[k].measure;
      }
      out.matrix.values[e] = d;
      out.matrix.values[st.transpose[e]] = d;
    }
  }
  finish_diagonal(ops, out.matrix);
  return out;
}

ViscosityMatrix compute_algebraic_viscosity(const AssembledOperators& ops, const HyperbolicSystem& model,
                                            const StateField& U) {
  const auto* scalar = dynamic_cast<const ScalarModel*>(&model);
  if (!scalar) throw Error("algebraic viscosity is defined for scalar models only, not " + model.name());
  require_admissible_field(model, U);
  const auto& st = ops.stencils;
  const double threshold = coupling_threshold(ops);
  const auto k_entry = [&](int e, int i, int j) {
    const double ui = U.values[i], uj = U.values[j];
    if (ui == uj || !(ops.c_norm[e] > threshold)) return 0.0;
    const Vec fi = scalar->flux_value(ui), fj = scalar->flux_value(uj);
    const Vec secant{(fj[0] - fi[0]) / (uj - ui), (fj[1] - fi[1]) / (uj - ui)};
    return dot(secant, ops.c(e));
  };
  ViscosityMatrix D;
  D.values.assign(st.num_entries(), 0.0);
  for (int i = 0; i < st.num_rows(); ++i) {
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      const int j = st.cols[e];
      if (j <= i) continue;
      const int t = st.transpose[e];
      const double d = std::max({0.0, k_entry(e, i, j), k_entry(t, j, i)});
      D.values[e] = d;
      D.values[t] = d;
    }
  }
  finish_diagonal(ops, D);
  return D;
}

ViscosityMatrix compute_viscosity(ViscosityMode mode, const AssembledOperators& ops,
                                  const HyperbolicSystem& model, const StateField& U) {
  switch (mode) {
    case ViscosityMode::graph: return compute_graph_viscosity(ops, model, U);
    case ViscosityMode::cell: return compute_cell_viscosity(ops, model, U).matrix;
    case ViscosityMode::algebraic: return compute_algebraic_viscosity(ops, model, U);
  }
  return compute_graph_viscosity(ops, model, U);
}

double cfl_timestep(const AssembledOperators& ops, const ViscosityMatrix& D, double cfl) {
  return cfl * kernels::active().cfl_bound(ops.mass, D.diagonal);
}

std::vector<double> nodal_fluxes(const HyperbolicSystem& model, const StateField& U) {
  const int m = U.components, d = model.dimension();
  std::vector<double> flux(static_cast<std::size_t>(U.num_nodes()) * d * m);
  for (int i = 0; i < U.num_nodes(); ++i) {
    const Flux f = model.flux(U.state(i));
    for (int l = 0; l < d; ++l) {
      for (int k = 0; k < m; ++k) flux[(static_cast<std::size_t>(i) * d + l) * m + k] = f[k][l];
    }
  }
  return flux;
}

StateField forward_euler_step(const AssembledOperators& ops, const HyperbolicSystem& model, const StateField& U,
                              const ViscosityMatrix& D, double dt) {
  require_admissible_field(model, U);
  const auto flux = nodal_fluxes(model, U);
  StateField out(U.num_nodes(), U.components, U.time + dt);
  kernels::GraphUpdateArgs args;
  args.num_rows = U.num_nodes();
  args.components = U.components;
  args.dim = model.dimension();
  args.row_ptr = ops.stencils.row_ptr.data();
  args.cols = ops.stencils.cols.data();
  args.viscosity = D.values.data();
  args.cx = ops.cx.data();
  args.cy = ops.cy.data();
  args.mass = ops.mass.data();
  args.state = U.values.data();
  args.flux = flux.data();
  args.dt = dt;
  args.out = out.values.data();
  kernels::active().graph_update(args);
  for (int i = 0; i < out.num_nodes(); ++i) {
    if (auto violation = model.admissibility_violation(out.state(i))) {
      throw InadmissibleState(model.name() + ": update produced an inadmissible state, " + *violation +
                                  "; retry with a smaller cfl",
                              i);
    }
  }
  return out;
}

std::vector<IntermediateState> intermediate_states(const AssembledOperators& ops, const HyperbolicSystem& model,
                                                   const StateField& U, const ViscosityMatrix& D) {
  const auto& st = ops.stencils;
  const int m = U.components;
  std::vector<IntermediateState> out;
  for (int i = 0; i < st.num_rows(); ++i) {
    const State ui = U.state(i);
    const Flux fi = model.flux(ui);
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      const int j = st.cols[e];
      if (j == i || !(D.values[e] > 0.0)) continue;
      const State uj = U.state(j);
      const Flux fj = model.flux(uj);
      IntermediateState s{i, j, {}};
      for (int k = 0; k < m; ++k) {
        const double transport = (fj[k][0] - fi[k][0]) * ops.cx[e] + (fj[k][1] - fi[k][1]) * ops.cy[e];
        s.value[k] = 0.5 * (ui[k] + uj[k]) - transport / (2.0 * D.values[e]);
      }
      out.push_back(s);
    }
  }
  return out;
}

Solver::Solver(const AssembledOperators& ops, std::shared_ptr<const HyperbolicSystem> model, SolverConfig config,
               std::vector<std::uint8_t> boundary)
    : ops_(ops), model_(std::move(model)), config_(config), boundary_(std::move(boundary)) {
  config_.validate();
  if (!model_) throw Error("solver: no model");
  if (model_->dimension() != ops_.dim) throw Error("solver: model and mesh dimensions differ");
}

bool Solver::attempt_step(const StateField& U, double stop_time, double dt, bool fixed_dt, double& next_dt, StateField& result,
                          std::vector<PendingStage>& stages) const {
  const bool record = !stage_observers_.empty();
  const int count = stage_count(config_.integrator);
  const auto& kern = kernels::active();
  stages.clear();

  StateField input = U;
  ViscosityMatrix frozen;
  for (int s = 0; s < count; ++s) {
    ViscosityMatrix D = (s > 0 && config_.freeze_viscosity) ? frozen
                                                             : compute_viscosity(config_.viscosity, ops_, *model_, input);
    if (s == 0) {
      if (!fixed_dt) dt = std::min(cfl_timestep(ops_, D, config_.cfl), stop_time - U.time);
      if (config_.freeze_viscosity) frozen = D;
    } else if (!config_.freeze_viscosity) {
      const double bound = cfl_timestep(ops_, D, 1.0);
      if (dt > bound) {
        next_dt = config_.cfl * bound;
        return false;
      }
    }
    StateField output = forward_euler_step(ops_, *model_, input, D, dt);

    // Shu-Osher convex forms: U^(s+1) = a_s U^n + (1 - a_s) FE(U^(s)).
    double keep = 0.0;
    if (config_.integrator == Integrator::ssp2 && s == 1) keep = 0.5;
    if (config_.integrator == Integrator::ssp3 && s == 1) keep = 0.75;
    if (config_.integrator == Integrator::ssp3 && s == 2) keep = 1.0 / 3.0;
    StateField next(U.num_nodes(), U.components, U.time + dt);
    if (keep == 0.0) {
      next.values = output.values;
    } else {
      kern.linear_combination(next.values, keep, U.values, 1.0 - keep, output.values);
    }
    require_admissible_field(*model_, next);
    if (record) stages.push_back({std::move(input), std::move(output), std::move(D), stage_weight(config_.integrator, s)});
    input = std::move(next);
  }
  input.time = U.time + dt;
  result = std::move(input);
  next_dt = dt;
  return true;
}

double Solver::step(StateField& U, double stop_time) {
  if (steps_ >= config_.max_steps) throw Error("solver: exceeded max_steps = " + std::to_string(config_.max_steps));
  std::vector<PendingStage> stages;
  StateField result;
  double dt = 0.0;
  bool fixed = false;
  int attempt = 0;
  while (true) {
    double next_dt = 0.0;
    if (attempt_step(U, stop_time, dt, fixed, next_dt, result, stages)) {
      dt = next_dt;
      break;
    }
    if (++attempt > kMaxRestarts) throw Error("solver: stage time-step restarts did not converge");
    ++restarts_;
    dt = next_dt;
    fixed = true;
  }
  if (result.time > stop_time || stop_time - result.time <= 1e-14 * std::abs(stop_time)) result.time = stop_time;
  const long step_index = steps_;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageRecord record{stages[s].input, stages[s].output, stages[s].viscosity, dt, step_index,
                             static_cast<int>(s), stages[s].weight};
    for (const auto& observer : stage_observers_) observer(record);
  }
  check_boundary(U, result);
  U = std::move(result);
  ++steps_;
  for (const auto& observer : step_observers_) observer(U, step_index, dt);
  return dt;
}

StateField Solver::run_until(StateField U, double stop_time) {
  require_admissible_field(*model_, U);
  while (U.time < stop_time) {
    const double dt = step(U, stop_time);
    if (!(dt > 0.0)) throw Error("solver: time step collapsed to " + format_double(dt));
  }
  return U;
}

void Solver::check_boundary(const StateField& before, const StateField& after) {
  if (boundary_warned_ || boundary_.empty()) return;
  const int m = before.components;
  for (int i = 0; i < before.num_nodes(); ++i) {
    if (!boundary_[i]) continue;
    for (int k = 0; k < m; ++k) {
      const double change = std::abs(after.values[i * m + k] - before.values[i * m + k]);
      if (change > kBoundaryChangeTolerance) {
        warnings_.push_back("solution changed by " + format_double(change) + " at boundary node " +
                            std::to_string(i) + " in step " + std::to_string(steps_) +
                            "; no boundary conditions are imposed");
        boundary_warned_ = true;
        return;
      }
    }
  }
}

}  // namespace idp
