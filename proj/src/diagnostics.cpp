#include "idp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "idp/format.hpp"
#include "idp/kernels.hpp"

namespace idp {

std::vector<double> conserved_totals(const AssembledOperators& ops, const StateField& U) {
  std::vector<double> sums(U.components, 0.0);
  kernels::active().weighted_sums(ops.mass, U.values, U.components, sums);
  return sums;
}

std::vector<double> boundary_outflow(const AssembledOperators& ops, const HyperbolicSystem& model,
                                     const StateField& U, double dt) {
  const int m = U.components;
  std::vector<double> out(m, 0.0);
  for (int j = 0; j < U.num_nodes(); ++j) {
    const Vec& beta = ops.column_sums[j];
    if (beta[0] == 0.0 && beta[1] == 0.0) continue;
    const Flux f = model.flux(U.state(j));
    for (int k = 0; k < m; ++k) out[k] += dt * dot(f[k], beta);
  }
  return out;
}

ConservationTracker::ConservationTracker(const AssembledOperators& ops,
                                         std::shared_ptr<const HyperbolicSystem> model, const StateField& initial)
    : ops_(ops),
      model_(std::move(model)),
      initial_(conserved_totals(ops, initial)),
      outflow_(initial.components, 0.0),
      max_drift_(initial.components, 0.0),
      max_raw_(initial.components, 0.0) {}

std::vector<double> ConservationTracker::relative(const std::vector<double>& delta) const {
  std::vector<double> out(delta.size());
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double denom = std::abs(initial_[k]);
    out[k] = denom > 0.0 ? std::abs(delta[k]) / denom : std::abs(delta[k]);
  }
  return out;
}

void ConservationTracker::observe_stage(const StageRecord& record) {
  const auto out = boundary_outflow(ops_, *model_, record.input, record.dt);
  for (std::size_t k = 0; k < out.size(); ++k) outflow_[k] += record.weight * out[k];
}

void ConservationTracker::observe_step(const StateField& U) {
  const auto totals = conserved_totals(ops_, U);
  std::vector<double> balance(totals.size()), raw(totals.size());
  for (std::size_t k = 0; k < totals.size(); ++k) {
    raw[k] = totals[k] - initial_[k];
    balance[k] = raw[k] + outflow_[k];
  }
  auto drift = relative(balance);
  const auto raw_drift = relative(raw);
  for (std::size_t k = 0; k < drift.size(); ++k) {
    max_drift_[k] = std::max(max_drift_[k], drift[k]);
    max_raw_[k] = std::max(max_raw_[k], raw_drift[k]);
  }
  series_.push_back(std::move(drift));
}

double ConservationTracker::worst() const {
  return max_drift_.empty() ? 0.0 : *std::max_element(max_drift_.begin(), max_drift_.end());
}

double invariance_tolerance(const HyperbolicSystem& model) { return model.components() == 1 ? 1e-12 : 1e-11; }

InvarianceSummary local_invariance(const HyperbolicSystem& model, const Stencils& stencils,
                                   const StateField& before, const StateField& after, double tolerance, long step,
                                   int stage) {
  const auto functionals = model.invariant_functionals();
  const int nf = static_cast<int>(functionals.size());
  const int n = before.num_nodes();
  std::vector<double> g_before(static_cast<std::size_t>(n) * nf), g_after(static_cast<std::size_t>(n) * nf);
  for (int i = 0; i < n; ++i) {
    model.invariant_values(before.state(i), std::span<double>(g_before.data() + i * nf, nf));
    model.invariant_values(after.state(i), std::span<double>(g_after.data() + i * nf, nf));
  }
  InvarianceSummary summary;
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < nf; ++f) {
      double bound = 0.0;
      double exceedance = 0.0;
      const double value = g_after[i * nf + f];
      if (functionals[f].neighborhood) {
        bound = std::numeric_limits<double>::infinity();
        for (int e = stencils.row_ptr[i]; e < stencils.row_ptr[i + 1]; ++e) {
          bound = std::min(bound, g_before[stencils.cols[e] * nf + f]);
        }
        exceedance = bound - value;
        if (std::isnan(value)) exceedance = std::numeric_limits<double>::infinity();
        ++summary.checks;
        if (!(exceedance <= tolerance)) {
          ++summary.violations;
        } else {
          continue;
        }
      } else {
        ++summary.checks;
        if (value > 0.0) continue;
        ++summary.violations;
        exceedance = std::isnan(value) ? std::numeric_limits<double>::infinity() : -value;
      }
      if (summary.violations == 1 || exceedance > summary.worst.exceedance) {
        summary.worst = {step, stage, i, functionals[f].name, exceedance};
      }
    }
  }
  return summary;
}

EntropyResiduals entropy_residuals(const AssembledOperators& ops, const HyperbolicSystem& model,
                                   const StateField& before, const StateField& after, const ViscosityMatrix& D,
                                   double dt) {
  const auto& st = ops.stencils;
  const int n = before.num_nodes();
  std::vector<double> eta_before(n), eta_after(n);
  std::vector<Vec> q(n);
  double eta_max = 0.0, rate_max = 0.0;
  double total_before = 0.0, total_after = 0.0, outflow = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto pair = model.entropy(before.state(i));
    eta_before[i] = pair.eta;
    q[i] = pair.q;
    eta_after[i] = model.entropy(after.state(i)).eta;
    eta_max = std::max(eta_max, std::abs(pair.eta));
    rate_max = std::max(rate_max, ops.mass[i] / dt);
    total_before += ops.mass[i] * eta_before[i];
    total_after += ops.mass[i] * eta_after[i];
    outflow += dt * dot(q[i], ops.column_sums[i]);
  }
  EntropyResiduals r;
  r.full.resize(n);
  r.off_diagonal.resize(n);
  r.scale = rate_max * eta_max;
  r.global_change = total_after - total_before + outflow;
  for (int i = 0; i < n; ++i) {
    double transport = 0.0, viscous = 0.0;
    for (int e = st.row_ptr[i]; e < st.row_ptr[i + 1]; ++e) {
      const int j = st.cols[e];
      transport += q[j][0] * ops.cx[e] + q[j][1] * ops.cy[e];
      if (j != i) viscous += D.values[e] * eta_before[j];
    }
    const double time_term = ops.mass[i] / dt * (eta_after[i] - eta_before[i]);
    r.off_diagonal[i] = time_term + transport - viscous;
    r.full[i] = time_term + transport - (viscous + D.values[st.diag[i]] * eta_before[i]);
  }
  return r;
}

double min_convex_coefficient(const AssembledOperators& ops, const ViscosityMatrix& D, double dt) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ops.mass.size(); ++i) {
    lowest = std::min(lowest, 1.0 - 2.0 * dt * std::abs(D.diagonal[i]) / ops.mass[i]);
  }
  return lowest;
}

RunMonitor::RunMonitor(const AssembledOperators& ops, std::shared_ptr<const HyperbolicSystem> model,
                       const StateField& initial, StageDiagnostics toggles)
    : ops_(ops),
      model_(model),
      toggles_(toggles),
      conservation_(ops, model, initial),
      invariance_tol_(idp::invariance_tolerance(*model)) {}

void RunMonitor::attach(Solver& solver) {
  solver.add_stage_observer([this](const StageRecord& r) { observe_stage(r); });
  solver.add_step_observer([this](const StateField& U, long, double) { observe_step(U); });
}

void RunMonitor::observe_stage(const StageRecord& record) {
  conservation_.observe_stage(record);
  min_convex_ = std::min(min_convex_, idp::min_convex_coefficient(ops_, record.viscosity, record.dt));
  if (toggles_.invariance) {
    const auto s = local_invariance(*model_, ops_.stencils, record.input, record.output, invariance_tol_,
                                    record.step, record.stage);
    invariance_.checks += s.checks;
    if (s.violations > 0 && (invariance_.violations == 0 || s.worst.exceedance > invariance_.worst.exceedance)) {
      invariance_.worst = s.worst;
    }
    invariance_.violations += s.violations;
  }
  if (toggles_.entropy) {
    const auto r = entropy_residuals(ops_, *model_, record.input, record.output, record.viscosity, record.dt);
    ++entropy_checks_;
    if (r.scale > 0.0) {
      for (std::size_t i = 0; i < r.full.size(); ++i) {
        const double ratio = r.full[i] / r.scale;
        if (ratio > entropy_max_) {
          entropy_max_ = ratio;
          entropy_worst_step_ = record.step;
          entropy_worst_node_ = static_cast<int>(i);
        }
        entropy_max_off_ = std::max(entropy_max_off_, r.off_diagonal[i] / r.scale);
        if (ratio > kEntropyProductionThreshold) ++entropy_production_;
      }
      entropy_global_max_ = std::max(entropy_global_max_, r.global_change / (r.scale * record.dt));
    }
  }
}

void RunMonitor::observe_step(const StateField& U) { conservation_.observe_step(U); }

L1Error l1_error(const AssembledOperators& ops, const Mesh& mesh, const StateField& U, const ExactSolution& exact) {
  const int m = U.components;
  std::vector<double> num(m, 0.0), den(m, 0.0);
  for (int i = 0; i < U.num_nodes(); ++i) {
    const State ue = exact(mesh.nodes[i], U.time);
    const State uh = U.state(i);
    for (int k = 0; k < m; ++k) {
      num[k] += ops.mass[i] * std::abs(uh[k] - ue[k]);
      den[k] += ops.mass[i] * std::abs(ue[k]);
    }
  }
  L1Error out;
  for (int k = 0; k < m; ++k) {
    const bool absolute = !(den[k] > 0.0);
    out.error.push_back(absolute ? num[k] : num[k] / den[k]);
    out.absolute.push_back(absolute);
  }
  return out;
}

PSystemRarefaction::PSystemRarefaction(const PSystemModel& model, double x0, double vL, double uL, double vR,
                                       double uR)
    : model_(model), x0_(x0), vL_(vL), uL_(uL), vR_(vR), uR_(uR) {
  if (!(vR > vL)) throw Error("p-system rarefaction: need vR > vL for a 1-rarefaction");
  const double u_on_curve = uL + model_.speed_integral(vL, vR);
  if (std::abs(u_on_curve - uR) > 1e-12 * std::max(1.0, std::abs(uR))) {
    throw Error("p-system rarefaction: right state is off the rarefaction curve (u should be " +
                format_double(u_on_curve) + ", got " + format_double(uR) + ")");
  }
}

double PSystemRarefaction::head_speed() const { return -model_.sound_speed(vL_); }
double PSystemRarefaction::tail_speed() const { return -model_.sound_speed(vR_); }

State PSystemRarefaction::operator()(const Vec& x, double t) const {
  State s{};
  if (!(t > 0.0)) {
    s[0] = x[0] < x0_ ? vL_ : vR_;
    s[1] = x[0] < x0_ ? uL_ : uR_;
    return s;
  }
  const double xi = (x[0] - x0_) / t;
  if (xi <= head_speed()) {
    s[0] = vL_;
    s[1] = uL_;
  } else if (xi >= tail_speed()) {
    s[0] = vR_;
    s[1] = uR_;
  } else {
    // c(v) = sqrt(gamma r) v^{-(gamma+1)/2} = -xi inside the fan.
    const double a = std::sqrt(model_.gamma() * model_.r());
    s[0] = std::pow(-xi / a, -2.0 / (model_.gamma() + 1.0));
    s[1] = uL_ + model_.speed_integral(vL_, s[0]);
  }
  return s;
}

void compute_rates(std::vector<ConvergenceRow>& rows) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].rates.assign(rows[r].errors.size(), std::nullopt);
    if (r == 0) continue;
    const auto& coarse = rows[r - 1];
    for (std::size_t k = 0; k < rows[r].errors.size(); ++k) {
      const double ec = coarse.errors[k], ef = rows[r].errors[k];
      if (!(ec > 0.0) || !(ef > 0.0) || coarse.one_over_h == rows[r].one_over_h) continue;
      // h_coarse / h_fine = (1/h_fine) / (1/h_coarse).
      rows[r].rates[k] = std::log(ec / ef) / std::log(rows[r].one_over_h / coarse.one_over_h);
    }
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows,
                           const std::vector<std::string>& component_names) {
  out << "one_over_h";
  for (const auto& name : component_names) out << ",error_" << name << ",rate_" << name;
  out << '\n';
  for (const auto& row : rows) {
    out << format_double(row.one_over_h);
    for (std::size_t k = 0; k < component_names.size(); ++k) {
      out << ',' << format_double(row.errors.at(k)) << ',';
      if (k < row.rates.size() && row.rates[k]) out << format_double(*row.rates[k]);
    }
    out << '\n';
  }
}

bool RunReport::conservation_ok() const {
  for (double d : conservation_max_drift) {
    if (!(d <= RunMonitor::kConservationTolerance)) return false;
  }
  return true;
}

bool RunReport::invariance_ok() const { return !invariance_checked || invariance.violations == 0; }

bool RunReport::entropy_ok() const {
  return !entropy_checked || entropy_checks == 0 || entropy_max_ratio <= RunMonitor::kEntropyTolerance;
}

RunReport make_report(const RunMonitor& monitor, const Solver& solver, const StateField& final_state) {
  RunReport r;
  r.viscosity = to_string(solver.config().viscosity);
  r.integrator = to_string(solver.config().integrator);
  r.kernels = std::string(kernels::to_string(kernels::active().isa));
  r.nodes = final_state.num_nodes();
  r.steps = solver.steps_taken();
  r.restarts = solver.restarts();
  r.final_time = final_state.time;
  r.conservation_max_drift = monitor.conservation().max_drift();
  r.conservation_max_raw_drift = monitor.conservation().max_raw_drift();
  r.invariance = monitor.invariance();
  r.invariance_tolerance = monitor.invariance_tolerance();
  r.invariance_checked = monitor.toggles().invariance;
  r.entropy_checked = monitor.toggles().entropy;
  r.entropy_checks = monitor.entropy_checks();
  if (r.entropy_checks > 0) {
    r.entropy_max_ratio = monitor.entropy_max_ratio();
    r.entropy_max_ratio_off_diagonal = monitor.entropy_max_ratio_off_diagonal();
    r.entropy_global_max_ratio = monitor.entropy_global_max_ratio();
  }
  r.entropy_worst_step = monitor.entropy_worst_step();
  r.entropy_worst_node = monitor.entropy_worst_node();
  r.entropy_production_count = monitor.entropy_production_count();
  r.min_convex_coefficient = solver.steps_taken() > 0 ? monitor.min_convex_coefficient() : 1.0;
  r.warnings = solver.warnings();
  return r;
}

nlohmann::json to_json(const RunReport& r) {
  using nlohmann::json;
  json invariance = {{"checked", r.invariance_checked},
                     {"checks", r.invariance.checks},
                     {"violations", r.invariance.violations},
                     {"tolerance", r.invariance_tolerance}};
  if (r.invariance.violations > 0) {
    invariance["worst"] = {{"step", r.invariance.worst.step},
                           {"stage", r.invariance.worst.stage},
                           {"node", r.invariance.worst.node},
                           {"functional", r.invariance.worst.functional},
                           {"exceedance", r.invariance.worst.exceedance}};
  }
  json entropy = {{"checked", r.entropy_checked},
                  {"checks", r.entropy_checks},
                  {"max_residual_ratio", r.entropy_max_ratio},
                  {"max_residual_ratio_off_diagonal", r.entropy_max_ratio_off_diagonal},
                  {"worst_step", r.entropy_worst_step},
                  {"worst_node", r.entropy_worst_node},
                  {"positive_production_count", r.entropy_production_count},
                  {"global_max_ratio", r.entropy_global_max_ratio},
                  {"tolerance", RunMonitor::kEntropyTolerance}};
  json out = {{"case", r.case_name},
              {"system", r.system},
              {"viscosity", r.viscosity},
              {"integrator", r.integrator},
              {"kernels", r.kernels},
              {"nodes", r.nodes},
              {"steps", r.steps},
              {"restarts", r.restarts},
              {"final_time", r.final_time},
              {"wall_seconds", r.wall_seconds},
              {"components", r.components},
              {"conservation",
               {{"max_drift", r.conservation_max_drift},
                {"max_raw_drift", r.conservation_max_raw_drift},
                {"tolerance", RunMonitor::kConservationTolerance}}},
              {"invariance", invariance},
              {"entropy", entropy},
              {"min_convex_coefficient", r.min_convex_coefficient},
              {"warnings", r.warnings},
              {"ok", r.ok()}};
  if (r.l1) out["l1_error"] = {{"error", r.l1->error}, {"absolute", r.l1->absolute}};
  return out;
}

}  // namespace idp
