#include "idp/problem.hpp"

#include <cmath>
#include <numbers>

#include "idp/format.hpp"

namespace idp {

StateField interpolate(const Mesh& mesh, int components, const std::function<State(const Vec&)>& u0) {
  StateField U(mesh.num_nodes(), components, 0.0);
  for (int i = 0; i < mesh.num_nodes(); ++i) U.set_state(i, u0(mesh.nodes[i]));
  return U;
}

namespace {

Mesh interval_mesh(const CaseFile& c, std::optional<long> cells) {
  const long n = cells ? *cells : c.integer("mesh.cells");
  if (n < 2 || n > 100'000'000) throw Error("mesh.cells must lie in [2, 1e8], got " + std::to_string(n));
  const bool periodic = c.kind() == CaseKind::custom_scalar && c.flag("mesh.periodic");
  return build_interval_mesh(static_cast<int>(n), c.real("mesh.x_min"), c.real("mesh.x_max"), periodic);
}

void setup_kpp(const CaseFile& c, Problem& p) {
  const Rectangle box{c.real("mesh.x_min"), c.real("mesh.x_max"), c.real("mesh.y_min"), c.real("mesh.y_max")};
  p.mesh = build_triangle_mesh(static_cast<int>(c.integer("mesh.nx")), static_cast<int>(c.integer("mesh.ny")), box,
                               c.real("mesh.perturbation"), static_cast<std::uint64_t>(c.integer("mesh.seed")));
  p.model = make_kpp();
  const double radius = c.real("initial.radius"), inner = c.real("initial.inner"), outer = c.real("initial.outer");
  p.initial = interpolate(p.mesh, 1, [&](const Vec& x) {
    return State{std::hypot(x[0], x[1]) <= radius ? inner : outer, 0.0, 0.0, 0.0};
  });
}

void setup_psystem(const CaseFile& c, std::optional<long> cells, Problem& p) {
  const double gamma = c.real("model.gamma");
  if (!(gamma > 1.0)) throw Error("psystem_rarefaction needs gamma > 1, got " + format_double(gamma));
  const double r = c.has("model.r") ? c.real("model.r") : 1.0 / gamma;
  auto model = std::make_shared<PSystemModel>(r, gamma);
  p.model = model;
  p.mesh = interval_mesh(c, cells);
  const double x0 = c.real("initial.x0");
  const double vL = 1.0, uL = 0.0;
  const double vR = std::pow(2.0, 2.0 / (gamma - 1.0)), uR = 1.0 / (gamma - 1.0);
  p.initial = interpolate(p.mesh, 2, [&](const Vec& x) {
    return x[0] < x0 ? State{vL, uL, 0.0, 0.0} : State{vR, uR, 0.0, 0.0};
  });
  try {
    p.exact = PSystemRarefaction(*model, x0, vL, uL, vR, uR);
  } catch (const Error& e) {
    p.notes.push_back(std::string("no exact solution: ") + e.what());
  }
}

void setup_euler(const CaseFile& c, std::optional<long> cells, Problem& p) {
  auto model = std::make_shared<EulerModel>(c.real("model.gamma"), 1);
  p.model = model;
  p.mesh = interval_mesh(c, cells);
  const double x0 = c.real("initial.x0");
  const State left = model->from_primitive(c.real("initial.rho_left"), {c.real("initial.u_left"), 0.0},
                                           c.real("initial.p_left"));
  const State right = model->from_primitive(c.real("initial.rho_right"), {c.real("initial.u_right"), 0.0},
                                            c.real("initial.p_right"));
  model->require_admissible(left);
  model->require_admissible(right);
  p.initial = interpolate(p.mesh, 3, [&](const Vec& x) { return x[0] < x0 ? left : right; });
}

void setup_custom(const CaseFile& c, std::optional<long> cells, Problem& p) {
  const std::string flux = c.text("model.flux");
  if (flux == "linear") {
    p.model = make_linear_advection({c.real("model.velocity"), 0.0}, 1);
  } else if (flux == "burgers") {
    p.model = make_burgers();
  } else {
    p.model = make_buckley_leverett();
  }
  p.mesh = interval_mesh(c, cells);
  const double left = c.real("initial.left"), right = c.real("initial.right"), x0 = c.real("initial.x0");
  const double x_min = c.real("mesh.x_min"), length = c.real("mesh.x_max") - x_min;
  const bool sine = c.text("initial.profile") == "sine";
  p.initial = interpolate(p.mesh, 1, [&](const Vec& x) {
    const double u = sine ? left + right * std::sin(2.0 * std::numbers::pi * (x[0] - x_min) / length)
                          : (x[0] < x0 ? left : right);
    return State{u, 0.0, 0.0, 0.0};
  });
}

}  // namespace

std::unique_ptr<Problem> build_problem(const CaseFile& c, std::optional<long> cells) {
  auto p = std::make_unique<Problem>();
  p->kind = c.kind();
  switch (c.kind()) {
    case CaseKind::kpp: setup_kpp(c, *p); break;
    case CaseKind::psystem_rarefaction: setup_psystem(c, cells, *p); break;
    case CaseKind::leblanc:
    case CaseKind::sod: setup_euler(c, cells, *p); break;
    case CaseKind::custom_scalar: setup_custom(c, cells, *p); break;
  }
  p->ops = assemble(p->mesh);
  p->solver.viscosity = parse_viscosity_mode(c.text("solver.viscosity"));
  p->solver.integrator = parse_integrator(c.text("solver.integrator"));
  p->solver.cfl = c.real("solver.cfl");
  p->solver.final_time = c.real("solver.final_time");
  p->solver.max_steps = c.integer("solver.max_steps");
  p->solver.freeze_viscosity = c.flag("solver.freeze_viscosity");
  p->solver.validate();
  p->diagnostics.invariance = c.flag("diagnostics.invariance");
  p->diagnostics.entropy = c.flag("diagnostics.entropy");
  require_admissible_field(*p->model, p->initial);
  return p;
}

}  // namespace idp
