#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idp/case_file.hpp"
#include "idp/diagnostics.hpp"

namespace idp {

/// Everything needed to run one case: mesh, operators, model, initial
/// nodal interpolant and, when known, the exact solution.
struct Problem {
  CaseKind kind = CaseKind::kpp;
  Mesh mesh;
  AssembledOperators ops;
  std::shared_ptr<const HyperbolicSystem> model;
  StateField initial;
  std::optional<ExactSolution> exact;
  SolverConfig solver;
  StageDiagnostics diagnostics;
  std::vector<std::string> notes;
};

/// Builds the problem described by a case file. `cells` replaces the 1D
/// mesh size when given.
std::unique_ptr<Problem> build_problem(const CaseFile& c, std::optional<long> cells = std::nullopt);

/// Nodal interpolant of `u0` on the mesh.
StateField interpolate(const Mesh& mesh, int components, const std::function<State(const Vec&)>& u0);

}  // namespace idp
