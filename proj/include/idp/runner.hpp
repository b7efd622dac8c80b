#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idp/problem.hpp"

namespace idp {

/// Field CSV: header `x[,y],comp_0,...`, one row per node, shortest
/// round-trip decimals.
void write_field_csv(std::ostream& out, const Mesh& mesh, const StateField& U);

struct RunOptions {
  bool strict = false;
  std::string out_dir;  // empty: output.directory of the case, else out/<case>
  bool write_files = true;
};

struct Snapshot {
  double time = 0.0;
  std::string file;
};

struct RunOutcome {
  RunReport report;
  StateField final_state;
  std::vector<Snapshot> snapshots;
  std::vector<std::string> files;
  /// 0 on success, 1 when strict mode found a violation.
  int exit_code = 0;
};

RunOutcome run_case(const CaseFile& c, const RunOptions& options, std::optional<long> cells = std::nullopt);

struct ConvergenceOutcome {
  std::vector<ConvergenceRow> rows;
  std::vector<RunReport> reports;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
  int exit_code = 0;
};

ConvergenceOutcome run_convergence(const CaseFile& c, const std::vector<long>& meshes, const RunOptions& options);

std::string output_directory(const CaseFile& c, const RunOptions& options);

}  // namespace idp
