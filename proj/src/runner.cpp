#include "idp/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "idp/format.hpp"

namespace idp {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish_output(out, path);
}

std::string field_name(std::size_t index) {
  std::string digits = std::to_string(index);
  return "snapshot_" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits + ".csv";
}

}  // namespace

void write_field_csv(std::ostream& out, const Mesh& mesh, const StateField& U) {
  out << "x";
  if (mesh.dim == 2) out << ",y";
  for (int k = 0; k < U.components; ++k) out << ",comp_" << k;
  out << '\n';
  for (int i = 0; i < U.num_nodes(); ++i) {
    out << format_double(mesh.nodes[i][0]);
    if (mesh.dim == 2) out << ',' << format_double(mesh.nodes[i][1]);
    for (int k = 0; k < U.components; ++k) out << ',' << format_double(U.values[i * U.components + k]);
    out << '\n';
  }
}

std::string output_directory(const CaseFile& c, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  const std::string configured = c.text("output.directory");
  if (!configured.empty()) return configured;
  return (fs::path("out") / to_string(c.kind())).string();
}

RunOutcome run_case(const CaseFile& c, const RunOptions& options, std::optional<long> cells) {
  const auto start = std::chrono::steady_clock::now();
  const auto problem = build_problem(c, cells);
  Solver solver(problem->ops, problem->model, problem->solver, problem->mesh.boundary);
  RunMonitor monitor(problem->ops, problem->model, problem->initial, problem->diagnostics);
  monitor.attach(solver);

  fs::path dir;
  if (options.write_files) {
    dir = output_directory(c, options);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }

  RunOutcome outcome;
  auto times = c.reals("output.snapshot_times");
  std::sort(times.begin(), times.end());
  StateField U = problem->initial;
  for (double t : times) {
    if (t < U.time || t > problem->solver.final_time) {
      throw Error("snapshot time " + format_double(t) + " lies outside [0, final_time]");
    }
    U = solver.run_until(std::move(U), t);
    Snapshot snap{U.time, field_name(outcome.snapshots.size())};
    if (options.write_files) {
      const fs::path path = dir / snap.file;
      auto out = open_output(path);
      write_field_csv(out, problem->mesh, U);
      finish_output(out, path);
      outcome.files.push_back(path.string());
    }
    outcome.snapshots.push_back(snap);
  }
  U = solver.run(std::move(U));

  RunReport report = make_report(monitor, solver, U);
  report.case_name = to_string(c.kind());
  report.system = problem->model->name();
  report.components = problem->model->component_names();
  if (problem->exact) report.l1 = l1_error(problem->ops, problem->mesh, U, *problem->exact);
  report.warnings.insert(report.warnings.begin(), problem->notes.begin(), problem->notes.end());
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.write_files) {
    const fs::path field = dir / "field.csv";
    auto out = open_output(field);
    write_field_csv(out, problem->mesh, U);
    finish_output(out, field);
    outcome.files.push_back(field.string());

    auto j = to_json(report);
    j["snapshots"] = nlohmann::json::array();
    for (const auto& s : outcome.snapshots) j["snapshots"].push_back({{"time", s.time}, {"file", s.file}});
    const fs::path report_path = dir / "report.json";
    write_json(report_path, j);
    outcome.files.push_back(report_path.string());
  }
  outcome.exit_code = options.strict && !report.ok() ? 1 : 0;
  outcome.report = std::move(report);
  outcome.final_state = std::move(U);
  return outcome;
}

ConvergenceOutcome run_convergence(const CaseFile& c, const std::vector<long>& meshes, const RunOptions& options) {
  if (meshes.size() < 2) throw Error("convergence needs at least two mesh sizes");
  const auto start = std::chrono::steady_clock::now();
  ConvergenceOutcome outcome;
  RunOptions per_run = options;
  per_run.write_files = false;
  std::vector<std::string> names;
  for (long cells : meshes) {
    auto run = run_case(c, per_run, cells);
    if (!run.report.l1) throw Error("case " + to_string(c.kind()) + " has no exact solution to measure errors against");
    const auto problem_length = c.real("mesh.x_max") - c.real("mesh.x_min");
    outcome.rows.push_back({static_cast<double>(cells) / problem_length, run.report.l1->error, {}});
    names = run.report.components;
    if (run.exit_code != 0) outcome.exit_code = run.exit_code;
    outcome.reports.push_back(std::move(run.report));
  }
  compute_rates(outcome.rows);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.write_files) {
    const fs::path dir = output_directory(c, options);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    const fs::path csv = dir / "convergence.csv";
    auto out = open_output(csv);
    write_convergence_csv(out, outcome.rows, names);
    finish_output(out, csv);
    outcome.files.push_back(csv.string());
    for (std::size_t r = 0; r < outcome.reports.size(); ++r) {
      const fs::path path = dir / ("report_" + std::to_string(meshes[r]) + ".json");
      write_json(path, to_json(outcome.reports[r]));
      outcome.files.push_back(path.string());
    }
  }
  return outcome;
}

}  // namespace idp
