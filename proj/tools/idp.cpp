#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idp/format.hpp"
#include "idp/kernels.hpp"
#include "idp/runner.hpp"

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

std::vector<long> parse_meshes(const std::string& text) {
  std::vector<long> meshes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long n = 0;
    try {
      n = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || n < 2) throw idp::Error("--meshes: bad mesh size '" + item + "'");
    meshes.push_back(n);
  }
  return meshes;
}

idp::CaseFile load(const std::string& path, const std::vector<std::string>& overrides) {
  auto c = idp::read_case_file(path);
  for (const auto& o : overrides) idp::apply_override(c, o);
  return c;
}

void print_summary(const idp::RunReport& r) {
  std::cout << r.case_name << ": " << r.steps << " steps to t = " << idp::format_double(r.final_time) << " on "
            << r.nodes << " nodes (" << r.viscosity << ", " << r.integrator << ", " << r.kernels << ")\n";
  std::cout << "  conservation drift:";
  for (double d : r.conservation_max_drift) std::cout << ' ' << idp::format_double(d);
  std::cout << '\n';
  if (r.invariance_checked) {
    std::cout << "  invariance violations: " << r.invariance.violations << " of " << r.invariance.checks << '\n';
  }
  if (r.entropy_checked) {
    std::cout << "  max entropy residual / scale: " << idp::format_double(r.entropy_max_ratio) << '\n';
  }
  if (r.l1) {
    std::cout << "  relative L1 error:";
    for (double e : r.l1->error) std::cout << ' ' << idp::format_double(e);
    std::cout << '\n';
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-domain preserving continuous finite element solver"};
  app.require_subcommand(1);

  std::string case_path, out_dir, meshes_text;
  std::vector<std::string> overrides;
  bool strict = false;
  std::string isa;
  app.add_option("--kernels", isa, "Kernel ISA: scalar or avx2")->check(CLI::IsMember({"scalar", "avx2"}));

  auto* run = app.add_subcommand("run", "Run a case file");
  run->add_option("case", case_path, "Case file")->required();
  run->add_flag("--strict", strict, "Exit with status 1 on any invariant, entropy or conservation violation");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--override", overrides, "section.key=value, repeatable");

  auto* conv = app.add_subcommand("convergence", "Mesh-refinement study against the exact solution");
  conv->add_option("case", case_path, "Case file")->required();
  conv->add_option("--meshes", meshes_text, "Comma-separated cell counts");
  conv->add_flag("--strict", strict, "Exit with status 1 on any violation");
  conv->add_option("--out", out_dir, "Output directory");
  conv->add_option("--override", overrides, "section.key=value, repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (isa == "scalar") idp::kernels::select(idp::kernels::Isa::scalar);
    if (isa == "avx2") idp::kernels::select(idp::kernels::Isa::avx2);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  idp::CaseFile c;
  std::vector<long> meshes;
  try {
    c = load(case_path, overrides);
    if (*conv) meshes = meshes_text.empty() ? c.integers("convergence.meshes") : parse_meshes(meshes_text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  idp::RunOptions options;
  options.strict = strict;
  options.out_dir = out_dir;
  try {
    if (*run) {
      const auto outcome = idp::run_case(c, options);
      print_summary(outcome.report);
      for (const auto& f : outcome.files) std::cout << "  wrote " << f << '\n';
      if (outcome.exit_code != 0) std::cerr << "strict mode: report contains violations\n";
      return outcome.exit_code != 0 ? kExitViolation : 0;
    }
    const auto outcome = idp::run_convergence(c, meshes, options);
    for (std::size_t r = 0; r < outcome.rows.size(); ++r) {
      const auto& row = outcome.rows[r];
      std::cout << "1/h = " << idp::format_double(row.one_over_h);
      for (std::size_t k = 0; k < row.errors.size(); ++k) {
        std::cout << "  " << outcome.reports[r].components[k] << ": " << idp::format_double(row.errors[k]);
        if (row.rates[k]) std::cout << " (rate " << idp::format_double(*row.rates[k]) << ")";
      }
      std::cout << '\n';
    }
    for (const auto& f : outcome.files) std::cout << "  wrote " << f << '\n';
    if (outcome.exit_code != 0) std::cerr << "strict mode: reports contain violations\n";
    return outcome.exit_code != 0 ? kExitViolation : 0;
  } catch (const idp::InadmissibleState& e) {
    std::cerr << "solver aborted: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}
