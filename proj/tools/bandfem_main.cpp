// Command-line driver for the narrow-band surface FEM benchmarks.
//
// Exit codes: 0 success, 2 solver failure (report still written, flagged as
// partial), 3 configuration error (bad flags, bad config file, bad values).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bandfem/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Narrow-band finite element solver for PDEs on implicit surfaces"};
  app.require_subcommand(0, 1);

  CLI::App* run = app.add_subcommand("run", "Run a refinement study and write a report");

  std::string config_path, case_name, hessian, out, format, vtk, mesh;
  double d = -1.0, h0 = -1.0, tol = -1.0;
  int levels = -1;

  CLI::Option* opt_config =
      run->add_option("--config", config_path, "key=value config file; flags override it");
  CLI::Option* opt_case =
      run->add_option("--case", case_name, "benchmark case")
          ->check(CLI::IsMember({"circle", "sphere", "torus"}));
  CLI::Option* opt_hessian =
      run->add_option("--hessian", hessian, "curvature source (default exact)")
          ->check(CLI::IsMember({"exact", "recovered"}));
  CLI::Option* opt_levels =
      run->add_option("--levels", levels, "refinement levels")->check(CLI::PositiveNumber);
  CLI::Option* opt_d =
      run->add_option("--d", d, "band half-width (default per case)")
          ->check(CLI::PositiveNumber);
  CLI::Option* opt_h0 =
      run->add_option("--h0", h0, "coarsest mesh size (default per case)")
          ->check(CLI::PositiveNumber);
  CLI::Option* opt_tol =
      run->add_option("--tol", tol, "solver tolerance (default 1e-9)")
          ->check(CLI::PositiveNumber);
  CLI::Option* opt_out =
      run->add_option("--out", out, "report path (default: stdout)");
  CLI::Option* opt_format =
      run->add_option("--format", format, "report format (default csv)")
          ->check(CLI::IsMember({"csv", "md"}));
  CLI::Option* opt_vtk =
      run->add_option("--vtk", vtk, "VTK path; one file per level (suffix _level<k>.vtk)");
  CLI::Option* opt_mesh =
      run->add_option("--mesh", mesh, "mesh kind: band | annulus (default band)")
          ->check(CLI::IsMember({"band", "annulus"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  if (!run->parsed()) {
    std::cout << app.help();
    return 0;
  }

  try {
    bandfem::StudyConfig cfg;
    if (*opt_config) cfg = bandfem::parse_config_file(config_path);
    if (*opt_case) cfg.case_name = case_name;
    if (*opt_hessian)
      cfg.hessian = hessian == "recovered" ? bandfem::HessianMode::recovered
                                           : bandfem::HessianMode::exact;
    if (*opt_levels) cfg.levels = levels;
    if (*opt_d) cfg.band = d;
    if (*opt_h0) cfg.h0 = h0;
    if (*opt_tol) cfg.tol = tol;
    if (*opt_out) cfg.out = out;
    if (*opt_format) cfg.format = format;
    if (*opt_vtk) cfg.vtk = vtk;
    if (*opt_mesh) cfg.mesh = mesh;
    if (cfg.case_name.empty())
      throw bandfem::ConfigError("no case selected (pass --case or a config file)");

    const bandfem::StudyResult result = bandfem::run_benchmark(cfg);

    if (cfg.out.empty()) {
      std::cout << (cfg.format == "md" ? bandfem::format_markdown(result)
                                       : bandfem::format_csv(result));
    } else {
      bandfem::write_report(cfg.out, result, cfg.format);
    }

    if (result.solver_failed) {
      std::cerr << "solver failed; report contains partial results\n";
      return 2;
    }
    return 0;
  } catch (const bandfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const bandfem::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
