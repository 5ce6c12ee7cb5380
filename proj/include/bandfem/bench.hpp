#pragma once

// Benchmark driver: the three reference problems (circle, sphere, torus), a
// finite-difference oracle that revalidates each manufactured right-hand side
// before any assembly, refinement studies, band-width studies, and report
// emission (CSV / markdown).

#include <functional>
#include <string>
#include <vector>

#include "bandfem/assembly.hpp"
#include "bandfem/surface_error.hpp"

namespace bandfem {

// One manufactured benchmark: geometry, exact surface solution, reaction
// coefficient alpha == 1, and the closed-form f = alpha*u - lap_Gamma(u).
// The chart parametrizes Gamma for the finite-difference oracle.
template <int N>
struct BenchmarkCase {
  std::string name;
  Surface<N> surface;
  SurfaceFn<N> u_exact;
  SurfaceFn<N> alpha;
  SurfaceFn<N> f;

  double default_band = 0.0;
  double default_h0 = 0.0;
  int default_levels = 0;

  std::function<Vec<N>(double, double)> chart;  // 2D ignores the second parameter
  double s_min = 0.0, s_max = 0.0;
  double t_min = 0.0, t_max = 0.0;
  // Laplace-Beltrami of g at chart(s, t) via 4th-order central differences.
  std::function<double(const SurfaceFn<N>&, double, double)> fd_laplace_beltrami;
};

BenchmarkCase<2> case_circle();
BenchmarkCase<3> case_sphere();
BenchmarkCase<3> case_torus();

// Checks |f - (alpha*u - lap_Gamma u)| <= tol at `samples` fixed-seed chart
// points, with lap_Gamma replaced by the finite-difference approximation.
// Throws std::runtime_error on the first violation. Returns the worst residual.
template <int N>
double verify_manufactured_solution(const BenchmarkCase<N>& bc, int samples = 1000,
                                    double tol = 1e-6);

struct StudyConfig {
  std::string case_name;  // circle | sphere | torus
  double band = -1.0;     // d; <= 0 means the case default
  double h0 = -1.0;       // coarsest mesh size; <= 0 means the case default
  int levels = -1;        // <= 0 means the case default
  HessianMode hessian = HessianMode::exact;
  double tol = 1e-9;
  std::string mesh = "band";  // band | annulus (annulus: circle only)
  std::string out;            // report path ("" = stdout for the CLI)
  std::string format = "csv";  // csv | md
  std::string vtk;             // per-level VTK path prefix ("" = off)
};

struct StudyResult {
  std::vector<SurfaceErrorRow> rows;
  bool solver_failed = false;  // true: rows are partial, CLI exits 2
  std::vector<std::string> notes;  // emitted as leading '# ' comment lines
};

// Full refinement study: oracle first, then level 0 from build_band_mesh and
// each further level by uniform refinement. `on_level` (optional) receives
// every solved level, e.g. for VTK output. A solver failure stops the study
// and flags the partial result instead of throwing.
template <int N>
StudyResult run_study(const BenchmarkCase<N>& bc, const StudyConfig& cfg,
                      const std::function<void(int, const BandMesh<N>&,
                                               const std::vector<double>&)>& on_level = {});

// Dispatches on cfg.case_name and, when cfg.vtk is set, writes one legacy VTK
// file per solved level (suffix _level<k>.vtk). ConfigError for unknown names.
StudyResult run_benchmark(const StudyConfig& cfg);

// Fixed mesh size, varying band half-width: one row per entry of `widths`
// (level column holds the index, orders are undefined).
template <int N>
std::vector<SurfaceErrorRow> band_width_study(const BenchmarkCase<N>& bc, double h,
                                              const std::vector<double>& widths,
                                              HessianMode mode, double tol = 1e-9);

// --- reporting ---------------------------------------------------------

std::string format_csv(const StudyResult& result);
std::string format_markdown(const StudyResult& result);

// Parses format_csv output back into rows ('#' comment lines are skipped);
// used by the report round-trip checks.
std::vector<SurfaceErrorRow> parse_csv(const std::string& text);

// Writes CSV or markdown ("csv" | "md") to `path`.
void write_report(const std::string& path, const StudyResult& result,
                  const std::string& format);

// --- configuration ------------------------------------------------------

// Flat key=value text: one pair per line, '#' comments, blank lines ignored.
// Keys: case, d, h0, levels, hessian, tol, out, format, mesh, vtk.
// Unknown keys and malformed values raise ConfigError.
StudyConfig parse_config_text(const std::string& text);
StudyConfig parse_config_file(const std::string& path);

}  // namespace bandfem
