#include "bandfem/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bandfem/hessian_recovery.hpp"
#include "bandfem/vtk_io.hpp"

namespace bandfem {

namespace {

// 4th-order central differences; the step is small enough that the truncation
// error of the smooth benchmark solutions stays far below the oracle
// tolerance, and large enough to keep cancellation near round-off.
constexpr double kFdStep = 5e-3;

template <class G>
double fd_first(const G& g) {
  const double d = kFdStep;
  return (-g(2 * d) + 8 * g(d) - 8 * g(-d) + g(-2 * d)) / (12 * d);
}

template <class G>
double fd_second(const G& g) {
  const double d = kFdStep;
  return (-g(2 * d) + 16 * g(d) - 30 * g(0.0) + 16 * g(-d) - g(-2 * d)) / (12 * d * d);
}

std::string fmt_g(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string config_note(const StudyConfig& cfg, double d, double h0, int levels) {
  std::ostringstream os;
  os << "case=" << cfg.case_name << " hessian="
     << (cfg.hessian == HessianMode::exact ? "exact" : "recovered") << " d=" << fmt_g(d)
     << " h0=" << fmt_g(h0) << " levels=" << levels << " tol=" << fmt_g(cfg.tol)
     << " mesh=" << cfg.mesh;
  return os.str();
}

std::string vtk_level_path(const std::string& base, int level) {
  std::string stem = base;
  const std::string ext = ".vtk";
  if (stem.size() >= ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0)
    stem.resize(stem.size() - ext.size());
  return stem + "_level" + std::to_string(level) + ext;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double_value(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
  if (pos != value.size())
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  return v;
}

int parse_int_value(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as an integer");
  }
  if (pos != value.size())
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  return v;
}

}  // namespace

BenchmarkCase<2> case_circle() {
  BenchmarkCase<2> bc{"circle", Surface<2>::circle(1.0)};
  bc.u_exact = [](const Vec<2>& x) { return std::cos(5.0 * std::atan2(x[1], x[0])); };
  bc.alpha = [](const Vec<2>&) { return 1.0; };
  // -lap_Gamma(u) = 25 u on the unit circle, so f = u - lap_Gamma(u) = 26 u.
  bc.f = [u = bc.u_exact](const Vec<2>& x) { return 26.0 * u(x); };
  bc.default_band = 0.05;
  bc.default_h0 = 0.05;
  bc.default_levels = 5;
  bc.chart = [](double s, double) { return Vec<2>(std::cos(s), std::sin(s)); };
  bc.s_min = 0.0;
  bc.s_max = 2.0 * pi;
  bc.t_min = 0.0;
  bc.t_max = 1.0;
  bc.fd_laplace_beltrami = [chart = bc.chart](const SurfaceFn<2>& g, double s, double) {
    return fd_second([&](double e) { return g(chart(s + e, 0.0)); });
  };
  return bc;
}

BenchmarkCase<3> case_sphere() {
  BenchmarkCase<3> bc{"sphere", Surface<3>::sphere(1.0)};
  // Degree-3 spherical harmonic, normalized to be homogeneous of degree 0 so
  // the formula itself is the normal extension.
  bc.u_exact = [](const Vec<3>& x) {
    const double r3 = std::pow(x.norm(), 3);
    return 12.0 * (3.0 * x[0] * x[0] * x[1] - x[1] * x[1] * x[1]) / r3;
  };
  bc.alpha = [](const Vec<3>&) { return 1.0; };
  // -lap_Gamma(u) = l(l+1) u = 12 u for l = 3, so f = 13 u.
  bc.f = [u = bc.u_exact](const Vec<3>& x) { return 13.0 * u(x); };
  bc.default_band = 0.1;
  bc.default_h0 = 0.1;
  bc.default_levels = 3;
  bc.chart = [](double s, double t) {
    return Vec<3>(std::sin(s) * std::cos(t), std::sin(s) * std::sin(t), std::cos(s));
  };
  bc.s_min = 0.2;  // polar angle kept away from the chart poles
  bc.s_max = pi - 0.2;
  bc.t_min = 0.0;
  bc.t_max = 2.0 * pi;
  bc.fd_laplace_beltrami = [chart = bc.chart](const SurfaceFn<3>& g, double s, double t) {
    const auto us = [&](double e) { return g(chart(s + e, t)); };
    const auto ut = [&](double e) { return g(chart(s, t + e)); };
    const double sin_s = std::sin(s);
    return fd_second(us) + fd_first(us) * std::cos(s) / sin_s +
           fd_second(ut) / (sin_s * sin_s);
  };
  return bc;
}

BenchmarkCase<3> case_torus() {
  constexpr double R = 1.0, r = 0.6;
  BenchmarkCase<3> bc{"torus", Surface<3>::torus(R, r)};
  // Angles of the point: t (toroidal, around the axis) and s (poloidal,
  // around the tube); on the surface rho = R + r cos(s), x3 = r sin(s).
  const auto angles = [](const Vec<3>& x) {
    const double rho = std::hypot(x[0], x[1]);
    return std::pair<double, double>(std::atan2(x[2], rho - R), std::atan2(x[1], x[0]));
  };
  bc.u_exact = [angles](const Vec<3>& x) {
    const auto [s, t] = angles(x);
    return std::sin(3.0 * t) * std::cos(3.0 * s + t);
  };
  bc.alpha = [](const Vec<3>&) { return 1.0; };
  // f = u - lap_Gamma(u) with
  //   lap_Gamma(u) = u_ss / r^2 - sin(s)/(r (R + r cos s)) u_s
  //                 + u_tt / (R + r cos s)^2.
  bc.f = [angles](const Vec<3>& x) {
    const auto [s, t] = angles(x);
    const double ring = R + r * std::cos(s);
    const double u = std::sin(3.0 * t) * std::cos(3.0 * s + t);
    const double u_s = -3.0 * std::sin(3.0 * t) * std::sin(3.0 * s + t);
    const double u_ss = -9.0 * u;
    const double u_tt = -10.0 * std::sin(3.0 * t) * std::cos(3.0 * s + t) -
                        6.0 * std::cos(3.0 * t) * std::sin(3.0 * s + t);
    const double lap = u_ss / (r * r) - std::sin(s) / (r * ring) * u_s + u_tt / (ring * ring);
    return u - lap;
  };
  bc.default_band = 0.1;
  bc.default_h0 = 0.1;
  bc.default_levels = 3;
  bc.chart = [](double s, double t) {
    const double ring = R + r * std::cos(s);
    return Vec<3>(ring * std::cos(t), ring * std::sin(t), r * std::sin(s));
  };
  bc.s_min = 0.0;
  bc.s_max = 2.0 * pi;
  bc.t_min = 0.0;
  bc.t_max = 2.0 * pi;
  bc.fd_laplace_beltrami = [chart = bc.chart](const SurfaceFn<3>& g, double s, double t) {
    const auto us = [&](double e) { return g(chart(s + e, t)); };
    const auto ut = [&](double e) { return g(chart(s, t + e)); };
    const double ring = R + r * std::cos(s);
    return fd_second(us) / (r * r) - std::sin(s) / (r * ring) * fd_first(us) +
           fd_second(ut) / (ring * ring);
  };
  return bc;
}

template <int N>
double verify_manufactured_solution(const BenchmarkCase<N>& bc, int samples, double tol) {
  std::mt19937 rng(987654321u);
  std::uniform_real_distribution<double> us(bc.s_min, bc.s_max);
  std::uniform_real_distribution<double> ut(bc.t_min, bc.t_max);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = us(rng);
    const double t = ut(rng);
    const Vec<N> x = bc.chart(s, t);
    const double lap = bc.fd_laplace_beltrami(bc.u_exact, s, t);
    const double resid = std::abs(bc.f(x) - (bc.alpha(x) * bc.u_exact(x) - lap));
    worst = std::max(worst, resid);
    if (!(resid <= tol)) {
      std::ostringstream os;
      os << "manufactured solution check failed for '" << bc.name << "': |f - (alpha u"
         << " - lap_Gamma u)| = " << resid << " > " << tol << " at chart point (" << s
         << ", " << t << ")";
      throw std::runtime_error(os.str());
    }
  }
  return worst;
}

template <int N>
StudyResult run_study(const BenchmarkCase<N>& bc, const StudyConfig& cfg,
                      const std::function<void(int, const BandMesh<N>&,
                                               const std::vector<double>&)>& on_level) {
  const double d = cfg.band > 0.0 ? cfg.band : bc.default_band;
  const double h0 = cfg.h0 > 0.0 ? cfg.h0 : bc.default_h0;
  const int levels = cfg.levels > 0 ? cfg.levels : bc.default_levels;
  if (cfg.mesh != "band" && cfg.mesh != "annulus")
    throw ConfigError("unknown mesh kind '" + cfg.mesh + "' (expected band or annulus)");
  if (cfg.mesh == "annulus" && N != 2)
    throw ConfigError("annulus meshes are only available for the circle case");
  if (!(cfg.tol > 0.0)) throw ConfigError("solver tolerance must be positive");

  // The closed-form right-hand side is revalidated against a
  // finite-difference Laplace-Beltrami before any system is assembled.
  verify_manufactured_solution(bc);

  StudyResult result;
  result.notes.push_back(config_note(cfg, d, h0, levels));
  result.notes.push_back("convention: alpha = 1, f = u - lap_Gamma(u)");

  const BandSpec<N> spec{bc.surface, d};
  const ExtendedData<N> data{bc.alpha, bc.f};
  BandMesh<N> mesh;
  for (int level = 0; level < levels; ++level) {
    if (level == 0) {
      if constexpr (N == 2)
        mesh = cfg.mesh == "annulus" ? annulus_mesh(spec, h0) : build_band_mesh(spec, h0);
      else
        mesh = build_band_mesh(spec, h0);
    } else {
      mesh = refine(mesh, spec);
    }

    const std::vector<double> phi_h = interpolate_phi(mesh, bc.surface);
    RecoveredField<N> field;
    const RecoveredField<N>* field_ptr = nullptr;
    if (cfg.hessian == HessianMode::recovered) {
      field = make_recovered_field(mesh, bc.surface);
      field_ptr = &field;
    }
    const FemSystem sys = assemble(mesh, spec, data, cfg.hessian, field_ptr);

    // Boundary-snapped bands carry a handful of stretched skin elements, so
    // give CG more room than its quasi-uniform default budget.
    const int maxit = static_cast<int>(
        100.0 * std::sqrt(static_cast<double>(sys.A.n)) + 1000.0);
    PcgResult sol;
    try {
      sol = pcg(sys.A, sys.b, cfg.tol, maxit);
    } catch (const SolverError&) {
      result.solver_failed = true;
      break;
    }
    if (!sol.report.converged) {
      result.solver_failed = true;
      break;
    }

    const SurfaceMesh<N> gamma = extract_surface(mesh, phi_h);
    SurfaceErrorRow row;
    row.level = level;
    row.dofs = static_cast<long>(mesh.nodes.size());
    row.h = mesh.h_max();
    row.l2 = surface_l2_error<N>(sol.x, bc.u_exact, gamma, mesh, bc.surface);
    row.cnorm = surface_max_error<N>(sol.x, bc.u_exact, gamma, mesh, bc.surface);
    row.normal_deriv = normal_derivative_norm<N>(sol.x, mesh, bc.surface);
    row.iters = sol.report.iterations;
    if (result.rows.empty()) {
      row.l2_order = std::numeric_limits<double>::quiet_NaN();
      row.cnorm_order = std::numeric_limits<double>::quiet_NaN();
    } else {
      const SurfaceErrorRow& prev = result.rows.back();
      row.l2_order = convergence_order(prev.l2, row.l2, static_cast<double>(prev.dofs),
                                       static_cast<double>(row.dofs), N);
      row.cnorm_order = convergence_order(prev.cnorm, row.cnorm,
                                          static_cast<double>(prev.dofs),
                                          static_cast<double>(row.dofs), N);
    }
    result.rows.push_back(row);
    if (on_level) on_level(level, mesh, sol.x);
  }
  if (result.solver_failed)
    result.notes.push_back("solver failed; results below are partial");
  return result;
}

StudyResult run_benchmark(const StudyConfig& cfg) {
  const auto vtk_cb = [&cfg](int level, const auto& mesh, const std::vector<double>& u) {
    if (!cfg.vtk.empty()) write_vtk(vtk_level_path(cfg.vtk, level), mesh, u);
  };
  if (cfg.case_name == "circle") return run_study<2>(case_circle(), cfg, vtk_cb);
  if (cfg.case_name == "sphere") return run_study<3>(case_sphere(), cfg, vtk_cb);
  if (cfg.case_name == "torus") return run_study<3>(case_torus(), cfg, vtk_cb);
  throw ConfigError("unknown case '" + cfg.case_name +
                    "' (expected circle, sphere, or torus)");
}

template <int N>
std::vector<SurfaceErrorRow> band_width_study(const BenchmarkCase<N>& bc, double h,
                                              const std::vector<double>& widths,
                                              HessianMode mode, double tol) {
  verify_manufactured_solution(bc);
  std::vector<SurfaceErrorRow> rows;
  const ExtendedData<N> data{bc.alpha, bc.f};
  for (std::size_t k = 0; k < widths.size(); ++k) {
    const BandSpec<N> spec{bc.surface, widths[k]};
    const BandMesh<N> mesh = build_band_mesh(spec, h);
    const std::vector<double> phi_h = interpolate_phi(mesh, bc.surface);
    RecoveredField<N> field;
    const RecoveredField<N>* field_ptr = nullptr;
    if (mode == HessianMode::recovered) {
      field = make_recovered_field(mesh, bc.surface);
      field_ptr = &field;
    }
    const FemSystem sys = assemble(mesh, spec, data, mode, field_ptr);
    const int maxit = static_cast<int>(
        100.0 * std::sqrt(static_cast<double>(sys.A.n)) + 1000.0);
    const PcgResult sol = pcg(sys.A, sys.b, tol, maxit);
    if (!sol.report.converged)
      throw SolverError("band-width study: solver did not converge for d = " +
                        fmt_g(widths[k]));
    const SurfaceMesh<N> gamma = extract_surface(mesh, phi_h);
    SurfaceErrorRow row;
    row.level = static_cast<int>(k);
    row.dofs = static_cast<long>(mesh.nodes.size());
    row.h = mesh.h_max();
    row.l2 = surface_l2_error<N>(sol.x, bc.u_exact, gamma, mesh, bc.surface);
    row.l2_order = std::numeric_limits<double>::quiet_NaN();
    row.cnorm = surface_max_error<N>(sol.x, bc.u_exact, gamma, mesh, bc.surface);
    row.cnorm_order = std::numeric_limits<double>::quiet_NaN();
    row.normal_deriv = normal_derivative_norm<N>(sol.x, mesh, bc.surface);
    row.iters = sol.report.iterations;
    rows.push_back(row);
  }
  return rows;
}

std::string format_csv(const StudyResult& result) {
  std::string out;
  for (const auto& note : result.notes) out += "# " + note + "\n";
  out += "level,dofs,h,L2,L2_order,Cnorm,Cnorm_order,normal_deriv,iters\n";
  for (const auto& row : result.rows) {
    out += std::to_string(row.level) + ',' + std::to_string(row.dofs) + ',' +
           fmt_g(row.h) + ',' + fmt_g(row.l2) + ',' + fmt_g(row.l2_order) + ',' +
           fmt_g(row.cnorm) + ',' + fmt_g(row.cnorm_order) + ',' +
           fmt_g(row.normal_deriv) + ',' + std::to_string(row.iters) + '\n';
  }
  return out;
}

std::string format_markdown(const StudyResult& result) {
  std::string out;
  for (const auto& note : result.notes) out += "_" + note + "_\n\n";
  out += "| level | dofs | h | L2 | order | C-norm | order | normal deriv | iters |\n";
  out += "|------:|-----:|--:|---:|------:|-------:|------:|-------------:|------:|\n";
  for (const auto& row : result.rows) {
    out += "| " + std::to_string(row.level) + " | " + std::to_string(row.dofs) + " | " +
           fmt_g(row.h) + " | " + fmt_g(row.l2) + " | " + fmt_g(row.l2_order) + " | " +
           fmt_g(row.cnorm) + " | " + fmt_g(row.cnorm_order) + " | " +
           fmt_g(row.normal_deriv) + " | " + std::to_string(row.iters) + " |\n";
  }
  return out;
}

std::vector<SurfaceErrorRow> parse_csv(const std::string& text) {
  std::vector<SurfaceErrorRow> rows;
  std::istringstream in(text);
  std::string line;
  const auto field_or_nan = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("level,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 9)
      throw std::runtime_error("parse_csv: expected 9 fields, got " +
                               std::to_string(fields.size()) + " in '" + line + "'");
    SurfaceErrorRow row;
    row.level = std::stoi(fields[0]);
    row.dofs = std::stol(fields[1]);
    row.h = std::stod(fields[2]);
    row.l2 = std::stod(fields[3]);
    row.l2_order = field_or_nan(fields[4]);
    row.cnorm = std::stod(fields[5]);
    row.cnorm_order = field_or_nan(fields[6]);
    row.normal_deriv = std::stod(fields[7]);
    row.iters = std::stoi(fields[8]);
    rows.push_back(row);
  }
  return rows;
}

void write_report(const std::string& path, const StudyResult& result,
                  const std::string& format) {
  std::string body;
  if (format == "csv")
    body = format_csv(result);
  else if (format == "md")
    body = format_markdown(result);
  else
    throw ConfigError("unknown report format '" + format + "' (expected csv or md)");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file '" + path + "'");
  out << body;
  if (!out) throw std::runtime_error("write to report file '" + path + "' failed");
}

StudyConfig parse_config_text(const std::string& text) {
  StudyConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    if (key == "case") {
      cfg.case_name = value;
    } else if (key == "d") {
      cfg.band = parse_double_value(key, value);
      if (!(cfg.band > 0.0)) throw ConfigError("config key 'd' must be positive");
    } else if (key == "h0") {
      cfg.h0 = parse_double_value(key, value);
      if (!(cfg.h0 > 0.0)) throw ConfigError("config key 'h0' must be positive");
    } else if (key == "levels") {
      cfg.levels = parse_int_value(key, value);
      if (cfg.levels < 1) throw ConfigError("config key 'levels' must be at least 1");
    } else if (key == "hessian") {
      if (value == "exact")
        cfg.hessian = HessianMode::exact;
      else if (value == "recovered")
        cfg.hessian = HessianMode::recovered;
      else
        throw ConfigError("config key 'hessian': expected exact or recovered, got '" +
                          value + "'");
    } else if (key == "tol") {
      cfg.tol = parse_double_value(key, value);
      if (!(cfg.tol > 0.0)) throw ConfigError("config key 'tol' must be positive");
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "format") {
      if (value != "csv" && value != "md")
        throw ConfigError("config key 'format': expected csv or md, got '" + value + "'");
      cfg.format = value;
    } else if (key == "mesh") {
      if (value != "band" && value != "annulus")
        throw ConfigError("config key 'mesh': expected band or annulus, got '" + value +
                          "'");
      cfg.mesh = value;
    } else if (key == "vtk") {
      cfg.vtk = value;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

StudyConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

template double verify_manufactured_solution<2>(const BenchmarkCase<2>&, int, double);
template double verify_manufactured_solution<3>(const BenchmarkCase<3>&, int, double);
template StudyResult run_study<2>(
    const BenchmarkCase<2>&, const StudyConfig&,
    const std::function<void(int, const BandMesh<2>&, const std::vector<double>&)>&);
template StudyResult run_study<3>(
    const BenchmarkCase<3>&, const StudyConfig&,
    const std::function<void(int, const BandMesh<3>&, const std::vector<double>&)>&);
template std::vector<SurfaceErrorRow> band_width_study<2>(const BenchmarkCase<2>&, double,
                                                          const std::vector<double>&,
                                                          HessianMode, double);
template std::vector<SurfaceErrorRow> band_width_study<3>(const BenchmarkCase<3>&, double,
                                                          const std::vector<double>&,
                                                          HessianMode, double);

}  // namespace bandfem
