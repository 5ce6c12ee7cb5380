#include "bandfem/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bandfem {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

template <int N>
void write_vtk(const std::string& path, const BandMesh<N>& mesh,
               const std::vector<double>& point_data, const std::string& field_name) {
  if (point_data.size() != mesh.nodes.size())
    throw std::invalid_argument("write_vtk: point data size does not match node count");

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open '" + path + "' for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "narrow band mesh (level " << mesh.level << ")\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& x : mesh.nodes) {
    out << num(x[0]) << ' ' << num(x[1]) << ' ' << (N == 3 ? num(x[N - 1]) : "0") << '\n';
  }

  out << "CELLS " << mesh.elems.size() << ' ' << mesh.elems.size() * (N + 2) << '\n';
  for (const auto& el : mesh.elems) {
    out << (N + 1);
    for (int i = 0; i <= N; ++i) out << ' ' << el[i];
    out << '\n';
  }

  const int cell_type = N == 2 ? 5 : 10;  // VTK_TRIANGLE / VTK_TETRA
  out << "CELL_TYPES " << mesh.elems.size() << '\n';
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) out << cell_type << '\n';

  out << "POINT_DATA " << mesh.nodes.size() << '\n';
  out << "SCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : point_data) out << num(v) << '\n';

  if (!out) throw std::runtime_error("write_vtk: write to '" + path + "' failed");
}

template void write_vtk<2>(const std::string&, const BandMesh<2>&,
                           const std::vector<double>&, const std::string&);
template void write_vtk<3>(const std::string&, const BandMesh<3>&,
                           const std::vector<double>&, const std::string&);

}  // namespace bandfem
