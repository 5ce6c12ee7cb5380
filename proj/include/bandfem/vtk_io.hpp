#pragma once

// Legacy ASCII VTK output (DATASET UNSTRUCTURED_GRID) for band meshes with one
// nodal scalar field. 2D meshes are written with z = 0.

#include <string>
#include <vector>

#include "bandfem/band_mesh.hpp"

namespace bandfem {

template <int N>
void write_vtk(const std::string& path, const BandMesh<N>& mesh,
               const std::vector<double>& point_data,
               const std::string& field_name = "u");

}  // namespace bandfem
