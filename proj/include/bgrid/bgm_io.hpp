#pragma once

#include "bgrid/sizing_field.hpp"

#include <string>

namespace bgrid {

// Versioned JSON background-grid file:
// {version, beta, vertices:[[x,y,z]...], faces:[[i,j,k]...], sizes:[h...]}
// Indices are 0-based. Grids are validated (manifoldness, positive sizes) on
// both read and write.
SizingField read_bgm(const std::string& path);
void write_bgm(const SizingField& field, const std::string& path);
void write_bgm(const TriMesh& mesh, const VertexSizes& sizes, double beta, const std::string& path);

}  // namespace bgrid
