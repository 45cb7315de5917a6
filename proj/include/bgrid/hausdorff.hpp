#pragma once

#include "bgrid/mesh.hpp"

namespace bgrid {

// Symmetric sampled Hausdorff estimate: each mesh is sampled on a fixed
// barycentric lattice per face and measured against the other mesh with exact
// point-to-triangle distances.
double hausdorff_distance(const TriMesh& a, const TriMesh& b, int samples_per_face = 6);

}  // namespace bgrid
