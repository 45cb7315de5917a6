#pragma once

#include "bgrid/mesh.hpp"
#include "bgrid/sizing_field.hpp"

#include <set>

namespace bgrid {

struct RemeshStats {
    int flips = 0;
    int moves = 0;
};

// Local post-collapse cleanup: Delaunay edge flips inside the region, then a
// tangential Laplacian step (factor lambda) with reprojection onto the
// reference surface, repeated `iterations` times and finished with one more
// flip pass. Mesh-boundary vertices are never moved; any flip or move that
// would invert a face is skipped.
RemeshStats local_remesh(TriMesh& mesh, const std::set<int>& region_faces, const SizingField& reference,
                         int iterations = 3, double lambda = 0.5);

// Edges with both faces in the region whose opposite-angle sum exceeds pi.
int count_delaunay_violations(const TriMesh& mesh, const std::set<int>& region_faces);

}  // namespace bgrid
