#pragma once

#include "bgrid/mesh.hpp"
#include "bgrid/sizing_field.hpp"

#include <vector>

namespace bgrid {

struct LboValues {
    std::vector<double> vertex;               // aligned to vertex slots
    std::vector<EdgeRef> edge_refs;           // canonical edge order
    std::vector<double> edge;                 // mean of endpoint values
};

// Cotangent Laplacian of the size function with mixed Voronoi areas:
// lbo(i) = 1/(2*A_i) * sum_j (cot a_ij + cot b_ij) * (H_j - H_i).
// Cotangent weights are clamped to +-cot(1 degree); boundary vertices use the
// one-sided wedge sum.
std::vector<double> vertex_lbo(const TriMesh& mesh, const VertexSizes& sizes);

LboValues compute_lbo(const TriMesh& mesh, const VertexSizes& sizes);

struct EdgeRank {
    std::vector<EdgeRef> edges;   // ascending |edge lbo|
    std::vector<double> keys;
};

// Ranks every edge by |edge LBO| ascending; ties broken by shorter edge, then
// canonical edge order.
EdgeRank rank_edges(const TriMesh& mesh, const VertexSizes& sizes);

}  // namespace bgrid
