#pragma once

#include "bgrid/bvh.hpp"
#include "bgrid/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bgrid {

// Per-vertex size values, aligned to TriMesh vertex slots.
using VertexSizes = std::vector<double>;

// Throws MeshError if sizes are missing, non-positive or non-finite.
void validate_sizes(const TriMesh& mesh, const VertexSizes& sizes);

struct QueryResult {
    int face = -1;
    std::array<double, 3> bary{};
    double distance = 0.0;
    double size = 0.0;
};

// Immutable background grid + per-vertex sizes + face index. The grid is
// compacted on construction; queries are safe under concurrent readers.
class SizingField {
public:
    SizingField(TriMesh grid, VertexSizes sizes, double beta);

    const TriMesh& grid() const { return grid_; }
    const VertexSizes& sizes() const { return sizes_; }
    const FaceTree& tree() const { return tree_; }
    double beta() const { return beta_; }

    // Projects p onto the globally nearest face and interpolates the size.
    QueryResult query(const Vec3& p) const;

    // Interpolated size at a point known to lie on the given face.
    double size_on_face(int face, const std::array<double, 3>& bary) const;

private:
    TriMesh grid_;
    VertexSizes sizes_;
    FaceTree tree_;
    double beta_;
};

VertexSizes init_uniform(const TriMesh& mesh, double h0);

struct GeometricInitConfig {
    int segments_per_circle = 32;
    double h_min = 0.0;               // <=0: 1e-3 * bbox diagonal
    double h_max = 0.0;               // <=0: 0.5 * bbox diagonal
    bool proximity = false;           // optional nearest-non-neighbor-surface term
};

// Curvature-based sizes: clamp(2*pi / (n_seg * kappa_max), h_min, h_max) with
// kappa_max from a quadric fit over the 2-ring. Degenerate fits fall back to
// h_max and append a note to warnings when provided.
VertexSizes init_geometric(const TriMesh& mesh, const GeometricInitConfig& config,
                           std::vector<std::string>* warnings = nullptr);

// Unique fixed point of H(v) = min(H0(v), min_u H(u) + beta*|u-v|) over mesh
// edges, via Dijkstra-style monotone relaxation. Result <= input pointwise.
VertexSizes gradient_limit_smooth(const TriMesh& mesh, const VertexSizes& initial, double beta);

}  // namespace bgrid
