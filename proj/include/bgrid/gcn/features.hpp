#pragma once

#include "bgrid/gcn/tensor.hpp"
#include "bgrid/lbo.hpp"
#include "bgrid/mesh.hpp"
#include "bgrid/sizing_field.hpp"

#include <vector>

namespace bgrid::gcn {

// Node table [size, vertex LBO], edge table with the eight edge descriptors,
// canonical edge list, and the symmetrically normalized adjacency (with self
// loops) used by the graph convolutions. Node rows cover alive vertices in
// ascending slot order.
struct GraphFeatures {
    Matrix node_features;             // N x 2
    Matrix edge_features;             // E x 8
    std::vector<EdgeRef> edges;       // mesh vertex ids, canonical order
    std::vector<std::array<int, 2>> edge_rows;  // node-row indices per edge
    Csr adj;
};

GraphFeatures extract_features(const TriMesh& mesh, const VertexSizes& sizes, const LboValues& lbo);

// Per-column z-score statistics learned from the training set and replayed at
// inference.
struct FeatureStats {
    std::vector<double> node_mean, node_std, edge_mean, edge_std;
    bool empty() const { return node_mean.empty(); }
};

FeatureStats compute_feature_stats(const std::vector<const GraphFeatures*>& set);
void apply_feature_stats(GraphFeatures& features, const FeatureStats& stats);

}  // namespace bgrid::gcn
