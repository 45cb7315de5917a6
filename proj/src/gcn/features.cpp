#include "bgrid/gcn/features.hpp"

#include "bgrid/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace bgrid::gcn {

namespace {

constexpr double kRatioCap = 1e6;

// Edge length over the height of the opposite vertex; reflects face quality.
double length_height_ratio(const TriMesh& mesh, const EdgeRef& e, int face) {
    double len = distance(mesh.position(e.a), mesh.position(e.b));
    double area = mesh.face_area(face);
    if (area <= 0.0 || len <= 0.0) return kRatioCap;
    double height = 2.0 * area / len;
    return std::min(len / height, kRatioCap);
}

}  // namespace

GraphFeatures extract_features(const TriMesh& mesh, const VertexSizes& sizes, const LboValues& lbo) {
    GraphFeatures out;

    std::vector<int> row_of(mesh.vertex_slots(), -1);
    int rows = 0;
    for (int v = 0; v < mesh.vertex_slots(); ++v)
        if (mesh.vertex_alive(v)) row_of[v] = rows++;

    out.node_features = Matrix(rows, 2);
    std::vector<Vec3> vnormal(mesh.vertex_slots());
    for (int v = 0; v < mesh.vertex_slots(); ++v) {
        if (row_of[v] < 0) continue;
        out.node_features.at(row_of[v], 0) = sizes[v];
        out.node_features.at(row_of[v], 1) = lbo.vertex[v];
        vnormal[v] = mesh.vertex_normal(v);
    }

    out.edges = mesh.edges();
    const int ne = static_cast<int>(out.edges.size());

    double mean_len = 0.0;
    for (const EdgeRef& e : out.edges) mean_len += distance(mesh.position(e.a), mesh.position(e.b));
    if (ne > 0) mean_len /= ne;

    out.edge_features = Matrix(ne, 8);
    out.edge_rows.resize(ne);
    for (int i = 0; i < ne; ++i) {
        const EdgeRef& e = out.edges[i];
        out.edge_rows[i] = {row_of[e.a], row_of[e.b]};
        auto faces = mesh.edge_faces(e);
        int f1 = faces[0];
        int f2 = faces.size() > 1 ? faces[1] : -1;

        double dihedral = 0.0;
        if (f2 >= 0) dihedral = angle_between(mesh.face_normal_raw(f1), mesh.face_normal_raw(f2));

        int o1 = mesh.opposite_vertex(f1, e);
        double inner1 = triangle_angle_at(mesh.position(o1), mesh.position(e.a), mesh.position(e.b));
        double ratio1 = length_height_ratio(mesh, e, f1);
        double inner2 = inner1, ratio2 = ratio1;  // boundary edges duplicate face 1
        if (f2 >= 0) {
            int o2 = mesh.opposite_vertex(f2, e);
            inner2 = triangle_angle_at(mesh.position(o2), mesh.position(e.a), mesh.position(e.b));
            ratio2 = length_height_ratio(mesh, e, f2);
        }

        double len = distance(mesh.position(e.a), mesh.position(e.b));
        double global_ratio = mean_len > 0.0 ? len / mean_len : 1.0;
        double normal_angle = angle_between(vnormal[e.a], vnormal[e.b]);

        double* row = out.edge_features.row(i);
        row[0] = 0.5 * (lbo.vertex[e.a] + lbo.vertex[e.b]);
        row[1] = dihedral;
        row[2] = inner1;
        row[3] = inner2;
        row[4] = ratio1;
        row[5] = ratio2;
        row[6] = global_ratio;
        row[7] = normal_angle;
    }

    // Normalized adjacency with self loops: D^-1/2 (A+I) D^-1/2.
    std::vector<std::vector<int>> nbr(rows);
    for (const EdgeRef& e : out.edges) {
        nbr[row_of[e.a]].push_back(row_of[e.b]);
        nbr[row_of[e.b]].push_back(row_of[e.a]);
    }
    out.adj.n = rows;
    out.adj.ptr.assign(rows + 1, 0);
    for (int r = 0; r < rows; ++r) {
        nbr[r].push_back(r);  // self loop
        std::sort(nbr[r].begin(), nbr[r].end());
        out.adj.ptr[r + 1] = out.adj.ptr[r] + static_cast<int>(nbr[r].size());
    }
    out.adj.idx.reserve(out.adj.ptr[rows]);
    out.adj.val.reserve(out.adj.ptr[rows]);
    for (int r = 0; r < rows; ++r) {
        double dr = static_cast<double>(nbr[r].size());
        for (int c : nbr[r]) {
            double dc = static_cast<double>(nbr[c].size());
            out.adj.idx.push_back(c);
            out.adj.val.push_back(1.0 / std::sqrt(dr * dc));
        }
    }
    return out;
}

namespace {

void column_stats(const std::vector<const Matrix*>& tables, std::vector<double>& mean,
                  std::vector<double>& dev) {
    if (tables.empty() || tables[0]->cols == 0) return;
    const int cols = tables[0]->cols;
    mean.assign(cols, 0.0);
    dev.assign(cols, 0.0);
    long count = 0;
    for (const Matrix* m : tables) {
        for (int i = 0; i < m->rows; ++i)
            for (int j = 0; j < cols; ++j) mean[j] += m->at(i, j);
        count += m->rows;
    }
    if (count == 0) return;
    for (double& v : mean) v /= static_cast<double>(count);
    for (const Matrix* m : tables)
        for (int i = 0; i < m->rows; ++i)
            for (int j = 0; j < cols; ++j) {
                double diff = m->at(i, j) - mean[j];
                dev[j] += diff * diff;
            }
    for (double& v : dev) {
        v = std::sqrt(v / static_cast<double>(count));
        if (v < 1e-12) v = 1.0;  // constant column stays constant
    }
}

void standardize(Matrix& m, const std::vector<double>& mean, const std::vector<double>& dev) {
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = (m.at(i, j) - mean[j]) / dev[j];
}

}  // namespace

FeatureStats compute_feature_stats(const std::vector<const GraphFeatures*>& set) {
    FeatureStats stats;
    std::vector<const Matrix*> nodes, edges;
    for (const GraphFeatures* g : set) {
        nodes.push_back(&g->node_features);
        edges.push_back(&g->edge_features);
    }
    column_stats(nodes, stats.node_mean, stats.node_std);
    column_stats(edges, stats.edge_mean, stats.edge_std);
    return stats;
}

void apply_feature_stats(GraphFeatures& features, const FeatureStats& stats) {
    if (stats.empty()) return;
    standardize(features.node_features, stats.node_mean, stats.node_std);
    standardize(features.edge_features, stats.edge_mean, stats.edge_std);
}

}  // namespace bgrid::gcn
