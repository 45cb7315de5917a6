#include "bgrid/lbo.hpp"

#include "bgrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bgrid {

namespace {

const double kCotClamp = 1.0 / std::tan(std::numbers::pi / 180.0);  // cot(1 deg)

double clamped_cot(const Vec3& at, const Vec3& to1, const Vec3& to2) {
    Vec3 u = to1 - at, v = to2 - at;
    double cr = norm(cross(u, v));
    if (cr == 0.0) return kCotClamp;
    return std::clamp(dot(u, v) / cr, -kCotClamp, kCotClamp);
}

}  // namespace

std::vector<double> vertex_lbo(const TriMesh& mesh, const VertexSizes& sizes) {
    validate_sizes(mesh, sizes);
    std::vector<double> weight_sum(mesh.vertex_slots(), 0.0);  // sum w_ij (H_j - H_i)
    std::vector<double> area(mesh.vertex_slots(), 0.0);        // mixed Voronoi area

    for (int f = 0; f < mesh.face_slots(); ++f) {
        if (!mesh.face_alive(f)) continue;
        const auto& t = mesh.face(f);
        const Vec3 p[3] = {mesh.position(t[0]), mesh.position(t[1]), mesh.position(t[2])};

        double cot[3];  // cot of the angle at corner k (opposite edge k)
        for (int k = 0; k < 3; ++k) cot[k] = clamped_cot(p[k], p[(k + 1) % 3], p[(k + 2) % 3]);

        // Cotangent weights: the corner angle is opposite the edge joining the
        // other two corners.
        for (int k = 0; k < 3; ++k) {
            int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
            double w = 0.5 * cot[k];
            weight_sum[i] += w * (sizes[j] - sizes[i]);
            weight_sum[j] += w * (sizes[i] - sizes[j]);
        }

        // Mixed Voronoi area (obtuse-safe, Meyer et al. style).
        double face_area = triangle_area(p[0], p[1], p[2]);
        bool obtuse = cot[0] < 0.0 || cot[1] < 0.0 || cot[2] < 0.0;
        for (int k = 0; k < 3; ++k) {
            if (!obtuse) {
                double l1 = norm2(p[(k + 1) % 3] - p[k]);  // edge to next corner, opposite angle k+2
                double l2 = norm2(p[(k + 2) % 3] - p[k]);  // edge to prev corner, opposite angle k+1
                area[t[k]] += 0.125 * (l1 * cot[(k + 2) % 3] + l2 * cot[(k + 1) % 3]);
            } else {
                area[t[k]] += (cot[k] < 0.0) ? 0.5 * face_area : 0.25 * face_area;
            }
        }
    }

    // weight_sum already carries the 1/2 from the per-face split, so the
    // 1/(2A) normalization reduces to 1/A here.
    std::vector<double> lbo(mesh.vertex_slots(), 0.0);
    for (int v = 0; v < mesh.vertex_slots(); ++v) {
        if (!mesh.vertex_alive(v)) continue;
        if (area[v] > 0.0) lbo[v] = weight_sum[v] / area[v];
    }
    return lbo;
}

LboValues compute_lbo(const TriMesh& mesh, const VertexSizes& sizes) {
    LboValues out;
    out.vertex = vertex_lbo(mesh, sizes);
    out.edge_refs = mesh.edges();
    out.edge.reserve(out.edge_refs.size());
    for (const EdgeRef& e : out.edge_refs) out.edge.push_back(0.5 * (out.vertex[e.a] + out.vertex[e.b]));
    return out;
}

EdgeRank rank_edges(const TriMesh& mesh, const VertexSizes& sizes) {
    LboValues lbo = compute_lbo(mesh, sizes);
    const size_t n = lbo.edge_refs.size();

    std::vector<double> lengths(n);
    for (size_t i = 0; i < n; ++i)
        lengths[i] = distance(mesh.position(lbo.edge_refs[i].a), mesh.position(lbo.edge_refs[i].b));

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        double kx = std::abs(lbo.edge[x]), ky = std::abs(lbo.edge[y]);
        if (kx != ky) return kx < ky;
        if (lengths[x] != lengths[y]) return lengths[x] < lengths[y];
        return x < y;  // canonical edge order
    });

    EdgeRank rank;
    rank.edges.reserve(n);
    rank.keys.reserve(n);
    for (size_t i : order) {
        rank.edges.push_back(lbo.edge_refs[i]);
        rank.keys.push_back(std::abs(lbo.edge[i]));
    }
    return rank;
}

}  // namespace bgrid
