#include "bgrid/remesh.hpp"

#include "bgrid/geometry.hpp"

#include <algorithm>

namespace bgrid {

namespace {

const double kAngleEps = 1e-9;

// Opposite-angle sum for an interior region edge; negative when the edge is
// not interior to the region.
double opposite_angle_sum(const TriMesh& mesh, const EdgeRef& e, const std::set<int>& region) {
    auto faces = mesh.edge_faces(e);
    if (faces.size() != 2) return -1.0;
    if (!region.count(faces[0]) || !region.count(faces[1])) return -1.0;
    double sum = 0.0;
    for (int f : faces) {
        int o = mesh.opposite_vertex(f, e);
        sum += triangle_angle_at(mesh.position(o), mesh.position(e.a), mesh.position(e.b));
    }
    return sum;
}

bool violates(const TriMesh& mesh, const EdgeRef& e, const std::set<int>& region) {
    return opposite_angle_sum(mesh, e, region) > std::numbers::pi + kAngleEps;
}

std::vector<EdgeRef> region_edges(const TriMesh& mesh, const std::set<int>& region) {
    std::vector<EdgeRef> out;
    for (int f : region) {
        if (!mesh.face_alive(f)) continue;
        const auto& t = mesh.face(f);
        for (int k = 0; k < 3; ++k) out.emplace_back(t[k], t[(k + 1) % 3]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int count_violations(const TriMesh& mesh, const std::vector<EdgeRef>& edges, const std::set<int>& region) {
    int n = 0;
    for (const EdgeRef& e : edges) n += violates(mesh, e, region);
    return n;
}

// Edges whose opposite-angle sums a flip of `faces` can change.
std::vector<EdgeRef> face_edges(const TriMesh& mesh, const std::vector<int>& faces) {
    std::vector<EdgeRef> out;
    for (int f : faces) {
        const auto& t = mesh.face(f);
        for (int k = 0; k < 3; ++k) out.emplace_back(t[k], t[(k + 1) % 3]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// One sweep of strictly-improving flips: a flip is kept only when it lowers
// the violating-edge count of its local neighborhood, which bounds the number
// of applied flips and keeps the pass monotone.
int flip_pass(TriMesh& mesh, const std::set<int>& region) {
    int flips = 0;
    for (int round = 0; round < 100; ++round) {
        int applied = 0;
        for (const EdgeRef& e : region_edges(mesh, region)) {
            if (opposite_angle_sum(mesh, e, region) <= std::numbers::pi + kAngleEps) continue;
            auto faces = mesh.edge_faces(e);
            if (faces.size() != 2) continue;
            std::vector<EdgeRef> local = face_edges(mesh, faces);
            int before = count_violations(mesh, local, region);
            FlipResult fr;
            if (!mesh.flip(e, &fr)) continue;
            std::vector<EdgeRef> local_after = face_edges(mesh, {fr.faces[0], fr.faces[1]});
            int after = count_violations(mesh, local_after, region);
            if (after >= before) {
                mesh.flip(fr.new_edge);  // revert
                continue;
            }
            ++applied;
        }
        flips += applied;
        if (applied == 0) break;
    }
    return flips;
}

bool move_is_safe(const TriMesh& mesh, int v, const Vec3& target) {
    for (int f : mesh.incident_faces(v)) {
        const auto& t = mesh.face(f);
        Vec3 old_n = mesh.face_normal_raw(f);
        std::array<Vec3, 3> p;
        for (int k = 0; k < 3; ++k) p[k] = t[k] == v ? target : mesh.position(t[k]);
        Vec3 new_n = triangle_normal(p[0], p[1], p[2]);
        double l2 = std::max({norm2(p[1] - p[0]), norm2(p[2] - p[1]), norm2(p[0] - p[2])});
        if (norm(new_n) * 0.5 < 1e-12 * l2) return false;
        if (dot(old_n, new_n) < 0.0) return false;
    }
    return true;
}

}  // namespace

int count_delaunay_violations(const TriMesh& mesh, const std::set<int>& region_faces) {
    return count_violations(mesh, region_edges(mesh, region_faces), region_faces);
}

RemeshStats local_remesh(TriMesh& mesh, const std::set<int>& region_faces, const SizingField& reference,
                         int iterations, double lambda) {
    RemeshStats stats;
    std::set<int> region;
    for (int f : region_faces)
        if (f >= 0 && f < mesh.face_slots() && mesh.face_alive(f)) region.insert(f);
    if (region.empty()) return stats;

    // The whole pass reverts if it cannot keep the region's Delaunay
    // violation count from growing (heavily tangled regions where the flip
    // guards ban every repair).
    const TriMesh snapshot = mesh;
    const int initial_violations = count_delaunay_violations(mesh, region);

    for (int it = 0; it < iterations; ++it) {
        stats.flips += flip_pass(mesh, region);

        // Region vertices in deterministic order; boundary vertices stay put.
        std::vector<int> verts;
        for (int f : region)
            if (mesh.face_alive(f))
                for (int v : mesh.face(f)) verts.push_back(v);
        std::sort(verts.begin(), verts.end());
        verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

        for (int v : verts) {
            if (mesh.is_boundary_vertex(v)) continue;
            std::vector<int> nbrs = mesh.neighbors(v);
            if (nbrs.size() < 3) continue;
            Vec3 centroid{};
            for (int u : nbrs) centroid += mesh.position(u);
            centroid = centroid / static_cast<double>(nbrs.size());

            Vec3 d = centroid - mesh.position(v);
            Vec3 n = mesh.vertex_normal(v);
            Vec3 tangential = d - n * dot(d, n);
            Vec3 target = mesh.position(v) + tangential * lambda;
            target = reference.tree().nearest(target).point;

            if (target == mesh.position(v)) continue;
            if (!move_is_safe(mesh, v, target)) continue;
            mesh.move_vertex(v, target);
            ++stats.moves;
        }
    }
    stats.flips += flip_pass(mesh, region);

    if (count_delaunay_violations(mesh, region) > initial_violations) {
        mesh = snapshot;
        stats = RemeshStats{};
    }
    return stats;
}

}  // namespace bgrid
