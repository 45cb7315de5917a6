#include "bgrid/mesh.hpp"

#include "bgrid/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bgrid {

const char* to_string(CollapseStatus s) {
    switch (s) {
        case CollapseStatus::Ok: return "ok";
        case CollapseStatus::EdgeMissing: return "edge missing";
        case CollapseStatus::LinkCondition: return "link condition violation";
        case CollapseStatus::BoundaryMismatch: return "boundary/interior mismatch";
        case CollapseStatus::BoundaryChord: return "boundary chord";
        case CollapseStatus::DuplicateFace: return "duplicate face";
        case CollapseStatus::NormalFlip: return "normal flip rejection";
    }
    return "unknown";
}

namespace {

std::array<int, 3> sorted_triple(const std::array<int, 3>& f) {
    std::array<int, 3> s = f;
    std::sort(s.begin(), s.end());
    return s;
}

bool face_contains(const std::array<int, 3>& f, int v) {
    return f[0] == v || f[1] == v || f[2] == v;
}

std::array<int, 3> replace_vertex(const std::array<int, 3>& f, int from, int to) {
    std::array<int, 3> r = f;
    for (int& x : r)
        if (x == from) x = to;
    return r;
}

// Local degeneracy scale for a face about to be rewritten.
double degenerate_area_tol(const Vec3& a, const Vec3& b, const Vec3& c) {
    double l2 = std::max({norm2(b - a), norm2(c - b), norm2(a - c)});
    return 1e-12 * l2;
}

}  // namespace

TriMesh TriMesh::from_buffers(std::vector<Vec3> positions, std::vector<std::array<int, 3>> faces) {
    if (positions.size() < 3 || faces.empty()) throw MeshError("mesh requires at least 3 vertices and 1 face");

    const int nv = static_cast<int>(positions.size());
    Aabb box;
    for (const Vec3& p : positions) box.expand(p);
    const double area_tol = 1e-12 * box.diagonal() * box.diagonal();

    std::set<std::array<int, 3>> seen;
    for (size_t i = 0; i < faces.size(); ++i) {
        const auto& f = faces[i];
        for (int v : f)
            if (v < 0 || v >= nv) throw MeshError("face " + std::to_string(i) + " references out-of-range vertex");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw MeshError("face " + std::to_string(i) + " has repeated vertices");
        if (!seen.insert(sorted_triple(f)).second)
            throw MeshError("duplicate face " + std::to_string(i));
        if (triangle_area(positions[f[0]], positions[f[1]], positions[f[2]]) < area_tol)
            throw MeshError("face " + std::to_string(i) + " has near-zero area");
    }

    // Manifoldness and consistent orientation per edge.
    std::map<EdgeRef, std::array<int, 2>> dir_count;  // (a->b, b->a) traversals
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) {
            int u = f[k], v = f[(k + 1) % 3];
            EdgeRef e(u, v);
            auto& c = dir_count[e];
            ++c[u == e.a ? 0 : 1];
        }
    }
    std::string offenders;
    for (const auto& [e, c] : dir_count) {
        if (c[0] + c[1] > 2 || c[0] > 1 || c[1] > 1) {
            offenders += " (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
        }
    }
    if (!offenders.empty()) throw MeshError("non-manifold or inconsistently oriented edges:" + offenders);

    TriMesh m;
    m.positions_ = std::move(positions);
    m.faces_ = std::move(faces);
    m.vertex_alive_.assign(m.positions_.size(), 1);
    m.face_alive_.assign(m.faces_.size(), 1);
    m.alive_vertices_ = static_cast<int>(m.positions_.size());
    m.alive_faces_ = static_cast<int>(m.faces_.size());
    m.build_adjacency();
    return m;
}

void TriMesh::build_adjacency() {
    vertex_faces_.assign(positions_.size(), {});
    for (int f = 0; f < face_slots(); ++f) {
        if (!face_alive_[f]) continue;
        for (int v : faces_[f]) vertex_faces_[v].push_back(f);
    }
    for (auto& l : vertex_faces_) std::sort(l.begin(), l.end());
}

void TriMesh::erase_incident(int v, int f) {
    auto& l = vertex_faces_[v];
    auto it = std::lower_bound(l.begin(), l.end(), f);
    if (it != l.end() && *it == f) l.erase(it);
}

void TriMesh::insert_incident(int v, int f) {
    auto& l = vertex_faces_[v];
    auto it = std::lower_bound(l.begin(), l.end(), f);
    if (it == l.end() || *it != f) l.insert(it, f);
}

std::vector<int> TriMesh::neighbors(int v) const {
    std::vector<int> out;
    for (int f : vertex_faces_[v])
        for (int u : faces_[f])
            if (u != v) out.push_back(u);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> TriMesh::edge_faces(const EdgeRef& e) const {
    std::vector<int> out;
    if (e.a < 0 || e.b >= vertex_slots() || !vertex_alive_[e.a] || !vertex_alive_[e.b]) return out;
    for (int f : vertex_faces_[e.a])
        if (face_contains(faces_[f], e.b)) out.push_back(f);
    return out;
}

bool TriMesh::is_boundary_vertex(int v) const {
    // A vertex is on the boundary iff one of its edges has a single face.
    for (int u : neighbors(v))
        if (edge_faces(EdgeRef(v, u)).size() == 1) return true;
    return false;
}

std::vector<EdgeRef> TriMesh::edges() const {
    std::vector<EdgeRef> out;
    out.reserve(face_slots() * 3 / 2);
    for (int f = 0; f < face_slots(); ++f) {
        if (!face_alive_[f]) continue;
        const auto& t = faces_[f];
        for (int k = 0; k < 3; ++k) out.emplace_back(t[k], t[(k + 1) % 3]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int TriMesh::edge_count() const { return static_cast<int>(edges().size()); }

Vec3 TriMesh::face_normal_raw(int f) const {
    const auto& t = faces_[f];
    return triangle_normal(positions_[t[0]], positions_[t[1]], positions_[t[2]]);
}

Vec3 TriMesh::face_normal(int f) const { return normalized(face_normal_raw(f)); }

double TriMesh::face_area(int f) const {
    const auto& t = faces_[f];
    return triangle_area(positions_[t[0]], positions_[t[1]], positions_[t[2]]);
}

Vec3 TriMesh::vertex_normal(int v) const {
    Vec3 n{};
    for (int f : vertex_faces_[v]) n += face_normal_raw(f);  // raw normal is area-weighted
    return normalized(n);
}

int TriMesh::opposite_vertex(int f, const EdgeRef& e) const {
    for (int v : faces_[f])
        if (v != e.a && v != e.b) return v;
    return -1;
}

Aabb TriMesh::bounding_box() const {
    Aabb box;
    for (int v = 0; v < vertex_slots(); ++v)
        if (vertex_alive_[v]) box.expand(positions_[v]);
    return box;
}

Vec3 TriMesh::new_vertex_position(const EdgeRef& e, CollapsePlacement placement) const {
    switch (placement) {
        case CollapsePlacement::KeepFirst: return positions_[e.a];
        case CollapsePlacement::KeepSecond: return positions_[e.b];
        case CollapsePlacement::Midpoint: break;
    }
    return (positions_[e.a] + positions_[e.b]) * 0.5;
}

CollapseStatus TriMesh::check_collapse(const EdgeRef& e, CollapsePlacement placement) const {
    const std::vector<int> efaces = edge_faces(e);
    if (efaces.empty() || e.a == e.b) return CollapseStatus::EdgeMissing;

    // Link condition: common neighbors must be exactly the opposite vertices.
    std::vector<int> na = neighbors(e.a), nb = neighbors(e.b), common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    std::vector<int> opposite;
    for (int f : efaces) opposite.push_back(opposite_vertex(f, e));
    std::sort(opposite.begin(), opposite.end());
    if (common != opposite) return CollapseStatus::LinkCondition;

    // The kept vertex must retain at least one face, and no opposite vertex
    // may end up isolated.
    const int kept_faces = static_cast<int>(incident_faces(e.a).size() + incident_faces(e.b).size()) -
                           2 * static_cast<int>(efaces.size());
    if (kept_faces < 1) return CollapseStatus::LinkCondition;
    for (int o : opposite)
        if (incident_faces(o).size() < 2) return CollapseStatus::LinkCondition;

    const bool a_boundary = is_boundary_vertex(e.a);
    const bool b_boundary = is_boundary_vertex(e.b);
    if (efaces.size() == 1) {
        // Boundary edge: collapsible only onto one of its (boundary) endpoints.
        if (placement == CollapsePlacement::Midpoint) return CollapseStatus::BoundaryMismatch;
    } else {
        if (a_boundary && b_boundary) return CollapseStatus::BoundaryChord;
        if (a_boundary && placement != CollapsePlacement::KeepFirst) return CollapseStatus::BoundaryMismatch;
        if (b_boundary && placement != CollapsePlacement::KeepSecond) return CollapseStatus::BoundaryMismatch;
    }

    // Duplicate faces: a rewritten face of b may coincide with a face of a.
    std::set<std::array<int, 3>> a_faces;
    for (int f : incident_faces(e.a))
        if (!face_contains(faces_[f], e.b)) a_faces.insert(sorted_triple(faces_[f]));
    for (int f : incident_faces(e.b)) {
        if (face_contains(faces_[f], e.a)) continue;
        if (a_faces.count(sorted_triple(replace_vertex(faces_[f], e.b, e.a))))
            return CollapseStatus::DuplicateFace;
    }

    // Normal guard: no surviving 1-ring face may flip by more than 90 degrees
    // or degenerate.
    const Vec3 pos = new_vertex_position(e, placement);
    for (int endpoint : {e.a, e.b}) {
        for (int f : incident_faces(endpoint)) {
            const auto& t = faces_[f];
            if (face_contains(t, e.a) && face_contains(t, e.b)) continue;
            Vec3 old_n = face_normal_raw(f);
            std::array<Vec3, 3> p;
            for (int k = 0; k < 3; ++k) {
                int v = t[k];
                p[k] = (v == e.a || v == e.b) ? pos : positions_[v];
            }
            Vec3 new_n = triangle_normal(p[0], p[1], p[2]);
            if (norm(new_n) * 0.5 < degenerate_area_tol(p[0], p[1], p[2])) return CollapseStatus::NormalFlip;
            if (dot(old_n, new_n) < 0.0) return CollapseStatus::NormalFlip;
        }
    }
    return CollapseStatus::Ok;
}

CollapseStatus TriMesh::collapse(const EdgeRef& e, CollapsePlacement placement, CollapseResult* result) {
    CollapseStatus st = check_collapse(e, placement);
    if (st != CollapseStatus::Ok) return st;

    const Vec3 pos = new_vertex_position(e, placement);
    const std::vector<int> efaces = edge_faces(e);
    const int keep = e.a, gone = e.b;

    // Remove the faces spanning the edge.
    for (int f : efaces) {
        for (int v : faces_[f]) erase_incident(v, f);
        face_alive_[f] = 0;
        --alive_faces_;
    }
    // Rewire the remaining faces of the removed vertex.
    std::vector<int> gone_faces = vertex_faces_[gone];
    for (int f : gone_faces) {
        faces_[f] = replace_vertex(faces_[f], gone, keep);
        insert_incident(keep, f);
    }
    vertex_faces_[gone].clear();
    vertex_alive_[gone] = 0;
    --alive_vertices_;
    positions_[keep] = pos;

    if (result) {
        result->kept_vertex = keep;
        result->removed_vertex = gone;
        result->removed_faces = efaces;
        result->ring_faces = vertex_faces_[keep];
    }
    return CollapseStatus::Ok;
}

bool TriMesh::can_flip(const EdgeRef& e) const {
    const std::vector<int> efaces = edge_faces(e);
    if (efaces.size() != 2) return false;
    int c = opposite_vertex(efaces[0], e);
    int d = opposite_vertex(efaces[1], e);
    if (c == d || c < 0 || d < 0) return false;
    if (has_edge(EdgeRef(c, d))) return false;

    // The new diagonal must produce two healthy, non-inverted faces.
    Vec3 mean_n = normalized(face_normal_raw(efaces[0])) + normalized(face_normal_raw(efaces[1]));
    const Vec3 &pa = positions_[e.a], &pb = positions_[e.b], &pc = positions_[c], &pd = positions_[d];
    for (const auto& tri : {std::array<Vec3, 3>{pc, pa, pd}, std::array<Vec3, 3>{pd, pb, pc}}) {
        Vec3 n = triangle_normal(tri[0], tri[1], tri[2]);
        if (norm(n) * 0.5 < degenerate_area_tol(tri[0], tri[1], tri[2])) return false;
        if (dot(n, mean_n) <= 0.0) return false;
    }
    return true;
}

bool TriMesh::flip(const EdgeRef& e, FlipResult* result) {
    if (!can_flip(e)) return false;
    const std::vector<int> efaces = edge_faces(e);
    int f1 = efaces[0], f2 = efaces[1];

    // Order (u, v) as traversed by f1; f2 traverses (v, u).
    const auto& t1 = faces_[f1];
    int u = -1, v = -1;
    for (int k = 0; k < 3; ++k) {
        int x = t1[k], y = t1[(k + 1) % 3];
        if (EdgeRef(x, y) == e) { u = x; v = y; break; }
    }
    int c = opposite_vertex(f1, e);
    int d = opposite_vertex(f2, e);

    for (int vtx : faces_[f1]) erase_incident(vtx, f1);
    for (int vtx : faces_[f2]) erase_incident(vtx, f2);
    faces_[f1] = {c, u, d};
    faces_[f2] = {d, v, c};
    for (int vtx : faces_[f1]) insert_incident(vtx, f1);
    for (int vtx : faces_[f2]) insert_incident(vtx, f2);

    if (result) {
        result->new_edge = EdgeRef(c, d);
        result->faces = {f1, f2};
    }
    return true;
}

void TriMesh::compact(std::vector<int>* vertex_map) {
    std::vector<int> vmap(positions_.size(), -1);
    std::vector<Vec3> new_pos;
    new_pos.reserve(alive_vertices_);
    for (int v = 0; v < vertex_slots(); ++v) {
        if (!vertex_alive_[v]) continue;
        vmap[v] = static_cast<int>(new_pos.size());
        new_pos.push_back(positions_[v]);
    }
    std::vector<std::array<int, 3>> new_faces;
    new_faces.reserve(alive_faces_);
    for (int f = 0; f < face_slots(); ++f) {
        if (!face_alive_[f]) continue;
        const auto& t = faces_[f];
        new_faces.push_back({vmap[t[0]], vmap[t[1]], vmap[t[2]]});
    }
    positions_ = std::move(new_pos);
    faces_ = std::move(new_faces);
    vertex_alive_.assign(positions_.size(), 1);
    face_alive_.assign(faces_.size(), 1);
    alive_vertices_ = static_cast<int>(positions_.size());
    alive_faces_ = static_cast<int>(faces_.size());
    build_adjacency();
    if (vertex_map) *vertex_map = std::move(vmap);
}

std::vector<std::string> TriMesh::audit() const {
    std::vector<std::string> problems;
    auto report = [&](const std::string& s) { problems.push_back(s); };

    int va = 0, fa = 0;
    for (auto f : vertex_alive_) va += f != 0;
    for (auto f : face_alive_) fa += f != 0;
    if (va != alive_vertices_) report("vertex alive count mismatch");
    if (fa != alive_faces_) report("face alive count mismatch");

    Aabb box = bounding_box();
    const double area_tol = 1e-12 * box.diagonal() * box.diagonal();

    std::set<std::array<int, 3>> seen;
    std::map<EdgeRef, std::array<int, 2>> dir_count;
    for (int f = 0; f < face_slots(); ++f) {
        if (!face_alive_[f]) continue;
        const auto& t = faces_[f];
        bool bad = false;
        for (int v : t) {
            if (v < 0 || v >= vertex_slots() || !vertex_alive_[v]) {
                report("face " + std::to_string(f) + " references dead or out-of-range vertex");
                bad = true;
            }
        }
        if (bad) continue;
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) report("face " + std::to_string(f) + " repeats a vertex");
        if (!seen.insert(sorted_triple(t)).second) report("duplicate face " + std::to_string(f));
        if (face_area(f) < area_tol) report("face " + std::to_string(f) + " has near-zero area");
        for (int k = 0; k < 3; ++k) {
            int u = t[k], v = t[(k + 1) % 3];
            EdgeRef e(u, v);
            ++dir_count[e][u == e.a ? 0 : 1];
        }
    }
    for (const auto& [e, c] : dir_count) {
        if (c[0] + c[1] > 2 || c[0] > 1 || c[1] > 1) {
            report("non-manifold or inconsistently oriented edge (" + std::to_string(e.a) + "," +
                   std::to_string(e.b) + ")");
        }
    }
    // Adjacency lists must mirror the face table exactly.
    for (int v = 0; v < vertex_slots(); ++v) {
        if (!vertex_alive_[v]) {
            if (!vertex_faces_[v].empty()) report("dead vertex " + std::to_string(v) + " has incident faces");
            continue;
        }
        std::vector<int> expected;
        for (int f = 0; f < face_slots(); ++f)
            if (face_alive_[f] && face_contains(faces_[f], v)) expected.push_back(f);
        if (expected != vertex_faces_[v]) report("adjacency list mismatch at vertex " + std::to_string(v));
    }
    return problems;
}

std::uint64_t TriMesh::content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (int v = 0; v < vertex_slots(); ++v) {
        mix(&vertex_alive_[v], 1);
        if (vertex_alive_[v]) mix(&positions_[v], sizeof(Vec3));
    }
    for (int f = 0; f < face_slots(); ++f) {
        mix(&face_alive_[f], 1);
        if (face_alive_[f]) mix(faces_[f].data(), sizeof(int) * 3);
    }
    return h;
}

}  // namespace bgrid
