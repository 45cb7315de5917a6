#include "bgrid/edge_eval.hpp"

#include "bgrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace bgrid {

void SelectionConfig::validate() const {
    if (!(n_percent > 0.0) || n_percent > 1.0) throw MeshError("n_percent must be in (0,1]");
    if (!(t_size > 1.0)) throw MeshError("t_size must be > 1");
    if (!(t_dis > 0.0)) throw MeshError("t_dis must be > 0");
    if (w_s < 0.0 || w_d < 0.0 || (w_s == 0.0 && w_d == 0.0)) throw MeshError("invalid loss weights");
    if (samples_per_face < 1) throw MeshError("samples_per_face must be >= 1");
}

SelectionConfig SelectionConfig::resolved(const Aabb& bbox) const {
    SelectionConfig c = *this;
    const double diag = bbox.diagonal();
    if (c.t_dis <= 0.0) c.t_dis = 1e-3 * diag;
    if (c.colinear_tol <= 0.0) c.colinear_tol = 1e-9 * diag;
    c.validate();
    return c;
}

namespace {

// The two boundary neighbors of a boundary vertex (order not significant).
std::vector<int> boundary_neighbors(const TriMesh& mesh, int v) {
    std::vector<int> out;
    for (int u : mesh.neighbors(v))
        if (mesh.edge_faces(EdgeRef(v, u)).size() == 1) out.push_back(u);
    return out;
}

// True if removing `gone` (collapsing onto `keep`) leaves the boundary
// polyline geometrically unchanged within tol.
bool boundary_collapse_colinear(const TriMesh& mesh, int keep, int gone, double tol) {
    for (int w : boundary_neighbors(mesh, gone)) {
        if (w == keep) continue;
        if (point_segment_distance(mesh.position(gone), mesh.position(keep), mesh.position(w)) > tol)
            return false;
    }
    return true;
}

}  // namespace

std::optional<CollapsePlacement> resolve_collapse(const TriMesh& mesh, const EdgeRef& e, double colinear_tol) {
    auto efaces = mesh.edge_faces(e);
    if (efaces.empty()) return std::nullopt;

    if (efaces.size() == 2) {
        const bool ab = mesh.is_boundary_vertex(e.a);
        const bool bb = mesh.is_boundary_vertex(e.b);
        CollapsePlacement placement = CollapsePlacement::Midpoint;
        if (ab && bb) return std::nullopt;  // chord
        if (ab) placement = CollapsePlacement::KeepFirst;
        if (bb) placement = CollapsePlacement::KeepSecond;
        if (mesh.check_collapse(e, placement) == CollapseStatus::Ok) return placement;
        return std::nullopt;
    }

    // Boundary edge: collapse onto an endpoint, only along a straight run.
    if (boundary_collapse_colinear(mesh, e.a, e.b, colinear_tol) &&
        mesh.check_collapse(e, CollapsePlacement::KeepFirst) == CollapseStatus::Ok)
        return CollapsePlacement::KeepFirst;
    if (boundary_collapse_colinear(mesh, e.b, e.a, colinear_tol) &&
        mesh.check_collapse(e, CollapsePlacement::KeepSecond) == CollapseStatus::Ok)
        return CollapsePlacement::KeepSecond;
    return std::nullopt;
}

EdgeEvaluation evaluate_edge(const TriMesh& mesh, const VertexSizes& sizes, const SizingField& target,
                             const EdgeRef& e, const SelectionConfig& config) {
    EdgeEvaluation eval;
    eval.edge = e;

    auto placement = resolve_collapse(mesh, e, config.colinear_tol);
    if (!placement) return eval;  // collapsible=false, score 1
    eval.topology_ok = true;
    eval.placement = *placement;

    const Vec3 new_pos = mesh.new_vertex_position(e, *placement);
    double merged_size = 0.0;
    switch (*placement) {
        case CollapsePlacement::Midpoint: merged_size = 0.5 * (sizes[e.a] + sizes[e.b]); break;
        case CollapsePlacement::KeepFirst: merged_size = sizes[e.a]; break;
        case CollapsePlacement::KeepSecond: merged_size = sizes[e.b]; break;
    }

    // Faces adjacent to the merged vertex on the scratch post-collapse patch.
    const auto lattice =
        interior_barycentric_lattice(lattice_level_for(config.samples_per_face), config.lambda_margin);
    double delta_s = 1.0, delta_d = 0.0;
    for (int endpoint : {e.a, e.b}) {
        for (int f : mesh.incident_faces(endpoint)) {
            const auto& t = mesh.face(f);
            bool has_a = t[0] == e.a || t[1] == e.a || t[2] == e.a;
            bool has_b = t[0] == e.b || t[1] == e.b || t[2] == e.b;
            if (has_a && has_b) continue;  // removed by the collapse
            Vec3 p[3];
            double s[3];
            for (int k = 0; k < 3; ++k) {
                int v = t[k];
                bool merged = v == e.a || v == e.b;
                p[k] = merged ? new_pos : mesh.position(v);
                s[k] = merged ? merged_size : sizes[v];
            }
            for (const auto& l : lattice) {
                Vec3 sample = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
                double s_data = s[0] + l[1] * (s[1] - s[0]) + l[2] * (s[2] - s[0]);
                QueryResult hit = target.query(sample);
                double ratio = std::max(s_data / hit.size, hit.size / s_data);
                delta_s = std::max(delta_s, ratio);
                delta_d = std::max(delta_d, hit.distance);
            }
        }
    }

    eval.delta_s = delta_s;
    eval.delta_d = delta_d;
    eval.score = std::clamp(
        config.w_s * (delta_s - 1.0) / (config.t_size - 1.0) + config.w_d * delta_d / config.t_dis, 0.0, 1.0);
    eval.collapsible = delta_s < config.t_size && delta_d < config.t_dis;
    return eval;
}

std::vector<EdgeEvaluation> select_candidates(std::vector<EdgeEvaluation> evals, const SelectionConfig& config,
                                              const TriMesh& mesh) {
    evals.erase(std::remove_if(evals.begin(), evals.end(),
                               [](const EdgeEvaluation& ev) { return !ev.collapsible; }),
                evals.end());
    std::sort(evals.begin(), evals.end(), [](const EdgeEvaluation& x, const EdgeEvaluation& y) {
        if (x.score != y.score) return x.score < y.score;
        if (x.delta_d != y.delta_d) return x.delta_d < y.delta_d;
        return x.edge < y.edge;
    });

    const size_t cap = static_cast<size_t>(std::ceil(config.n_percent * mesh.edge_count()));
    if (evals.size() > cap) evals.resize(cap);

    std::vector<EdgeEvaluation> selected;
    std::set<int> used;
    for (const EdgeEvaluation& ev : evals) {
        if (used.count(ev.edge.a) || used.count(ev.edge.b)) continue;
        used.insert(ev.edge.a);
        used.insert(ev.edge.b);
        selected.push_back(ev);
    }
    return selected;
}

std::string evaluations_to_csv(const std::vector<EdgeEvaluation>& evals) {
    std::string out = "v0,v1,delta_s,delta_d,score,collapsible\n";
    char buf[256];
    for (const EdgeEvaluation& ev : evals) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%d\n", ev.edge.a, ev.edge.b, ev.delta_s,
                      ev.delta_d, ev.score, ev.collapsible ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace bgrid
