#include "bgrid/sizing_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>

namespace bgrid {

void validate_sizes(const TriMesh& mesh, const VertexSizes& sizes) {
    if (static_cast<int>(sizes.size()) != mesh.vertex_slots())
        throw MeshError("size array length does not match vertex count");
    for (int v = 0; v < mesh.vertex_slots(); ++v) {
        if (!mesh.vertex_alive(v)) continue;
        double s = sizes[v];
        if (!(s > 0.0) || !std::isfinite(s))
            throw MeshError("vertex " + std::to_string(v) + " has non-positive or non-finite size");
    }
}

SizingField::SizingField(TriMesh grid, VertexSizes sizes, double beta) : beta_(beta) {
    if (beta < 1.0) throw MeshError("beta must be >= 1");
    validate_sizes(grid, sizes);
    std::vector<int> vmap;
    grid.compact(&vmap);
    grid_ = std::move(grid);
    sizes_.assign(grid_.vertex_slots(), 0.0);
    for (size_t old = 0; old < vmap.size(); ++old)
        if (vmap[old] >= 0) sizes_[vmap[old]] = sizes[old];
    tree_ = FaceTree(grid_);
}

double SizingField::size_on_face(int face, const std::array<double, 3>& bary) const {
    // Difference form: exact for uniform data (bary rounding cancels).
    const auto& t = grid_.face(face);
    const double s0 = sizes_[t[0]];
    return s0 + bary[1] * (sizes_[t[1]] - s0) + bary[2] * (sizes_[t[2]] - s0);
}

QueryResult SizingField::query(const Vec3& p) const {
    NearestHit hit = tree_.nearest(p);
    QueryResult r;
    r.face = hit.face;
    r.bary = hit.bary;
    r.distance = hit.distance;
    r.size = size_on_face(hit.face, hit.bary);
    return r;
}

VertexSizes init_uniform(const TriMesh& mesh, double h0) {
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw MeshError("uniform size must be positive");
    return VertexSizes(mesh.vertex_slots(), h0);
}

namespace {

// Solves a small SPD-ish system in place by Gaussian elimination with partial
// pivoting. Returns false when singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) < 1e-14) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            double m = a[r * n + col] / a[col * n + col];
            for (int c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
            b[r] -= m * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
        b[r] = s / a[r * n + r];
    }
    return true;
}

std::vector<int> two_ring(const TriMesh& mesh, int v) {
    std::set<int> ring;
    for (int u : mesh.neighbors(v)) {
        ring.insert(u);
        for (int w : mesh.neighbors(u))
            if (w != v) ring.insert(w);
    }
    return {ring.begin(), ring.end()};
}

// Largest absolute principal curvature from a Monge patch fit
// h(x,y) = a*x + b*y + c*x^2 + d*xy + e*y^2 over the 2-ring.
std::optional<double> max_principal_curvature(const TriMesh& mesh, int v) {
    std::vector<int> ring = two_ring(mesh, v);
    if (ring.size() < 5) return std::nullopt;

    Vec3 n = mesh.vertex_normal(v);
    if (norm(n) == 0.0) return std::nullopt;
    Vec3 t1 = cross(n, std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0});
    t1 = normalized(t1);
    Vec3 t2 = cross(n, t1);

    const Vec3& origin = mesh.position(v);
    std::vector<double> ata(25, 0.0), atz(5, 0.0);
    for (int u : ring) {
        Vec3 d = mesh.position(u) - origin;
        double x = dot(d, t1), y = dot(d, t2), z = dot(d, n);
        double phi[5] = {x, y, x * x, x * y, y * y};
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) ata[i * 5 + j] += phi[i] * phi[j];
            atz[i] += phi[i] * z;
        }
    }
    if (!solve_dense(ata, atz, 5)) return std::nullopt;

    double hx = atz[0], hy = atz[1], hxx = 2.0 * atz[2], hxy = atz[3], hyy = 2.0 * atz[4];
    double w = std::sqrt(1.0 + hx * hx + hy * hy);
    double e1 = 1.0 + hx * hx, f1 = hx * hy, g1 = 1.0 + hy * hy;
    double l = hxx / w, m = hxy / w, nn = hyy / w;
    double det_i = e1 * g1 - f1 * f1;
    if (det_i == 0.0) return std::nullopt;
    // Shape operator S = I^{-1} II
    double s00 = (g1 * l - f1 * m) / det_i;
    double s01 = (g1 * m - f1 * nn) / det_i;
    double s10 = (e1 * m - f1 * l) / det_i;
    double s11 = (e1 * nn - f1 * m) / det_i;
    double tr = s00 + s11, det = s00 * s11 - s01 * s10;
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    double k1 = 0.5 * tr + disc, k2 = 0.5 * tr - disc;
    return std::max(std::abs(k1), std::abs(k2));
}

}  // namespace

VertexSizes init_geometric(const TriMesh& mesh, const GeometricInitConfig& config,
                           std::vector<std::string>* warnings) {
    if (config.segments_per_circle < 3) throw MeshError("segments_per_circle must be >= 3");
    const double diag = mesh.bounding_box().diagonal();
    const double h_max = config.h_max > 0.0 ? config.h_max : 0.5 * diag;
    const double h_min = config.h_min > 0.0 ? config.h_min : std::min(1e-3 * diag, h_max);
    if (!(h_min > 0.0) || h_min > h_max) throw MeshError("invalid h_min/h_max");
    const double kappa_eps = 1e-6 / std::max(diag, 1e-300);

    std::optional<FaceTree> tree;
    if (config.proximity) tree.emplace(mesh);

    VertexSizes sizes(mesh.vertex_slots(), h_max);
    for (int v = 0; v < mesh.vertex_slots(); ++v) {
        if (!mesh.vertex_alive(v)) continue;
        double h = h_max;
        auto kappa = max_principal_curvature(mesh, v);
        if (!kappa) {
            if (warnings)
                warnings->push_back("vertex " + std::to_string(v) +
                                    ": degenerate 2-ring, falling back to h_max");
        } else if (*kappa >= kappa_eps) {
            h = 2.0 * std::numbers::pi / (config.segments_per_circle * *kappa);
        }
        if (config.proximity) {
            // Gap to the nearest surface patch outside the 2-ring.
            std::vector<char> excluded(mesh.face_slots(), 0);
            excluded.assign(mesh.face_slots(), 0);
            std::set<int> local(  // faces touching the 2-ring
                mesh.incident_faces(v).begin(), mesh.incident_faces(v).end());
            for (int u : two_ring(mesh, v))
                for (int f : mesh.incident_faces(u)) local.insert(f);
            for (int f : local) excluded[f] = 1;
            NearestHit hit = tree->nearest(mesh.position(v), &excluded);
            if (hit.face >= 0 && hit.distance > 0.0) h = std::min(h, hit.distance);
        }
        sizes[v] = std::clamp(h, h_min, h_max);
    }
    return sizes;
}

VertexSizes gradient_limit_smooth(const TriMesh& mesh, const VertexSizes& initial, double beta) {
    if (beta < 1.0) throw MeshError("beta must be >= 1");
    validate_sizes(mesh, initial);

    VertexSizes h = initial;
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (int v = 0; v < mesh.vertex_slots(); ++v)
        if (mesh.vertex_alive(v)) heap.push({h[v], v});

    while (!heap.empty()) {
        auto [value, v] = heap.top();
        heap.pop();
        if (value > h[v]) continue;  // stale entry
        for (int u : mesh.neighbors(v)) {
            double candidate = value + beta * distance(mesh.position(v), mesh.position(u));
            if (candidate < h[u]) {
                h[u] = candidate;
                heap.push({candidate, u});
            }
        }
    }
    return h;
}

}  // namespace bgrid
