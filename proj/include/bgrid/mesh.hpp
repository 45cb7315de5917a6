#pragma once

#include "bgrid/vec3.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bgrid {

// Unordered edge, stored with the smaller index first.
struct EdgeRef {
    int a = -1, b = -1;

    EdgeRef() = default;
    EdgeRef(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}

    bool operator==(const EdgeRef& o) const { return a == o.a && b == o.b; }
    bool operator<(const EdgeRef& o) const { return a != o.a ? a < o.a : b < o.b; }
};

enum class CollapsePlacement { Midpoint, KeepFirst, KeepSecond };

enum class CollapseStatus {
    Ok,
    EdgeMissing,
    LinkCondition,       // common neighbors != opposite vertices of the edge faces
    BoundaryMismatch,    // placement would move a boundary vertex off the boundary
    BoundaryChord,       // interior edge joining two boundary vertices
    DuplicateFace,
    NormalFlip,
};

const char* to_string(CollapseStatus s);

struct CollapseResult {
    int kept_vertex = -1;
    int removed_vertex = -1;
    std::vector<int> removed_faces;
    std::vector<int> ring_faces;  // faces incident to the kept vertex after the collapse
};

struct FlipResult {
    EdgeRef new_edge;
    std::array<int, 2> faces;
};

// Triangular surface manifold mesh. Vertices and faces are slot arrays with
// tombstones so collapses keep indices stable; compact() squeezes them out.
class TriMesh {
public:
    TriMesh() = default;
    // Validates the invariants (manifoldness, no duplicate/degenerate faces,
    // consistent orientation) and builds adjacency. Throws MeshError.
    static TriMesh from_buffers(std::vector<Vec3> positions, std::vector<std::array<int, 3>> faces);

    int vertex_count() const { return alive_vertices_; }
    int face_count() const { return alive_faces_; }
    int edge_count() const;
    int vertex_slots() const { return static_cast<int>(positions_.size()); }
    int face_slots() const { return static_cast<int>(faces_.size()); }

    bool vertex_alive(int v) const { return vertex_alive_[v] != 0; }
    bool face_alive(int f) const { return face_alive_[f] != 0; }

    const Vec3& position(int v) const { return positions_[v]; }
    const std::array<int, 3>& face(int f) const { return faces_[f]; }

    // Sorted list of alive faces incident to v.
    const std::vector<int>& incident_faces(int v) const { return vertex_faces_[v]; }
    // Sorted unique neighbor vertices of v.
    std::vector<int> neighbors(int v) const;
    // Alive faces adjacent to the edge (empty if the edge does not exist).
    std::vector<int> edge_faces(const EdgeRef& e) const;
    bool has_edge(const EdgeRef& e) const { return !edge_faces(e).empty(); }

    bool is_boundary_vertex(int v) const;
    bool is_boundary_edge(const EdgeRef& e) const { return edge_faces(e).size() == 1; }

    // All alive edges in canonical (sorted) order.
    std::vector<EdgeRef> edges() const;

    Vec3 face_normal_raw(int f) const;   // unnormalized
    Vec3 face_normal(int f) const;       // unit
    double face_area(int f) const;
    Vec3 vertex_normal(int v) const;     // area-weighted, unit
    int opposite_vertex(int f, const EdgeRef& e) const;

    Aabb bounding_box() const;
    int euler_characteristic() const { return vertex_count() - edge_count() + face_count(); }

    // --- mutation -----------------------------------------------------------

    CollapseStatus check_collapse(const EdgeRef& e, CollapsePlacement placement) const;
    // Performs the collapse (kept vertex = e.a). Returns the status from
    // check_collapse unchanged on rejection; the mesh is never modified unless
    // the result is Ok.
    CollapseStatus collapse(const EdgeRef& e, CollapsePlacement placement, CollapseResult* result = nullptr);

    // Flips an interior edge if topologically and geometrically safe.
    bool can_flip(const EdgeRef& e) const;
    bool flip(const EdgeRef& e, FlipResult* result = nullptr);

    void move_vertex(int v, const Vec3& p) { positions_[v] = p; }

    // Drops dead slots. old-to-new vertex map is written if requested (-1 for
    // removed slots).
    void compact(std::vector<int>* vertex_map = nullptr);

    // Full invariant audit; returns human-readable problems (empty = healthy).
    std::vector<std::string> audit() const;

    Vec3 new_vertex_position(const EdgeRef& e, CollapsePlacement placement) const;

    // FNV-1a over positions, faces and liveness; used for immutability checks.
    std::uint64_t content_hash() const;

private:
    std::vector<Vec3> positions_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<std::uint8_t> vertex_alive_;
    std::vector<std::uint8_t> face_alive_;
    std::vector<std::vector<int>> vertex_faces_;
    int alive_vertices_ = 0;
    int alive_faces_ = 0;

    void build_adjacency();
    void erase_incident(int v, int f);
    void insert_incident(int v, int f);
};

struct MeshError : std::runtime_error {
    explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bgrid
