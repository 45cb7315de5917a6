#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "bgrid/mesh.hpp"

#include <random>

using namespace bgrid;
using namespace bgrid::test;

TEST_CASE("from_buffers validates invariants") {
    std::vector<Vec3> quad = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};

    SUBCASE("valid square") {
        TriMesh m = TriMesh::from_buffers(quad, {{0, 1, 2}, {0, 2, 3}});
        CHECK(m.vertex_count() == 4);
        CHECK(m.face_count() == 2);
        CHECK(m.edge_count() == 5);
        CHECK(m.audit().empty());
    }
    SUBCASE("out of range index") {
        CHECK_THROWS_AS(TriMesh::from_buffers(quad, {{0, 1, 7}}), MeshError);
    }
    SUBCASE("repeated vertex in face") {
        CHECK_THROWS_AS(TriMesh::from_buffers(quad, {{0, 1, 1}}), MeshError);
    }
    SUBCASE("duplicate face") {
        CHECK_THROWS_AS(TriMesh::from_buffers(quad, {{0, 1, 2}, {2, 1, 0}}), MeshError);
    }
    SUBCASE("zero-area face") {
        std::vector<Vec3> degen = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}};
        CHECK_THROWS_AS(TriMesh::from_buffers(degen, {{0, 1, 2}, {0, 2, 3}}), MeshError);
    }
    SUBCASE("edge with three faces is reported") {
        std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, -1, 0}, {0.5, 0.5, 1}};
        try {
            TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
            FAIL("expected MeshError");
        } catch (const MeshError& e) {
            CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
        }
    }
    SUBCASE("inconsistent orientation") {
        CHECK_THROWS_AS(TriMesh::from_buffers(quad, {{0, 1, 2}, {0, 3, 2}}), MeshError);
    }
}

TEST_CASE("octahedron collapse bookkeeping") {
    TriMesh m = make_octahedron();
    CHECK(m.vertex_count() == 6);
    CHECK(m.edge_count() == 12);
    CHECK(m.face_count() == 8);
    CHECK(m.euler_characteristic() == 2);

    CollapseResult r;
    REQUIRE(m.collapse(EdgeRef(0, 2), CollapsePlacement::Midpoint, &r) == CollapseStatus::Ok);
    CHECK(m.vertex_count() == 5);
    CHECK(m.edge_count() == 9);
    CHECK(m.face_count() == 6);
    CHECK(m.euler_characteristic() == 2);
    CHECK(r.kept_vertex == 0);
    CHECK(r.removed_vertex == 2);
    CHECK(r.removed_faces.size() == 2);
    CHECK(m.audit().empty());
}

TEST_CASE("midpoint placement lands on the midpoint") {
    // Planar patch where both endpoints of (0,1) are interior vertices.
    std::vector<Vec3> v = {{0, 0, 0}, {2, 0, 0}, {1, 2, 0}, {1, -2, 0}, {-2, 0, 0}, {4, 0, 0}};
    std::vector<std::array<int, 3>> f = {{0, 1, 2}, {1, 0, 3}, {0, 2, 4}, {0, 4, 3}, {1, 3, 5}, {1, 5, 2}};
    TriMesh m = TriMesh::from_buffers(v, f);
    REQUIRE_FALSE(m.is_boundary_vertex(0));
    REQUIRE_FALSE(m.is_boundary_vertex(1));
    CollapseResult r;
    REQUIRE(m.collapse(EdgeRef(0, 1), CollapsePlacement::Midpoint, &r) == CollapseStatus::Ok);
    CHECK(m.position(r.kept_vertex) == Vec3{1, 0, 0});
    CHECK(m.audit().empty());
}

TEST_CASE("link condition rejects a 3-common-neighbor edge") {
    // u=0, v=1 share faces over a and b, plus both connect to w through a.
    std::vector<Vec3> v = {{0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {1, -1, 0}, {1, 2, 0}};
    std::vector<std::array<int, 3>> f = {{0, 1, 2}, {1, 0, 3}, {0, 2, 4}, {4, 2, 1}};
    TriMesh m = TriMesh::from_buffers(v, f);

    // Independent oracle: common neighbors counted straight from face lists.
    std::set<int> n0, n1;
    for (const auto& face : f)
        for (int k = 0; k < 3; ++k) {
            for (int j = 0; j < 3; ++j) {
                if (face[k] == 0 && face[j] != 0) n0.insert(face[j]);
                if (face[k] == 1 && face[j] != 1) n1.insert(face[j]);
            }
        }
    std::vector<int> common;
    std::set_intersection(n0.begin(), n0.end(), n1.begin(), n1.end(), std::back_inserter(common));
    REQUIRE(common.size() == 3);

    CHECK(m.check_collapse(EdgeRef(0, 1), CollapsePlacement::Midpoint) == CollapseStatus::LinkCondition);
    CHECK(m.collapse(EdgeRef(0, 1), CollapsePlacement::Midpoint) == CollapseStatus::LinkCondition);
    CHECK(m.face_count() == 4);  // untouched on rejection
    CHECK(m.audit().empty());
}

TEST_CASE("tetrahedron collapse is rejected (duplicate faces)") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, 0.5, 1}};
    std::vector<std::array<int, 3>> f = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
    TriMesh m = TriMesh::from_buffers(v, f);
    CHECK(m.collapse(EdgeRef(0, 1), CollapsePlacement::Midpoint) != CollapseStatus::Ok);
}

TEST_CASE("boundary collapse rules") {
    TriMesh m = make_plane_grid(4, 4);

    SUBCASE("midpoint on a boundary edge is a placement mismatch") {
        CHECK(m.check_collapse(EdgeRef(0, 1), CollapsePlacement::Midpoint) ==
              CollapseStatus::BoundaryMismatch);
    }
    SUBCASE("interior edge with one boundary endpoint must keep the boundary vertex") {
        // vertex 1 = (0.25,0,0) boundary; vertex 7 = (0.25,0.25,...) interior
        EdgeRef e(1, 6);
        REQUIRE(m.has_edge(e));
        CHECK(m.is_boundary_vertex(1));
        CHECK_FALSE(m.is_boundary_vertex(6));
        CHECK(m.check_collapse(e, CollapsePlacement::Midpoint) == CollapseStatus::BoundaryMismatch);
        CHECK(m.check_collapse(e, CollapsePlacement::KeepFirst) == CollapseStatus::Ok);
    }
    SUBCASE("normal flip guard rejects inverting collapses") {
        // Collapsing an interior edge onto a far-away position flips faces.
        TriMesh flat = make_plane_grid(4, 4);
        EdgeRef e(6, 7);
        REQUIRE(flat.has_edge(e));
        flat.move_vertex(6, {10.0, 10.0, 0.0});
        CHECK(flat.check_collapse(e, CollapsePlacement::KeepFirst) == CollapseStatus::NormalFlip);
    }
}

TEST_CASE("randomized collapse sequences preserve the invariants") {
    std::mt19937_64 rng(7);
    TriMesh m = make_octasphere(2);  // 128 faces, closed
    int collapses = 0;
    for (int step = 0; step < 200 && m.face_count() > 16; ++step) {
        auto edges = m.edges();
        std::uniform_int_distribution<size_t> pick(0, edges.size() - 1);
        EdgeRef e = edges[pick(rng)];
        int v0 = m.vertex_count(), e0 = m.edge_count(), f0 = m.face_count();
        int chi = m.euler_characteristic();
        if (m.collapse(e, CollapsePlacement::Midpoint) == CollapseStatus::Ok) {
            ++collapses;
            CHECK(m.vertex_count() == v0 - 1);
            CHECK(m.edge_count() == e0 - 3);
            CHECK(m.face_count() == f0 - 2);
            CHECK(m.euler_characteristic() == chi);
            auto problems = m.audit();
            if (!problems.empty()) FAIL(problems.front());
        }
    }
    CHECK(collapses > 20);
}

TEST_CASE("edge flip rewires the diamond") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.2, 0}, {0.5, -0.2, 0}};
    TriMesh m = TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}});
    REQUIRE(m.can_flip(EdgeRef(0, 1)));
    FlipResult r;
    REQUIRE(m.flip(EdgeRef(0, 1), &r));
    CHECK(r.new_edge == EdgeRef(2, 3));
    CHECK_FALSE(m.has_edge(EdgeRef(0, 1)));
    CHECK(m.has_edge(EdgeRef(2, 3)));
    CHECK(m.audit().empty());
    CHECK(m.face_count() == 2);

    SUBCASE("boundary edges cannot flip") {
        CHECK_FALSE(m.can_flip(EdgeRef(0, 2)));
    }
}

TEST_CASE("flip creating an already-existing edge is refused") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.2, 0}, {0.5, -0.2, 0}, {1.5, 0, 0}};
    TriMesh m = TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}, {2, 3, 4}});
    REQUIRE(m.has_edge(EdgeRef(2, 3)));
    CHECK_FALSE(m.can_flip(EdgeRef(0, 1)));  // diagonal (2,3) already present
}

TEST_CASE("compact squeezes out dead slots") {
    TriMesh m = make_octahedron();
    REQUIRE(m.collapse(EdgeRef(0, 2), CollapsePlacement::Midpoint) == CollapseStatus::Ok);
    std::vector<int> vmap;
    m.compact(&vmap);
    CHECK(m.vertex_count() == m.vertex_slots());
    CHECK(m.face_count() == m.face_slots());
    CHECK(m.audit().empty());
    CHECK(vmap.size() == 6);
    CHECK(vmap[2] == -1);
}

TEST_CASE("content hash tracks changes") {
    TriMesh a = make_octahedron();
    TriMesh b = make_octahedron();
    CHECK(a.content_hash() == b.content_hash());
    b.move_vertex(0, {1.5, 0, 0});
    CHECK(a.content_hash() != b.content_hash());
}
