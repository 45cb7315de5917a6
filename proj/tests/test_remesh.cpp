#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "bgrid/hausdorff.hpp"
#include "bgrid/remesh.hpp"

using namespace bgrid;
using namespace bgrid::test;

namespace {

std::set<int> all_faces(const TriMesh& m) {
    std::set<int> region;
    for (int f = 0; f < m.face_slots(); ++f)
        if (m.face_alive(f)) region.insert(f);
    return region;
}

SizingField plane_reference(double w = 10.0) {
    TriMesh plane = TriMesh::from_buffers({{-w, -w, 0}, {w, -w, 0}, {w, w, 0}, {-w, w, 0}},
                                          {{0, 1, 2}, {0, 2, 3}});
    return SizingField(plane, init_uniform(plane, 1.0), 1.0);
}

}  // namespace

TEST_CASE("thin quad: opposite-angle criterion triggers a flip") {
    // Long skinny diamond across edge (0,1); both opposite angles are obtuse.
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.15, 0}, {0.5, -0.15, 0}};
    TriMesh m = TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}});

    // Direct angle oracle.
    double a1 = triangle_angle_at(v[2], v[0], v[1]);
    double a2 = triangle_angle_at(v[3], v[0], v[1]);
    REQUIRE(a1 + a2 > std::numbers::pi);

    SizingField ref = plane_reference();
    RemeshStats stats = local_remesh(m, all_faces(m), ref, 1);
    CHECK(stats.flips == 1);
    CHECK_FALSE(m.has_edge(EdgeRef(0, 1)));
    CHECK(m.has_edge(EdgeRef(2, 3)));
    CHECK(m.audit().empty());
}

TEST_CASE("delaunay equilateral region is a fixed point") {
    TriMesh m = make_equilateral_patch(6, 6);
    TriMesh before = m;
    SizingField ref = plane_reference();
    RemeshStats stats = local_remesh(m, all_faces(m), ref, 3);
    CHECK(stats.flips == 0);
    for (int vtx = 0; vtx < m.vertex_slots(); ++vtx)
        CHECK(distance(m.position(vtx), before.position(vtx)) < 1e-12);
}

TEST_CASE("perturbed vertex returns to the plane under smoothing") {
    TriMesh m = make_plane_grid(6, 6);
    int center = -1;
    for (int vtx = 0; vtx < m.vertex_slots(); ++vtx)
        if (distance(m.position(vtx), {0.5, 0.5, 0}) < 1e-12) center = vtx;
    REQUIRE(center >= 0);
    m.move_vertex(center, {0.52, 0.47, 0.2});

    SizingField ref = plane_reference();
    local_remesh(m, all_faces(m), ref, 5);
    CHECK(std::abs(m.position(center).z) < 1e-9);
    CHECK(m.audit().empty());
}

TEST_CASE("remesh never increases delaunay violations and never inverts faces") {
    TriMesh m = make_plane_grid(8, 8, 1.0, 1.0, 0.2);
    std::set<int> region = all_faces(m);
    int before = count_delaunay_violations(m, region);
    SizingField ref = plane_reference();
    local_remesh(m, region, ref, 3);
    std::set<int> region_after;
    for (int f : region)
        if (m.face_alive(f)) region_after.insert(f);
    CHECK(count_delaunay_violations(m, region_after) <= before);
    for (int f : region_after) CHECK(m.face_normal(f).z > 0.0);
    CHECK(m.audit().empty());
}

TEST_CASE("boundary vertices never move") {
    TriMesh m = make_plane_grid(5, 5);
    std::vector<Vec3> boundary_before;
    std::vector<int> boundary_ids;
    for (int vtx = 0; vtx < m.vertex_slots(); ++vtx)
        if (m.is_boundary_vertex(vtx)) {
            boundary_ids.push_back(vtx);
            boundary_before.push_back(m.position(vtx));
        }
    SizingField ref = plane_reference();
    local_remesh(m, all_faces(m), ref, 4);
    for (size_t i = 0; i < boundary_ids.size(); ++i)
        CHECK(m.position(boundary_ids[i]) == boundary_before[i]);
}

TEST_CASE("hausdorff: identical meshes measure zero") {
    TriMesh m = make_wavy_sheet(6, 6, 1, 1, 0.1);
    CHECK(hausdorff_distance(m, m) == doctest::Approx(0.0));
}

TEST_CASE("hausdorff: translated plane measures the offset") {
    TriMesh a = make_plane_grid(4, 4);
    TriMesh b = make_plane_grid(4, 4);
    for (int vtx = 0; vtx < b.vertex_slots(); ++vtx) {
        Vec3 p = b.position(vtx);
        p.z += 0.5;
        b.move_vertex(vtx, p);
    }
    double d = hausdorff_distance(a, b);
    CHECK(d == doctest::Approx(0.5).epsilon(1e-12));

    // Brute-force point-to-triangle oracle over a dense lattice agrees.
    double oracle = 0.0;
    for (int f = 0; f < a.face_slots(); ++f) {
        const auto& t = a.face(f);
        for (const auto& l : barycentric_lattice(6)) {
            Vec3 p = a.position(t[0]) * l[0] + a.position(t[1]) * l[1] + a.position(t[2]) * l[2];
            oracle = std::max(oracle, brute_force_nearest(b, p).distance);
        }
    }
    CHECK(d == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("hausdorff: lifted vertex approaches the lift height with denser sampling") {
    TriMesh flat = make_plane_grid(4, 4);
    TriMesh bump = make_plane_grid(4, 4);
    int center = -1;
    for (int vtx = 0; vtx < bump.vertex_slots(); ++vtx)
        if (distance(bump.position(vtx), {0.5, 0.5, 0}) < 1e-12) center = vtx;
    const double h = 0.3;
    bump.move_vertex(center, {0.5, 0.5, h});

    double d6 = hausdorff_distance(flat, bump, 6);
    double d45 = hausdorff_distance(flat, bump, 45);
    CHECK(d45 >= d6 - 1e-12);
    CHECK(d45 > 0.8 * h);
    CHECK(d45 <= h + 1e-12);
    // The level-2 lattice includes the corners, so the lifted vertex itself is
    // sampled; the bound is reached up to the projection geometry.
    CHECK(d6 > 0.5 * h);
}

TEST_CASE("hausdorff is symmetric and rejects empty meshes") {
    TriMesh a = make_plane_grid(3, 3);
    TriMesh b = make_octasphere(1);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(hausdorff_distance(b, a)).epsilon(1e-15));
    TriMesh empty;
    CHECK_THROWS_AS(hausdorff_distance(a, empty), MeshError);
}
