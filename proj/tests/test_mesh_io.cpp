#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "bgrid/mesh_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

using namespace bgrid;
using namespace bgrid::test;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Brute-force weld oracle: union-find over all pairs closer than tol.
int welded_vertex_count(const std::vector<Vec3>& pts, double tol) {
    std::vector<int> parent(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            if (distance(pts[i], pts[j]) < tol) parent[find(static_cast<int>(j))] = find(static_cast<int>(i));
    std::set<int> roots;
    for (size_t i = 0; i < pts.size(); ++i) roots.insert(find(static_cast<int>(i)));
    return static_cast<int>(roots.size());
}

}  // namespace

TEST_CASE("obj load: unit square") {
    std::string path = temp_path("bgrid_square.obj");
    write_file(path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n");
    TriMesh m = load_mesh(path);
    CHECK(m.vertex_count() == 4);
    CHECK(m.face_count() == 2);
    CHECK(m.edge_count() == 5);
}

TEST_CASE("stl ascii load welds duplicate vertices") {
    // The same unit square as two facets (6 raw vertices).
    std::string path = temp_path("bgrid_square.stl");
    write_file(path,
               "solid square\n"
               " facet normal 0 0 1\n  outer loop\n"
               "   vertex 0 0 0\n   vertex 1 0 0\n   vertex 1 1 0\n"
               "  endloop\n endfacet\n"
               " facet normal 0 0 1\n  outer loop\n"
               "   vertex 0 0 0\n   vertex 1 1 0\n   vertex 0 1 0\n"
               "  endloop\n endfacet\n"
               "endsolid square\n");
    TriMesh m = load_mesh(path);

    std::vector<Vec3> raw = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    Aabb box;
    for (const Vec3& p : raw) box.expand(p);
    CHECK(m.vertex_count() == welded_vertex_count(raw, 1e-6 * box.diagonal()));
    CHECK(m.vertex_count() == 4);
    CHECK(m.face_count() == 2);
}

TEST_CASE("non-manifold input names the offending edge") {
    std::string path = temp_path("bgrid_nonmanifold.obj");
    write_file(path,
               "v 0 0 0\nv 1 0 0\nv 0.5 1 0\nv 0.5 -1 0\nv 0.5 0.5 1\n"
               "f 1 2 3\nf 2 1 4\nf 1 2 5\n");
    try {
        load_mesh(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
    }
}

TEST_CASE("obj round trip preserves connectivity and coordinates") {
    TriMesh m = make_wavy_sheet(5, 5, 1.0, 1.0, 0.07);
    std::string path = temp_path("bgrid_roundtrip.obj");
    save_mesh(m, path);
    TriMesh r = load_mesh(path);
    REQUIRE(r.vertex_count() == m.vertex_count());
    REQUIRE(r.face_count() == m.face_count());
    for (int f = 0; f < m.face_slots(); ++f) CHECK(r.face(f) == m.face(f));
    for (int v = 0; v < m.vertex_slots(); ++v)
        CHECK(distance(r.position(v), m.position(v)) < 1e-8);  // 9 significant digits
}

TEST_CASE("stl binary round trip with welding") {
    TriMesh m = make_octahedron();
    std::string path = temp_path("bgrid_oct.stl");
    save_mesh(m, path, MeshFormat::StlBinary);
    TriMesh r = load_mesh(path);
    CHECK(r.vertex_count() == 6);
    CHECK(r.face_count() == 8);
    CHECK(r.edge_count() == 12);
}

TEST_CASE("stl ascii round trip") {
    TriMesh m = make_octahedron();
    std::string path = temp_path("bgrid_oct_ascii.stl");
    save_mesh(m, path, MeshFormat::StlAscii);
    TriMesh r = load_mesh(path);
    CHECK(r.vertex_count() == 6);
    CHECK(r.face_count() == 8);
}

TEST_CASE("saving an empty mesh fails") {
    TriMesh empty;
    CHECK_THROWS_AS(save_mesh(empty, temp_path("bgrid_empty.obj")), IoError);
}

TEST_CASE("missing file fails") {
    CHECK_THROWS_AS(load_mesh(temp_path("bgrid_does_not_exist.obj")), IoError);
}

TEST_CASE("malformed obj face index") {
    std::string path = temp_path("bgrid_bad.obj");
    write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    CHECK_THROWS_AS(load_mesh(path), IoError);
}
