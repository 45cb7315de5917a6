#include "bgrid/bgm_io.hpp"

#include "bgrid/mesh_io.hpp"

#include <json.hpp>

#include <fstream>

namespace bgrid {

namespace {
constexpr int kBgmVersion = 1;
}

SizingField read_bgm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != kBgmVersion)
        throw IoError(path + ": unsupported bgm version");
    try {
        double beta = j.at("beta").get<double>();
        std::vector<Vec3> vertices;
        for (const auto& v : j.at("vertices"))
            vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()});
        std::vector<std::array<int, 3>> faces;
        for (const auto& f : j.at("faces"))
            faces.push_back({f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});
        VertexSizes sizes = j.at("sizes").get<std::vector<double>>();
        TriMesh mesh = TriMesh::from_buffers(std::move(vertices), std::move(faces));
        return SizingField(std::move(mesh), std::move(sizes), beta);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    } catch (const MeshError& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_bgm(const TriMesh& mesh, const VertexSizes& sizes, double beta, const std::string& path) {
    // Validation pass, then a compact snapshot for dense indices.
    SizingField field(mesh, sizes, beta);
    write_bgm(field, path);
}

void write_bgm(const SizingField& field, const std::string& path) {
    auto problems = field.grid().audit();
    if (!problems.empty()) throw IoError("refusing to write invalid grid: " + problems.front());

    const TriMesh& m = field.grid();
    nlohmann::json j;
    j["version"] = kBgmVersion;
    j["beta"] = field.beta();
    auto vertices = nlohmann::json::array();
    for (int v = 0; v < m.vertex_slots(); ++v) {
        const Vec3& p = m.position(v);
        vertices.push_back({p.x, p.y, p.z});
    }
    auto faces = nlohmann::json::array();
    for (int f = 0; f < m.face_slots(); ++f) {
        const auto& t = m.face(f);
        faces.push_back({t[0], t[1], t[2]});
    }
    j["vertices"] = std::move(vertices);
    j["faces"] = std::move(faces);
    j["sizes"] = field.sizes();

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump() << '\n';
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace bgrid
