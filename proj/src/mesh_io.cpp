#include "bgrid/mesh_io.hpp"

#include "bgrid/geometry.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace bgrid {

namespace {

std::string lower_ext(const std::string& path) {
    auto pos = path.find_last_of('.');
    if (pos == std::string::npos) return "";
    std::string ext = path.substr(pos + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

MeshFormat detect_format(const std::string& path, bool for_write) {
    std::string ext = lower_ext(path);
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "stl") {
        if (for_write) return MeshFormat::StlBinary;
        // Sniff: ASCII STL starts with "solid" and contains "facet" early on.
        std::ifstream in(path, std::ios::binary);
        char head[512] = {};
        in.read(head, sizeof(head) - 1);
        std::string s(head, static_cast<size_t>(in.gcount()));
        if (s.rfind("solid", 0) == 0 && s.find("facet") != std::string::npos) return MeshFormat::StlAscii;
        return MeshFormat::StlBinary;
    }
    throw IoError("cannot detect mesh format from extension: " + path);
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x >> p.y >> p.z)) throw IoError(path + ":" + std::to_string(lineno) + ": bad vertex");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // accept v, v/vt, v//vn, v/vt/vn; only the vertex index is used
                size_t slash = tok.find('/');
                std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int v = 0;
                try {
                    v = std::stoi(head);
                } catch (...) {
                    throw IoError(path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
                }
                if (v <= 0 || v > static_cast<int>(verts.size()))
                    throw IoError(path + ":" + std::to_string(lineno) + ": face index out of range");
                idx.push_back(v - 1);
            }
            if (idx.size() != 3)
                throw IoError(path + ":" + std::to_string(lineno) + ": only triangular faces are supported");
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }
    try {
        return TriMesh::from_buffers(std::move(verts), std::move(faces));
    } catch (const MeshError& e) {
        throw IoError(path + ": " + e.what());
    }
}

// Welds raw triangle soup into an indexed mesh. Tolerance is relative to the
// bounding-box diagonal; matching uses a uniform hash grid so results equal
// the brute-force "first earlier vertex within tol" rule.
TriMesh weld_triangles(const std::vector<Vec3>& tri_verts, const std::string& path) {
    if (tri_verts.empty() || tri_verts.size() % 3 != 0) throw IoError(path + ": no triangles");
    Aabb box;
    for (const Vec3& p : tri_verts) box.expand(p);
    const double tol = 1e-6 * box.diagonal();
    const double cell = tol > 0.0 ? tol : 1.0;

    auto cell_key = [&](int ix, int iy, int iz) {
        return (static_cast<int64_t>(ix) * 73856093) ^ (static_cast<int64_t>(iy) * 19349663) ^
               (static_cast<int64_t>(iz) * 83492791);
    };
    std::unordered_map<int64_t, std::vector<int>> grid;
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;

    auto weld_index = [&](const Vec3& p) {
        int ix = static_cast<int>(std::floor(p.x / cell));
        int iy = static_cast<int>(std::floor(p.y / cell));
        int iz = static_cast<int>(std::floor(p.z / cell));
        int best = -1;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find(cell_key(ix + dx, iy + dy, iz + dz));
                    if (it == grid.end()) continue;
                    for (int v : it->second)
                        if (distance(verts[v], p) < tol && (best < 0 || v < best)) best = v;
                }
        if (best >= 0) return best;
        int v = static_cast<int>(verts.size());
        verts.push_back(p);
        grid[cell_key(ix, iy, iz)].push_back(v);
        return v;
    };

    for (size_t t = 0; t + 2 < tri_verts.size(); t += 3) {
        int i0 = weld_index(tri_verts[t]);
        int i1 = weld_index(tri_verts[t + 1]);
        int i2 = weld_index(tri_verts[t + 2]);
        faces.push_back({i0, i1, i2});
    }
    try {
        return TriMesh::from_buffers(std::move(verts), std::move(faces));
    } catch (const MeshError& e) {
        throw IoError(path + ": " + e.what());
    }
}

TriMesh load_stl_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Vec3> tri_verts;
    std::string tok;
    while (in >> tok) {
        if (tok == "vertex") {
            Vec3 p;
            if (!(in >> p.x >> p.y >> p.z)) throw IoError(path + ": bad vertex record");
            tri_verts.push_back(p);
        }
    }
    return weld_triangles(tri_verts, path);
}

TriMesh load_stl_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char header[80];
    in.read(header, 80);
    uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw IoError(path + ": truncated STL header");
    std::vector<Vec3> tri_verts;
    tri_verts.reserve(static_cast<size_t>(count) * 3);
    for (uint32_t t = 0; t < count; ++t) {
        float rec[12];
        uint16_t attr;
        in.read(reinterpret_cast<char*>(rec), 48);
        in.read(reinterpret_cast<char*>(&attr), 2);
        if (!in) throw IoError(path + ": truncated STL triangle " + std::to_string(t));
        for (int k = 0; k < 3; ++k)
            tri_verts.push_back({rec[3 + 3 * k], rec[4 + 3 * k], rec[5 + 3 * k]});
    }
    return weld_triangles(tri_verts, path);
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    TriMesh m = mesh;
    m.compact();
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw IoError("cannot write " + path);
    for (int v = 0; v < m.vertex_slots(); ++v) {
        const Vec3& p = m.position(v);
        std::fprintf(out, "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
    }
    for (int f = 0; f < m.face_slots(); ++f) {
        const auto& t = m.face(f);
        std::fprintf(out, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    std::fclose(out);
}

void save_stl_ascii(const TriMesh& mesh, const std::string& path) {
    TriMesh m = mesh;
    m.compact();
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw IoError("cannot write " + path);
    std::fprintf(out, "solid bgrid\n");
    for (int f = 0; f < m.face_slots(); ++f) {
        const auto& t = m.face(f);
        Vec3 n = m.face_normal(f);
        std::fprintf(out, "  facet normal %.9g %.9g %.9g\n    outer loop\n", n.x, n.y, n.z);
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = m.position(t[k]);
            std::fprintf(out, "      vertex %.9g %.9g %.9g\n", p.x, p.y, p.z);
        }
        std::fprintf(out, "    endloop\n  endfacet\n");
    }
    std::fprintf(out, "endsolid bgrid\n");
    std::fclose(out);
}

void save_stl_binary(const TriMesh& mesh, const std::string& path) {
    TriMesh m = mesh;
    m.compact();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    char header[80] = {};
    std::snprintf(header, sizeof(header), "bgrid binary stl");
    out.write(header, 80);
    uint32_t count = static_cast<uint32_t>(m.face_count());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (int f = 0; f < m.face_slots(); ++f) {
        const auto& t = m.face(f);
        Vec3 n = m.face_normal(f);
        float rec[12] = {static_cast<float>(n.x), static_cast<float>(n.y), static_cast<float>(n.z)};
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = m.position(t[k]);
            rec[3 + 3 * k] = static_cast<float>(p.x);
            rec[4 + 3 * k] = static_cast<float>(p.y);
            rec[5 + 3 * k] = static_cast<float>(p.z);
        }
        uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(rec), 48);
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace

TriMesh load_mesh(const std::string& path, MeshFormat format) {
    if (format == MeshFormat::Auto) format = detect_format(path, false);
    switch (format) {
        case MeshFormat::Obj: return load_obj(path);
        case MeshFormat::StlAscii: return load_stl_ascii(path);
        case MeshFormat::StlBinary: return load_stl_binary(path);
        case MeshFormat::Auto: break;
    }
    throw IoError("unsupported format");
}

void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format) {
    if (mesh.face_count() == 0 || mesh.vertex_count() == 0) throw IoError("refusing to save empty mesh");
    if (format == MeshFormat::Auto) format = detect_format(path, true);
    switch (format) {
        case MeshFormat::Obj: save_obj(mesh, path); return;
        case MeshFormat::StlAscii: save_stl_ascii(mesh, path); return;
        case MeshFormat::StlBinary: save_stl_binary(mesh, path); return;
        case MeshFormat::Auto: break;
    }
    throw IoError("unsupported format");
}

}  // namespace bgrid
