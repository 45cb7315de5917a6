#pragma once

#include "bgrid/mesh.hpp"

#include <string>

namespace bgrid {

enum class MeshFormat { Auto, Obj, StlAscii, StlBinary };

// Loads OBJ (v/f records) or STL. STL vertices are welded with tolerance
// 1e-6 * bounding-box diagonal before adjacency is built. Auto picks by
// extension and, for .stl, by sniffing the file head.
TriMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);

// Writes the mesh (compacted view). Floats are printed with 9 significant
// digits in text formats.
void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format = MeshFormat::Auto);

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bgrid
