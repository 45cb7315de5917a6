#include "bgrid/hausdorff.hpp"

#include "bgrid/bvh.hpp"
#include "bgrid/geometry.hpp"

#include <algorithm>

namespace bgrid {

namespace {

double one_sided(const TriMesh& from, const FaceTree& to_tree, int level) {
    const auto lattice = barycentric_lattice(level);
    double worst = 0.0;
    for (int f = 0; f < from.face_slots(); ++f) {
        if (!from.face_alive(f)) continue;
        const auto& t = from.face(f);
        const Vec3 &a = from.position(t[0]), &b = from.position(t[1]), &c = from.position(t[2]);
        for (const auto& l : lattice) {
            Vec3 p = a * l[0] + b * l[1] + c * l[2];
            worst = std::max(worst, to_tree.nearest(p).distance);
        }
    }
    return worst;
}

}  // namespace

double hausdorff_distance(const TriMesh& a, const TriMesh& b, int samples_per_face) {
    if (a.face_count() == 0 || b.face_count() == 0) throw MeshError("hausdorff_distance requires non-empty meshes");
    const int level = lattice_level_for(samples_per_face);
    FaceTree tree_a(a), tree_b(b);
    return std::max(one_sided(a, tree_b, level), one_sided(b, tree_a, level));
}

}  // namespace bgrid
