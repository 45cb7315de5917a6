#pragma once

#include "bgrid/geometry.hpp"
#include "bgrid/mesh.hpp"

#include <array>
#include <vector>

namespace bgrid {

struct NearestHit {
    int face = -1;
    Vec3 point{};                      // closest point on the mesh
    double distance = 0.0;
    std::array<double, 3> bary{};      // w.r.t. the face's vertex order
};

// Static AABB tree over the alive faces of a mesh. Nearest queries return
// exactly the brute-force result (ties broken by lowest face index).
class FaceTree {
public:
    FaceTree() = default;
    explicit FaceTree(const TriMesh& mesh);

    bool empty() const { return prims_.empty(); }

    // excluded, when given, is indexed by face id; true entries are skipped.
    NearestHit nearest(const Vec3& p, const std::vector<char>* excluded = nullptr) const;

private:
    struct Prim {
        int face;
        Vec3 a, b, c;
        Vec3 centroid;
    };
    struct Node {
        Aabb box;
        int left = -1, right = -1;   // internal
        int begin = 0, end = 0;      // leaf range in prims_
        bool leaf() const { return left < 0; }
    };

    std::vector<Prim> prims_;
    std::vector<Node> nodes_;

    int build(int begin, int end);
};

}  // namespace bgrid
