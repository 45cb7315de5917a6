#include "bgrid/bvh.hpp"

#include <algorithm>

namespace bgrid {

FaceTree::FaceTree(const TriMesh& mesh) {
    prims_.reserve(mesh.face_count());
    for (int f = 0; f < mesh.face_slots(); ++f) {
        if (!mesh.face_alive(f)) continue;
        const auto& t = mesh.face(f);
        Prim p{f, mesh.position(t[0]), mesh.position(t[1]), mesh.position(t[2]), {}};
        p.centroid = (p.a + p.b + p.c) / 3.0;
        prims_.push_back(p);
    }
    if (!prims_.empty()) {
        nodes_.reserve(prims_.size() * 2);
        build(0, static_cast<int>(prims_.size()));
    }
}

int FaceTree::build(int begin, int end) {
    constexpr int kLeafSize = 4;
    int node_index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Aabb box, cbox;
    for (int i = begin; i < end; ++i) {
        box.expand(prims_[i].a);
        box.expand(prims_[i].b);
        box.expand(prims_[i].c);
        cbox.expand(prims_[i].centroid);
    }
    nodes_[node_index].box = box;

    if (end - begin <= kLeafSize) {
        nodes_[node_index].begin = begin;
        nodes_[node_index].end = end;
        return node_index;
    }

    Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    int mid = (begin + end) / 2;
    std::nth_element(prims_.begin() + begin, prims_.begin() + mid, prims_.begin() + end,
                     [axis](const Prim& x, const Prim& y) {
                         if (x.centroid[axis] != y.centroid[axis]) return x.centroid[axis] < y.centroid[axis];
                         return x.face < y.face;
                     });

    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

NearestHit FaceTree::nearest(const Vec3& p, const std::vector<char>* excluded) const {
    NearestHit best;
    if (prims_.empty()) return best;
    double best_d2 = std::numeric_limits<double>::max();
    std::array<double, 3> best_bary{};
    Vec3 best_point{};
    int best_face = -1;

    // Explicit stack, nearer child first. Nodes at exactly the best distance
    // are still visited so index tie-breaks match brute force.
    struct Entry { int node; double d2; };
    Entry stack[128];
    int top = 0;
    stack[top++] = {0, nodes_[0].box.dist2(p)};

    while (top > 0) {
        Entry e = stack[--top];
        if (e.d2 > best_d2) continue;
        const Node& n = nodes_[e.node];
        if (n.leaf()) {
            for (int i = n.begin; i < n.end; ++i) {
                const Prim& pr = prims_[i];
                if (excluded && pr.face < static_cast<int>(excluded->size()) && (*excluded)[pr.face]) continue;
                TrianglePoint tp = closest_point_on_triangle(p, pr.a, pr.b, pr.c);
                double d2 = norm2(p - tp.point);
                if (d2 < best_d2 || (d2 == best_d2 && pr.face < best_face)) {
                    best_d2 = d2;
                    best_face = pr.face;
                    best_point = tp.point;
                    best_bary = tp.bary;
                }
            }
        } else {
            double dl = nodes_[n.left].box.dist2(p);
            double dr = nodes_[n.right].box.dist2(p);
            // push the farther child first so the nearer is processed next
            if (dl <= dr) {
                if (dr <= best_d2) stack[top++] = {n.right, dr};
                if (dl <= best_d2) stack[top++] = {n.left, dl};
            } else {
                if (dl <= best_d2) stack[top++] = {n.left, dl};
                if (dr <= best_d2) stack[top++] = {n.right, dr};
            }
        }
    }

    best.face = best_face;
    best.point = best_point;
    best.distance = std::sqrt(best_d2);
    best.bary = best_bary;
    return best;
}

}  // namespace bgrid
