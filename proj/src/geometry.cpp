#include "bgrid/geometry.hpp"

namespace bgrid {

// Ericson, "Real-Time Collision Detection", 5.1.5.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap);
    double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a, {1.0, 0.0, 0.0}};

    Vec3 bp = p - b;
    double d3 = dot(ab, bp);
    double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return {b, {0.0, 1.0, 0.0}};

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double denom = d1 - d3;
        double v = denom != 0.0 ? d1 / denom : 0.0;
        return {a + ab * v, {1.0 - v, v, 0.0}};
    }

    Vec3 cp = p - c;
    double d5 = dot(ab, cp);
    double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return {c, {0.0, 0.0, 1.0}};

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double denom = d2 - d6;
        double w = denom != 0.0 ? d2 / denom : 0.0;
        return {a + ac * w, {1.0 - w, 0.0, w}};
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double denom = (d4 - d3) + (d5 - d6);
        double w = denom != 0.0 ? (d4 - d3) / denom : 0.0;
        return {b + (c - b) * w, {0.0, 1.0 - w, w}};
    }

    double denom = va + vb + vc;
    if (denom == 0.0) return {a, {1.0, 0.0, 0.0}};  // degenerate triangle
    double v = vb / denom;
    double w = vc / denom;
    return {a + ab * v + ac * w, {1.0 - v - w, v, w}};
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
    return cross(b - a, c - a);
}

double triangle_angle_at(const Vec3& a, const Vec3& b, const Vec3& c) {
    return angle_between(b - a, c - a);
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double ab2 = norm2(ab);
    if (ab2 == 0.0) return distance(p, a);
    double t = std::clamp(dot(p - a, ab) / ab2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

std::vector<std::array<double, 3>> barycentric_lattice(int level) {
    std::vector<std::array<double, 3>> pts;
    if (level < 1) level = 1;
    pts.reserve(static_cast<size_t>(level + 1) * (level + 2) / 2);
    for (int i = 0; i <= level; ++i)
        for (int j = 0; j <= level - i; ++j) {
            int k = level - i - j;
            pts.push_back({double(i) / level, double(j) / level, double(k) / level});
        }
    return pts;
}

std::vector<std::array<double, 3>> interior_barycentric_lattice(int level, double margin) {
    auto pts = barycentric_lattice(level);
    double squeeze = 1.0 - 3.0 * margin;
    for (auto& p : pts)
        for (double& l : p) l = margin + squeeze * l;
    return pts;
}

int lattice_level_for(int samples_per_face) {
    int level = 1;
    while ((level + 1) * (level + 2) / 2 < samples_per_face) ++level;
    return level;
}

}  // namespace bgrid
