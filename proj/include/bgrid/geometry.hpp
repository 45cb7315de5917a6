#pragma once

#include "bgrid/vec3.hpp"

#include <array>
#include <vector>

namespace bgrid {

// Closest point on triangle (a,b,c) to p, with barycentric coordinates of the
// result. bary sums to 1 and each component is >= 0 by construction.
struct TrianglePoint {
    Vec3 point;
    std::array<double, 3> bary;
};

// Kept out-of-line so every caller (index, oracles, metrics) shares the exact
// same floating-point path.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);  // unnormalized (2*area length)

// Interior angle at vertex a of triangle (a,b,c).
double triangle_angle_at(const Vec3& a, const Vec3& b, const Vec3& c);

// Distance from point p to segment [a,b].
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

// Deterministic barycentric lattice of level L: all (i/L, j/L, k/L) with
// i+j+k = L, ordered lexicographically. (L+1)(L+2)/2 points; includes the
// corners.
std::vector<std::array<double, 3>> barycentric_lattice(int level);

// Same lattice squeezed toward the centroid so every coordinate is >= margin.
std::vector<std::array<double, 3>> interior_barycentric_lattice(int level, double margin);

// Smallest lattice level whose point count reaches the requested sample count.
int lattice_level_for(int samples_per_face);

}  // namespace bgrid
