#pragma once

#include <array>
#include <vector>

#include "dynframe/crystal.hpp"

namespace dynframe {

// One periodic neighbor record: atom j translated by lattice * n, seen from
// a fixed center atom. dir is undefined for the self image (r = 0) and is
// stored as the zero vector there.
struct PeriodicImage {
    int j = 0;
    std::array<int, 3> n{0, 0, 0};
    double r = 0.0;
    Vec3 dir{0.0, 0.0, 0.0};

    bool is_self() const { return r == 0.0; }
};

struct ShiftRange {
    std::array<int, 3> bounds{0, 0, 0};
};

struct LatticePoint {
    std::array<int, 3> n{0, 0, 0};
    Vec3 v{0.0, 0.0, 0.0};
    double norm = 0.0;
};

// Per-axis shift bounds b_k = ceil(radius/h_k) + 1 where h_k is the
// inter-plane spacing det(L)/|l_a x l_b|. The extra cell covers intra-cell
// atom offsets, so every image within the radius lands inside the box for
// any pair of in-cell atoms.
ShiftRange shift_range_for_radius(const Mat3& lattice, double radius);

// All images (j, n) of atoms in `s` with r <= radius from atom i, including
// the self image. Sorted ascending by r, ties broken by direction vector
// (lexicographic), then by (j, n). Positions are wrapped internally so the
// result depends only on the tiled point set.
std::vector<PeriodicImage> enumerate_images(const CrystalStructure& s, int i, double radius);

// Nonzero lattice points with |n_k| <= search_bound, sorted ascending by
// norm with the same deterministic tie-break as enumerate_images.
std::vector<LatticePoint> sorted_lattice_points(const Mat3& lattice, int search_bound);

}  // namespace dynframe
