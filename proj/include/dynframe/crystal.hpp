#pragma once

#include <map>
#include <string>
#include <vector>

#include "dynframe/geometry.hpp"

namespace dynframe {

constexpr int kMaxSpecies = 98;  // embedding table rows; higher atomic numbers rejected

// occupancy distribution over atomic numbers for one site
struct SpeciesDistribution {
    std::map<int, double> probs;

    void validate() const;  // nonnegative, sums to 1 within 1e-9, species in range
    static SpeciesDistribution pure(int species);
};

// Unit-cell description of a periodic structure. Lattice vectors are the
// COLUMNS of `lattice`, so a cell translation is lattice * n.
struct CrystalStructure {
    std::string id;
    std::vector<int> species;      // atomic numbers, 1..98
    std::vector<Vec3> positions;   // Cartesian, angstrom
    Mat3 lattice;                  // columns l1, l2, l3
    std::vector<SpeciesDistribution> occupancies;  // empty, or one per site

    int natoms() const { return static_cast<int>(species.size()); }
    Vec3 lattice_column(int k) const { return {lattice[0][k], lattice[1][k], lattice[2][k]}; }

    void validate() const;
    Vec3 fractional(const Vec3& cart) const;
    Vec3 cartesian(const Vec3& frac) const;
};

// Wraps every atom so its fractional coordinates lie in [0,1). The tiled
// point set is unchanged.
CrystalStructure wrap_to_cell(const CrystalStructure& s);

// Integer multiples of the cell; the tiled point set is unchanged.
CrystalStructure make_supercell(const CrystalStructure& s, int m1, int m2, int m3);

// positions -> R p + t, lattice -> R L. Rotation must be orthonormal, det +1.
CrystalStructure rigid_transform(const CrystalStructure& s, const Mat3& rotation,
                                 const Vec3& translation);

}  // namespace dynframe
