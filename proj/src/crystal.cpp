#include "dynframe/crystal.hpp"

#include <cmath>

namespace dynframe {

void SpeciesDistribution::validate() const {
    if (probs.empty()) throw DataError("species distribution: empty");
    double sum = 0.0;
    for (const auto& [sp, p] : probs) {
        if (sp < 1 || sp > kMaxSpecies)
            throw DataError("species distribution: atomic number " + std::to_string(sp) +
                            " out of range 1.." + std::to_string(kMaxSpecies));
        if (p < 0.0) throw DataError("species distribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("species distribution: probabilities sum to " + std::to_string(sum));
}

SpeciesDistribution SpeciesDistribution::pure(int species) {
    SpeciesDistribution d;
    d.probs[species] = 1.0;
    return d;
}

void CrystalStructure::validate() const {
    if (species.empty()) throw DataError("structure " + id + ": no atoms");
    if (species.size() != positions.size())
        throw DataError("structure " + id + ": species/positions length mismatch");
    for (int sp : species)
        if (sp < 1 || sp > kMaxSpecies)
            throw DataError("structure " + id + ": atomic number " + std::to_string(sp) +
                            " out of range 1.." + std::to_string(kMaxSpecies));
    if (det3(lattice) <= 1e-6)
        throw NumericError("structure " + id + ": lattice determinant " +
                           std::to_string(det3(lattice)) + " below 1e-6 A^3");
    if (!occupancies.empty()) {
        if (occupancies.size() != species.size())
            throw DataError("structure " + id + ": occupancies length mismatch");
        for (const auto& o : occupancies) o.validate();
    }
}

Vec3 CrystalStructure::fractional(const Vec3& cart) const {
    return matvec(inverse3(lattice), cart);
}

Vec3 CrystalStructure::cartesian(const Vec3& frac) const { return matvec(lattice, frac); }

CrystalStructure wrap_to_cell(const CrystalStructure& s) {
    s.validate();
    CrystalStructure out = s;
    Mat3 inv = inverse3(s.lattice);
    for (auto& p : out.positions) {
        Vec3 f = matvec(inv, p);
        for (int k = 0; k < 3; ++k) {
            f[k] -= std::floor(f[k]);
            if (f[k] >= 1.0) f[k] = 0.0;  // guard against floor(1-eps) rounding
        }
        p = matvec(s.lattice, f);
    }
    return out;
}

CrystalStructure make_supercell(const CrystalStructure& s, int m1, int m2, int m3) {
    s.validate();
    if (m1 < 1 || m2 < 1 || m3 < 1)
        throw DataError("make_supercell: factors must be positive integers");
    CrystalStructure out;
    out.id = s.id;
    int m[3] = {m1, m2, m3};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.lattice[r][c] = s.lattice[r][c] * m[c];
    for (int n1 = 0; n1 < m1; ++n1)
        for (int n2 = 0; n2 < m2; ++n2)
            for (int n3 = 0; n3 < m3; ++n3) {
                Vec3 shift = matvec(s.lattice, Vec3{double(n1), double(n2), double(n3)});
                for (int i = 0; i < s.natoms(); ++i) {
                    out.species.push_back(s.species[i]);
                    out.positions.push_back(s.positions[i] + shift);
                    if (!s.occupancies.empty()) out.occupancies.push_back(s.occupancies[i]);
                }
            }
    return out;
}

CrystalStructure rigid_transform(const CrystalStructure& s, const Mat3& rotation,
                                 const Vec3& translation) {
    s.validate();
    Mat3 rtr = matmul3(transposed(rotation), rotation);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double want = (r == c) ? 1.0 : 0.0;
            if (std::abs(rtr[r][c] - want) > 1e-10)
                throw NumericError("rigid_transform: rotation not orthonormal");
        }
    if (det3(rotation) < 0.0) throw NumericError("rigid_transform: rotation has det < 0");
    CrystalStructure out = s;
    for (auto& p : out.positions) p = matvec(rotation, p) + translation;
    out.lattice = matmul3(rotation, s.lattice);
    return out;
}

}  // namespace dynframe
