#pragma once

#include <string>
#include <vector>

#include "dynframe/crystal.hpp"

namespace dynframe {

// One dataset row. Serialized as JSON lines with exactly these field names;
// lattice is 9 numbers row-major.
struct DatasetRecord {
    std::string id;
    std::array<double, 9> lattice{};
    std::vector<int> species;
    std::vector<Vec3> positions;
    std::string coords_kind = "cartesian";  // or "fractional"
    double target = 0.0;
    std::vector<SpeciesDistribution> occupancies;  // empty unless site-mixed

    CrystalStructure structure() const;
};

struct SplitSpec {
    double train = 0.8, val = 0.1, test = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

std::vector<DatasetRecord> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

struct SplitIndices {
    std::vector<int> train, val, test;
};

// deterministic shuffle by seed; floor-based sizes, remainder to train
SplitIndices split(size_t count, const SplitSpec& spec);

// Perturbed rock-salt / zinc-blende style cells, 2-8 atoms, with an
// analytically known target: per-atom truncated Lennard-Jones pair sum plus
// 0.2 * sum of cos^2(angle) over near-neighbor pairs. Invariant to rigid
// motion and cell re-description by construction.
std::vector<DatasetRecord> gen_synthetic(int n, uint64_t seed);

// the target function itself (used by gen_synthetic; the tests recompute it
// with an independent enumeration)
double synthetic_target(const CrystalStructure& s);

}  // namespace dynframe
