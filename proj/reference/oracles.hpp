#pragma once

// Brute-force reference implementations used by the test suites and the
// benchmark. Everything here is written as plain serial loops, independent
// of the library's compute paths: its own box enumeration, its own Jacobi
// eigensolver, its own literal reading of the frame procedures, and a naive
// triple-loop attention sum.

#include <vector>

#include "dynframe/data.hpp"
#include "dynframe/model.hpp"

namespace dynframe::oracle {

struct OracleConfig {
    int fixed_bound = 6;     // generous enumeration box for set-equality checks
    double wide_mult = 2.0;  // widened attention radius multiplier
};

// classical Jacobi rotations with largest off-diagonal pivot; eigenvalues
// descending, eigenvectors as rows
struct JacobiEig {
    double values[3];
    double vectors[3][3];
};
JacobiEig eig_jacobi(const Mat3& m);

struct BruteImage {
    int j;
    int n[3];
    double r;
    double dir[3];
};

// every image of every atom within the +-bound box, keeping r <= radius
std::vector<BruteImage> brute_images(const CrystalStructure& s, int i, double radius, int bound);

// all admissible frames under tie/sign resolutions, by literal reading of
// the procedures (small neighborhoods only)
std::vector<Mat3> exhaustive_max_frames(const WeightedNeighborhood& nbhd);
std::vector<Mat3> exhaustive_weighted_pca_frames(const WeightedNeighborhood& nbhd);

// naive re-derivation of one attention block: triple loop over (i, j, n)
// with per-edge position encodings, no aggregation tricks; eval mode
Tensor attention(const CrystalStructure& s, const ModelConfig& cfg, const ModelParams& params,
                 const Tensor& x, int layer, double radius_mult);

// the synthetic regression target recomputed with a direct fixed-box loop
double synthetic_target_direct(const CrystalStructure& s, int bound);

}  // namespace dynframe::oracle
