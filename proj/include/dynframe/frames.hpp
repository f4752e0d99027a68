#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynframe/images.hpp"
#include "dynframe/rng.hpp"

namespace dynframe {

enum class FrameMethod { None, Pca, Lattice, StaticLocal, WeightedPca, Max };

FrameMethod frame_method_from_string(const std::string& s);
std::string frame_method_name(FrameMethod m);

// Three axis row vectors. PCA-family frames are orthonormal with det +1;
// lattice frames only guarantee unit rows and full rank.
struct Frame {
    Mat3 rows{};
    FrameMethod kind = FrameMethod::None;
    bool degenerate = false;
    bool fallback = false;

    Vec3 e(int k) const { return rows[k]; }
    double det() const { return det3(rows); }
};

struct WeightedImage {
    PeriodicImage image;
    double w = 0.0;
};

// non-self images with nonnegative weights
using WeightedNeighborhood = std::vector<WeightedImage>;

WeightedNeighborhood make_neighborhood(const std::vector<PeriodicImage>& images,
                                       const std::vector<double>& weights);

// Deterministic noise source for stochastic frame selection. Draws are
// keyed by (seed, context, counter), so identical seeds and call sequences
// give identical frames regardless of thread scheduling.
struct FrameRng {
    uint64_t seed = 0;
    bool train = false;
    uint64_t k1 = 0, k2 = 0, k3 = 0;  // e.g. (layer, head, atom)
    uint64_t counter = 0;

    FrameRng() = default;
    FrameRng(uint64_t s, bool train_mode) : seed(s), train(train_mode) {}

    FrameRng scoped(uint64_t a, uint64_t b, uint64_t c) const {
        FrameRng r = *this;
        r.k1 = a;
        r.k2 = b;
        r.k3 = c;
        r.counter = 0;
        return r;
    }

    double uniform() { return KeyedRng(seed).uniform(k1, k2, k3, counter++); }
    double symmetric(double amp) { return amp * (2.0 * uniform() - 1.0); }
    bool flip() { return uniform() < 0.5; }
};

struct EigResult {
    std::array<double, 3> values{};  // descending
    Mat3 vectors{};                  // rows are eigenvectors
    bool degenerate = false;         // some |l_i - l_j| < 1e-6 (|trace| + 1e-12)
};

// Symmetric 3x3 eigensolver: Householder tridiagonalization + implicit QL.
EigResult eig3_sym(const Mat3& m);

// Conventional PCA frames of the raw (centered) unit-cell point set: the
// four det=+1 sign assignments. A degenerate covariance is flagged and
// resolved by retrying with small seeded point jitter.
std::array<Frame, 4> pca_frames(const std::vector<Vec3>& points, FrameRng rng);

// Frame from the shortest lattice points, signs fixed to acute angles with
// e1 and a right-handed system.
Frame lattice_frame(const Mat3& lattice, int search_bound = 3);

// Eigenvectors of sum_w w * dir dir^T. Train mode: multiplicative weight
// noise and random det=+1 sign selection. Eval mode: deterministic sign
// selection by the rotation-invariant neighborhood signature. Degenerate
// spectra retry with fresh noise (train) and finally fall back to max_frame.
Frame weighted_pca_frame(const WeightedNeighborhood& nbhd, FrameRng rng);

// e1 = direction of the max-weight image; e2 = Gram-Schmidt of the max
// adjusted-weight (1-|e1.dir|)w direction; e3 = e1 x e2.
Frame max_frame(const WeightedNeighborhood& nbhd, FrameRng rng);

// max_frame with static weights w = exp(-r^2), no noise.
Frame static_local_frame(const std::vector<PeriodicImage>& images);

// uniform mean of per-frame outputs
std::vector<real> frame_average(const std::vector<std::vector<real>>& outputs);

// projected direction: theta_k = e_k . dir
Vec3 project_direction(const Frame& f, const Vec3& dir);

// orthonormal rows within tol and det +1 within tol
bool frame_orthonormal(const Frame& f, double tol = 1e-9);

}  // namespace dynframe
