#pragma once

#include <vector>

#include "dynframe/frames.hpp"
#include "dynframe/tensor.hpp"

namespace dynframe {

// D Gaussians uniformly spaced on [mu_min, mu_max], width proportional to
// the spacing via the scale factor s.
struct GbfConfig {
    double mu_min = 0.0;
    double mu_max = 1.0;
    double s = 1.0;
    int d = 2;

    void validate() const;
    double mu(int k) const { return mu_min + k * (mu_max - mu_min) / (d - 1); }  // k is 0-based
    double sigma() const { return s * (mu_max - mu_min) / (d - 1); }
};

struct PosEncodingConfig {
    double lambda = 1.0;
    double c_dist = 1.0;
    double c_angl = 1.0;
    GbfConfig dist;
    GbfConfig angl;

    void validate() const;
};

// b_k(x) = exp(-(x - mu_k)^2 / 2 sigma_k^2)
std::vector<double> gbf(double x, const GbfConfig& cfg);

// theta_k = e_k . dir; the zero vector (self edge) maps to (0,0,0)
Vec3 project_angles(const Frame& frame, const Vec3& dir);

// psi = lambda (c_dist W0 b_dist(r) + c_angl sum_k Wk b_angl(theta_k)).
// W0 is [D_dist, d], W1..W3 are [D_angl, d].
std::vector<real> position_encoding(double r, const Vec3& theta, const PosEncodingConfig& cfg,
                                    const Tensor& w0, const Tensor& w1, const Tensor& w2,
                                    const Tensor& w3);

// distance term as in the baseline; angular term with cosine range [-1, 1]
PosEncodingConfig default_pos_config();
// angular basis shrunk to D'=16 via s' = s D'/D, c' = c D/D', lambda = 1.5
PosEncodingConfig lightweight_pos_config();

// the basis-count reduction rule applied to one GBF term
void reduce_basis(double& c, GbfConfig& g, int d_new);

}  // namespace dynframe
