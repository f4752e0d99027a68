#include "dynframe/edge_features.hpp"

#include <cmath>

namespace dynframe {

void GbfConfig::validate() const {
    if (!(mu_max > mu_min)) throw DataError("gbf: mu_max must exceed mu_min");
    if (d < 2) throw DataError("gbf: basis count must be >= 2");
    if (!(s > 0.0)) throw DataError("gbf: width scale must be positive");
}

void PosEncodingConfig::validate() const {
    dist.validate();
    angl.validate();
}

std::vector<double> gbf(double x, const GbfConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(x)) throw NumericError("gbf: non-finite input");
    std::vector<double> out(static_cast<size_t>(cfg.d));
    double sig = cfg.sigma();
    double inv2s2 = 1.0 / (2.0 * sig * sig);
    for (int k = 0; k < cfg.d; ++k) {
        double dx = x - cfg.mu(k);
        out[static_cast<size_t>(k)] = std::exp(-dx * dx * inv2s2);
    }
    return out;
}

Vec3 project_angles(const Frame& frame, const Vec3& dir) {
    return project_direction(frame, dir);
}

std::vector<real> position_encoding(double r, const Vec3& theta, const PosEncodingConfig& cfg,
                                    const Tensor& w0, const Tensor& w1, const Tensor& w2,
                                    const Tensor& w3) {
    cfg.validate();
    if (r < 0.0) throw NumericError("position_encoding: negative distance");
    int64_t d = w0.cols();
    std::vector<real> psi(static_cast<size_t>(d), real(0));
    auto bd = gbf(r, cfg.dist);
    for (int64_t k = 0; k < w0.rows(); ++k)
        for (int64_t c = 0; c < d; ++c)
            psi[static_cast<size_t>(c)] +=
                static_cast<real>(cfg.c_dist * bd[static_cast<size_t>(k)]) * w0.at(k, c);
    const Tensor* ws[3] = {&w1, &w2, &w3};
    for (int a = 0; a < 3; ++a) {
        auto ba = gbf(theta[a], cfg.angl);
        for (int64_t k = 0; k < ws[a]->rows(); ++k)
            for (int64_t c = 0; c < d; ++c)
                psi[static_cast<size_t>(c)] +=
                    static_cast<real>(cfg.c_angl * ba[static_cast<size_t>(k)]) * ws[a]->at(k, c);
    }
    for (auto& x : psi) x *= static_cast<real>(cfg.lambda);
    return psi;
}

PosEncodingConfig default_pos_config() {
    PosEncodingConfig cfg;
    cfg.lambda = 1.0;
    cfg.c_dist = 1.0;
    cfg.dist = {14.0 / 64.0, 14.0, 1.0, 64};
    cfg.c_angl = 1.0;
    cfg.angl = {-1.0, 1.0, 4.0, 64};
    return cfg;
}

PosEncodingConfig lightweight_pos_config() {
    PosEncodingConfig cfg = default_pos_config();
    reduce_basis(cfg.c_angl, cfg.angl, 16);
    cfg.lambda = 1.5;
    return cfg;
}

void reduce_basis(double& c, GbfConfig& g, int d_new) {
    g.s = g.s * double(d_new) / double(g.d);
    c = c * double(g.d) / double(d_new);
    g.d = d_new;
}

}  // namespace dynframe
