#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynframe::oracle {

namespace {

// local 3-vector helpers; this file deliberately avoids the library's
// geometry and enumeration routines
void mat_inv3(const double m[3][3], double out[3][3]) {
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    double id = 1.0 / det;
    out[0][0] = id * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    out[0][1] = id * (m[0][2] * m[2][1] - m[0][1] * m[2][2]);
    out[0][2] = id * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
    out[1][0] = id * (m[1][2] * m[2][0] - m[1][0] * m[2][2]);
    out[1][1] = id * (m[0][0] * m[2][2] - m[0][2] * m[2][0]);
    out[1][2] = id * (m[0][2] * m[1][0] - m[0][0] * m[1][2]);
    out[2][0] = id * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    out[2][1] = id * (m[0][1] * m[2][0] - m[0][0] * m[2][1]);
    out[2][2] = id * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
}

struct W3 {
    double x[3];
};

std::vector<W3> wrapped_positions(const CrystalStructure& s) {
    double L[3][3], inv[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) L[r][c] = s.lattice[r][c];
    mat_inv3(L, inv);
    std::vector<W3> out(static_cast<size_t>(s.natoms()));
    for (int i = 0; i < s.natoms(); ++i) {
        double f[3];
        for (int r = 0; r < 3; ++r)
            f[r] = inv[r][0] * s.positions[size_t(i)][0] + inv[r][1] * s.positions[size_t(i)][1] +
                   inv[r][2] * s.positions[size_t(i)][2];
        for (int r = 0; r < 3; ++r) {
            f[r] -= std::floor(f[r]);
            if (f[r] >= 1.0) f[r] = 0.0;
        }
        for (int r = 0; r < 3; ++r)
            out[size_t(i)].x[r] = L[r][0] * f[0] + L[r][1] * f[1] + L[r][2] * f[2];
    }
    return out;
}

double erf_gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475)); }

std::vector<double> basis(double x, double mu_min, double mu_max, double s, int d) {
    std::vector<double> out(static_cast<size_t>(d));
    double spacing = (mu_max - mu_min) / double(d - 1);
    double sig = s * spacing;
    for (int k = 0; k < d; ++k) {
        double mu = mu_min + k * spacing;
        out[size_t(k)] = std::exp(-(x - mu) * (x - mu) / (2.0 * sig * sig));
    }
    return out;
}

// literal eval-mode max-frame: argmax weight, then argmax adjusted weight,
// Gram-Schmidt, cross product; ties prefer the lexicographically larger
// direction
void eval_max_frame(const WeightedNeighborhood& nbhd, double rows[3][3]) {
    auto dir_greater = [](const Vec3& a, const Vec3& b) {
        for (int k = 0; k < 3; ++k) {
            if (a[k] > b[k]) return true;
            if (a[k] < b[k]) return false;
        }
        return false;
    };
    size_t best = 0;
    for (size_t e = 1; e < nbhd.size(); ++e) {
        if (nbhd[e].w > nbhd[best].w ||
            (nbhd[e].w == nbhd[best].w && dir_greater(nbhd[e].image.dir, nbhd[best].image.dir)))
            best = e;
    }
    double e1[3] = {nbhd[best].image.dir[0], nbhd[best].image.dir[1], nbhd[best].image.dir[2]};
    size_t best2 = 0;
    double a2 = -1.0;
    for (size_t e = 0; e < nbhd.size(); ++e) {
        double c = e1[0] * nbhd[e].image.dir[0] + e1[1] * nbhd[e].image.dir[1] +
                   e1[2] * nbhd[e].image.dir[2];
        double adj = (1.0 - std::abs(c)) * nbhd[e].w;
        if (adj > a2 || (adj == a2 && dir_greater(nbhd[e].image.dir, nbhd[best2].image.dir))) {
            a2 = adj;
            best2 = e;
        }
    }
    double r2[3] = {nbhd[best2].image.dir[0], nbhd[best2].image.dir[1], nbhd[best2].image.dir[2]};
    double c12 = e1[0] * r2[0] + e1[1] * r2[1] + e1[2] * r2[2];
    double g[3] = {r2[0] - c12 * e1[0], r2[1] - c12 * e1[1], r2[2] - c12 * e1[2]};
    double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    double e2[3];
    if (gn < 1e-9) {
        // all directions collinear: smallest lexicographic perpendicular
        double ax[3] = {1, 0, 0};
        if (std::abs(e1[0]) > 1.0 - 1e-9) {
            ax[0] = 0;
            ax[1] = 1;
        }
        double d = ax[0] * e1[0] + ax[1] * e1[1] + ax[2] * e1[2];
        double p[3] = {ax[0] - d * e1[0], ax[1] - d * e1[1], ax[2] - d * e1[2]};
        double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        for (int k = 0; k < 3; ++k) e2[k] = -p[k] / pn;
    } else {
        for (int k = 0; k < 3; ++k) e2[k] = g[k] / gn;
    }
    double e3[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                    e1[0] * e2[1] - e1[1] * e2[0]};
    for (int k = 0; k < 3; ++k) {
        rows[0][k] = e1[k];
        rows[1][k] = e2[k];
        rows[2][k] = e3[k];
    }
}

// signature-maximizing det=+1 sign choice, literal re-reading of the eval
// convention: sort invariant edge tuples, compare lexicographically
void eval_wpca_frame(const WeightedNeighborhood& nbhd, double rows[3][3]) {
    Mat3 sigma{};
    for (const auto& wi : nbhd)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) sigma[r][c] += wi.w * wi.image.dir[r] * wi.image.dir[c];
    JacobiEig eig = eig_jacobi(sigma);
    double det = eig.vectors[0][0] * (eig.vectors[1][1] * eig.vectors[2][2] -
                                      eig.vectors[1][2] * eig.vectors[2][1]) -
                 eig.vectors[0][1] * (eig.vectors[1][0] * eig.vectors[2][2] -
                                      eig.vectors[1][2] * eig.vectors[2][0]) +
                 eig.vectors[0][2] * (eig.vectors[1][0] * eig.vectors[2][1] -
                                      eig.vectors[1][1] * eig.vectors[2][0]);
    if (det < 0)
        for (int k = 0; k < 3; ++k) eig.vectors[2][k] = -eig.vectors[2][k];
    const int signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    std::vector<std::array<double, 5>> best_sig;
    int best = -1;
    for (int f = 0; f < 4; ++f) {
        std::vector<std::array<double, 5>> sig;
        for (const auto& wi : nbhd) {
            std::array<double, 5> t{wi.image.r, wi.w, 0, 0, 0};
            for (int k = 0; k < 3; ++k)
                t[size_t(2 + k)] = signs[f][k] * (eig.vectors[k][0] * wi.image.dir[0] +
                                                  eig.vectors[k][1] * wi.image.dir[1] +
                                                  eig.vectors[k][2] * wi.image.dir[2]);
            sig.push_back(t);
        }
        std::sort(sig.begin(), sig.end());
        if (best < 0 || sig > best_sig) {
            best = f;
            best_sig = std::move(sig);
        }
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rows[r][c] = signs[best][r] * eig.vectors[r][c];
}

}  // namespace

JacobiEig eig_jacobi(const Mat3& m) {
    double a[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a[r][c] = m[r][c];
    double scale = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(a[r][c]));
    double tol = 1e-14 * std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 200; ++sweep) {
        int p = 0, q = 1;
        double off = std::abs(a[0][1]);
        if (std::abs(a[0][2]) > off) {
            off = std::abs(a[0][2]);
            p = 0;
            q = 2;
        }
        if (std::abs(a[1][2]) > off) {
            off = std::abs(a[1][2]);
            p = 1;
            q = 2;
        }
        if (off < tol) break;
        double apq = a[p][q];
        double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double app = a[p][p], aqq = a[q][q];
        a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = a[q][p] = 0.0;
        int r = 3 - p - q;
        double arp = a[r][p], arq = a[r][q];
        a[r][p] = a[p][r] = c * arp - s * arq;
        a[r][q] = a[q][r] = s * arp + c * arq;
        for (int k = 0; k < 3; ++k) {
            double vkp = v[k][p], vkq = v[k][q];
            v[k][p] = c * vkp - s * vkq;
            v[k][q] = s * vkp + c * vkq;
        }
    }
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int x, int y) { return a[x][x] > a[y][y]; });
    JacobiEig out;
    for (int k = 0; k < 3; ++k) {
        out.values[k] = a[order[k]][order[k]];
        for (int c = 0; c < 3; ++c) out.vectors[k][c] = v[c][order[k]];
    }
    return out;
}

std::vector<BruteImage> brute_images(const CrystalStructure& s, int i, double radius, int bound) {
    auto pos = wrapped_positions(s);
    std::vector<BruteImage> out;
    for (int n1 = -bound; n1 <= bound; ++n1)
        for (int n2 = -bound; n2 <= bound; ++n2)
            for (int n3 = -bound; n3 <= bound; ++n3)
                for (int j = 0; j < s.natoms(); ++j) {
                    double d[3];
                    for (int r = 0; r < 3; ++r)
                        d[r] = pos[size_t(j)].x[r] +
                               s.lattice[r][0] * n1 + s.lattice[r][1] * n2 +
                               s.lattice[r][2] * n3 - pos[size_t(i)].x[r];
                    double rr = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
                    if (rr > radius) continue;
                    BruteImage im;
                    im.j = j;
                    im.n[0] = n1;
                    im.n[1] = n2;
                    im.n[2] = n3;
                    im.r = rr;
                    for (int r = 0; r < 3; ++r) im.dir[r] = rr > 0 ? d[r] / rr : 0.0;
                    out.push_back(im);
                }
    return out;
}

std::vector<Mat3> exhaustive_max_frames(const WeightedNeighborhood& nbhd) {
    if (nbhd.size() > 64) throw std::runtime_error("exhaustive_max_frames: neighborhood too big");
    double wmax = 0.0;
    for (const auto& wi : nbhd) wmax = std::max(wmax, wi.w);
    std::vector<size_t> first;
    for (size_t e = 0; e < nbhd.size(); ++e)
        if (std::abs(nbhd[e].w - wmax) <= 1e-12 * std::max(1.0, wmax)) first.push_back(e);
    std::vector<Mat3> out;
    for (size_t f1 : first) {
        const Vec3& e1 = nbhd[f1].image.dir;
        double amax = -1.0;
        std::vector<size_t> second;
        for (size_t e = 0; e < nbhd.size(); ++e) {
            double adj = (1.0 - std::abs(dot(e1, nbhd[e].image.dir))) * nbhd[e].w;
            if (adj > amax + 1e-12 * std::max(1.0, amax)) {
                amax = adj;
                second.clear();
                second.push_back(e);
            } else if (std::abs(adj - amax) <= 1e-12 * std::max(1.0, amax)) {
                second.push_back(e);
            }
        }
        for (size_t f2 : second) {
            Vec3 r2 = nbhd[f2].image.dir;
            Vec3 g = r2 - dot(e1, r2) * e1;
            if (norm(g) < 1e-9) continue;
            Mat3 rows;
            rows[0] = e1;
            rows[1] = normalized(g);
            rows[2] = cross(rows[0], rows[1]);
            out.push_back(rows);
        }
    }
    return out;
}

std::vector<Mat3> exhaustive_weighted_pca_frames(const WeightedNeighborhood& nbhd) {
    Mat3 sigma{};
    for (const auto& wi : nbhd)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) sigma[r][c] += wi.w * wi.image.dir[r] * wi.image.dir[c];
    JacobiEig eig = eig_jacobi(sigma);
    Mat3 base;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) base[r][c] = eig.vectors[r][c];
    if (det3(base) < 0) base[2] = -1.0 * base[2];
    const int signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    std::vector<Mat3> out;
    for (int f = 0; f < 4; ++f) {
        Mat3 rows;
        for (int r = 0; r < 3; ++r) rows[r] = double(signs[f][r]) * base[r];
        out.push_back(rows);
    }
    return out;
}

Tensor attention(const CrystalStructure& s, const ModelConfig& cfg, const ModelParams& params,
                 const Tensor& x, int layer, double radius_mult) {
    const int N = s.natoms();
    const int d = cfg.d;
    const int H = cfg.heads;
    const int dk = d / H;
    const std::string bp = "b" + std::to_string(layer) + ".";
    const Tensor& wq = params.at(bp + "wq");
    const Tensor& wk = params.at(bp + "wk");
    const Tensor& wv = params.at(bp + "wv");
    const Tensor& wo = params.at(bp + "wo");
    const Tensor& bo = params.at(bp + "bo");
    const Tensor& wsig = params.at(bp + "wsig");
    const Tensor& bsig = params.at(bp + "bsig");
    const Tensor& w0 = params.at(bp + "w0");
    const Tensor* wa[3] = {&params.at(bp + "w1"), &params.at(bp + "w2"), &params.at(bp + "w3")};
    const Tensor& f1 = params.at(bp + "f1");
    const Tensor& fb1 = params.at(bp + "fb1");
    const Tensor& f2 = params.at(bp + "f2");
    const Tensor& fb2 = params.at(bp + "fb2");

    auto matmul_rows = [](const Tensor& a, const Tensor& b) {
        Tensor out = Tensor::zeros({a.rows(), b.cols()});
        for (int64_t r = 0; r < a.rows(); ++r)
            for (int64_t k = 0; k < a.cols(); ++k)
                for (int64_t c = 0; c < b.cols(); ++c)
                    out.at(r, c) += a.at(r, k) * b.at(k, c);
        return out;
    };
    Tensor Q = matmul_rows(x, wq), K = matmul_rows(x, wk), V = matmul_rows(x, wv);
    Tensor U = matmul_rows(x, wsig);

    // shift bounds from the plane spacings, recomputed locally
    double L[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) L[r][c] = s.lattice[r][c];
    double vol = L[0][0] * (L[1][1] * L[2][2] - L[1][2] * L[2][1]) -
                 L[0][1] * (L[1][0] * L[2][2] - L[1][2] * L[2][0]) +
                 L[0][2] * (L[1][0] * L[2][1] - L[1][1] * L[2][0]);
    auto bound_for = [&](double radius) {
        int b[3];
        for (int k = 0; k < 3; ++k) {
            int ka = (k + 1) % 3, kb = (k + 2) % 3;
            double cxv[3] = {L[1][ka] * L[2][kb] - L[2][ka] * L[1][kb],
                             L[2][ka] * L[0][kb] - L[0][ka] * L[2][kb],
                             L[0][ka] * L[1][kb] - L[1][ka] * L[0][kb]};
            double area = std::sqrt(cxv[0] * cxv[0] + cxv[1] * cxv[1] + cxv[2] * cxv[2]);
            double h = std::abs(vol) / area;
            b[k] = int(std::ceil(radius / h)) + 2;
        }
        return std::array<int, 3>{b[0], b[1], b[2]};
    };

    Tensor out_heads = Tensor::zeros({N, d});
    for (int i = 0; i < N; ++i) {
        for (int h = 0; h < H; ++h) {
            double u = U.at(i, h) + bsig.at(0, h);
            double sigma = cfg.sigma_lo +
                           (cfg.sigma_hi - cfg.sigma_lo) / (1.0 + std::exp(-u));
            double radius = radius_mult * sigma;
            auto bb = bound_for(radius);
            auto images = brute_images(s, i, radius, std::max({bb[0], bb[1], bb[2]}));

            // softmax weights
            std::vector<double> wexp(images.size());
            double z = 0.0;
            for (size_t e = 0; e < images.size(); ++e) {
                double qk = 0.0;
                for (int c = 0; c < dk; ++c)
                    qk += double(Q.at(i, h * dk + c)) * double(K.at(images[e].j, h * dk + c));
                double logit = qk / std::sqrt(double(dk)) -
                               images[e].r * images[e].r / (2.0 * sigma * sigma);
                wexp[e] = std::exp(logit);
                z += wexp[e];
            }
            for (auto& w : wexp) w /= z;

            // frame from the weights (self images excluded)
            double F[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
            if (cfg.frame_method != FrameMethod::None) {
                WeightedNeighborhood nbhd;
                for (size_t e = 0; e < images.size(); ++e) {
                    if (images[e].r == 0.0) continue;
                    PeriodicImage im;
                    im.j = images[e].j;
                    im.n = {images[e].n[0], images[e].n[1], images[e].n[2]};
                    im.r = images[e].r;
                    im.dir = {images[e].dir[0], images[e].dir[1], images[e].dir[2]};
                    double w = wexp[e];
                    if (cfg.frame_method == FrameMethod::StaticLocal)
                        w = std::exp(-im.r * im.r);
                    nbhd.push_back({im, w});
                }
                if (!nbhd.empty()) {
                    if (cfg.frame_method == FrameMethod::Max ||
                        cfg.frame_method == FrameMethod::StaticLocal)
                        eval_max_frame(nbhd, F);
                    else if (cfg.frame_method == FrameMethod::WeightedPca)
                        eval_wpca_frame(nbhd, F);
                    else
                        throw std::runtime_error("oracle attention: unsupported frame method");
                }
            }

            // per-edge messages v_j + psi, accumulated naively
            for (size_t e = 0; e < images.size(); ++e) {
                auto bd = basis(images[e].r, cfg.pos.dist.mu_min, cfg.pos.dist.mu_max,
                                cfg.pos.dist.s, cfg.pos.dist.d);
                std::vector<double> psi(size_t(dk), 0.0);
                for (int kb = 0; kb < cfg.pos.dist.d; ++kb)
                    for (int c = 0; c < dk; ++c)
                        psi[size_t(c)] += cfg.pos.c_dist * bd[size_t(kb)] *
                                          double(w0.at(kb, h * dk + c));
                if (cfg.frame_method != FrameMethod::None) {
                    for (int axis = 0; axis < 3; ++axis) {
                        double th = F[axis][0] * images[e].dir[0] +
                                    F[axis][1] * images[e].dir[1] +
                                    F[axis][2] * images[e].dir[2];
                        auto ba = basis(th, cfg.pos.angl.mu_min, cfg.pos.angl.mu_max,
                                        cfg.pos.angl.s, cfg.pos.angl.d);
                        for (int kb = 0; kb < cfg.pos.angl.d; ++kb)
                            for (int c = 0; c < dk; ++c)
                                psi[size_t(c)] += cfg.pos.c_angl * ba[size_t(kb)] *
                                                  double(wa[axis]->at(kb, h * dk + c));
                    }
                }
                for (int c = 0; c < dk; ++c)
                    out_heads.at(i, h * dk + c) +=
                        real(wexp[e] * (double(V.at(images[e].j, h * dk + c)) +
                                        cfg.pos.lambda * psi[size_t(c)]));
            }
        }
    }

    // output projection, residual, feed-forward, residual
    Tensor x1 = Tensor::zeros({N, d});
    for (int i = 0; i < N; ++i)
        for (int c = 0; c < d; ++c) {
            double acc = double(bo.at(0, c));
            for (int k = 0; k < d; ++k) acc += double(out_heads.at(i, k)) * double(wo.at(k, c));
            x1.at(i, c) = x.at(i, c) + real(acc);
        }
    Tensor out = x1;
    int64_t hid = f1.cols();
    for (int i = 0; i < N; ++i) {
        std::vector<double> hvec(static_cast<size_t>(hid), 0.0);
        for (int64_t c = 0; c < hid; ++c) {
            double acc = double(fb1.at(0, c));
            for (int k = 0; k < d; ++k) acc += double(x1.at(i, k)) * double(f1.at(k, c));
            hvec[size_t(c)] = erf_gelu(acc);
        }
        for (int c = 0; c < d; ++c) {
            double acc = double(fb2.at(0, c));
            for (int64_t k = 0; k < hid; ++k) acc += hvec[size_t(k)] * double(f2.at(k, c));
            out.at(i, c) += real(acc);
        }
    }
    return out;
}

double synthetic_target_direct(const CrystalStructure& s, int bound) {
    auto pos = wrapped_positions(s);
    const int N = s.natoms();
    auto lj_radius = [](int species) { return 0.9 + 0.06 * double(species % 6); };
    auto site_radius = [&](int i) {
        if (s.occupancies.empty()) return lj_radius(s.species[size_t(i)]);
        double r = 0.0;
        for (const auto& [sp, p] : s.occupancies[size_t(i)].probs) r += p * lj_radius(sp);
        return r;
    };

    double dmin = 1e300;
    auto all_pairs = [&](int i, double radius, auto&& fn) {
        for (int n1 = -bound; n1 <= bound; ++n1)
            for (int n2 = -bound; n2 <= bound; ++n2)
                for (int n3 = -bound; n3 <= bound; ++n3)
                    for (int j = 0; j < N; ++j) {
                        double dvec[3];
                        for (int r = 0; r < 3; ++r)
                            dvec[r] = pos[size_t(j)].x[r] + s.lattice[r][0] * n1 +
                                      s.lattice[r][1] * n2 + s.lattice[r][2] * n3 -
                                      pos[size_t(i)].x[r];
                        double rr = std::sqrt(dvec[0] * dvec[0] + dvec[1] * dvec[1] +
                                              dvec[2] * dvec[2]);
                        if (rr == 0.0 || rr > radius) continue;
                        fn(j, rr, dvec);
                    }
    };
    for (int i = 0; i < N; ++i)
        all_pairs(i, 1e9, [&](int, double r, double*) { dmin = std::min(dmin, r); });
    double shell = std::min(1.35 * dmin, 3.8);

    double lj = 0.0, angle = 0.0;
    for (int i = 0; i < N; ++i) {
        double si = site_radius(i);
        std::vector<std::array<double, 3>> near;
        all_pairs(i, 6.0, [&](int j, double r, double* dvec) {
            double sij = 0.5 * (si + site_radius(j));
            double q6 = std::pow(sij / r, 6);
            lj += 4.0 * 0.08 * (q6 * q6 - q6);
            if (r <= shell) near.push_back({dvec[0] / r, dvec[1] / r, dvec[2] / r});
        });
        for (size_t a = 0; a < near.size(); ++a)
            for (size_t b = a + 1; b < near.size(); ++b) {
                double c = near[a][0] * near[b][0] + near[a][1] * near[b][1] +
                           near[a][2] * near[b][2];
                angle += c * c;
            }
    }
    return (lj + 0.2 * angle) / double(N);
}

}  // namespace dynframe::oracle
