#include "dynframe/frames.hpp"

#include <algorithm>
#include <cmath>

namespace dynframe {

namespace {

constexpr double kNoiseAmp = 1e-3;  // multiplicative weight perturbation amplitude
constexpr int kDegenerateRetries = 8;

// equal-norm ties order the lexicographically larger direction first
bool dir_tie_before(const Vec3& a, const Vec3& b) { return lex_compare(a, b) > 0; }

// lexicographically smallest unit vector orthogonal to e1
Vec3 lex_smallest_perp(const Vec3& e1) {
    Vec3 axis{1.0, 0.0, 0.0};
    if (std::abs(e1[0]) > 1.0 - 1e-9) axis = {0.0, 1.0, 0.0};
    Vec3 p = axis - dot(axis, e1) * e1;
    return -1.0 * normalized(p);
}

Mat3 rows_with_det_plus(const EigResult& eig) {
    Mat3 rows = eig.vectors;
    if (det3(rows) < 0.0) rows[2] = -1.0 * rows[2];
    return rows;
}

// The four det=+1 sign assignments of a right-handed eigenbasis.
std::array<Mat3, 4> sign_family(const Mat3& base) {
    std::array<Mat3, 4> out;
    const int signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (int f = 0; f < 4; ++f) {
        for (int r = 0; r < 3; ++r) out[f][r] = double(signs[f][r]) * base[r];
    }
    return out;
}

// Rotation-invariant signature of the neighborhood as seen through a frame:
// the sorted list of (r, w, theta). Used to pick a deterministic member of
// the det=+1 sign family in eval mode; candidates with equal signatures
// yield identical aggregated edge features downstream.
std::vector<std::array<double, 5>> frame_signature(const Mat3& rows,
                                                   const WeightedNeighborhood& nbhd) {
    std::vector<std::array<double, 5>> sig;
    sig.reserve(nbhd.size());
    for (const auto& wi : nbhd) {
        Vec3 th = {dot(rows[0], wi.image.dir), dot(rows[1], wi.image.dir),
                   dot(rows[2], wi.image.dir)};
        sig.push_back({wi.image.r, wi.w, th[0], th[1], th[2]});
    }
    std::sort(sig.begin(), sig.end());
    return sig;
}

Mat3 select_eval_signs(const Mat3& base, const WeightedNeighborhood& nbhd) {
    auto family = sign_family(base);
    int best = 0;
    auto best_sig = frame_signature(family[0], nbhd);
    for (int f = 1; f < 4; ++f) {
        auto sig = frame_signature(family[f], nbhd);
        if (sig > best_sig) {
            best = f;
            best_sig = std::move(sig);
        }
    }
    return family[best];
}

std::vector<double> noisy_weights(const WeightedNeighborhood& nbhd, FrameRng& rng) {
    std::vector<double> w(nbhd.size());
    for (size_t e = 0; e < nbhd.size(); ++e) {
        w[e] = nbhd[e].w;
        if (rng.train) w[e] *= 1.0 + rng.symmetric(kNoiseAmp);
    }
    return w;
}

Mat3 weighted_covariance(const WeightedNeighborhood& nbhd, const std::vector<double>& w) {
    Mat3 sigma{};
    for (size_t e = 0; e < nbhd.size(); ++e) {
        const Vec3& d = nbhd[e].image.dir;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) sigma[r][c] += w[e] * d[r] * d[c];
    }
    return sigma;
}

}  // namespace

FrameMethod frame_method_from_string(const std::string& s) {
    if (s == "none") return FrameMethod::None;
    if (s == "pca") return FrameMethod::Pca;
    if (s == "lattice") return FrameMethod::Lattice;
    if (s == "static_local") return FrameMethod::StaticLocal;
    if (s == "weighted_pca") return FrameMethod::WeightedPca;
    if (s == "max") return FrameMethod::Max;
    throw DataError("unknown frame method: " + s);
}

std::string frame_method_name(FrameMethod m) {
    switch (m) {
        case FrameMethod::None: return "none";
        case FrameMethod::Pca: return "pca";
        case FrameMethod::Lattice: return "lattice";
        case FrameMethod::StaticLocal: return "static_local";
        case FrameMethod::WeightedPca: return "weighted_pca";
        case FrameMethod::Max: return "max";
    }
    return "?";
}

WeightedNeighborhood make_neighborhood(const std::vector<PeriodicImage>& images,
                                       const std::vector<double>& weights) {
    if (images.size() != weights.size())
        throw NumericError("make_neighborhood: weight count mismatch");
    WeightedNeighborhood out;
    out.reserve(images.size());
    for (size_t e = 0; e < images.size(); ++e) {
        if (images[e].is_self()) continue;  // direction undefined at r = 0
        if (!std::isfinite(weights[e]) || weights[e] < 0.0)
            throw NumericError("make_neighborhood: invalid weight");
        out.push_back({images[e], weights[e]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// 3x3 symmetric eigensolver
// ---------------------------------------------------------------------------

EigResult eig3_sym(const Mat3& m) {
    double maxabs = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) maxabs = std::max(maxabs, std::abs(m[r][c]));
    double symtol = 1e-9 * std::max(1.0, maxabs);
    for (int r = 0; r < 3; ++r)
        for (int c = r + 1; c < 3; ++c)
            if (std::abs(m[r][c] - m[c][r]) > symtol)
                throw NumericError("eig3_sym: input not symmetric");

    // Householder reduction to tridiagonal form; q accumulates the transform
    // (columns of q will become eigenvectors of m).
    double a[3][3] = {{m[0][0], m[0][1], m[0][2]},
                      {m[1][0], m[1][1], m[1][2]},
                      {m[2][0], m[2][1], m[2][2]}};
    double q[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    double d[3], e[3];

    double h = a[0][1] * a[0][1] + a[0][2] * a[0][2];
    double g = (a[0][1] > 0) ? -std::sqrt(h) : std::sqrt(h);
    e[0] = g;
    double f = g * a[0][1];
    double u1 = a[0][1] - g;
    double u2 = a[0][2];
    double omega = h - f;
    if (omega > 0.0) {
        omega = 1.0 / omega;
        double K = 0.0;
        double qv[2];
        for (int i = 0; i < 2; ++i) {
            f = a[1][i + 1] * u1 + a[i + 1][2] * u2;
            qv[i] = omega * f;
            K += (i == 0 ? u1 : u2) * f;
        }
        K *= 0.5 * omega * omega;
        qv[0] -= K * u1;
        qv[1] -= K * u2;
        d[0] = a[0][0];
        d[1] = a[1][1] - 2.0 * qv[0] * u1;
        d[2] = a[2][2] - 2.0 * qv[1] * u2;
        // columns 1,2 of the Householder reflector
        double w1 = omega * u1, w2 = omega * u2;
        q[1][1] = 1.0 - w1 * u1;
        q[1][2] = -w1 * u2;
        q[2][1] = -w2 * u1;
        q[2][2] = 1.0 - w2 * u2;
        e[1] = a[1][2] - qv[0] * u2 - u1 * qv[1];
    } else {
        d[0] = a[0][0];
        d[1] = a[1][1];
        d[2] = a[2][2];
        e[1] = a[1][2];
    }
    e[2] = 0.0;

    // implicit QL iterations (tql2-style) on the tridiagonal (d, e)
    for (int l = 0; l < 3; ++l) {
        for (int iter = 0; iter < 64; ++iter) {
            int mm = l;
            for (; mm < 2; ++mm) {
                double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
                if (std::abs(e[mm]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (mm == l) break;
            double gg = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(gg, 1.0);
            gg = d[mm] - d[l] + e[l] / (gg + (gg >= 0 ? std::abs(r) : -std::abs(r)));
            double s = 1.0, c = 1.0, p = 0.0;
            for (int i = mm - 1; i >= l; --i) {
                double ff = s * e[i];
                double b = c * e[i];
                r = std::hypot(ff, gg);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    break;
                }
                s = ff / r;
                c = gg / r;
                gg = d[i + 1] - p;
                r = (d[i] - gg) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = gg + p;
                gg = c * r - b;
                for (int k = 0; k < 3; ++k) {
                    ff = q[k][i + 1];
                    q[k][i + 1] = s * q[k][i] + c * ff;
                    q[k][i] = c * q[k][i] - s * ff;
                }
            }
            d[l] -= p;
            e[l] = gg;
            e[mm] = 0.0;
        }
    }

    // sort descending, eigenvectors as rows
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int x, int y) { return d[x] > d[y]; });
    EigResult out;
    for (int k = 0; k < 3; ++k) {
        out.values[k] = d[order[k]];
        Vec3 v = {q[0][order[k]], q[1][order[k]], q[2][order[k]]};
        out.vectors[k] = normalized(v);
    }
    double trace = m[0][0] + m[1][1] + m[2][2];
    double tol = 1e-6 * (std::abs(trace) + 1e-12);
    out.degenerate = std::abs(out.values[0] - out.values[1]) < tol ||
                     std::abs(out.values[1] - out.values[2]) < tol ||
                     std::abs(out.values[0] - out.values[2]) < tol;
    return out;
}

// ---------------------------------------------------------------------------
// frame constructions
// ---------------------------------------------------------------------------

std::array<Frame, 4> pca_frames(const std::vector<Vec3>& points, FrameRng rng) {
    if (points.empty()) throw NumericError("pca_frames: no points");
    Vec3 mean{0, 0, 0};
    for (const auto& p : points) mean = mean + p;
    mean = (1.0 / double(points.size())) * mean;

    double rms = 0.0;
    for (const auto& p : points) rms += dot(p - mean, p - mean);
    rms = std::sqrt(rms / double(points.size()));

    auto covariance = [&](double jitter, int attempt) {
        Mat3 cov{};
        for (size_t i = 0; i < points.size(); ++i) {
            Vec3 c = points[i] - mean;
            if (jitter > 0.0) {
                for (int k = 0; k < 3; ++k) {
                    FrameRng r = rng;
                    r.counter = 1000 * uint64_t(attempt) + 3 * i + k;
                    c[k] += jitter * r.symmetric(1.0);
                }
            }
            for (int r = 0; r < 3; ++r)
                for (int cc = 0; cc < 3; ++cc) cov[r][cc] += c[r] * c[cc];
        }
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) cov[r][cc] /= double(points.size());
        return cov;
    };

    EigResult eig = eig3_sym(covariance(0.0, 0));
    bool was_degenerate = eig.degenerate;
    double jitter = 1e-3 * (1.0 + rms);
    for (int attempt = 1; eig.degenerate && attempt <= kDegenerateRetries; ++attempt)
        eig = eig3_sym(covariance(jitter * attempt, attempt));

    Mat3 base = rows_with_det_plus(eig);
    auto family = sign_family(base);
    std::array<Frame, 4> out;
    for (int f = 0; f < 4; ++f) {
        out[f].rows = family[f];
        out[f].kind = FrameMethod::Pca;
        out[f].degenerate = was_degenerate;
        out[f].fallback = eig.degenerate;  // retries exhausted
    }
    return out;
}

Frame lattice_frame(const Mat3& lattice, int search_bound) {
    auto pts = sorted_lattice_points(lattice, search_bound);
    // re-sort equal norms so the lexicographically larger direction comes first
    std::stable_sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
        if (a.norm != b.norm) return a.norm < b.norm;
        return dir_tie_before((1.0 / a.norm) * a.v, (1.0 / b.norm) * b.v);
    });
    Frame f;
    f.kind = FrameMethod::Lattice;
    f.rows[0] = normalized(pts[0].v);
    size_t k2 = pts.size(), k3 = pts.size();
    for (size_t k = 1; k < pts.size(); ++k) {
        Vec3 d = normalized(pts[k].v);
        if (norm(cross(f.rows[0], d)) > 1e-9) {
            f.rows[1] = d;
            k2 = k;
            break;
        }
    }
    if (k2 == pts.size()) throw NumericError("lattice_frame: rank 2 not reachable");
    for (size_t k = k2 + 1; k < pts.size(); ++k) {
        Vec3 d = normalized(pts[k].v);
        Mat3 trial = f.rows;
        trial[2] = d;
        if (std::abs(det3(trial)) > 1e-9) {
            f.rows[2] = d;
            k3 = k;
            break;
        }
    }
    if (k3 == pts.size()) throw NumericError("lattice_frame: rank 3 not reachable");
    if (dot(f.rows[0], f.rows[1]) < 0.0) f.rows[1] = -1.0 * f.rows[1];
    if (dot(f.rows[0], f.rows[2]) < 0.0) f.rows[2] = -1.0 * f.rows[2];
    if (f.det() < 0.0) std::swap(f.rows[1], f.rows[2]);
    if (f.det() < 1e-6) throw NumericError("lattice_frame: degenerate frame");
    return f;
}

Frame weighted_pca_frame(const WeightedNeighborhood& nbhd, FrameRng rng) {
    double wmax = 0.0;
    for (const auto& wi : nbhd) wmax = std::max(wmax, wi.w);
    if (wmax <= 0.0) throw NumericError("weighted_pca_frame: all weights zero");

    std::vector<double> raw(nbhd.size());
    for (size_t e = 0; e < nbhd.size(); ++e) raw[e] = nbhd[e].w;
    EigResult eig = eig3_sym(weighted_covariance(nbhd, raw));
    bool was_degenerate = eig.degenerate;

    if (eig.degenerate && rng.train) {
        for (int attempt = 0; eig.degenerate && attempt < kDegenerateRetries; ++attempt) {
            auto w = noisy_weights(nbhd, rng);
            eig = eig3_sym(weighted_covariance(nbhd, w));
        }
    } else if (!eig.degenerate && rng.train) {
        auto w = noisy_weights(nbhd, rng);
        eig = eig3_sym(weighted_covariance(nbhd, w));
        for (int attempt = 0; eig.degenerate && attempt < kDegenerateRetries; ++attempt) {
            w = noisy_weights(nbhd, rng);
            eig = eig3_sym(weighted_covariance(nbhd, w));
        }
    }
    if (eig.degenerate) {
        Frame fb = max_frame(nbhd, rng);
        fb.degenerate = true;
        fb.fallback = true;
        return fb;
    }

    Mat3 base = rows_with_det_plus(eig);
    Frame f;
    f.kind = FrameMethod::WeightedPca;
    f.degenerate = was_degenerate;
    if (rng.train) {
        double s1 = rng.flip() ? 1.0 : -1.0;
        double s2 = rng.flip() ? 1.0 : -1.0;
        double s3 = s1 * s2;  // keeps det = +1
        f.rows[0] = s1 * base[0];
        f.rows[1] = s2 * base[1];
        f.rows[2] = s3 * base[2];
    } else {
        f.rows = select_eval_signs(base, nbhd);
    }
    return f;
}

Frame max_frame(const WeightedNeighborhood& nbhd, FrameRng rng) {
    if (nbhd.empty()) throw NumericError("max_frame: empty neighborhood");
    auto w = noisy_weights(nbhd, rng);
    double wmax = *std::max_element(w.begin(), w.end());
    if (wmax <= 0.0) throw NumericError("max_frame: all weights zero");

    auto better = [&](size_t a, size_t b, const std::vector<double>& score) {
        if (score[a] != score[b]) return score[a] > score[b];
        const auto& ia = nbhd[a].image;
        const auto& ib = nbhd[b].image;
        int c = lex_compare(ia.dir, ib.dir);
        if (c != 0) return c > 0;  // lexicographically larger direction wins
        if (ia.j != ib.j) return ia.j < ib.j;
        return ia.n < ib.n;
    };

    size_t best1 = 0;
    for (size_t e = 1; e < nbhd.size(); ++e)
        if (better(e, best1, w)) best1 = e;
    Vec3 e1 = nbhd[best1].image.dir;

    std::vector<double> adj(nbhd.size());
    for (size_t e = 0; e < nbhd.size(); ++e)
        adj[e] = (1.0 - std::abs(dot(e1, nbhd[e].image.dir))) * w[e];
    size_t best2 = 0;
    for (size_t e = 1; e < nbhd.size(); ++e)
        if (better(e, best2, adj)) best2 = e;

    Frame f;
    f.kind = FrameMethod::Max;
    f.rows[0] = e1;
    Vec3 r2 = nbhd[best2].image.dir;
    Vec3 g = r2 - dot(e1, r2) * e1;
    if (adj[best2] <= 0.0 || norm(g) < 1e-9) {
        f.rows[1] = lex_smallest_perp(e1);  // all candidate directions collinear
        f.fallback = true;
    } else {
        f.rows[1] = normalized(g);
    }
    f.rows[2] = cross(f.rows[0], f.rows[1]);
    return f;
}

Frame static_local_frame(const std::vector<PeriodicImage>& images) {
    WeightedNeighborhood nbhd;
    for (const auto& im : images) {
        if (im.is_self()) continue;
        nbhd.push_back({im, std::exp(-im.r * im.r)});
    }
    if (nbhd.empty()) throw NumericError("static_local_frame: no neighbors");
    FrameRng eval_rng;  // eval mode, no noise
    Frame f = max_frame(nbhd, eval_rng);
    f.kind = FrameMethod::StaticLocal;
    return f;
}

std::vector<real> frame_average(const std::vector<std::vector<real>>& outputs) {
    if (outputs.empty()) throw NumericError("frame_average: empty frame set");
    std::vector<real> mean(outputs[0].size(), real(0));
    for (const auto& o : outputs) {
        if (o.size() != mean.size()) throw NumericError("frame_average: output size mismatch");
        for (size_t k = 0; k < o.size(); ++k) mean[k] += o[k];
    }
    real inv = real(1) / real(outputs.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

Vec3 project_direction(const Frame& f, const Vec3& dir) {
    return {dot(f.rows[0], dir), dot(f.rows[1], dir), dot(f.rows[2], dir)};
}

bool frame_orthonormal(const Frame& f, double tol) {
    for (int r = 0; r < 3; ++r) {
        if (std::abs(norm(f.rows[r]) - 1.0) > tol) return false;
        for (int c = r + 1; c < 3; ++c)
            if (std::abs(dot(f.rows[r], f.rows[c])) > tol) return false;
    }
    return std::abs(f.det() - 1.0) <= tol;
}

}  // namespace dynframe
