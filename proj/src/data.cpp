#include "dynframe/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dynframe/images.hpp"
#include "dynframe/rng.hpp"
#include "json.hpp"

namespace dynframe {

namespace {

constexpr double kLjCutoff = 6.0;      // angstrom
constexpr double kLjEps = 0.08;        // well depth scale
constexpr double kAngleWeight = 0.2;   // three-body term coefficient
constexpr double kAngleShell = 1.35;   // neighbor shell factor over the min distance

double lj_radius(int species) { return 0.9 + 0.06 * double(species % 6); }

double site_lj_radius(const CrystalStructure& s, int i) {
    if (s.occupancies.empty()) return lj_radius(s.species[i]);
    double r = 0.0;
    for (const auto& [sp, p] : s.occupancies[i].probs) r += p * lj_radius(sp);
    return r;
}

}  // namespace

CrystalStructure DatasetRecord::structure() const {
    CrystalStructure s;
    s.id = id;
    s.species = species;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s.lattice[r][c] = lattice[size_t(r * 3 + c)];
    s.occupancies = occupancies;
    s.positions = positions;
    if (coords_kind == "fractional")
        for (auto& p : s.positions) p = s.cartesian(p);
    else if (coords_kind != "cartesian")
        throw DataError("record " + id + ": unknown coords_kind '" + coords_kind + "'");
    s.validate();
    // normalize out-of-cell positions; in-cell cartesian data is kept
    // bit-exact so write/load round trips are lossless
    Mat3 inv = inverse3(s.lattice);
    bool inside = true;
    for (const auto& p : s.positions) {
        Vec3 f = matvec(inv, p);
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0.0 || f[k] >= 1.0) inside = false;
    }
    if (!inside) return wrap_to_cell(s);
    return s;
}

void SplitSpec::validate() const {
    if (train < 0 || val < 0 || test < 0) throw DataError("split: negative fraction");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw DataError("split: fractions must sum to 1");
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open dataset: " + path);
    std::vector<DatasetRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw DataError("dataset " + path + " line " + std::to_string(lineno) + ": " +
                            e.what());
        }
        DatasetRecord r;
        try {
            r.id = j.at("id");
            auto lat = j.at("lattice").get<std::vector<double>>();
            if (lat.size() != 9)
                throw DataError("lattice must have 9 entries");
            std::copy(lat.begin(), lat.end(), r.lattice.begin());
            r.species = j.at("species").get<std::vector<int>>();
            for (const auto& p : j.at("positions")) {
                auto v = p.get<std::vector<double>>();
                if (v.size() != 3) throw DataError("position must have 3 entries");
                r.positions.push_back({v[0], v[1], v[2]});
            }
            r.coords_kind = j.at("coords_kind");
            r.target = j.at("target");
            if (!std::isfinite(r.target)) throw DataError("non-finite target");
            if (j.contains("occupancies") && !j.at("occupancies").is_null()) {
                for (const auto& site : j.at("occupancies")) {
                    SpeciesDistribution d;
                    for (auto it = site.begin(); it != site.end(); ++it)
                        d.probs[std::stoi(it.key())] = it.value().get<double>();
                    r.occupancies.push_back(d);
                }
            }
            r.structure();  // full validation (species range, lattice, wrapping)
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("dataset " + path + " line " + std::to_string(lineno) + " (record " +
                            r.id + "): " + e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write dataset: " + path);
    for (const auto& r : records) {
        nlohmann::json j;
        j["id"] = r.id;
        j["lattice"] = r.lattice;
        j["species"] = r.species;
        nlohmann::json pos = nlohmann::json::array();
        for (const auto& p : r.positions) pos.push_back({p[0], p[1], p[2]});
        j["positions"] = pos;
        j["coords_kind"] = r.coords_kind;
        j["target"] = r.target;
        if (!r.occupancies.empty()) {
            nlohmann::json occ = nlohmann::json::array();
            for (const auto& d : r.occupancies) {
                nlohmann::json site;
                for (const auto& [sp, p] : d.probs) site[std::to_string(sp)] = p;
                occ.push_back(site);
            }
            j["occupancies"] = occ;
        }
        f << j.dump() << "\n";
    }
    if (!f) throw DataError("dataset write failed: " + path);
}

SplitIndices split(size_t count, const SplitSpec& spec) {
    spec.validate();
    std::vector<int> idx(count);
    for (size_t i = 0; i < count; ++i) idx[i] = static_cast<int>(i);
    Rng rng(spec.seed);
    rng.shuffle(idx);
    size_t nval = static_cast<size_t>(std::floor(spec.val * double(count)));
    size_t ntest = static_cast<size_t>(std::floor(spec.test * double(count)));
    size_t ntrain = count - nval - ntest;
    SplitIndices out;
    out.train.assign(idx.begin(), idx.begin() + ntrain);
    out.val.assign(idx.begin() + ntrain, idx.begin() + ntrain + nval);
    out.test.assign(idx.begin() + ntrain + nval, idx.end());
    return out;
}

// ---------------------------------------------------------------------------
// synthetic generator
// ---------------------------------------------------------------------------

double synthetic_target(const CrystalStructure& s) {
    CrystalStructure w = wrap_to_cell(s);
    const int N = w.natoms();

    double min_edge = 1e300;
    for (int k = 0; k < 3; ++k) min_edge = std::min(min_edge, norm(w.lattice_column(k)));
    double dmin = 1e300;
    for (int i = 0; i < N; ++i) {
        auto ims = enumerate_images(w, i, min_edge + 1.0);
        for (const auto& im : ims)
            if (!im.is_self()) dmin = std::min(dmin, im.r);
    }
    double shell = std::min(kAngleShell * dmin, 3.8);

    double lj = 0.0, angle = 0.0;
    for (int i = 0; i < N; ++i) {
        double si = site_lj_radius(w, i);
        auto ims = enumerate_images(w, i, kLjCutoff);
        std::vector<Vec3> near;
        for (const auto& im : ims) {
            if (im.is_self()) continue;
            double sij = 0.5 * (si + site_lj_radius(w, im.j));
            double q6 = std::pow(sij / im.r, 6);
            lj += 4.0 * kLjEps * (q6 * q6 - q6);
            if (im.r <= shell) near.push_back(im.dir);
        }
        for (size_t a = 0; a < near.size(); ++a)
            for (size_t b = a + 1; b < near.size(); ++b) {
                double c = dot(near[a], near[b]);
                angle += c * c;
            }
    }
    return (lj + kAngleWeight * angle) / double(N);
}

std::vector<DatasetRecord> gen_synthetic(int n, uint64_t seed) {
    if (n < 1) throw DataError("gen_synthetic: n must be >= 1");
    Rng rng(seed);
    std::vector<DatasetRecord> out;
    out.reserve(static_cast<size_t>(n));

    for (int rec = 0; rec < n; ++rec) {
        int motif = static_cast<int>(rng.below(5));
        // conventional 8-atom cells need a larger edge to keep sites apart
        double a_lo = (motif >= 3) ? 4.2 : 3.2;
        double a = rng.uniform(a_lo, 7.0);
        Mat3 lat{};
        std::vector<Vec3> frac;
        double dnn = a;  // ideal nearest-neighbor distance
        Mat3 fcc = transposed(Mat3{Vec3{0, a / 2, a / 2}, Vec3{a / 2, 0, a / 2},
                                   Vec3{a / 2, a / 2, 0}});  // columns are fcc vectors
        Mat3 cubic = {Vec3{a, 0, 0}, Vec3{0, a, 0}, Vec3{0, 0, a}};
        switch (motif) {
            case 0:  // CsCl-like simple cubic, 2 atoms
                lat = cubic;
                frac = {{0, 0, 0}, {0.5, 0.5, 0.5}};
                dnn = a * std::sqrt(3.0) / 2.0;
                break;
            case 1:  // rock-salt primitive, 2 atoms
                lat = fcc;
                frac = {{0, 0, 0}, {0.5, 0.5, 0.5}};
                dnn = a / 2.0;
                break;
            case 2:  // zinc-blende primitive, 2 atoms
                lat = fcc;
                frac = {{0, 0, 0}, {0.25, 0.25, 0.25}};
                dnn = a * std::sqrt(3.0) / 4.0;
                break;
            case 3:  // rock-salt conventional, 8 atoms
                lat = cubic;
                frac = {{0, 0, 0},   {0.5, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0.5},
                        {0.5, 0, 0}, {0, 0.5, 0},   {0, 0, 0.5},   {0.5, 0.5, 0.5}};
                dnn = a / 2.0;
                break;
            default:  // zinc-blende conventional, 8 atoms
                lat = cubic;
                frac = {{0, 0, 0},          {0.5, 0.5, 0},      {0.5, 0, 0.5},
                        {0, 0.5, 0.5},      {0.25, 0.25, 0.25}, {0.75, 0.75, 0.25},
                        {0.75, 0.25, 0.75}, {0.25, 0.75, 0.75}};
                dnn = a * std::sqrt(3.0) / 4.0;
                break;
        }

        // mild symmetric distortion
        Mat3 dist{};
        for (int r = 0; r < 3; ++r) dist[r][r] = 1.0;
        for (int r = 0; r < 3; ++r)
            for (int c = r; c < 3; ++c) {
                double s = (r == c) ? rng.uniform(-0.03, 0.03) : rng.uniform(-0.02, 0.02);
                dist[r][c] += s;
                if (r != c) dist[c][r] += s;
            }
        lat = matmul3(dist, lat);

        int spA = 3 + static_cast<int>(rng.below(81));
        int spB = 3 + static_cast<int>(rng.below(81));
        while (spB == spA) spB = 3 + static_cast<int>(rng.below(81));

        CrystalStructure s;
        s.id = "syn-" + std::to_string(rec);
        s.lattice = lat;
        double jitter = std::min(0.3, 0.12 * dnn);
        size_t half = frac.size() / 2;
        for (size_t i = 0; i < frac.size(); ++i) {
            Vec3 p = matvec(lat, frac[i]);
            for (int k = 0; k < 3; ++k) p[k] += rng.uniform(-jitter, jitter);
            s.positions.push_back(p);
            s.species.push_back(i < half ? spA : spB);
        }
        if (rng.uniform() < 0.3) {  // ternary substitution
            int spC = 3 + static_cast<int>(rng.below(81));
            while (spC == spA || spC == spB) spC = 3 + static_cast<int>(rng.below(81));
            s.species[rng.below(s.species.size())] = spC;
        }
        if (rng.uniform() < 0.15) {  // one site-mixed record now and then
            int spC = 3 + static_cast<int>(rng.below(81));
            while (spC == spA || spC == spB) spC = 3 + static_cast<int>(rng.below(81));
            s.occupancies.clear();
            for (int i = 0; i < s.natoms(); ++i)
                s.occupancies.push_back(SpeciesDistribution::pure(s.species[i]));
            size_t site = rng.below(s.occupancies.size());
            int base = s.species[site];
            s.occupancies[site].probs.clear();
            s.occupancies[site].probs[base] = 0.5;
            s.occupancies[site].probs[spC] = 0.5;
        }
        s = wrap_to_cell(s);

        DatasetRecord r;
        r.id = s.id;
        for (int rr = 0; rr < 3; ++rr)
            for (int cc = 0; cc < 3; ++cc) r.lattice[size_t(rr * 3 + cc)] = s.lattice[rr][cc];
        r.species = s.species;
        r.positions = s.positions;
        r.coords_kind = "cartesian";
        r.occupancies = s.occupancies;
        r.target = synthetic_target(s);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace dynframe
