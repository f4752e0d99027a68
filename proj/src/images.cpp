#include "dynframe/images.hpp"

#include <algorithm>
#include <cmath>

namespace dynframe {

namespace {

// ascending (r, dir, j, n); gives a total order that is stable under atom
// relabeling and cell re-description for everything short of exact
// geometric coincidence
bool image_less(const PeriodicImage& a, const PeriodicImage& b) {
    if (a.r != b.r) return a.r < b.r;
    int c = lex_compare(a.dir, b.dir);
    if (c != 0) return c < 0;
    if (a.j != b.j) return a.j < b.j;
    return a.n < b.n;
}

}  // namespace

ShiftRange shift_range_for_radius(const Mat3& lattice, double radius) {
    if (radius <= 0.0) throw NumericError("shift_range_for_radius: radius must be positive");
    double vol = det3(lattice);
    if (vol <= 1e-6) throw NumericError("shift_range_for_radius: singular lattice");
    ShiftRange out;
    for (int k = 0; k < 3; ++k) {
        Vec3 la = {lattice[0][(k + 1) % 3], lattice[1][(k + 1) % 3], lattice[2][(k + 1) % 3]};
        Vec3 lb = {lattice[0][(k + 2) % 3], lattice[1][(k + 2) % 3], lattice[2][(k + 2) % 3]};
        double h = vol / norm(cross(la, lb));
        out.bounds[k] = static_cast<int>(std::ceil(radius / h)) + 1;
    }
    return out;
}

std::vector<PeriodicImage> enumerate_images(const CrystalStructure& s, int i, double radius) {
    s.validate();
    if (i < 0 || i >= s.natoms()) throw DataError("enumerate_images: atom index out of range");
    if (radius <= 0.0) throw NumericError("enumerate_images: radius must be positive");
    CrystalStructure w = wrap_to_cell(s);
    ShiftRange sr = shift_range_for_radius(w.lattice, radius);
    const Vec3 pi = w.positions[i];
    std::vector<PeriodicImage> out;
    out.reserve(16);
    for (int n1 = -sr.bounds[0]; n1 <= sr.bounds[0]; ++n1)
        for (int n2 = -sr.bounds[1]; n2 <= sr.bounds[1]; ++n2)
            for (int n3 = -sr.bounds[2]; n3 <= sr.bounds[2]; ++n3) {
                Vec3 shift = matvec(w.lattice, Vec3{double(n1), double(n2), double(n3)});
                for (int j = 0; j < w.natoms(); ++j) {
                    Vec3 d = w.positions[j] + shift - pi;
                    double r = norm(d);
                    if (r > radius) continue;
                    PeriodicImage im;
                    im.j = j;
                    im.n = {n1, n2, n3};
                    im.r = r;
                    if (r > 0.0) im.dir = (1.0 / r) * d;
                    out.push_back(im);
                }
            }
    std::sort(out.begin(), out.end(), image_less);
    return out;
}

std::vector<LatticePoint> sorted_lattice_points(const Mat3& lattice, int search_bound) {
    if (search_bound < 1) throw NumericError("sorted_lattice_points: search_bound must be >= 1");
    if (det3(lattice) <= 1e-6) throw NumericError("sorted_lattice_points: singular lattice");
    std::vector<LatticePoint> out;
    for (int n1 = -search_bound; n1 <= search_bound; ++n1)
        for (int n2 = -search_bound; n2 <= search_bound; ++n2)
            for (int n3 = -search_bound; n3 <= search_bound; ++n3) {
                if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                LatticePoint p;
                p.n = {n1, n2, n3};
                p.v = matvec(lattice, Vec3{double(n1), double(n2), double(n3)});
                p.norm = norm(p.v);
                out.push_back(p);
            }
    std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
        if (a.norm != b.norm) return a.norm < b.norm;
        Vec3 da = (1.0 / a.norm) * a.v;
        Vec3 db = (1.0 / b.norm) * b.v;
        int c = lex_compare(da, db);
        if (c != 0) return c < 0;
        return a.n < b.n;
    });
    return out;
}

}  // namespace dynframe
