#include "cephreg/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cephreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNoSite = std::numeric_limits<std::uint32_t>::max();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), carrying the
// site id of the minimizing parabola.
void edt_1d(const std::vector<double>& f, const std::vector<std::uint32_t>& f_site, std::vector<double>& d,
            std::vector<std::uint32_t>& d_site, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    v.assign(static_cast<std::size_t>(n), 0);
    z.assign(static_cast<std::size_t>(n) + 1, 0.0);
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[static_cast<std::size_t>(q)] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = 0.0;
        for (;;) {
            const int p = v[static_cast<std::size_t>(k)];
            s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
                 (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
                (2.0 * (q - p));
            if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        if (s <= z[static_cast<std::size_t>(k)]) {
            // k == 0 and the new parabola dominates everywhere.
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }
    d.assign(static_cast<std::size_t>(n), kInf);
    d_site.assign(static_cast<std::size_t>(n), kNoSite);
    if (k < 0) return;
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
        const int p = v[static_cast<std::size_t>(j)];
        d[static_cast<std::size_t>(q)] = static_cast<double>(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
        d_site[static_cast<std::size_t>(q)] = f_site[static_cast<std::size_t>(p)];
    }
}

}  // namespace

DistanceField2D DistanceField2D::build(const std::vector<Vec2>& points, double margin_px,
                                       std::optional<Lattice> image) {
    if (points.empty()) throw DataError("distance field needs a nonempty point set");
    double xmin = kInf, ymin = kInf, xmax = -kInf, ymax = -kInf;
    for (const auto& p : points) {
        if (!p.allFinite()) throw DataError("distance field: non-finite point");
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    if (image) {
        xmin = std::min(xmin, static_cast<double>(image->x0));
        ymin = std::min(ymin, static_cast<double>(image->y0));
        xmax = std::max(xmax, static_cast<double>(image->x0 + image->width - 1));
        ymax = std::max(ymax, static_cast<double>(image->y0 + image->height - 1));
    }
    const double margin = std::max(0.0, margin_px);
    DistanceField2D field;
    field.lattice_.x0 = static_cast<int>(std::floor(xmin - margin));
    field.lattice_.y0 = static_cast<int>(std::floor(ymin - margin));
    field.lattice_.width = static_cast<int>(std::ceil(xmax + margin)) - field.lattice_.x0 + 1;
    field.lattice_.height = static_cast<int>(std::ceil(ymax + margin)) - field.lattice_.y0 + 1;
    const int w = field.lattice_.width;
    const int h = field.lattice_.height;
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

    if (n >= kNoSite) throw DataError("distance field lattice too large");

    // Rasterize every point to its nearest node; occupied nodes keep all of
    // their points (CSR layout).
    std::vector<std::uint32_t> node_of(points.size());
    field.cell_begin_.assign(n + 1, 0);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const int i = static_cast<int>(std::lround(points[k].x())) - field.lattice_.x0;
        const int j = static_cast<int>(std::lround(points[k].y())) - field.lattice_.y0;
        node_of[k] = static_cast<std::uint32_t>(field.index(i, j));
        ++field.cell_begin_[node_of[k] + 1];
    }
    for (std::size_t c = 0; c < n; ++c) field.cell_begin_[c + 1] += field.cell_begin_[c];
    field.cell_points_.resize(points.size());
    {
        std::vector<std::uint32_t> fill(field.cell_begin_.begin(), field.cell_begin_.end() - 1);
        for (std::size_t k = 0; k < points.size(); ++k)
            field.cell_points_[fill[node_of[k]]++] = static_cast<std::uint32_t>(k);
    }
    auto occupied = [&field](std::size_t c) { return field.cell_begin_[c + 1] > field.cell_begin_[c]; };

    std::vector<double> col_d(n);
    std::vector<std::uint32_t> col_site(n);
    std::vector<double> f, d, z;
    std::vector<std::uint32_t> fs, ds;
    std::vector<int> v;
    f.resize(static_cast<std::size_t>(h));
    fs.resize(static_cast<std::size_t>(h));
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < h; ++j) {
            const std::size_t idx = static_cast<std::size_t>(j) * w + static_cast<std::size_t>(i);
            f[static_cast<std::size_t>(j)] = occupied(idx) ? 0.0 : kInf;
            fs[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(idx);
        }
        edt_1d(f, fs, d, ds, v, z);
        for (int j = 0; j < h; ++j) {
            const std::size_t idx = static_cast<std::size_t>(j) * w + static_cast<std::size_t>(i);
            col_d[idx] = d[static_cast<std::size_t>(j)];
            col_site[idx] = ds[static_cast<std::size_t>(j)];
        }
    }
    field.dist_.resize(n);
    field.site_.resize(n);
    f.resize(static_cast<std::size_t>(w));
    fs.resize(static_cast<std::size_t>(w));
    for (int j = 0; j < h; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * w;
        for (int i = 0; i < w; ++i) {
            f[static_cast<std::size_t>(i)] = col_d[row + static_cast<std::size_t>(i)];
            fs[static_cast<std::size_t>(i)] = col_site[row + static_cast<std::size_t>(i)];
        }
        edt_1d(f, fs, d, ds, v, z);
        for (int i = 0; i < w; ++i) {
            field.dist_[row + static_cast<std::size_t>(i)] = std::sqrt(d[static_cast<std::size_t>(i)]);
            field.site_[row + static_cast<std::size_t>(i)] = ds[static_cast<std::size_t>(i)];
        }
    }
    field.index_ = NearestNeighbor2D(points);
    return field;
}

bool DistanceField2D::contains(const Vec2& p) const {
    const double x = p.x() - lattice_.x0;
    const double y = p.y() - lattice_.y0;
    return x >= 1.0 && y >= 1.0 && x <= lattice_.width - 2.0 && y <= lattice_.height - 2.0;
}

std::size_t DistanceField2D::node_site(int i, int j) const {
    const std::uint32_t c = site_[index(i, j)];
    const Vec2 node(i + lattice_.x0, j + lattice_.y0);
    const auto& pts = index_.points();
    std::size_t best = cell_points_[cell_begin_[c]];
    for (std::uint32_t k = cell_begin_[c] + 1; k < cell_begin_[c + 1]; ++k) {
        const std::size_t q = cell_points_[k];
        if ((pts[q] - node).squaredNorm() < (pts[best] - node).squaredNorm()) best = q;
    }
    return best;
}

double DistanceField2D::query(const Vec2& p) const {
    if (!contains(p)) return index_.distance(p);
    const int ci = static_cast<int>(std::lround(p.x())) - lattice_.x0;
    const int cj = static_cast<int>(std::lround(p.y())) - lattice_.y0;
    const auto& pts = index_.points();
    std::uint32_t seen[9];
    int n_seen = 0;
    double best = kInf;
    for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
            const std::uint32_t c = site_[index(ci + di, cj + dj)];
            if (std::find(seen, seen + n_seen, c) != seen + n_seen) continue;
            seen[n_seen++] = c;
            for (std::uint32_t k = cell_begin_[c]; k < cell_begin_[c + 1]; ++k)
                best = std::min(best, (pts[cell_points_[k]] - p).squaredNorm());
        }
    }
    return std::sqrt(best);
}

}  // namespace cephreg
