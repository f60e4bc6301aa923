#include "cephreg/surface_drr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace cephreg::drr {

void SplatParams::validate() const {
    if (!(rho0 > 0.0) || !(mu0 > 0.0) || !(I0 > 0.0) || !(sigma_px > 0.0) || !(kernel_truncation_radius > 0.0)) {
        throw DataError("splat parameters must all be positive");
    }
}

double magnification(double x, const DetectorGeometry& geom) {
    return (geom.detector_x - geom.source_x) / (x - geom.source_x);
}

Vec2 detector_to_pixel(const Vec2& detector_mm, const DetectorGeometry& geom) {
    return detector_mm / geom.pixel_spacing + geom.detector_origin_uv;
}

Projection project_point(const Vec3& p, const DetectorGeometry& geom, double weight) {
    Projection out;
    if (p.x() == geom.source_x) throw NumericalError("point lies in the source plane");
    out.magnification = magnification(p.x(), geom);
    if (!(out.magnification > 0.0) || !std::isfinite(out.magnification)) {
        throw NumericalError("point lies behind the source");
    }
    out.detector_mm = Vec2(out.magnification * p.y(), out.magnification * p.z());
    out.pixel = detector_to_pixel(out.detector_mm, geom);
    out.weight = weight;
    return out;
}

std::vector<Projection> project_vertices(const TriangleMesh& mesh, const DetectorGeometry& geom,
                                         const SplatParams& params) {
    geom.validate();
    params.validate();
    std::size_t behind = 0;
    for (const auto& v : mesh.vertices) {
        const double t = v.x() == geom.source_x ? 0.0 : magnification(v.x(), geom);
        if (!(t > 0.0) || !std::isfinite(t)) ++behind;
    }
    if (behind > 0) {
        throw NumericalError(std::to_string(behind) + " vertices lie behind the source (t <= 0)");
    }
    std::vector<Projection> out;
    out.reserve(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const double area = i < mesh.per_vertex_area.size() ? mesh.per_vertex_area[i] : 0.0;
        out.push_back(project_point(mesh.vertices[i], geom, params.rho0 * area));
    }
    return out;
}

ScalarMap2D splat(const std::vector<Projection>& projections, const DetectorGeometry& geom,
                  const SplatParams& params) {
    geom.validate();
    params.validate();
    ScalarMap2D map(geom.image_width, geom.image_height, MapMeaning::thickness);
    const double sigma = params.sigma_px;
    const double radius = params.kernel_truncation_radius * sigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> wu;
    std::vector<double> wv;
    for (const auto& p : projections) {
        if (!(p.weight != 0.0)) continue;
        const double u = p.pixel.x();
        const double v = p.pixel.y();
        const int i0 = std::max(0, static_cast<int>(std::ceil(u - radius)));
        const int i1 = std::min(map.width - 1, static_cast<int>(std::floor(u + radius)));
        const int j0 = std::max(0, static_cast<int>(std::ceil(v - radius)));
        const int j1 = std::min(map.height - 1, static_cast<int>(std::floor(v + radius)));
        if (i0 > i1 || j0 > j1) continue;
        // The kernel is separable: exp(-(du^2+dv^2)/2s^2) = exp(-du^2/2s^2) exp(-dv^2/2s^2).
        wu.resize(static_cast<std::size_t>(i1 - i0 + 1));
        wv.resize(static_cast<std::size_t>(j1 - j0 + 1));
        for (int i = i0; i <= i1; ++i) {
            const double d = i - u;
            wu[static_cast<std::size_t>(i - i0)] = std::exp(-d * d * inv2s2);
        }
        for (int j = j0; j <= j1; ++j) {
            const double d = j - v;
            wv[static_cast<std::size_t>(j - j0)] = p.weight * std::exp(-d * d * inv2s2);
        }
        for (int j = j0; j <= j1; ++j) {
            double* row = &map.at(0, j);
            const double wj = wv[static_cast<std::size_t>(j - j0)];
            for (int i = i0; i <= i1; ++i) row[i] += wj * wu[static_cast<std::size_t>(i - i0)];
        }
    }
    return map;
}

ScalarMap2D render_thickness(const TriangleMesh& mesh, const DetectorGeometry& geom, const SplatParams& params) {
    std::vector<Projection> proj = project_vertices(mesh, geom, params);
    if (params.face_supersampling) {
        // Each face hands half of its area to its centroid; the vertices keep
        // a sixth each so the total weight is unchanged.
        for (auto& p : proj) p.weight = 0.0;
        for (const auto& f : mesh.faces) {
            const Vec3& a = mesh.vertices[f[0]];
            const Vec3& b = mesh.vertices[f[1]];
            const Vec3& c = mesh.vertices[f[2]];
            const double area = 0.5 * (b - a).cross(c - a).norm();
            for (auto idx : f) proj[idx].weight += params.rho0 * area / 6.0;
            proj.push_back(project_point((a + b + c) / 3.0, geom, params.rho0 * area / 2.0));
        }
    }
    return splat(proj, geom, params);
}

ScalarMap2D intensity(const ScalarMap2D& thickness, const SplatParams& params) {
    params.validate();
    ScalarMap2D out = thickness;
    out.meaning = MapMeaning::intensity;
    for (auto& v : out.data) {
        if (v < 0.0) throw DataError("thickness must be nonnegative");
        v = params.I0 * std::exp(-params.mu0 * v);
    }
    return out;
}

namespace {

// 8-connected components of `mask`; returns the label image and the label of
// the largest component (first found wins ties).
std::pair<std::vector<int>, int> largest_component(const std::vector<char>& mask, int w, int h) {
    std::vector<int> label(mask.size(), -1);
    int best = -1;
    std::size_t best_size = 0;
    int next = 0;
    std::queue<int> q;
    for (int start = 0; start < w * h; ++start) {
        if (!mask[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) continue;
        std::size_t size = 0;
        label[static_cast<std::size_t>(start)] = next;
        q.push(start);
        while (!q.empty()) {
            const int cur = q.front();
            q.pop();
            ++size;
            const int ci = cur % w;
            const int cj = cur / w;
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    const int ni = ci + di;
                    const int nj = cj + dj;
                    if (ni < 0 || nj < 0 || ni >= w || nj >= h) continue;
                    const int n = nj * w + ni;
                    if (mask[static_cast<std::size_t>(n)] && label[static_cast<std::size_t>(n)] < 0) {
                        label[static_cast<std::size_t>(n)] = next;
                        q.push(n);
                    }
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best = next;
        }
        ++next;
    }
    return {std::move(label), best};
}

double signed_area(const std::vector<Vec2>& loop) {
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec2& p = loop[i];
        const Vec2& q = loop[(i + 1) % loop.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

}  // namespace

std::vector<Vec2> resample_closed(const std::vector<Vec2>& loop, std::size_t count) {
    if (loop.empty() || count == 0) return {};
    const std::size_t n = loop.size();
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + (loop[(i + 1) % n] - loop[i]).norm();
    const double perimeter = cum[n];
    std::vector<Vec2> out;
    out.reserve(count);
    if (!(perimeter > 0.0)) {
        out.assign(count, loop.front());
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double s = perimeter * static_cast<double>(k) / static_cast<double>(count);
        while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
        out.push_back(loop[seg] + t * (loop[(seg + 1) % n] - loop[seg]));
    }
    return out;
}

PointSet2D extract_silhouette(const ScalarMap2D& L, const SilhouetteParams& params) {
    if (!(params.threshold_fraction > 0.0 && params.threshold_fraction < 1.0)) {
        throw DataError("threshold_fraction must be in (0, 1)");
    }
    const double max = L.max_value();
    if (!(max > 0.0)) throw NumericalError("all-zero map has no silhouette");
    const double thr = params.threshold_fraction * max;
    const int w = L.width;
    const int h = L.height;

    std::vector<char> mask(L.data.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = L.data[i] >= thr;
    const auto [label, keep] = largest_component(mask, w, h);

    // Padded field: nodes of other components are zeroed so only the kept
    // component produces iso-lines; the one-node border closes every loop.
    const int pw = w + 2;
    const int ph = h + 2;
    std::vector<double> F(static_cast<std::size_t>(pw) * ph, 0.0);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const std::size_t src = static_cast<std::size_t>(j) * w + i;
            const bool other = mask[src] && label[src] != keep;
            F[static_cast<std::size_t>(j + 1) * pw + (i + 1)] = other ? 0.0 : L.data[src];
        }
    }
    auto val = [&](int i, int j) { return F[static_cast<std::size_t>(j) * pw + i]; };
    auto inside = [&](int i, int j) { return val(i, j) >= thr; };

    // Crossing points keyed by edge id; node (i, j) owns horizontal edge 2k
    // toward (i+1, j) and vertical edge 2k+1 toward (i, j+1), k = j*pw + i.
    std::map<long long, Vec2> crossing;
    std::map<long long, std::vector<long long>> links;
    auto edge_point = [&](int ia, int ja, int ib, int jb) {
        const double fa = val(ia, ja);
        const double fb = val(ib, jb);
        const double t = (thr - fa) / (fb - fa);
        // Padded index -> map pixel coordinate.
        return Vec2(ia - 1 + t * (ib - ia), ja - 1 + t * (jb - ja));
    };
    auto edge = [&](int cell_i, int cell_j, int e) -> long long {
        const long long k0 = static_cast<long long>(cell_j) * pw + cell_i;
        switch (e) {
            case 0: return 2 * k0;                                   // bottom
            case 1: return 2 * (k0 + 1) + 1;                         // right
            case 2: return 2 * (k0 + pw);                            // top
            default: return 2 * k0 + 1;                              // left
        }
    };
    auto add_crossing = [&](int ci, int cj, int e) {
        const long long id = edge(ci, cj, e);
        if (!crossing.count(id)) {
            switch (e) {
                case 0: crossing[id] = edge_point(ci, cj, ci + 1, cj); break;
                case 1: crossing[id] = edge_point(ci + 1, cj, ci + 1, cj + 1); break;
                case 2: crossing[id] = edge_point(ci, cj + 1, ci + 1, cj + 1); break;
                default: crossing[id] = edge_point(ci, cj, ci, cj + 1); break;
            }
        }
        return id;
    };
    auto connect = [&](int ci, int cj, int ea, int eb) {
        const long long a = add_crossing(ci, cj, ea);
        const long long b = add_crossing(ci, cj, eb);
        links[a].push_back(b);
        links[b].push_back(a);
    };

    for (int cj = 0; cj + 1 < ph; ++cj) {
        for (int ci = 0; ci + 1 < pw; ++ci) {
            const bool c0 = inside(ci, cj);
            const bool c1 = inside(ci + 1, cj);
            const bool c2 = inside(ci + 1, cj + 1);
            const bool c3 = inside(ci, cj + 1);
            const int code = c0 | (c1 << 1) | (c2 << 2) | (c3 << 3);
            if (code == 0 || code == 15) continue;
            const bool centre =
                0.25 * (val(ci, cj) + val(ci + 1, cj) + val(ci + 1, cj + 1) + val(ci, cj + 1)) >= thr;
            switch (code) {
                case 1: case 14: connect(ci, cj, 3, 0); break;
                case 2: case 13: connect(ci, cj, 0, 1); break;
                case 4: case 11: connect(ci, cj, 1, 2); break;
                case 8: case 7: connect(ci, cj, 2, 3); break;
                case 3: case 12: connect(ci, cj, 3, 1); break;
                case 6: case 9: connect(ci, cj, 0, 2); break;
                case 5:  // c0, c2 inside
                    if (centre) { connect(ci, cj, 0, 1); connect(ci, cj, 2, 3); }
                    else { connect(ci, cj, 3, 0); connect(ci, cj, 1, 2); }
                    break;
                case 10:  // c1, c3 inside
                    if (centre) { connect(ci, cj, 3, 0); connect(ci, cj, 1, 2); }
                    else { connect(ci, cj, 0, 1); connect(ci, cj, 2, 3); }
                    break;
                default: break;
            }
        }
    }

    std::vector<Vec2> best_loop;
    double best_area = 0.0;
    std::map<long long, bool> visited;
    for (const auto& [start, pt] : crossing) {
        if (visited[start]) continue;
        std::vector<Vec2> loop;
        long long prev = -1;
        long long cur = start;
        for (;;) {
            visited[cur] = true;
            loop.push_back(crossing[cur]);
            const auto& nb = links[cur];
            long long next = -1;
            for (long long cand : nb) {
                if (cand != prev && !visited[cand]) {
                    next = cand;
                    break;
                }
            }
            if (next < 0) break;
            prev = cur;
            cur = next;
        }
        const double area = std::abs(signed_area(loop));
        if (loop.size() >= 3 && area > best_area) {
            best_area = area;
            best_loop = std::move(loop);
        }
    }
    if (best_loop.empty()) throw NumericalError("silhouette boundary could not be traced");

    if (signed_area(best_loop) < 0.0) std::reverse(best_loop.begin(), best_loop.end());
    const auto first = std::min_element(best_loop.begin(), best_loop.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    std::rotate(best_loop.begin(), first, best_loop.end());
    // Drop repeated vertices produced where the iso-line passes through a node.
    std::vector<Vec2> clean;
    clean.reserve(best_loop.size());
    for (const auto& p : best_loop) {
        if (clean.empty() || (p - clean.back()).norm() > 1e-12) clean.push_back(p);
    }
    if (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12) clean.pop_back();

    PointSet2D out;
    out.kind = PointSetKind::ios_silhouette;
    out.points = params.target_count ? resample_closed(clean, *params.target_count) : std::move(clean);
    return out;
}

}  // namespace cephreg::drr
