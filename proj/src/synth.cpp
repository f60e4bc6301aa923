#include "cephreg/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "random_util.hpp"
#include "text_util.hpp"

#include "cephreg/metrics.hpp"
#include "cephreg/umda_frame.hpp"

namespace cephreg::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Nominal mesio-distal widths (mm) of teeth 1..7 from the midline.
constexpr std::array<double, 7> kToothWidth = {8.5, 6.5, 7.5, 7.0, 6.5, 10.0, 9.0};
// Half bucco-lingual depth per tooth.
constexpr std::array<double, 7> kToothHalfDepth = {3.0, 3.0, 4.0, 4.2, 4.2, 5.0, 5.0};
// Crown dome height per tooth.
constexpr std::array<double, 7> kDome = {0.8, 0.8, 1.4, 1.2, 1.2, 1.0, 1.0};

double exponent_of(ArchType type) {
    switch (type) {
        case ArchType::tapered: return 1.6;
        case ArchType::ovoid: return 2.2;
        case ArchType::square: return 3.5;
    }
    return 2.2;
}

// Global dimensions and pose, drawn in a fixed order from the seed so that
// both jaws of a case agree.
struct Draw {
    double width;
    double depth;
    double crown_height;
    double gap;
    Eigen::Matrix3d pose_r;
    Vec3 pose_t;
};

Draw draw(std::uint64_t seed, const ArchOptions& opt) {
    auto rng = detail::make_rng(seed, 0x5157);
    Draw d;
    d.width = detail::uniform(rng, 50.0, 58.0);
    d.depth = detail::uniform(rng, 38.0, 46.0);
    d.crown_height = detail::uniform(rng, 7.5, 9.0);
    d.gap = detail::uniform(rng, 0.5, 1.5);
    Vec3 axis(detail::normal01(rng), detail::normal01(rng), detail::normal01(rng));
    if (axis.norm() < 1e-9) axis = Vec3::UnitZ();
    const double angle = detail::uniform(rng, 0.0, opt.max_pose_deg) * kPi / 180.0;
    d.pose_r = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    for (int i = 0; i < 3; ++i) d.pose_t[i] = detail::uniform(rng, -opt.max_offset_mm, opt.max_offset_mm);
    return d;
}

// Half arch x = (W/2) u, y = -D (1 - u^n), u in [0, 1]; tabulated by arc length.
struct ArchCurve {
    double half_width;
    double depth;
    double n;
    std::vector<double> u;
    std::vector<double> s;

    ArchCurve(double w, double d, double exponent) : half_width(w / 2), depth(d), n(exponent) {
        const int samples = 4000;
        u.resize(samples + 1);
        s.resize(samples + 1);
        for (int i = 0; i <= samples; ++i) {
            u[i] = static_cast<double>(i) / samples;
            s[i] = i == 0 ? 0.0 : s[i - 1] + (point(u[i]) - point(u[i - 1])).norm();
        }
    }
    Vec2 point(double uu) const { return {half_width * uu, -depth * (1.0 - std::pow(uu, n))}; }
    double length() const { return s.back(); }
    double u_at(double arc) const {
        const auto it = std::lower_bound(s.begin(), s.end(), arc);
        if (it == s.begin()) return 0.0;
        if (it == s.end()) return 1.0;
        const std::size_t i = static_cast<std::size_t>(it - s.begin());
        const double f = (arc - s[i - 1]) / (s[i] - s[i - 1]);
        return u[i - 1] + f * (u[i] - u[i - 1]);
    }
};

struct ToothPlacement {
    int number;       // 1..7 from the midline
    bool right;       // patient right (+x)
    Vec2 centre;
    Vec2 distal;      // unit tangent pointing away from the midline
    Vec2 buccal;      // unit in-plane normal pointing out of the arch
    double half_len;  // along distal
    double half_dep;  // along buccal
    double dome;
};

std::vector<ToothPlacement> place_teeth(const ArchCurve& curve, int per_side) {
    double nominal = 0.0;
    for (int k = 0; k < per_side; ++k) nominal += kToothWidth[k];
    // Teeth of a shortened dentition still span the arch proportionally.
    const double scale = curve.length() * (static_cast<double>(per_side) / 7.0 * 0.5 + 0.5) / nominal;
    std::vector<ToothPlacement> teeth;
    for (int side = 0; side < 2; ++side) {
        const bool right = side == 0;
        double arc = 0.0;
        for (int k = 0; k < per_side; ++k) {
            const double w = kToothWidth[k] * scale;
            const double uc = curve.u_at(arc + 0.5 * w);
            arc += w;
            const double du = 1e-5;
            const double ua = std::max(0.0, uc - du), ub = std::min(1.0, uc + du);
            Vec2 tan = (curve.point(ub) - curve.point(ua)).normalized();
            Vec2 c = curve.point(uc);
            if (!right) {
                c.x() = -c.x();
                tan.x() = -tan.x();
            }
            ToothPlacement t;
            t.number = k + 1;
            t.right = right;
            t.centre = c;
            t.distal = tan;
            // Out of the arch: the side of the tangent facing away from the
            // arch interior (+y of the curve).
            Vec2 nrm(tan.y(), -tan.x());
            if (!right) nrm = -nrm;
            t.buccal = nrm;
            t.half_len = 0.46 * w;
            t.half_dep = kToothHalfDepth[k];
            t.dome = kDome[k];
            teeth.push_back(t);
        }
    }
    return teeth;
}

// A tooth is an open-bottom box: a domed top height field plus four walls
// down to z = 0. Local axes e1 = distal, e2 = z x e1 keep the top facing +z.
class ToothBuilder {
public:
    ToothBuilder(std::vector<Vec3>& v, std::vector<Face>& f) : verts_(v), faces_(f) {}

    void add(const ToothPlacement& t, double crown_height, double grid) {
        const Vec2 e1 = t.distal;
        const Vec2 e2(-e1.y(), e1.x());
        const double wall = crown_height - t.dome;
        const int nx = std::max(2, static_cast<int>(std::ceil(2 * t.half_len / grid)));
        const int ny = std::max(2, static_cast<int>(std::ceil(2 * t.half_dep / grid)));
        const int nz = std::max(1, static_cast<int>(std::ceil(wall / grid)));
        auto top_point = [&](double xi, double eta) {
            const Vec2 p = t.centre + t.half_len * xi * e1 + t.half_dep * eta * e2;
            const double z = wall + t.dome * (1 - xi * xi) * (1 - eta * eta);
            return Vec3(p.x(), p.y(), z);
        };
        const std::uint32_t base = static_cast<std::uint32_t>(verts_.size());
        auto top_id = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (nx + 1) + i); };
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) verts_.push_back(top_point(-1.0 + 2.0 * i / nx, -1.0 + 2.0 * j / ny));
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                faces_.push_back({top_id(i, j), top_id(i + 1, j), top_id(i + 1, j + 1)});
                faces_.push_back({top_id(i, j), top_id(i + 1, j + 1), top_id(i, j + 1)});
            }
        }
        // Boundary ring of the top grid, counter-clockwise seen from +z.
        std::vector<std::uint32_t> ring;
        for (int i = 0; i < nx; ++i) ring.push_back(top_id(i, 0));
        for (int j = 0; j < ny; ++j) ring.push_back(top_id(nx, j));
        for (int i = nx; i > 0; --i) ring.push_back(top_id(i, ny));
        for (int j = ny; j > 0; --j) ring.push_back(top_id(0, j));
        const std::size_t m = ring.size();
        std::vector<std::uint32_t> upper = ring;
        for (int r = 1; r <= nz; ++r) {
            const double z = wall * (1.0 - static_cast<double>(r) / nz);
            std::vector<std::uint32_t> lower(m);
            for (std::size_t k = 0; k < m; ++k) {
                const Vec3& p = verts_[ring[k]];
                lower[k] = static_cast<std::uint32_t>(verts_.size());
                verts_.emplace_back(p.x(), p.y(), z);
            }
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t k1 = (k + 1) % m;
                faces_.push_back({upper[k], lower[k], lower[k1]});
                faces_.push_back({upper[k], lower[k1], upper[k1]});
            }
            upper = std::move(lower);
        }
    }

    static Vec3 landmark(const ToothPlacement& t, double crown_height, double along, double out) {
        const Vec2 e1 = t.distal;
        const Vec2 e2(-e1.y(), e1.x());
        // Map (along distal, out buccal) to local (xi, eta).
        const double xi = along;
        const double eta = out * t.buccal.dot(e2);
        const Vec2 p = t.centre + t.half_len * xi * e1 + t.half_dep * eta * e2;
        const double wall = crown_height - t.dome;
        return {p.x(), p.y(), wall + t.dome * (1 - xi * xi) * (1 - eta * eta)};
    }

private:
    std::vector<Vec3>& verts_;
    std::vector<Face>& faces_;
};

}  // namespace

std::string_view to_string(ArchType type) {
    switch (type) {
        case ArchType::square: return "square";
        case ArchType::ovoid: return "ovoid";
        case ArchType::tapered: return "tapered";
    }
    return "ovoid";
}

ArchType parse_arch_type(std::string_view text) {
    if (text == "square") return ArchType::square;
    if (text == "ovoid") return ArchType::ovoid;
    if (text == "tapered") return ArchType::tapered;
    throw DataError("unknown arch type '" + std::string(text) + "'");
}

SynthArch make_arch_mesh(ArchType type, int n_teeth, std::uint64_t seed, Jaw jaw, const ArchOptions& options) {
    if (n_teeth <= 0 || n_teeth > 14 || n_teeth % 2 != 0) {
        throw DataError("n_teeth must be an even number in [2, 14]");
    }
    if (!(options.grid_mm > 0.0)) throw DataError("grid_mm must be positive");
    const Draw d = draw(seed, options);
    const double shrink = jaw == Jaw::upper ? 1.0 : 0.94;
    const ArchCurve curve(d.width * shrink, d.depth * shrink, exponent_of(type));
    const auto teeth = place_teeth(curve, n_teeth / 2);

    std::vector<Vec3> verts;
    std::vector<Face> faces;
    ToothBuilder builder(verts, faces);
    for (const auto& t : teeth) builder.add(t, d.crown_height, options.grid_mm);

    SynthArch arch;
    arch.jaw = jaw;
    arch.landmarks.dimension = 3;
    const std::string prefix = jaw == Jaw::upper ? "UR" : "LR";
    std::vector<std::pair<std::string, Vec3>> lms;
    for (const auto& t : teeth) {
        if (!t.right) continue;
        const std::string n = prefix + std::to_string(t.number);
        const double h = d.crown_height;
        switch (t.number) {
            case 1:
            case 2: lms.emplace_back(n + "_tip", ToothBuilder::landmark(t, h, 0.0, 0.0)); break;
            case 3:
            case 4:
            case 5: lms.emplace_back(n + "_cusp", ToothBuilder::landmark(t, h, 0.0, 0.0)); break;
            case 6:
                lms.emplace_back(n + "_MB", ToothBuilder::landmark(t, h, -0.5, 0.5));
                lms.emplace_back(n + "_DB", ToothBuilder::landmark(t, h, 0.5, 0.5));
                break;
            case 7: lms.emplace_back(n + "_MB", ToothBuilder::landmark(t, h, -0.5, 0.5)); break;
            default: break;
        }
    }

    // Lower jaw: mirrored so its crowns face the upper crowns across the gap.
    const double mirror_plane = 2.0 * d.crown_height + d.gap;
    auto place = [&](Vec3 p) {
        if (jaw == Jaw::lower) p.z() = mirror_plane - p.z();
        return Vec3(d.pose_r * p + d.pose_t);
    };
    for (auto& v : verts) v = place(v);
    if (jaw == Jaw::lower) {
        for (auto& f : faces) std::swap(f[1], f[2]);
    }
    arch.mesh = make_mesh(std::move(verts), std::move(faces));
    for (auto& [code, p] : lms) arch.landmarks.add(code, place(p));

    arch.truth.X = d.pose_r * Vec3(0.0, -1.0, 0.0);
    arch.truth.Z = d.pose_r * Vec3::UnitZ();
    arch.truth.Y = arch.truth.Z.cross(arch.truth.X);
    arch.truth.origin = umda::centroid(arch.mesh);
    return arch;
}

PointSet2D render_silhouette(const TriangleMesh& mesh, const AnatomicalFrame& frame, const DetectorGeometry& geom,
                             const drr::SplatParams& splat, const drr::SilhouetteParams& silhouette) {
    const TriangleMesh m = umda::to_projection_coords(mesh, frame);
    PointSet2D sil = drr::extract_silhouette(drr::render_thickness(m, geom, splat), silhouette);
    sil.kind = PointSetKind::ios_silhouette;
    return sil;
}

CaseData make_case(const SynthArch& arch, const DetectorGeometry& geom, const reg::SimilarityTransform2D& truth,
                   double cr_noise_px, std::uint64_t seed, const drr::SplatParams& splat, std::size_t contour_points) {
    if (cr_noise_px < 0.0) throw DataError("cr_noise_px must be nonnegative");
    CaseData c;
    drr::SilhouetteParams sp;
    sp.target_count = contour_points;
    c.silhouette = render_silhouette(arch.mesh, arch.truth, geom, splat, sp);
    c.silhouette.label = arch.jaw;
    c.cr_contour = reg::apply_similarity(truth, c.silhouette);
    c.cr_contour.kind = PointSetKind::cr_contour;
    if (cr_noise_px > 0.0) {
        auto rng = detail::make_rng(seed, arch.jaw == Jaw::upper ? 0x4e01 : 0x4e02);
        for (auto& p : c.cr_contour.points) {
            p.x() += cr_noise_px * detail::normal01(rng);
            p.y() += cr_noise_px * detail::normal01(rng);
        }
    }
    c.cr_landmarks.dimension = 2;
    for (const auto& [code, lm] : arch.landmarks.entries) {
        const Vec2 uv = metrics::project_landmark(lm.position, arch.truth, geom, truth);
        c.cr_landmarks.add(code, Vec3(uv.x(), uv.y(), 0.0));
    }
    return c;
}

reg::SimilarityTransform2D sample_true_transform(const PointSet2D& silhouette, const Lattice& image,
                                                 std::uint64_t seed) {
    require_usable(silhouette, "silhouette");
    auto rng = detail::make_rng(seed, 0x7a11);
    reg::SimilarityTransform2D t;
    t.s = detail::uniform(rng, 0.8, 1.3);
    t.theta = detail::uniform(rng, -10.0, 10.0) * kPi / 180.0;
    const Vec2 target(image.x0 + image.width * detail::uniform(rng, 0.25, 0.75),
                      image.y0 + image.height * detail::uniform(rng, 0.25, 0.75));
    Vec2 c = Vec2::Zero();
    for (const auto& p : silhouette.points) c += p;
    c /= static_cast<double>(silhouette.size());
    const Vec2 moved = t.apply(c);
    t.tx = target.x() - moved.x();
    t.ty = target.y() - moved.y();
    return t;
}

SynthCase make_full_case(const CaseOptions& o) {
    SynthCase c;
    c.options = o;
    c.upper.arch = make_arch_mesh(o.type, o.n_teeth, o.seed, Jaw::upper);
    c.lower.arch = make_arch_mesh(o.type, o.n_teeth, o.seed, Jaw::lower);
    drr::SilhouetteParams sp;
    sp.target_count = o.upper_points;
    const PointSet2D sil = render_silhouette(c.upper.arch.mesh, c.upper.arch.truth, o.geom, o.splat, sp);
    c.truth = sample_true_transform(sil, o.cr_image, o.seed);
    c.upper.data = make_case(c.upper.arch, o.geom, c.truth, o.cr_noise_px, o.seed, o.splat, o.upper_points);
    c.lower.data = make_case(c.lower.arch, o.geom, c.truth, o.cr_noise_px, o.seed, o.splat, o.lower_points);
    return c;
}

void write_case(const SynthCase& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_stl(c.upper.arch.mesh, dir / "mesh_upper.stl");
    save_stl(c.lower.arch.mesh, dir / "mesh_lower.stl");
    save_contour(c.upper.data.cr_contour, dir / "cr_contour_upper.txt");
    save_contour(c.lower.data.cr_contour, dir / "cr_contour_lower.txt");
    LandmarkSet cr;
    cr.dimension = 2;
    LandmarkSet mesh;
    mesh.dimension = 3;
    for (const JawCase* j : {&c.upper, &c.lower}) {
        for (const auto& [code, lm] : j->data.cr_landmarks.entries) cr.add(code, lm.position);
        for (const auto& [code, lm] : j->arch.landmarks.entries) mesh.add(code, lm.position);
    }
    save_landmarks(cr, dir / "cr_landmarks.txt");
    save_landmarks(mesh, dir / "mesh_landmarks.txt");
    save_geometry(c.options.geom, dir / "geometry.cfg");

    using detail::format_double;
    std::ostringstream t;
    t << "arch_type=" << to_string(c.options.type) << "\n";
    t << "n_teeth=" << c.options.n_teeth << "\n";
    t << "seed=" << c.options.seed << "\n";
    t << "cr_noise_px=" << format_double(c.options.cr_noise_px) << "\n";
    t << "cr_image_width=" << c.options.cr_image.width << "\n";
    t << "cr_image_height=" << c.options.cr_image.height << "\n";
    t << "s=" << format_double(c.truth.s) << "\n";
    t << "theta=" << format_double(c.truth.theta) << "\n";
    t << "tx=" << format_double(c.truth.tx) << "\n";
    t << "ty=" << format_double(c.truth.ty) << "\n";
    auto frame_line = [](const AnatomicalFrame& f) {
        std::string s = format_frame(f);
        std::replace(s.begin(), s.end(), '\n', ' ');
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    };
    t << "frame_upper=" << frame_line(c.upper.arch.truth) << "\n";
    t << "frame_lower=" << frame_line(c.lower.arch.truth) << "\n";
    write_file(dir / "truth.txt", t.str());
}

}  // namespace cephreg::synth
