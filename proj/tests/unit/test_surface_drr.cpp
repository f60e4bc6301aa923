#include <doctest.h>

#include <algorithm>
#include <random>

#include "cephreg/surface_drr.hpp"
#include "cephreg/synth.hpp"
#include "cephreg/umda_frame.hpp"
#include "oracles.hpp"

using namespace cephreg;
using namespace cephreg::drr;

namespace {

DetectorGeometry simple_geometry() {
    DetectorGeometry g;
    g.source_x = -1000.0;
    g.detector_x = 500.0;
    g.pixel_spacing = 1.0;
    g.image_width = 200;
    g.image_height = 200;
    g.detector_origin_uv = Vec2(100, 100);
    return g;
}

ScalarMap2D disk_map(int w, int h, Vec2 c, double r) {
    ScalarMap2D m(w, h, MapMeaning::thickness);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) m.at(i, j) = (Vec2(i, j) - c).norm() <= r ? 1.0 : 0.0;
    return m;
}

}  // namespace

TEST_CASE("projection closed forms") {
    const DetectorGeometry g = simple_geometry();
    const Projection p = project_point(Vec3(0, 10, 20), g);
    CHECK(p.magnification == 1.5);
    CHECK(p.detector_mm == Vec2(15, 30));
    CHECK(p.pixel == Vec2(115, 130));
    CHECK(project_point(Vec3(500, 3, 4), g).magnification == 1.0);
    CHECK(project_point(Vec3(0, 1, 1), g).magnification == doctest::Approx(1.5));
    CHECK(project_point(Vec3(250, 1, 1), g).magnification == doctest::Approx(1.2));
    CHECK_THROWS_AS(project_point(Vec3(-1000, 0, 0), g), NumericalError);
    CHECK_THROWS_AS(project_point(Vec3(-2000, 0, 0), g), NumericalError);
}

TEST_CASE("magnification decreases with depth") {
    const DetectorGeometry g = simple_geometry();
    double prev = magnification(-999.0, g);
    for (double x = -900.0; x < 1000.0; x += 50.0) {
        const double t = magnification(x, g);
        CHECK(t < prev);
        CHECK(t == doctest::Approx((g.detector_x - g.source_x) / (x - g.source_x)));
        prev = t;
    }
}

TEST_CASE("project_vertices counts vertices behind the source") {
    DetectorGeometry g = simple_geometry();
    TriangleMesh m = make_mesh({{-1200, 0, 0}, {-1300, 1, 0}, {0, 0, 1}}, {{0, 1, 2}});
    try {
        project_vertices(m, g);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
}

TEST_CASE("splat kernel values and linearity") {
    DetectorGeometry g = simple_geometry();
    SplatParams p;
    p.sigma_px = 1.0;
    Projection a;
    a.pixel = Vec2(50, 60);
    a.weight = 1.0;
    const ScalarMap2D one = splat({a}, g, p);
    CHECK(one.at(50, 60) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.at(51, 60) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(one.at(50, 61) == doctest::Approx(0.6065306597).epsilon(1e-9));
    CHECK(one.at(54, 60) == 0.0);  // beyond 3 sigma
    const ScalarMap2D two = splat({a, a}, g, p);
    CHECK(two.at(50, 60) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(splat({}, g, p).max_value() == 0.0);
}

TEST_CASE("splat mass and permutation invariance") {
    DetectorGeometry g = simple_geometry();
    SplatParams p;
    p.sigma_px = 1.5;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(30.0, 170.0), w(0.1, 2.0);
    std::vector<Projection> pts(100);
    double mass = 0.0;
    for (auto& q : pts) {
        q.pixel = Vec2(u(rng), u(rng));
        q.weight = w(rng);
        mass += q.weight * 2.0 * M_PI * p.sigma_px * p.sigma_px;
    }
    const ScalarMap2D L = splat(pts, g, p);
    double sum = 0.0;
    for (double v : L.data) sum += v;
    CHECK(std::abs(sum - mass) / mass < 0.01);

    std::shuffle(pts.begin(), pts.end(), rng);
    const ScalarMap2D L2 = splat(pts, g, p);
    for (std::size_t i = 0; i < L.data.size(); ++i) CHECK(std::abs(L.data[i] - L2.data[i]) <= 1e-9);
}

TEST_CASE("Beer-Lambert intensity") {
    SplatParams p;
    ScalarMap2D L(3, 1, MapMeaning::thickness);
    L.data = {0.0, std::log(2.0) / p.mu0, 5.0};
    const ScalarMap2D I = intensity(L, p);
    CHECK(I.meaning == MapMeaning::intensity);
    CHECK(I.data[0] == p.I0);
    CHECK(I.data[1] == doctest::Approx(p.I0 / 2.0).epsilon(1e-12));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    ScalarMap2D R(50, 50, MapMeaning::thickness);
    for (auto& v : R.data) v = u(rng);
    const ScalarMap2D IR = intensity(R, p);
    for (int k = 0; k + 1 < 2500; ++k) {
        if (R.data[k] < R.data[k + 1]) CHECK(IR.data[k] > IR.data[k + 1]);
        CHECK(IR.data[k] > 0.0);
        CHECK(IR.data[k] <= p.I0);
    }
}

TEST_CASE("silhouette of a disk") {
    const Vec2 c(100.3, 90.7);
    const ScalarMap2D m = disk_map(200, 200, c, 50.0);
    const PointSet2D s = extract_silhouette(m);
    REQUIRE(s.size() > 100);
    double err = 0.0;
    for (const auto& p : s.points) err += std::abs((p - c).norm() - 50.0);
    CHECK(err / static_cast<double>(s.size()) < 1.0);

    SilhouetteParams sp;
    sp.target_count = 441;
    CHECK(extract_silhouette(m, sp).size() == 441);
}

TEST_CASE("silhouette keeps the largest component") {
    ScalarMap2D m = disk_map(200, 200, Vec2(60, 60), 30.0);
    const ScalarMap2D small = disk_map(200, 200, Vec2(160, 160), 10.0);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = std::max(m.data[i], small.data[i]);
    const PointSet2D s = extract_silhouette(m);
    for (const auto& p : s.points) CHECK((p - Vec2(60, 60)).norm() < 32.0);
}

TEST_CASE("all-zero map has no silhouette") {
    CHECK_THROWS_AS(extract_silhouette(ScalarMap2D(10, 10, MapMeaning::thickness)), NumericalError);
}

TEST_CASE("rendering invariants on a synthetic arch") {
    const auto arch = synth::make_arch_mesh(synth::ArchType::ovoid, 8, 4);
    const AnatomicalFrame f = arch.truth;
    const DetectorGeometry g;
    SplatParams p;
    const TriangleMesh m = umda::to_projection_coords(arch.mesh, f);
    const ScalarMap2D L = render_thickness(m, g, p);
    const PointSet2D s = extract_silhouette(L);
    CHECK(s.size() > 50);

    // Doubling the density doubles L and leaves the silhouette unchanged.
    SplatParams p2 = p;
    p2.rho0 = 2.0;
    const ScalarMap2D L2 = render_thickness(m, g, p2);
    for (std::size_t i = 0; i < L.data.size(); ++i) CHECK(std::abs(L2.data[i] - 2.0 * L.data[i]) <= 1e-9 * (1.0 + L.data[i]));
    const PointSet2D s2 = extract_silhouette(L2);
    REQUIRE(s2.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK((s2.points[i] - s.points[i]).norm() < 1e-9);
}

TEST_CASE("lateral translation at fixed depth shifts the projection") {
    const DetectorGeometry g;
    const double delta = 2.0;
    for (double x : {-20.0, 0.0, 35.0}) {
        const Projection a = project_point(Vec3(x, 3, -4), g);
        const Projection b = project_point(Vec3(x, 3 + delta, -4), g);
        CHECK((b.pixel - a.pixel - Vec2(a.magnification * delta / g.pixel_spacing, 0)).norm() < 1e-9);
    }
}

TEST_CASE("arc-length resampling") {
    const std::vector<Vec2> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    const auto r = resample_closed(square, 8);
    REQUIRE(r.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK((r[(i + 1) % 8] - r[i]).norm() == doctest::Approx(2.0));
}

TEST_CASE("splat parameter validation") {
    SplatParams p;
    p.sigma_px = 0.0;
    CHECK_THROWS(p.validate());
    p = SplatParams{};
    p.mu0 = -1.0;
    CHECK_THROWS(p.validate());
}
