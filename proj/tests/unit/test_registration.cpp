#include <doctest.h>

#include <random>

#include "cephreg/distance_field.hpp"
#include "cephreg/registration.hpp"
#include "cephreg/synth.hpp"
#include "oracles.hpp"

using namespace cephreg;
using namespace cephreg::reg;

namespace {

PointSet2D set_of(std::vector<Vec2> pts, Jaw jaw = Jaw::upper) {
    PointSet2D s;
    s.points = std::move(pts);
    s.label = jaw;
    return s;
}

SimilarityTransform2D make_t(double s, double theta, double tx, double ty) {
    SimilarityTransform2D t;
    t.s = s;
    t.theta = theta;
    t.tx = tx;
    t.ty = ty;
    return t;
}

// Silhouette of a small synthetic arch, in detector pixels.
const PointSet2D& arch_silhouette() {
    static const PointSet2D sil = [] {
        const auto arch = synth::make_arch_mesh(synth::ArchType::ovoid, 14, 3);
        drr::SilhouetteParams sp;
        sp.target_count = 441;
        return synth::render_silhouette(arch.mesh, arch.truth, DetectorGeometry{}, drr::SplatParams{}, sp);
    }();
    return sil;
}

}  // namespace

TEST_CASE("similarity transform examples") {
    CHECK(apply_similarity(make_t(1, 0, 0, 0), Vec2(3, 4)) == Vec2(3, -4));
    CHECK(apply_similarity(make_t(2, 0, 1, 1), Vec2(1, 1)) == Vec2(3, -1));
    CHECK((apply_similarity(make_t(1, M_PI / 2, 0, 0), Vec2(1, 0)) - Vec2(0, 1)).norm() < 1e-15);
    // The flip alone is an involution.
    const Vec2 p(2.5, -7.25);
    CHECK(apply_similarity(make_t(1, 0, 0, 0), apply_similarity(make_t(1, 0, 0, 0), p)) == p);
    const SimilarityTransform2D t = make_t(1.3, 0.4, -12, 40);
    CHECK((t.inverse_apply(t.apply(p)) - p).norm() < 1e-12);
    CHECK_THROWS(make_t(0.0, 0, 0, 0).validate());
    CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("chamfer and one-sided losses") {
    const auto a = set_of({{0, 0}});
    const auto b = set_of({{3, 4}});
    CHECK(chamfer_loss(a, b) == 10.0);
    CHECK(one_sided_loss(a, b) == 5.0);
    CHECK(chamfer_loss(a, a) == 0.0);
    CHECK(chamfer_loss(set_of({{0, 0}, {10, 0}}), set_of({{0, 0}})) == 5.0);
    CHECK_THROWS_AS(chamfer_loss(set_of({}), b), DataError);

    // A dense superset hides the uncovered part from the one-sided term.
    std::vector<Vec2> dense;
    for (int k = 0; k <= 100; ++k) dense.emplace_back(k, 0);
    const auto part = set_of({{10, 0}, {11, 0}, {12, 0}});
    CHECK(one_sided_loss(part, set_of(dense)) == 0.0);
    CHECK(chamfer_loss(part, set_of(dense)) > 10.0);

    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
        const auto x = set_of(oracle::random_points(rng, 1 + k * 7));
        const auto y = set_of(oracle::random_points(rng, 3 + k * 5));
        CHECK(chamfer_loss(x, y) == doctest::Approx(chamfer_loss(y, x)).epsilon(1e-12));
        CHECK(chamfer_loss(x, y) >= 0.0);
    }
    // Mirror-symmetric equal-size sets: both directed means coincide.
    const auto s1 = set_of({{-1, 0}, {1, 0}, {0, 3}});
    const auto s2 = set_of({{-1, 1}, {1, 1}, {0, 5}});
    CHECK(one_sided_loss(s1, s2) == doctest::Approx(chamfer_loss(s1, s2) / 2.0));
}

TEST_CASE("bounding-box initialization") {
    // CR square 100x100 centred at (150, 100); flipped IOS square 50x50 at (25, 25).
    const auto cr = set_of({{100, 50}, {200, 50}, {200, 150}, {100, 150}});
    const auto ios = set_of({{0, 0}, {50, 0}, {50, -50}, {0, -50}});
    const SimilarityTransform2D t = initialize(ios, cr);
    CHECK(t.s == doctest::Approx(2.0));
    CHECK(t.theta == 0.0);
    CHECK(t.tx == doctest::Approx(100.0));
    CHECK(t.ty == doctest::Approx(50.0));

    const auto flipped = apply_similarity(make_t(1, 0, 0, 0), cr);
    const SimilarityTransform2D id = initialize(flipped, cr);
    CHECK(id.s == doctest::Approx(1.0));
    CHECK(std::abs(id.tx) < 1e-12);
    CHECK(std::abs(id.ty) < 1e-12);

    std::vector<Vec2> big;
    for (const auto& p : flipped.points) big.push_back(3.0 * p);
    CHECK(initialize(set_of(big), cr).s == doctest::Approx(1.0 / 3.0));

    // Degenerate extents.
    const auto line_cr = set_of({{0, 0}, {10, 0}});
    const auto line_ios = set_of({{0, 0}, {5, 0}});
    CHECK(initialize(line_ios, line_cr).s == doctest::Approx(2.0));
    CHECK(initialize(set_of({{1, 1}}), set_of({{5, 5}})).s == 1.0);
}

TEST_CASE("distance field") {
    std::mt19937_64 rng(13);
    const auto pts = oracle::random_points(rng, 300, 20.0, 180.0);
    const DistanceField2D f = DistanceField2D::build(pts);
    for (const auto& p : pts) CHECK(f.query(p) == 0.0);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    for (int k = 0; k < 2000; ++k) {
        const Vec2 q(u(rng), u(rng));
        const double exact = oracle::nearest(q, pts);
        CHECK(f.exact(q) == doctest::Approx(exact).epsilon(1e-12));
        CHECK(std::abs(f.query(q) - exact) <= 0.71);
        CHECK(f.query(q) >= 0.0);
    }
    // Node distances are 1-Lipschitz up to rasterization slack.
    const Lattice& L = f.lattice();
    for (int j = 0; j < L.height; ++j) {
        for (int i = 0; i + 1 < L.width; ++i) {
            CHECK(std::abs(f.node_distance(i + 1, j) - f.node_distance(i, j)) <= 1.5);
        }
    }
    // Off-lattice queries fall back to exact distances.
    const Vec2 far(5000, -3000);
    CHECK(f.query(far) == doctest::Approx(oracle::nearest(far, pts)));
}

TEST_CASE("schedules") {
    const double diag = std::hypot(703.0, 938.0);
    const Schedule s = Schedule::three_stage(diag);
    REQUIRE(s.stages.size() == 3);
    CHECK(s.stages[0].name == "coarse");
    CHECK(s.stages[0].scale.hi == doctest::Approx(0.3));
    CHECK(s.stages[0].theta.hi == doctest::Approx(15.0 * M_PI / 180.0));
    CHECK(s.stages[0].tx.hi == doctest::Approx(0.25 * diag));
    CHECK(s.stages[0].iterations == 40);
    CHECK(s.stages[1].iterations == 30);
    CHECK(s.stages[2].iterations == 20);
    CHECK(s.stages[2].ty.hi == doctest::Approx(0.01 * diag));
    for (const auto& st : s.stages) CHECK(st.samples_per_iter == 64);
    CHECK_NOTHROW(s.validate());
    const Schedule one = Schedule::single_stage(diag);
    REQUIRE(one.stages.size() == 1);
    CHECK(one.stages[0].iterations == 80);

    Schedule bad = s;
    std::swap(bad.stages[0], bad.stages[2]);
    CHECK_THROWS(bad.validate());
    StageSpec empty_range = s.stages[0];
    empty_range.theta = ParamRange{0.1, 0.1};
    CHECK_THROWS(empty_range.validate());
    StageSpec zero_iter = s.stages[0];
    zero_iter.iterations = 0;
    CHECK_THROWS(zero_iter.validate());
}

TEST_CASE("optimize_stage keeps an optimal incumbent") {
    const PointSet2D& sil = arch_silhouette();
    const SimilarityTransform2D truth = make_t(1.1, 0.05, 300, 500);
    const PointSet2D cr = apply_similarity(truth, sil);
    const Objective obj(cr, sil, LossKind::symmetric);
    CHECK(obj.exact(truth) < 1e-9);
    const StageResult r = optimize_stage(obj, truth, Schedule::three_stage(1000).stages[0], 7);
    CHECK(r.loss < 1e-9);
    CHECK(std::abs(r.transform.s - truth.s) < 1e-9);
    CHECK(std::abs(r.transform.tx - truth.tx) < 1e-6);
}

TEST_CASE("optimize_stage improves on a perturbed start and is deterministic") {
    const PointSet2D& sil = arch_silhouette();
    const SimilarityTransform2D truth = make_t(1.2, 0.1, 20 + 350, -15 + 420);
    const PointSet2D cr = apply_similarity(truth, sil);
    const Objective obj(cr, sil, LossKind::symmetric);
    const SimilarityTransform2D start = initialize(sil, cr);
    const double before = obj.exact(start);
    const StageSpec coarse = Schedule::three_stage(std::hypot(703.0, 938.0)).stages[0];
    const StageResult a = optimize_stage(obj, start, coarse, 42);
    const StageResult b = optimize_stage(obj, start, coarse, 42);
    CHECK(a.loss < before);
    CHECK(a.loss == b.loss);
    CHECK(a.transform.s == b.transform.s);
    CHECK(a.transform.theta == b.transform.theta);
    CHECK(a.transform.tx == b.transform.tx);
    CHECK(a.transform.ty == b.transform.ty);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("approximate objective matches exact at the truth") {
    const PointSet2D& sil = arch_silhouette();
    const SimilarityTransform2D truth = make_t(0.9, -0.1, 350, 600);
    const PointSet2D cr = apply_similarity(truth, sil);
    for (auto kind : {LossKind::symmetric, LossKind::one_sided}) {
        const Objective obj(cr, sil, kind, Lattice{0, 0, 703, 938});
        CHECK(obj.approx(truth) < 1e-9);
        const SimilarityTransform2D off = make_t(0.92, -0.09, 353, 598);
        CHECK(std::abs(obj.approx(off) - obj.exact(off)) < 0.71 * (kind == LossKind::symmetric ? 2.2 : 1.0));
    }
    const Objective sym(cr, sil, LossKind::symmetric);
    const SimilarityTransform2D off = make_t(0.95, 0.0, 340, 610);
    CHECK(sym.exact(off) == doctest::Approx(chamfer_loss(apply_similarity(off, sil), cr)).epsilon(1e-12));
    const Objective one(cr, sil, LossKind::one_sided);
    CHECK(one.exact(off) == doctest::Approx(one_sided_loss(apply_similarity(off, sil), cr)).epsilon(1e-12));
}

TEST_CASE("register_silhouette recovers a synthetic transform") {
    const PointSet2D& sil = arch_silhouette();
    const SimilarityTransform2D truth = make_t(1.15, 0.12, 330, 470);
    const PointSet2D cr = apply_similarity(truth, sil);
    RegistrationOptions o;
    o.schedule = Schedule::three_stage(std::hypot(703.0, 938.0));
    o.seed = 3;
    o.cr_image = Lattice{0, 0, 703, 938};
    const RegistrationResult r = register_silhouette(cr, sil, o);
    REQUIRE(r.trace.size() == 3);
    CHECK(r.final_loss <= r.initial_loss);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].loss <= r.trace[k - 1].loss);
    double err = 0.0;
    for (const auto& p : sil.points) err += (r.transform.apply(p) - truth.apply(p)).norm();
    CHECK(err / static_cast<double>(sil.size()) < 0.5);

    const RegistrationResult again = register_silhouette(cr, sil, o);
    CHECK(again.final_loss == r.final_loss);
    CHECK(again.transform.tx == r.transform.tx);

    RegistrationOptions none = o;
    none.schedule = Schedule::none();
    const RegistrationResult init = register_silhouette(cr, sil, none);
    CHECK(init.trace.empty());
    CHECK(init.transform.s == initialize(sil, cr).s);
    CHECK(init.transform.tx == initialize(sil, cr).tx);
}

TEST_CASE("translating the CR contour shifts only the translation") {
    const PointSet2D& sil = arch_silhouette();
    const SimilarityTransform2D truth = make_t(1.05, -0.08, 340, 480);
    const PointSet2D cr = apply_similarity(truth, sil);
    PointSet2D moved = cr;
    const Vec2 delta(37, -21);
    for (auto& p : moved.points) p += delta;
    RegistrationOptions o;
    o.schedule = Schedule::three_stage(std::hypot(703.0, 938.0));
    o.seed = 11;
    const RegistrationResult a = register_silhouette(cr, sil, o);
    const RegistrationResult b = register_silhouette(moved, sil, o);
    CHECK(std::abs(a.transform.s - b.transform.s) < 1e-6);
    CHECK(std::abs(a.transform.theta - b.transform.theta) < 1e-6);
    CHECK(std::abs(b.transform.tx - a.transform.tx - delta.x()) < 1e-3);
    CHECK(std::abs(b.transform.ty - a.transform.ty - delta.y()) < 1e-3);
}
