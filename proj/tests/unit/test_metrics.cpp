#include <doctest.h>

#include <random>

#include "cephreg/metrics.hpp"
#include "cephreg/registration.hpp"
#include "cephreg/synth.hpp"
#include "oracles.hpp"

using namespace cephreg;
using namespace cephreg::metrics;

namespace {

PointSet2D set_of(std::vector<Vec2> pts, Jaw jaw = Jaw::upper) {
    PointSet2D s;
    s.points = std::move(pts);
    s.label = jaw;
    return s;
}

}  // namespace

TEST_CASE("directed mean, chamfer and Hausdorff examples") {
    CHECK(directed_mean(set_of({{0, 0}, {6, 8}}), set_of({{0, 0}})) == 5.0);
    CHECK(chamfer_metric(set_of({{0, 0}}), set_of({{3, 4}})) == 5.0);
    const Hausdorff h = hausdorff(set_of({{0, 0}, {1, 0}}), set_of({{0, 0}}));
    CHECK(h.ab == 1.0);
    CHECK(h.ba == 0.0);
    CHECK(h.symmetric == 1.0);
    const auto a = set_of({{1, 2}, {3, 5}, {-4, 0}});
    CHECK(directed_mean(a, a) == 0.0);
    CHECK(hausdorff(a, a).symmetric == 0.0);
    CHECK_THROWS_AS(directed_mean(set_of({}), a), DataError);
    CHECK_THROWS_AS(hausdorff(a, set_of({})), DataError);
}

TEST_CASE("metrics match brute force and satisfy the identities") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> n(1, 300);
    for (int k = 0; k < 40; ++k) {
        const auto a = oracle::random_points(rng, static_cast<std::size_t>(n(rng)));
        const auto b = oracle::random_points(rng, static_cast<std::size_t>(n(rng)));
        const double dab = oracle::directed_mean(a, b), dba = oracle::directed_mean(b, a);
        CHECK(std::abs(directed_mean(a, b) - dab) <= 1e-9);
        CHECK(std::abs(chamfer_metric(set_of(a), set_of(b)) - 0.5 * (dab + dba)) <= 1e-9);
        const Hausdorff h = hausdorff(a, b);
        CHECK(std::abs(h.ab - oracle::directed_max(a, b)) <= 1e-9);
        CHECK(std::abs(h.ba - oracle::directed_max(b, a)) <= 1e-9);
        CHECK(h.symmetric == std::max(h.ab, h.ba));
        CHECK(h.ab >= dab - 1e-12);
        CHECK(h.ba >= dba - 1e-12);
        CHECK(chamfer_metric(set_of(a), set_of(b)) <= h.symmetric + 1e-12);
        CHECK(std::abs(reg::chamfer_loss(set_of(a), set_of(b)) - 2.0 * chamfer_metric(set_of(a), set_of(b))) <= 1e-9);
    }
}

TEST_CASE("metrics are invariant under a shared rigid motion") {
    std::mt19937_64 rng(23);
    const auto a = oracle::random_points(rng, 120);
    const auto b = oracle::random_points(rng, 80);
    const Eigen::Rotation2Dd R(0.77);
    std::vector<Vec2> ra, rb;
    for (const auto& p : a) ra.push_back(R * p + Vec2(13, -8));
    for (const auto& p : b) rb.push_back(R * p + Vec2(13, -8));
    CHECK(std::abs(directed_mean(a, b) - directed_mean(ra, rb)) < 1e-9);
    CHECK(std::abs(hausdorff(a, b).symmetric - hausdorff(ra, rb).symmetric) < 1e-9);
}

TEST_CASE("landmark statistics") {
    LandmarkError e;
    e.code = "UR1_tip";
    e.error = 3.0;
    const LandmarkStats one = landmark_stats({e});
    CHECK(one.mean == 3.0);
    CHECK(one.rmse == 3.0);
    CHECK(one.std == 0.0);
    REQUIRE(one.group_inc_can.has_value());
    CHECK(!one.group_prem.has_value());
    CHECK(!one.group_molar.has_value());

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int k = 0; k < 50; ++k) {
        std::vector<LandmarkError> errs;
        for (const char* code : {"UR1_tip", "UR4_cusp", "UR6_MB", "LR7_MB", "LR3_cusp"}) {
            LandmarkError x;
            x.code = code;
            x.group = landmark_group(code);
            x.error = u(rng);
            errs.push_back(x);
        }
        const LandmarkStats s = landmark_stats(errs);
        CHECK(s.rmse >= s.mean - 1e-12);
        CHECK(s.rmse * s.rmse == doctest::Approx(s.mean * s.mean + s.std * s.std).epsilon(1e-9));
        CHECK(*s.group_prem == errs[1].error);
        CHECK(*s.group_molar == doctest::Approx(0.5 * (errs[2].error + errs[3].error)));
    }
}

TEST_CASE("landmark evaluation under the true transform is exact") {
    synth::CaseOptions o;
    o.seed = 8;
    const synth::SynthCase c = synth::make_full_case(o);
    const auto& up = c.upper;
    const LandmarkStats s = evaluate_landmarks(up.arch.landmarks, up.arch.truth, o.geom, c.truth, up.data.cr_landmarks);
    CHECK(s.errors.size() == up.arch.landmarks.size());
    CHECK(s.mean < 1e-9);

    // A one-pixel shift of the transform moves every landmark by one pixel.
    reg::SimilarityTransform2D shifted = c.truth;
    shifted.tx += 3.0;
    const LandmarkStats t = evaluate_landmarks(up.arch.landmarks, up.arch.truth, o.geom, shifted, up.data.cr_landmarks);
    CHECK(t.mean == doctest::Approx(3.0));
    CHECK(t.std < 1e-9);

    LandmarkSet disjoint;
    disjoint.dimension = 2;
    disjoint.add("LR1_tip", Vec3(1, 2, 0));
    CHECK_THROWS_AS(evaluate_landmarks(up.arch.landmarks, up.arch.truth, o.geom, c.truth, disjoint), DataError);
    CHECK_THROWS_AS(evaluate_landmarks(up.data.cr_landmarks, up.arch.truth, o.geom, c.truth, up.data.cr_landmarks),
                    DataError);
}

TEST_CASE("full report") {
    synth::CaseOptions o;
    o.seed = 9;
    const synth::SynthCase c = synth::make_full_case(o);
    std::vector<JawInput> in;
    for (const auto* j : {&c.upper, &c.lower}) {
        JawInput x;
        x.jaw = j->arch.jaw;
        x.cr_contour = j->data.cr_contour;
        x.ios_transformed = reg::apply_similarity(c.truth, j->data.silhouette);
        x.mesh_landmarks = j->arch.landmarks;
        x.cr_landmarks = j->data.cr_landmarks;
        x.frame = j->arch.truth;
        x.geom = o.geom;
        x.transform = c.truth;
        in.push_back(x);
    }
    const FullReport r = full_report(in);
    REQUIRE(r.jaws.size() == 2);
    CHECK(r.jaws[0].jaw == Jaw::upper);
    CHECK(r.jaws[1].jaw == Jaw::lower);
    for (const auto& j : r.jaws) {
        CHECK(j.contour.chamfer_bidir_mean < 1e-9);
        CHECK(j.contour.hausdorff_sym < 1e-9);
        REQUIRE(j.landmarks.has_value());
        CHECK(j.landmarks->mean < 1e-9);
    }
    REQUIRE(r.combined.has_value());
    CHECK(r.combined->errors.size() == r.jaws[0].landmarks->errors.size() + r.jaws[1].landmarks->errors.size());

    // Values agree with the standalone operations.
    JawInput moved = in[0];
    for (auto& p : moved.ios_transformed.points) p += Vec2(1.5, -0.5);
    const FullReport m = full_report({moved});
    const ContourMetrics& cm = m.jaws[0].contour;
    CHECK(cm.ios_to_cr_mean == doctest::Approx(directed_mean(moved.ios_transformed, moved.cr_contour)));
    CHECK(cm.cr_to_ios_mean == doctest::Approx(directed_mean(moved.cr_contour, moved.ios_transformed)));
    CHECK(cm.chamfer_bidir_mean == doctest::Approx(chamfer_metric(moved.cr_contour, moved.ios_transformed)));
    CHECK(cm.hausdorff_sym == doctest::Approx(hausdorff(moved.cr_contour, moved.ios_transformed).symmetric));
}
