#include "cephreg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cephreg/spatial_index.hpp"
#include "cephreg/surface_drr.hpp"
#include "cephreg/umda_frame.hpp"

namespace cephreg::metrics {

namespace {

void require_points(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.empty() || b.empty()) throw DataError("metric on an empty point set");
}

}  // namespace

double directed_mean(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    require_points(a, b);
    const NearestNeighbor2D index(b);
    double sum = 0.0;
    for (const auto& p : a) sum += index.distance(p);
    return sum / static_cast<double>(a.size());
}

double directed_mean(const PointSet2D& a, const PointSet2D& b) { return directed_mean(a.points, b.points); }

double chamfer_metric(const PointSet2D& a, const PointSet2D& b) {
    return 0.5 * (directed_mean(a, b) + directed_mean(b, a));
}

Hausdorff hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    require_points(a, b);
    const NearestNeighbor2D index_a(a);
    const NearestNeighbor2D index_b(b);
    Hausdorff h;
    for (const auto& p : a) h.ab = std::max(h.ab, index_b.distance(p));
    for (const auto& p : b) h.ba = std::max(h.ba, index_a.distance(p));
    h.symmetric = std::max(h.ab, h.ba);
    return h;
}

Hausdorff hausdorff(const PointSet2D& a, const PointSet2D& b) { return hausdorff(a.points, b.points); }

ContourMetrics contour_metrics(const PointSet2D& cr, const PointSet2D& ios_transformed) {
    ContourMetrics m;
    m.ios_to_cr_mean = directed_mean(ios_transformed, cr);
    m.cr_to_ios_mean = directed_mean(cr, ios_transformed);
    m.chamfer_bidir_mean = 0.5 * (m.ios_to_cr_mean + m.cr_to_ios_mean);
    m.hausdorff_sym = hausdorff(cr, ios_transformed).symmetric;
    return m;
}

LandmarkStats landmark_stats(std::vector<LandmarkError> errors) {
    if (errors.empty()) throw DataError("no landmark errors to aggregate");
    LandmarkStats s;
    const double n = static_cast<double>(errors.size());
    double sum = 0.0, sum_sq = 0.0;
    double group_sum[3] = {0.0, 0.0, 0.0};
    int group_n[3] = {0, 0, 0};
    for (const auto& e : errors) {
        sum += e.error;
        sum_sq += e.error * e.error;
        const int g = static_cast<int>(e.group);
        group_sum[g] += e.error;
        ++group_n[g];
    }
    s.mean = sum / n;
    s.rmse = std::sqrt(sum_sq / n);
    double var = 0.0;
    for (const auto& e : errors) var += (e.error - s.mean) * (e.error - s.mean);
    s.std = std::sqrt(var / n);
    auto group_mean = [&](LandmarkGroup g) -> std::optional<double> {
        const int i = static_cast<int>(g);
        if (group_n[i] == 0) return std::nullopt;
        return group_sum[i] / group_n[i];
    };
    s.group_inc_can = group_mean(LandmarkGroup::incisor_canine);
    s.group_prem = group_mean(LandmarkGroup::premolar);
    s.group_molar = group_mean(LandmarkGroup::molar);
    s.errors = std::move(errors);
    return s;
}

Vec2 project_landmark(const Vec3& world, const AnatomicalFrame& frame, const DetectorGeometry& geom,
                      const reg::SimilarityTransform2D& transform) {
    const Vec3 p = umda::to_projection_coords(world, frame);
    return transform.apply(drr::project_point(p, geom).pixel);
}

LandmarkStats evaluate_landmarks(const LandmarkSet& mesh_landmarks, const AnatomicalFrame& frame,
                                 const DetectorGeometry& geom, const reg::SimilarityTransform2D& transform,
                                 const LandmarkSet& cr_landmarks) {
    if (mesh_landmarks.dimension != 3) throw DataError("mesh landmarks must be 3D");
    if (cr_landmarks.dimension != 2) throw DataError("CR landmarks must be 2D");
    std::vector<LandmarkError> errors;
    for (const auto& [code, lm] : mesh_landmarks.entries) {
        const auto it = cr_landmarks.entries.find(code);
        if (it == cr_landmarks.entries.end()) continue;
        LandmarkError e;
        e.code = code;
        e.group = lm.group;
        e.predicted = project_landmark(lm.position, frame, geom, transform);
        e.reference = it->second.position.head<2>();
        e.error = (e.predicted - e.reference).norm();
        errors.push_back(std::move(e));
    }
    if (errors.empty()) throw DataError("mesh and CR landmark sets share no code");
    return landmark_stats(std::move(errors));
}

FullReport full_report(const std::vector<JawInput>& inputs) {
    FullReport report;
    std::vector<LandmarkError> all;
    for (const auto& in : inputs) {
        JawReport jr;
        jr.jaw = in.jaw;
        jr.contour = contour_metrics(in.cr_contour, in.ios_transformed);
        if (in.mesh_landmarks && in.cr_landmarks) {
            jr.landmarks = evaluate_landmarks(*in.mesh_landmarks, in.frame, in.geom, in.transform, *in.cr_landmarks);
            all.insert(all.end(), jr.landmarks->errors.begin(), jr.landmarks->errors.end());
        }
        report.jaws.push_back(std::move(jr));
    }
    if (!all.empty()) report.combined = landmark_stats(std::move(all));
    return report;
}

}  // namespace cephreg::metrics
