#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cephreg/mesh_model.hpp"
#include "cephreg/registration.hpp"

namespace cephreg::metrics {

/// Mean over a of the distance to the nearest point of b. Throws DataError
/// when either set is empty.
double directed_mean(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
double directed_mean(const PointSet2D& a, const PointSet2D& b);

/// Average of the two directed means.
double chamfer_metric(const PointSet2D& a, const PointSet2D& b);

struct Hausdorff {
    double ab = 0.0;
    double ba = 0.0;
    double symmetric = 0.0;
};

Hausdorff hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
Hausdorff hausdorff(const PointSet2D& a, const PointSet2D& b);

/// Curve-level metrics of a transformed silhouette against a CR contour.
struct ContourMetrics {
    double chamfer_bidir_mean = 0.0;
    double hausdorff_sym = 0.0;
    double ios_to_cr_mean = 0.0;
    double cr_to_ios_mean = 0.0;
};

ContourMetrics contour_metrics(const PointSet2D& cr, const PointSet2D& ios_transformed);

struct LandmarkError {
    std::string code;
    LandmarkGroup group = LandmarkGroup::incisor_canine;
    Vec2 predicted = Vec2::Zero();
    Vec2 reference = Vec2::Zero();
    double error = 0.0;
};

struct LandmarkStats {
    std::vector<LandmarkError> errors;
    double mean = 0.0;
    double rmse = 0.0;
    double std = 0.0;  // population standard deviation
    std::optional<double> group_inc_can;
    std::optional<double> group_prem;
    std::optional<double> group_molar;
};

/// Aggregates per-landmark errors. Throws DataError on an empty list.
LandmarkStats landmark_stats(std::vector<LandmarkError> errors);

/// Projects a mesh landmark (world millimeters) onto the detector through
/// `frame` and `geom`, then maps it with `transform` into CR pixels.
Vec2 project_landmark(const Vec3& world, const AnatomicalFrame& frame, const DetectorGeometry& geom,
                      const reg::SimilarityTransform2D& transform);

/// Errors between projected mesh landmarks and CR landmarks of the same code.
/// Throws DataError when the sets share no code.
LandmarkStats evaluate_landmarks(const LandmarkSet& mesh_landmarks, const AnatomicalFrame& frame,
                                 const DetectorGeometry& geom, const reg::SimilarityTransform2D& transform,
                                 const LandmarkSet& cr_landmarks);

/// Everything needed to evaluate one jaw.
struct JawInput {
    Jaw jaw = Jaw::upper;
    PointSet2D cr_contour;
    PointSet2D ios_transformed;
    std::optional<LandmarkSet> mesh_landmarks;
    std::optional<LandmarkSet> cr_landmarks;
    AnatomicalFrame frame;
    DetectorGeometry geom;
    reg::SimilarityTransform2D transform;
};

struct JawReport {
    Jaw jaw = Jaw::upper;
    ContourMetrics contour;
    std::optional<LandmarkStats> landmarks;
};

struct FullReport {
    std::vector<JawReport> jaws;
    /// Landmark statistics over all jaws together, when any jaw has landmarks.
    std::optional<LandmarkStats> combined;
};

FullReport full_report(const std::vector<JawInput>& inputs);

}  // namespace cephreg::metrics
