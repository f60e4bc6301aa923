#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cephreg/distance_field.hpp"
#include "cephreg/mesh_model.hpp"

namespace cephreg::reg {

/// p' = s R(theta) (y, -z) + (tx, ty). The z sign inversion maps detector
/// coordinates to the radiograph convention.
struct SimilarityTransform2D {
    double s = 1.0;
    double theta = 0.0;  // radians, kept in (-pi, pi]
    double tx = 0.0;
    double ty = 0.0;

    Vec2 apply(const Vec2& p) const;
    /// Inverse map: returns p with apply(p) == q.
    Vec2 inverse_apply(const Vec2& q) const;
    Eigen::Matrix2d linear() const;  // s R(theta) diag(1, -1)
    void validate() const;
};

double wrap_angle(double theta);

Vec2 apply_similarity(const SimilarityTransform2D& t, const Vec2& p);
PointSet2D apply_similarity(const SimilarityTransform2D& t, const PointSet2D& set);

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// One bounded search stage. Ranges are offsets around the incumbent:
///  - scale: relative, s in s0 * [1 + lo, 1 + hi];
///  - theta: additive radians;
///  - tx, ty: additive pixels applied to the image of the silhouette
///    centroid, so translation and rotation/scale are searched independently.
struct StageSpec {
    std::string name;
    ParamRange scale{-0.3, 0.3};
    ParamRange theta{-0.2617993877991494, 0.2617993877991494};
    ParamRange tx{-100.0, 100.0};
    ParamRange ty{-100.0, 100.0};
    int iterations = 40;
    int samples_per_iter = 64;
    /// Pattern search stops when its step falls below this fraction of each
    /// range width.
    double min_step_fraction = 0.001;
    /// Upper bound on pattern-search polls (each poll evaluates up to 8
    /// neighbours).
    int max_polls = 200;

    void validate() const;
};

struct Schedule {
    std::vector<StageSpec> stages;

    /// Checks each stage and that every range is contained in the previous
    /// stage's range.
    void validate() const;

    /// Coarse / fine / super-fine schedule; translation ranges are fractions
    /// of `image_diagonal_px`.
    static Schedule three_stage(double image_diagonal_px);
    /// One stage with the coarse ranges and an 80-iteration budget.
    static Schedule single_stage(double image_diagonal_px);
    static Schedule none() { return {}; }
};

enum class LossKind { symmetric, one_sided };

/// Mean of the nearest distances from each point of `a` to `b` plus the
/// reverse term. Exact (R-tree). Throws DataError on an empty set.
double chamfer_loss(const PointSet2D& a, const PointSet2D& b);
/// Directed mean a -> b only.
double one_sided_loss(const PointSet2D& a, const PointSet2D& b);

/// Bounding-box and centroid initialization on the z-flipped silhouette.
SimilarityTransform2D initialize(const PointSet2D& ios_silhouette, const PointSet2D& cr);

/// Loss of transformed silhouette points against the CR contour.
///
/// approx() is used inside the search: the silhouette-to-CR term reads the CR
/// distance field, and the CR-to-silhouette term reads a distance field of
/// the untransformed silhouette at T^-1(c), scaled by s. The second form is
/// exact for similarity maps up to the field's own approximation.
/// exact() uses R-tree nearest neighbours for both terms.
class Objective {
public:
    Objective(const PointSet2D& cr, const PointSet2D& ios, LossKind kind, std::optional<Lattice> cr_image = std::nullopt);

    double approx(const SimilarityTransform2D& t) const;
    double exact(const SimilarityTransform2D& t) const;

    LossKind kind() const { return kind_; }
    /// Centroid of the z-flipped silhouette (pivot of the translation
    /// parameters).
    const Vec2& pivot() const { return pivot_; }
    const std::vector<Vec2>& cr_points() const { return cr_field_.points(); }
    const std::vector<Vec2>& ios_points() const { return ios_field_.points(); }

private:
    LossKind kind_;
    DistanceField2D cr_field_;
    DistanceField2D ios_field_;
    Vec2 pivot_;
};

struct StageResult {
    std::string stage;
    SimilarityTransform2D transform;
    double loss = 0.0;  // exact
    std::size_t evaluations = 0;
};

/// Seeded uniform sampling within the stage ranges (keep-best, incumbent
/// included) followed by compass pattern search around the best sample. The
/// returned transform never has a larger exact loss than the incumbent.
StageResult optimize_stage(const Objective& objective, const SimilarityTransform2D& incumbent,
                           const StageSpec& stage, std::uint64_t seed, std::size_t stage_index = 0);

struct RegistrationResult {
    SimilarityTransform2D transform;
    SimilarityTransform2D initial;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<StageResult> trace;
};

struct RegistrationOptions {
    Schedule schedule;
    LossKind loss = LossKind::symmetric;
    std::uint64_t seed = 0;
    /// CR image rectangle; the CR distance field covers at least this area.
    std::optional<Lattice> cr_image;
};

/// initialize, then run every stage centred on the previous incumbent.
RegistrationResult register_silhouette(const PointSet2D& cr, const PointSet2D& ios,
                                       const RegistrationOptions& options);

}  // namespace cephreg::reg
