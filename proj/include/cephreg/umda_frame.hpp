#pragma once

#include <optional>
#include <vector>

#include "cephreg/mesh_model.hpp"

namespace cephreg::umda {

/// Parameters of the U-midline dental axis construction.
struct UmdaParams {
    /// Percentage of vertices (best aligned with the occlusal reference) kept
    /// as crown candidates.
    double crown_percentile = 20.0;
    /// Direction the occlusal surfaces face; used to score crown candidates.
    Vec3 occlusal_reference_direction = Vec3::UnitZ();
    /// Sign reference for the final vertical axis. When unset the occlusal
    /// reference is used, so Z points toward the occlusal surfaces.
    std::optional<Vec3> vertical_orientation;
    /// Fraction of the arch cloud, at each extreme of the lateral axis, whose
    /// mean gives a molar baseline endpoint.
    double molar_fraction = 0.15;

    void validate() const;
};

/// Defaults per jaw. Both jaws score crowns against their own occlusal side
/// (+Z upper, -Z lower) and share +Z as vertical orientation, so the two
/// frames agree on Z and on the anterior direction.
UmdaParams default_params(Jaw jaw);

/// Result of fitting the arch in the occlusal plane.
struct ArchFit {
    Vec2 baseline_b;    // unit molar-to-molar direction
    Vec2 midpoint_m;    // midpoint of the molar endpoints
    Vec2 incisal_f;     // anterior reference point
    Vec2 x2d;           // unit anterior direction, orthogonal to baseline_b
    Vec2 molar_left;
    Vec2 molar_right;
    Eigen::Matrix<double, 3, 2> plane_basis;  // U: columns span the plane orthogonal to Z
};

struct JawAxes {
    Vec3 X0;
    Vec3 Y0;
    Vec3 Z;
    Vec3 origin;
};

Vec3 centroid(const TriangleMesh& mesh);

/// Indices of the top-p% vertices by cosine between normal and reference.
/// Ties keep the lower vertex index.
std::vector<std::size_t> crown_candidates(const TriangleMesh& mesh, const UmdaParams& params);

/// Smallest-variance principal direction of the crown candidates, oriented
/// along the vertical orientation. Throws NumericalError("crown region
/// degenerate") when the candidates span fewer than two dimensions.
Vec3 estimate_vertical_axis(const TriangleMesh& mesh, const UmdaParams& params);

/// Orthonormal pair spanning the plane orthogonal to `Z`, chosen
/// deterministically from Z alone.
Eigen::Matrix<double, 3, 2> plane_basis(const Vec3& Z);

/// Fits the arch of a 2D point cloud (already in plane coordinates).
ArchFit fit_arch_2d(const std::vector<Vec2>& points, double molar_fraction);

/// Fits the arch of the crown candidates projected onto the plane orthogonal
/// to Z.
ArchFit fit_arch(const TriangleMesh& mesh, const Vec3& Z, const UmdaParams& params);

/// Per-jaw axes X0, Y0, Z and the centroid origin.
JawAxes jaw_axes(const TriangleMesh& mesh, const UmdaParams& params);

struct SharedFrames {
    AnatomicalFrame upper;
    AnatomicalFrame lower;
};

/// Averages the lateral axes (lower flipped when opposed), then rebuilds X
/// per jaw from the shared lateral axis and the jaw's own Z. Throws
/// NumericalError("irreconcilable lateral axes") when the flipped axes are
/// still anti-parallel.
SharedFrames shared_frame(const JawAxes& upper, const JawAxes& lower);

/// Frame of a single jaw without cross-jaw sharing: (X0, Y0, Z).
AnatomicalFrame single_jaw_frame(const JawAxes& axes);

/// World axes at the mesh centroid, used when the anatomical frame is
/// deliberately skipped.
AnatomicalFrame centroid_frame(const TriangleMesh& mesh);

/// v' = R^T (v - origin); normals rotated by R^T.
TriangleMesh to_frame_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame);

/// Inverse of to_frame_coords.
TriangleMesh from_frame_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame);

/// Rotation taking frame coordinates (anterior, lateral, vertical) to the
/// projection convention (lateral, anterior, vertical) used by the surface
/// DRR: x' = -Y, y' = X, z' = Z. It is a proper rotation, so the mesh is not
/// mirrored.
Eigen::Matrix3d projection_axes();

/// Mesh expressed for the lateral projection: frame coordinates followed by
/// projection_axes().
TriangleMesh to_projection_coords(const TriangleMesh& mesh, const AnatomicalFrame& frame);
Vec3 to_projection_coords(const Vec3& point, const AnatomicalFrame& frame);

}  // namespace cephreg::umda
