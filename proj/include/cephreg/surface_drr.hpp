#pragma once

#include <optional>
#include <vector>

#include "cephreg/mesh_model.hpp"

namespace cephreg::drr {

struct SplatParams {
    double rho0 = 1.0;                     // uniform shell density
    double mu0 = 0.02;                     // effective attenuation per unit thickness
    double I0 = 1.0;                       // unattenuated intensity
    double sigma_px = 1.5;                 // Gaussian splat width
    double kernel_truncation_radius = 3.0; // window half-width in multiples of sigma
    /// Also splat face centroids carrying each face's area, with the vertex
    /// weights reduced accordingly. Off by default.
    bool face_supersampling = false;

    void validate() const;
};

/// One projected surface sample.
struct Projection {
    Vec2 detector_mm;  // (y', z') on the detector plane
    Vec2 pixel;        // (u, v) on the detector lattice
    double magnification = 1.0;  // t
    double weight = 0.0;         // rho0 * a_i
};

/// Magnification t = (X_DET - x_s) / (x - x_s).
double magnification(double x, const DetectorGeometry& geom);

Vec2 detector_to_pixel(const Vec2& detector_mm, const DetectorGeometry& geom);

/// Projects a single point given in projection coordinates. Throws
/// NumericalError when the point is not in front of the source (t <= 0).
Projection project_point(const Vec3& p, const DetectorGeometry& geom, double weight = 0.0);

/// Perspective projection of every vertex of a mesh given in projection
/// coordinates (x lateral along the ray axis). Throws NumericalError naming
/// the number of vertices with t <= 0.
std::vector<Projection> project_vertices(const TriangleMesh& mesh_in_frame, const DetectorGeometry& geom,
                                         const SplatParams& params = {});

/// Accumulates the Gaussian kernels of all projections into a thickness map
/// on the detector lattice. The kernel window is the square of half-width
/// kernel_truncation_radius * sigma around each sample.
ScalarMap2D splat(const std::vector<Projection>& projections, const DetectorGeometry& geom,
                  const SplatParams& params);

/// project_vertices + splat, honoring face_supersampling.
ScalarMap2D render_thickness(const TriangleMesh& mesh_in_frame, const DetectorGeometry& geom,
                             const SplatParams& params);

/// Beer-Lambert mapping I = I0 exp(-mu0 L).
ScalarMap2D intensity(const ScalarMap2D& thickness, const SplatParams& params);

struct SilhouetteParams {
    double threshold_fraction = 0.05;
    std::optional<std::size_t> target_count;
};

/// Outer boundary of the largest connected component of
/// {L >= threshold_fraction * max L}, traced by marching squares with linear
/// interpolation. The loop is counter-clockwise in (u, v), starts at its
/// lowest-u (then lowest-v) vertex, and is resampled by arc length to
/// target_count points when given. Throws NumericalError on an all-zero map.
PointSet2D extract_silhouette(const ScalarMap2D& thickness, const SilhouetteParams& params = {});

/// Uniform arc-length resampling of a closed polygon, starting at its first
/// vertex.
std::vector<Vec2> resample_closed(const std::vector<Vec2>& loop, std::size_t count);

}  // namespace cephreg::drr
