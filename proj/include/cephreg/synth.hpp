#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "cephreg/distance_field.hpp"
#include "cephreg/mesh_model.hpp"
#include "cephreg/registration.hpp"
#include "cephreg/surface_drr.hpp"

namespace cephreg::synth {

enum class ArchType { square, ovoid, tapered };

std::string_view to_string(ArchType type);
ArchType parse_arch_type(std::string_view text);

/// Synthetic jaw: a U-shaped arch of box-shaped teeth with domed crowns,
/// placed in a random rigid pose. `truth` is the constructed symmetry frame
/// in world coordinates (X toward the incisors, Z vertical, Y = Z x X,
/// origin at the vertex centroid).
struct SynthArch {
    Jaw jaw = Jaw::upper;
    TriangleMesh mesh;
    AnatomicalFrame truth;
    LandmarkSet landmarks;  // 3D, world millimeters
};

struct ArchOptions {
    double max_pose_deg = 20.0;   // rotation of the random pose
    double max_offset_mm = 20.0;  // translation of the random pose, per axis
    double grid_mm = 0.3;         // surface sampling step
};

/// Builds one jaw. The arch dimensions and pose are drawn from `seed`, so an
/// upper and a lower jaw built from the same seed occlude. `n_teeth` must be
/// even and in [2, 14]; throws DataError otherwise.
SynthArch make_arch_mesh(ArchType type, int n_teeth, std::uint64_t seed, Jaw jaw = Jaw::upper,
                         const ArchOptions& options = {});

/// Silhouette of a mesh rendered in `frame` (detector pixels).
PointSet2D render_silhouette(const TriangleMesh& mesh, const AnatomicalFrame& frame, const DetectorGeometry& geom,
                             const drr::SplatParams& splat, const drr::SilhouetteParams& silhouette);

/// CR-side data derived from a jaw under a known transform.
struct CaseData {
    PointSet2D silhouette;   // detector pixels, truth frame
    PointSet2D cr_contour;   // true transform applied, plus optional jitter
    LandmarkSet cr_landmarks;
};

/// Renders the silhouette in the truth frame, maps it with `truth` and adds
/// per-coordinate Gaussian jitter of `cr_noise_px`. CR landmarks are the
/// projected mesh landmarks under `truth` (no jitter).
CaseData make_case(const SynthArch& arch, const DetectorGeometry& geom, const reg::SimilarityTransform2D& truth,
                   double cr_noise_px, std::uint64_t seed, const drr::SplatParams& splat = {},
                   std::size_t contour_points = 441);

/// Draws s in [0.8, 1.3], theta in [-10, 10] degrees and a translation that
/// puts the transformed silhouette centroid inside the middle half of `image`.
reg::SimilarityTransform2D sample_true_transform(const PointSet2D& silhouette, const Lattice& image,
                                                 std::uint64_t seed);

struct CaseOptions {
    ArchType type = ArchType::ovoid;
    int n_teeth = 14;
    std::uint64_t seed = 0;
    double cr_noise_px = 0.0;
    DetectorGeometry geom;
    drr::SplatParams splat;
    Lattice cr_image{0, 0, 703, 938};
    std::size_t upper_points = 441;
    std::size_t lower_points = 439;
};

struct JawCase {
    SynthArch arch;
    CaseData data;
};

/// Both jaws under one shared true transform.
struct SynthCase {
    CaseOptions options;
    reg::SimilarityTransform2D truth;
    JawCase upper;
    JawCase lower;
};

SynthCase make_full_case(const CaseOptions& options);

/// Writes mesh_upper.stl, mesh_lower.stl, cr_contour_upper.txt,
/// cr_contour_lower.txt, cr_landmarks.txt, mesh_landmarks.txt, geometry.cfg
/// and truth.txt into `dir` (created if needed).
void write_case(const SynthCase& c, const std::filesystem::path& dir);

}  // namespace cephreg::synth
