#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>

#include "cephreg/metrics.hpp"
#include "cephreg/registration.hpp"
#include "cephreg/report.hpp"
#include "cephreg/surface_drr.hpp"
#include "cephreg/umda_frame.hpp"

namespace cephreg::pipeline {

enum class Mode { dentalscr, bbox_only, single_stage };

std::string_view to_string(Mode mode);
/// Throws DataError on an unknown name.
Mode parse_mode(std::string_view text);

struct Config {
    Mode mode = Mode::dentalscr;
    bool one_sided = false;  // silhouette-to-CR directed term only
    bool no_umda = false;    // render in world axes at the centroid
    std::uint64_t seed = 0;
    Lattice cr_image{0, 0, 703, 938};
    DetectorGeometry geom;
    drr::SplatParams splat;
    double threshold_fraction = 0.05;
    std::size_t upper_points = 441;
    std::size_t lower_points = 439;
    double crown_percentile = 20.0;
    double molar_fraction = 0.15;
};

double image_diagonal(const Lattice& image);
reg::Schedule schedule_for(const Config& config);
reg::RegistrationOptions registration_options(const Config& config);

/// All settings, for echoing into report headers.
report::Json config_json(const Config& config);

/// Per-jaw inputs of a case. Missing pieces stay empty.
struct JawInputs {
    std::optional<TriangleMesh> mesh;
    std::optional<PointSet2D> cr_contour;
    std::optional<LandmarkSet> mesh_landmarks;  // codes of this jaw only
    std::optional<LandmarkSet> cr_landmarks;
};

struct CaseInputs {
    std::array<JawInputs, 2> jaws;  // indexed by Jaw
    std::optional<DetectorGeometry> geom;
    std::optional<Lattice> cr_image;
};

/// Reads a case directory: mesh_{upper,lower}.{stl,obj}, cr_contour_{upper,
/// lower}.txt, optional mesh_landmarks.txt, cr_landmarks.txt, geometry.cfg
/// and cr_image.pgm. Throws DataError when no jaw has both a mesh and a
/// contour.
CaseInputs load_case(const std::filesystem::path& dir);

/// Landmarks whose code belongs to `jaw` (UR* upper, LR* lower).
LandmarkSet landmarks_of(const LandmarkSet& set, Jaw jaw);

/// Frames used for rendering: shared UMDA frames when both meshes are given,
/// a single-jaw frame otherwise, world axes at the centroid under no_umda.
std::array<std::optional<AnatomicalFrame>, 2> case_frames(const CaseInputs& in, const Config& config);

struct JawResult {
    Jaw jaw = Jaw::upper;
    AnatomicalFrame frame;
    PointSet2D silhouette;   // detector pixels
    PointSet2D registered;   // silhouette mapped into CR pixels
    reg::RegistrationResult registration;
};

struct CaseResult {
    Config config;  // effective settings (case geometry and image applied)
    std::vector<JawResult> jaws;
    metrics::FullReport metrics;
};

CaseResult run_case(const CaseInputs& in, const Config& config);

/// Deterministic JSON report: config echo, per-jaw registration trace and
/// the metrics.
report::Json case_report(const CaseResult& result);

/// Registration of explicit point sets (no meshes).
struct PairResult {
    PointSet2D registered;
    reg::RegistrationResult registration;
    metrics::ContourMetrics contour;
};

PairResult run_pair(const PointSet2D& cr, const PointSet2D& silhouette, const Config& config);
report::Json pair_report(const PairResult& result, const Config& config);

}  // namespace cephreg::pipeline
