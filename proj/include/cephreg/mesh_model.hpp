#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cephreg/error.hpp"

namespace cephreg {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Face = std::array<std::uint32_t, 3>;

/// Triangle mesh of an intraoral scan, coordinates in millimeters.
///
/// `normals` are per-vertex unit vectors; `per_vertex_area` holds the lumped
/// surface area attached to every vertex (one third of the incident triangle
/// areas), used as splat weight.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    std::vector<Face> faces;
    std::vector<double> per_vertex_area;

    std::size_t size() const { return vertices.size(); }
    bool empty() const { return vertices.empty(); }
};

/// Area-weighted vertex normals. Vertices without incident faces get +Z.
std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Face>& faces);

/// One third of the incident triangle areas per vertex.
std::vector<double> compute_vertex_areas(const std::vector<Vec3>& vertices,
                                         const std::vector<Face>& faces);

double total_face_area(const TriangleMesh& mesh);

/// Builds a mesh from raw arrays, computing normals (when `normals` is empty)
/// and the lumped areas, then validates it. Throws DataError on empty input,
/// out-of-range or repeated face indices.
TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces,
                       std::vector<Vec3> normals = {});

/// Throws DataError when an invariant of TriangleMesh does not hold.
void validate(const TriangleMesh& mesh);

/// Orthonormal right-handed anatomical frame. Columns of `rotation()` are
/// X (anterior), Y (lateral), Z (vertical); `origin` is the vertex centroid.
struct AnatomicalFrame {
    Vec3 X = Vec3::UnitX();
    Vec3 Y = Vec3::UnitY();
    Vec3 Z = Vec3::UnitZ();
    Vec3 origin = Vec3::Zero();

    Eigen::Matrix3d rotation() const;
    static AnatomicalFrame identity() { return {}; }
};

/// Throws NumericalError unless the frame is orthonormal and right-handed
/// within `tol`.
void validate(const AnatomicalFrame& frame, double tol = 1e-6);

/// Source/detector arrangement for the lateral projection. The source sits on
/// the projection axis at `source_x`, the detector plane is x = `detector_x`.
/// Detector millimeters map to pixels as u = y'/pixel_spacing + origin_u.
struct DetectorGeometry {
    double source_x = -1500.0;
    double detector_x = 150.0;
    double pixel_spacing = 0.2;
    int image_width = 512;
    int image_height = 384;
    Vec2 detector_origin_uv{256.0, 192.0};

    void validate() const;
};

enum class Jaw { upper, lower };
enum class PointSetKind { cr_contour, ios_silhouette, landmarks };

std::string_view to_string(Jaw jaw);
std::string_view to_string(PointSetKind kind);
Jaw parse_jaw(std::string_view text);
PointSetKind parse_kind(std::string_view text);

/// Ordered or unordered 2D point list in pixel coordinates.
struct PointSet2D {
    std::vector<Vec2> points;
    Jaw label = Jaw::upper;
    PointSetKind kind = PointSetKind::cr_contour;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Throws DataError if the set is empty or holds a non-finite coordinate.
void require_usable(const PointSet2D& set, std::string_view what);

enum class LandmarkGroup { incisor_canine, premolar, molar };

std::string_view to_string(LandmarkGroup group);

/// Returns the group of a landmark code ("UR6_MB" -> molar). Throws DataError
/// naming the code when it is not part of the vocabulary.
LandmarkGroup landmark_group(std::string_view code);

/// True when `code` belongs to the landmark vocabulary: (UR|LR)(1..7)_(tip|
/// cusp|MB|DB) as listed in the evaluation table, plus the premolar buccal
/// cusps (UR|LR)(4|5)_cusp.
bool is_known_landmark_code(std::string_view code);

/// Full vocabulary in a fixed order.
const std::vector<std::string>& landmark_vocabulary();

struct Landmark {
    Vec3 position = Vec3::Zero();  // z unused for 2D sets
    LandmarkGroup group = LandmarkGroup::incisor_canine;
};

/// Landmarks keyed by code. `dimension` is 2 for radiograph landmarks (pixel
/// coordinates) and 3 for mesh landmarks (millimeters).
struct LandmarkSet {
    int dimension = 2;
    std::map<std::string, Landmark> entries;

    /// Throws DataError on unknown or duplicate code.
    void add(const std::string& code, const Vec3& position);
    std::size_t count(LandmarkGroup group) const;
    std::size_t size() const { return entries.size(); }
};

enum class MapMeaning { thickness, intensity, silhouette_mask, distance_field };

/// Row-major scalar grid on the detector lattice; pixel (i, j) sits at
/// continuous pixel coordinate (u, v) = (i, j).
struct ScalarMap2D {
    int width = 0;
    int height = 0;
    std::vector<double> data;
    MapMeaning meaning = MapMeaning::thickness;

    ScalarMap2D() = default;
    ScalarMap2D(int w, int h, MapMeaning m, double fill = 0.0);

    double& at(int i, int j) { return data[static_cast<std::size_t>(j) * width + i]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(j) * width + i]; }
    double max_value() const;
    double min_value() const;
};

// ---------------------------------------------------------------------------
// File ingestion and emission.

enum class StlEncoding { binary, ascii };

/// Loads binary or ASCII STL (detected from content) or Wavefront OBJ (by
/// extension). STL facets are welded on exact coordinate equality.
TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh parse_stl(std::string_view bytes);
TriangleMesh parse_obj(std::string_view text);

void save_stl(const TriangleMesh& mesh, const std::filesystem::path& path,
              StlEncoding encoding = StlEncoding::binary);
std::string encode_stl(const TriangleMesh& mesh, StlEncoding encoding);

/// Contour text: a `jaw=upper|lower` header line, optional `kind=...` line,
/// then one `u,v` record per line. `#` starts a comment.
PointSet2D load_contour(const std::filesystem::path& path);
PointSet2D parse_contour(std::string_view text);
void save_contour(const PointSet2D& set, const std::filesystem::path& path,
                  const std::vector<std::string>& header_comments = {});
std::string format_contour(const PointSet2D& set,
                           const std::vector<std::string>& header_comments = {});

/// Landmark text: one `CODE: a,b` (2D) or `CODE: a,b,c` (3D) record per line,
/// optionally parenthesized.
LandmarkSet load_landmarks(const std::filesystem::path& path);
LandmarkSet parse_landmarks(std::string_view text);
void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path);
std::string format_landmarks(const LandmarkSet& set);

/// 16-bit binary PGM ("P5", maxval 65535, big-endian samples). Header is
/// exactly "P5\n<width> <height>\n65535\n"; samples follow row by row with
/// ScalarMap2D row 0 first. Values are min-max normalized and rounded; a
/// constant map is written as all zeros.
void save_map(const ScalarMap2D& map, const std::filesystem::path& path);
std::string encode_pgm16(const ScalarMap2D& map);

/// Reads P5 (8- or 16-bit) images. Samples are returned divided by maxval.
ScalarMap2D load_map(const std::filesystem::path& path);
ScalarMap2D decode_pgm(std::string_view bytes);

/// Frame record: 12 whitespace-separated numbers, R row-major then origin.
void save_frame(const AnatomicalFrame& frame, const std::filesystem::path& path);
std::string format_frame(const AnatomicalFrame& frame);
AnatomicalFrame load_frame(const std::filesystem::path& path);
AnatomicalFrame parse_frame(std::string_view text);

/// Detector geometry as `key=value` lines (source_x, detector_x,
/// pixel_spacing, image_width, image_height, origin_u, origin_v).
void save_geometry(const DetectorGeometry& geom, const std::filesystem::path& path);
std::string format_geometry(const DetectorGeometry& geom);
DetectorGeometry load_geometry(const std::filesystem::path& path);
DetectorGeometry parse_geometry(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cephreg
