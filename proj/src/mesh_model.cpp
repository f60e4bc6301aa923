#include "cephreg/mesh_model.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cephreg {

ParseError::ParseError(const std::string& what, std::optional<std::size_t> byte_offset,
                       std::optional<std::size_t> line)
    : DataError([&] {
          std::string msg = what;
          if (line) msg += " (line " + std::to_string(*line) + ")";
          if (byte_offset) msg += " (byte offset " + std::to_string(*byte_offset) + ")";
          return msg;
      }()),
      byte_offset_(byte_offset),
      line_(line) {}

std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Face>& faces) {
    std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
    for (const auto& f : faces) {
        // Unnormalized cross product has length 2*area, so this is area-weighted.
        const Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
        for (auto idx : f) normals[idx] += n;
    }
    for (auto& n : normals) {
        const double len = n.norm();
        n = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
    }
    return normals;
}

std::vector<double> compute_vertex_areas(const std::vector<Vec3>& vertices,
                                         const std::vector<Face>& faces) {
    std::vector<double> areas(vertices.size(), 0.0);
    for (const auto& f : faces) {
        const double a =
            0.5 * (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).norm();
        for (auto idx : f) areas[idx] += a / 3.0;
    }
    return areas;
}

double total_face_area(const TriangleMesh& mesh) {
    double total = 0.0;
    for (const auto& f : mesh.faces) {
        total += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                           .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]])
                           .norm();
    }
    return total;
}

TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces,
                       std::vector<Vec3> normals) {
    if (vertices.empty() || faces.empty()) throw DataError("empty mesh");
    TriangleMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.faces = std::move(faces);
    for (const auto& f : mesh.faces) {
        for (auto idx : f) {
            if (idx >= mesh.vertices.size()) throw DataError("face index out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) throw DataError("degenerate face");
    }
    if (normals.size() == mesh.vertices.size()) {
        for (auto& n : normals) {
            const double len = n.norm();
            if (!(len > 0.0)) throw DataError("zero-length normal");
            n /= len;
        }
        mesh.normals = std::move(normals);
    } else {
        mesh.normals = compute_vertex_normals(mesh.vertices, mesh.faces);
    }
    mesh.per_vertex_area = compute_vertex_areas(mesh.vertices, mesh.faces);
    validate(mesh);
    return mesh;
}

void validate(const TriangleMesh& mesh) {
    if (mesh.vertices.empty() || mesh.faces.empty()) throw DataError("empty mesh");
    if (mesh.normals.size() != mesh.vertices.size() ||
        mesh.per_vertex_area.size() != mesh.vertices.size()) {
        throw DataError("mesh attribute arrays do not match vertex count");
    }
    for (const auto& v : mesh.vertices) {
        if (!v.allFinite()) throw DataError("non-finite vertex coordinate");
    }
    for (const auto& n : mesh.normals) {
        if (std::abs(n.norm() - 1.0) > 1e-6) throw DataError("normal is not unit length");
    }
    for (const auto& f : mesh.faces) {
        for (auto idx : f) {
            if (idx >= mesh.vertices.size()) throw DataError("face index out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) throw DataError("degenerate face");
    }
    double sum = 0.0;
    for (double a : mesh.per_vertex_area) {
        if (!(a >= 0.0)) throw DataError("negative vertex area");
        sum += a;
    }
    if (!(sum > 0.0)) throw DataError("mesh has zero surface area");
}

Eigen::Matrix3d AnatomicalFrame::rotation() const {
    Eigen::Matrix3d R;
    R.col(0) = X;
    R.col(1) = Y;
    R.col(2) = Z;
    return R;
}

void validate(const AnatomicalFrame& frame, double tol) {
    for (const Vec3* axis : {&frame.X, &frame.Y, &frame.Z}) {
        if (!axis->allFinite() || std::abs(axis->norm() - 1.0) > tol) {
            throw NumericalError("frame axis is not unit length");
        }
    }
    if (std::abs(frame.X.dot(frame.Y)) > tol || std::abs(frame.Y.dot(frame.Z)) > tol ||
        std::abs(frame.X.dot(frame.Z)) > tol) {
        throw NumericalError("frame axes are not orthogonal");
    }
    if (frame.X.cross(frame.Y).dot(frame.Z) <= 0.0) {
        throw NumericalError("frame is not right-handed");
    }
    if (!frame.origin.allFinite()) throw NumericalError("frame origin is not finite");
}

void DetectorGeometry::validate() const {
    if (!std::isfinite(source_x) || !std::isfinite(detector_x) || source_x == detector_x) {
        throw DataError("detector geometry: source_x must differ from detector_x");
    }
    if (!(pixel_spacing > 0.0) || !std::isfinite(pixel_spacing)) {
        throw DataError("detector geometry: pixel_spacing must be positive");
    }
    if (image_width <= 0 || image_height <= 0) {
        throw DataError("detector geometry: image dimensions must be positive");
    }
    if (!detector_origin_uv.allFinite()) throw DataError("detector geometry: bad origin");
}

std::string_view to_string(Jaw jaw) { return jaw == Jaw::upper ? "upper" : "lower"; }

std::string_view to_string(PointSetKind kind) {
    switch (kind) {
        case PointSetKind::cr_contour: return "cr_contour";
        case PointSetKind::ios_silhouette: return "ios_silhouette";
        case PointSetKind::landmarks: return "landmarks";
    }
    return "cr_contour";
}

Jaw parse_jaw(std::string_view text) {
    if (text == "upper") return Jaw::upper;
    if (text == "lower") return Jaw::lower;
    throw DataError("unknown jaw label '" + std::string(text) + "'");
}

PointSetKind parse_kind(std::string_view text) {
    if (text == "cr_contour") return PointSetKind::cr_contour;
    if (text == "ios_silhouette") return PointSetKind::ios_silhouette;
    if (text == "landmarks") return PointSetKind::landmarks;
    throw DataError("unknown point set kind '" + std::string(text) + "'");
}

void require_usable(const PointSet2D& set, std::string_view what) {
    if (set.empty()) throw DataError(std::string(what) + ": empty point set");
    for (const auto& p : set.points) {
        if (!p.allFinite()) throw DataError(std::string(what) + ": non-finite coordinate");
    }
}

std::string_view to_string(LandmarkGroup group) {
    switch (group) {
        case LandmarkGroup::incisor_canine: return "inc_can";
        case LandmarkGroup::premolar: return "prem";
        case LandmarkGroup::molar: return "molar";
    }
    return "inc_can";
}

const std::vector<std::string>& landmark_vocabulary() {
    static const std::vector<std::string> vocab = [] {
        std::vector<std::string> v;
        for (const char* side : {"UR", "LR"}) {
            const std::string s(side);
            v.push_back(s + "1_tip");
            v.push_back(s + "2_tip");
            v.push_back(s + "3_cusp");
            v.push_back(s + "4_cusp");
            v.push_back(s + "5_cusp");
            v.push_back(s + "6_MB");
            v.push_back(s + "6_DB");
            v.push_back(s + "7_MB");
        }
        return v;
    }();
    return vocab;
}

bool is_known_landmark_code(std::string_view code) {
    const auto& vocab = landmark_vocabulary();
    return std::find(vocab.begin(), vocab.end(), code) != vocab.end();
}

LandmarkGroup landmark_group(std::string_view code) {
    if (!is_known_landmark_code(code)) {
        throw DataError("unknown code '" + std::string(code) + "'");
    }
    const char digit = code[2];
    if (digit <= '3') return LandmarkGroup::incisor_canine;
    if (digit <= '5') return LandmarkGroup::premolar;
    return LandmarkGroup::molar;
}

void LandmarkSet::add(const std::string& code, const Vec3& position) {
    const LandmarkGroup group = landmark_group(code);
    if (!position.allFinite()) throw DataError("landmark " + code + ": non-finite coordinate");
    if (!entries.emplace(code, Landmark{position, group}).second) {
        throw DataError("duplicate landmark code '" + code + "'");
    }
}

std::size_t LandmarkSet::count(LandmarkGroup group) const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(), [&](const auto& kv) { return kv.second.group == group; }));
}

ScalarMap2D::ScalarMap2D(int w, int h, MapMeaning m, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill),
      meaning(m) {
    if (w <= 0 || h <= 0) throw DataError("map dimensions must be positive");
}

double ScalarMap2D::max_value() const {
    return data.empty() ? 0.0 : *std::max_element(data.begin(), data.end());
}

double ScalarMap2D::min_value() const {
    return data.empty() ? 0.0 : *std::min_element(data.begin(), data.end());
}

}  // namespace cephreg
