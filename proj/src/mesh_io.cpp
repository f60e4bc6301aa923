#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cephreg/mesh_model.hpp"
#include "text_util.hpp"

namespace cephreg {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

namespace {

// Welds facet corners that share identical coordinates.
class VertexWelder {
public:
    std::uint32_t add(const Vec3& p) {
        const std::array<double, 3> key{p.x(), p.y(), p.z()};
        auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(vertices_.size()));
        if (inserted) vertices_.push_back(p);
        return it->second;
    }
    std::vector<Vec3> take() { return std::move(vertices_); }

private:
    std::map<std::array<double, 3>, std::uint32_t> index_;
    std::vector<Vec3> vertices_;
};

void add_face(std::vector<Face>& faces, std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    // Facets that collapse after welding carry no area.
    if (a == b || b == c || a == c) return;
    faces.push_back({a, b, c});
}

float read_f32(const char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
                         static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8 |
                         static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16 |
                         static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24;
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
}

TriangleMesh parse_stl_binary(std::string_view bytes) {
    if (bytes.size() < 84) throw ParseError("binary STL truncated in header", bytes.size());
    const std::uint32_t count = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[80])) |
                                static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[81])) << 8 |
                                static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[82])) << 16 |
                                static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[83])) << 24;
    if (count == 0) throw DataError("empty mesh");
    const std::size_t needed = 84 + 50ull * count;
    if (bytes.size() < needed) {
        const std::size_t complete = (bytes.size() - 84) / 50;
        throw ParseError("binary STL truncated: expected " + std::to_string(count) + " facets",
                         84 + 50 * complete);
    }
    VertexWelder welder;
    std::vector<Face> faces;
    faces.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const char* rec = bytes.data() + 84 + 50ull * i;
        std::array<std::uint32_t, 3> idx{};
        for (int c = 0; c < 3; ++c) {
            const char* p = rec + 12 + 12 * c;
            const Vec3 v(read_f32(p), read_f32(p + 4), read_f32(p + 8));
            if (!v.allFinite()) throw ParseError("non-finite vertex", 84 + 50ull * i + 12 + 12 * c);
            idx[c] = welder.add(v);
        }
        add_face(faces, idx[0], idx[1], idx[2]);
    }
    return make_mesh(welder.take(), std::move(faces));
}

TriangleMesh parse_stl_ascii(std::string_view text) {
    detail::Tokenizer tok(text);
    auto expect = [&](std::string_view word) {
        const auto t = tok.next();
        if (t.text != word) {
            throw ParseError("expected '" + std::string(word) + "', found '" + std::string(t.text) + "'",
                             t.offset);
        }
    };
    auto number = [&] {
        const auto t = tok.next();
        double v = 0.0;
        if (!detail::parse_double(t.text, v)) {
            throw ParseError("expected number, found '" + std::string(t.text) + "'", t.offset);
        }
        return v;
    };
    expect("solid");
    tok.skip_line();
    VertexWelder welder;
    std::vector<Face> faces;
    for (;;) {
        const auto t = tok.next();
        if (t.text == "endsolid" || t.text.empty()) break;
        if (t.text != "facet") {
            throw ParseError("expected 'facet', found '" + std::string(t.text) + "'", t.offset);
        }
        expect("normal");
        for (int i = 0; i < 3; ++i) number();
        expect("outer");
        expect("loop");
        std::array<std::uint32_t, 3> idx{};
        for (int c = 0; c < 3; ++c) {
            expect("vertex");
            const double x = number();
            const double y = number();
            const double z = number();
            idx[c] = welder.add(Vec3(x, y, z));
        }
        expect("endloop");
        expect("endfacet");
        add_face(faces, idx[0], idx[1], idx[2]);
    }
    if (faces.empty()) throw DataError("empty mesh");
    return make_mesh(welder.take(), std::move(faces));
}

}  // namespace

TriangleMesh parse_stl(std::string_view bytes) {
    if (bytes.size() >= 84) {
        const std::uint32_t count =
            static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[80])) |
            static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[81])) << 8 |
            static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[82])) << 16 |
            static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[83])) << 24;
        if (84 + 50ull * count == bytes.size()) return parse_stl_binary(bytes);
    }
    std::size_t first = 0;
    while (first < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[first]))) ++first;
    if (bytes.substr(first, 5) == "solid") return parse_stl_ascii(bytes);
    return parse_stl_binary(bytes);
}

TriangleMesh parse_obj(std::string_view text) {
    std::vector<Vec3> vertices;
    std::vector<Vec3> file_normals;
    std::vector<Face> faces;
    std::vector<long> normal_of_vertex;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        line = detail::trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        std::vector<std::string_view> parts = detail::split_ws(line);
        const std::string_view key = parts[0];
        auto coord = [&](std::size_t i) {
            double v = 0.0;
            if (i >= parts.size() || !detail::parse_double(parts[i], v)) {
                throw ParseError("bad OBJ record", line_offset, line_no);
            }
            return v;
        };
        if (key == "v") {
            vertices.emplace_back(coord(1), coord(2), coord(3));
            normal_of_vertex.push_back(-1);
        } else if (key == "vn") {
            file_normals.emplace_back(coord(1), coord(2), coord(3));
        } else if (key == "f") {
            if (parts.size() < 4) throw ParseError("OBJ face needs three corners", line_offset, line_no);
            std::vector<std::uint32_t> corner;
            for (std::size_t i = 1; i < parts.size(); ++i) {
                const std::string_view ref = parts[i];
                const auto slash = ref.find('/');
                long vi = 0;
                if (!detail::parse_long(ref.substr(0, slash), vi) || vi == 0) {
                    throw ParseError("bad OBJ face index", line_offset, line_no);
                }
                if (vi < 0) vi += static_cast<long>(vertices.size()) + 1;
                if (vi < 1 || vi > static_cast<long>(vertices.size())) {
                    throw ParseError("OBJ face index out of range", line_offset, line_no);
                }
                const auto v = static_cast<std::uint32_t>(vi - 1);
                const auto last = ref.rfind('/');
                if (slash != std::string_view::npos && last + 1 < ref.size()) {
                    long ni = 0;
                    if (ref.find('/', slash + 1) != std::string_view::npos &&
                        detail::parse_long(ref.substr(last + 1), ni)) {
                        if (ni < 0) ni += static_cast<long>(file_normals.size()) + 1;
                        if (normal_of_vertex[v] < 0) normal_of_vertex[v] = ni - 1;
                    }
                }
                corner.push_back(v);
            }
            for (std::size_t i = 1; i + 1 < corner.size(); ++i) {
                add_face(faces, corner[0], corner[i], corner[i + 1]);
            }
        }
    }
    if (vertices.empty() || faces.empty()) throw DataError("empty mesh");
    std::vector<Vec3> normals;
    const bool all_have_normals = std::all_of(normal_of_vertex.begin(), normal_of_vertex.end(), [&](long n) {
        return n >= 0 && n < static_cast<long>(file_normals.size());
    });
    if (all_have_normals) {
        for (long n : normal_of_vertex) normals.push_back(file_normals[static_cast<std::size_t>(n)]);
    }
    return make_mesh(std::move(vertices), std::move(faces), std::move(normals));
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") return parse_obj(bytes);
    return parse_stl(bytes);
}

std::string encode_stl(const TriangleMesh& mesh, StlEncoding encoding) {
    std::string out;
    auto facet_normal = [&](const Face& f) -> Vec3 {
        const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                           .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
        const double len = n.norm();
        return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    };
    if (encoding == StlEncoding::binary) {
        out.reserve(84 + 50 * mesh.faces.size());
        std::string header = "binary STL written by cephreg";
        header.resize(80, ' ');
        out += header;
        put_u32(out, static_cast<std::uint32_t>(mesh.faces.size()));
        for (const auto& f : mesh.faces) {
            const Vec3 n = facet_normal(f);
            for (int i = 0; i < 3; ++i) put_f32(out, static_cast<float>(n[i]));
            for (auto idx : f) {
                for (int i = 0; i < 3; ++i) put_f32(out, static_cast<float>(mesh.vertices[idx][i]));
            }
            out.push_back('\0');
            out.push_back('\0');
        }
        return out;
    }
    out += "solid cephreg\n";
    for (const auto& f : mesh.faces) {
        const Vec3 n = facet_normal(f);
        out += "  facet normal " + detail::format_double(n.x()) + ' ' + detail::format_double(n.y()) +
               ' ' + detail::format_double(n.z()) + "\n    outer loop\n";
        for (auto idx : f) {
            const Vec3& v = mesh.vertices[idx];
            out += "      vertex " + detail::format_double(v.x()) + ' ' + detail::format_double(v.y()) +
                   ' ' + detail::format_double(v.z()) + '\n';
        }
        out += "    endloop\n  endfacet\n";
    }
    out += "endsolid cephreg\n";
    return out;
}

void save_stl(const TriangleMesh& mesh, const std::filesystem::path& path, StlEncoding encoding) {
    write_file(path, encode_stl(mesh, encoding));
}

// ---------------------------------------------------------------------------
// Contours

PointSet2D parse_contour(std::string_view text) {
    PointSet2D set;
    bool have_jaw = false;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += raw.size() + 1;
        const std::string_view line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (const auto eq = line.find('='); eq != std::string_view::npos) {
            const auto key = detail::trim(line.substr(0, eq));
            const auto value = detail::trim(line.substr(eq + 1));
            if (!set.points.empty()) throw ParseError("header after records", line_offset, line_no);
            if (key == "jaw") {
                set.label = parse_jaw(value);
                have_jaw = true;
            } else if (key == "kind") {
                set.kind = parse_kind(value);
            } else {
                throw ParseError("unknown header key '" + std::string(key) + "'", line_offset, line_no);
            }
            continue;
        }
        const auto values = detail::split_numbers(line);
        double u = 0.0, v = 0.0;
        if (values.size() != 2 || !detail::parse_double(values[0], u) || !detail::parse_double(values[1], v) ||
            !std::isfinite(u) || !std::isfinite(v)) {
            throw ParseError("non-numeric contour record '" + std::string(line) + "'", line_offset, line_no);
        }
        set.points.emplace_back(u, v);
    }
    if (!have_jaw) throw ParseError("contour file lacks 'jaw=upper|lower' header", 0, 1);
    if (set.points.empty()) throw DataError("contour file holds no points");
    return set;
}

PointSet2D load_contour(const std::filesystem::path& path) {
    try {
        return parse_contour(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), std::nullopt);
    }
}

std::string format_contour(const PointSet2D& set, const std::vector<std::string>& header_comments) {
    std::string out;
    for (const auto& c : header_comments) out += "# " + c + '\n';
    out += "jaw=" + std::string(to_string(set.label)) + '\n';
    out += "kind=" + std::string(to_string(set.kind)) + '\n';
    for (const auto& p : set.points) {
        out += detail::format_double(p.x()) + ',' + detail::format_double(p.y()) + '\n';
    }
    return out;
}

void save_contour(const PointSet2D& set, const std::filesystem::path& path,
                  const std::vector<std::string>& header_comments) {
    write_file(path, format_contour(set, header_comments));
}

// ---------------------------------------------------------------------------
// Landmarks

LandmarkSet parse_landmarks(std::string_view text) {
    LandmarkSet set;
    bool have_dimension = false;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += raw.size() + 1;
        const std::string_view line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw ParseError("landmark record lacks 'CODE:'", line_offset, line_no);
        }
        const std::string code(detail::trim(line.substr(0, colon)));
        std::string_view coords = detail::trim(line.substr(colon + 1));
        if (!coords.empty() && coords.front() == '(' && coords.back() == ')') {
            coords = detail::trim(coords.substr(1, coords.size() - 2));
        }
        const auto values = detail::split_numbers(coords);
        if (values.size() != 2 && values.size() != 3) {
            throw ParseError("landmark " + code + " needs 2 or 3 coordinates", line_offset, line_no);
        }
        Vec3 p = Vec3::Zero();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!detail::parse_double(values[i], p[static_cast<Eigen::Index>(i)])) {
                throw ParseError("non-numeric landmark coordinate", line_offset, line_no);
            }
        }
        const int dim = static_cast<int>(values.size());
        if (have_dimension && dim != set.dimension) {
            throw ParseError("mixed 2D and 3D landmark records", line_offset, line_no);
        }
        set.dimension = dim;
        have_dimension = true;
        set.add(code, p);
    }
    if (set.entries.empty()) throw DataError("landmark file holds no records");
    return set;
}

LandmarkSet load_landmarks(const std::filesystem::path& path) { return parse_landmarks(read_file(path)); }

std::string format_landmarks(const LandmarkSet& set) {
    std::string out;
    for (const auto& [code, lm] : set.entries) {
        out += code + ": " + detail::format_double(lm.position.x()) + ',' +
               detail::format_double(lm.position.y());
        if (set.dimension == 3) out += ',' + detail::format_double(lm.position.z());
        out += '\n';
    }
    return out;
}

void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path) {
    write_file(path, format_landmarks(set));
}

// ---------------------------------------------------------------------------
// Images

std::string encode_pgm16(const ScalarMap2D& map) {
    if (map.width <= 0 || map.height <= 0 ||
        map.data.size() != static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height)) {
        throw DataError("map has inconsistent dimensions");
    }
    std::string out = "P5\n" + std::to_string(map.width) + ' ' + std::to_string(map.height) + "\n65535\n";
    const double lo = map.min_value();
    const double hi = map.max_value();
    const double range = hi - lo;
    out.reserve(out.size() + 2 * map.data.size());
    for (double v : map.data) {
        std::uint16_t sample = 0;
        if (range > 0.0 && std::isfinite(range)) {
            sample = static_cast<std::uint16_t>(std::lround((v - lo) / range * 65535.0));
        }
        out.push_back(static_cast<char>(sample >> 8));
        out.push_back(static_cast<char>(sample & 0xFF));
    }
    return out;
}

void save_map(const ScalarMap2D& map, const std::filesystem::path& path) { write_file(path, encode_pgm16(map)); }

ScalarMap2D decode_pgm(std::string_view bytes) {
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto header_int = [&] {
        skip_space_and_comments();
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        long v = 0;
        if (!detail::parse_long(bytes.substr(start, pos - start), v) || v <= 0) {
            throw ParseError("bad PGM header", start);
        }
        return v;
    };
    if (bytes.substr(0, 2) != "P5") throw ParseError("not a binary PGM (P5)", 0);
    pos = 2;
    const long w = header_int();
    const long h = header_int();
    const long maxval = header_int();
    if (maxval > 65535) throw ParseError("PGM maxval too large", pos);
    ++pos;  // single whitespace before raster
    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() < pos + n * bps) throw ParseError("PGM raster truncated", bytes.size());
    ScalarMap2D map(static_cast<int>(w), static_cast<int>(h), MapMeaning::intensity);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned value = static_cast<unsigned char>(bytes[pos + i * bps]);
        if (bps == 2) value = (value << 8) | static_cast<unsigned char>(bytes[pos + i * bps + 1]);
        map.data[i] = static_cast<double>(value) / static_cast<double>(maxval);
    }
    return map;
}

ScalarMap2D load_map(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

// ---------------------------------------------------------------------------
// Frame and geometry records

std::string format_frame(const AnatomicalFrame& frame) {
    const Eigen::Matrix3d R = frame.rotation();
    std::string out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out += detail::format_double(R(r, c)) + (c == 2 ? '\n' : ' ');
    }
    out += detail::format_double(frame.origin.x()) + ' ' + detail::format_double(frame.origin.y()) + ' ' +
           detail::format_double(frame.origin.z()) + '\n';
    return out;
}

AnatomicalFrame parse_frame(std::string_view text) {
    std::vector<double> values;
    std::size_t offset = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        const std::size_t line_offset = offset;
        offset += raw.size() + 1;
        const std::string_view line = detail::trim(raw.substr(0, raw.find('#')));
        for (auto tok : detail::split_ws(line)) {
            double v = 0.0;
            if (!detail::parse_double(tok, v)) throw ParseError("non-numeric frame value", line_offset);
            values.push_back(v);
        }
    }
    if (values.size() != 12) throw ParseError("frame record needs 12 numbers", std::nullopt);
    AnatomicalFrame f;
    f.X = Vec3(values[0], values[3], values[6]);
    f.Y = Vec3(values[1], values[4], values[7]);
    f.Z = Vec3(values[2], values[5], values[8]);
    f.origin = Vec3(values[9], values[10], values[11]);
    validate(f, 1e-6);
    return f;
}

void save_frame(const AnatomicalFrame& frame, const std::filesystem::path& path) {
    write_file(path, format_frame(frame));
}

AnatomicalFrame load_frame(const std::filesystem::path& path) { return parse_frame(read_file(path)); }

std::string format_geometry(const DetectorGeometry& g) {
    std::string out;
    out += "source_x=" + detail::format_double(g.source_x) + '\n';
    out += "detector_x=" + detail::format_double(g.detector_x) + '\n';
    out += "pixel_spacing=" + detail::format_double(g.pixel_spacing) + '\n';
    out += "image_width=" + std::to_string(g.image_width) + '\n';
    out += "image_height=" + std::to_string(g.image_height) + '\n';
    out += "origin_u=" + detail::format_double(g.detector_origin_uv.x()) + '\n';
    out += "origin_v=" + detail::format_double(g.detector_origin_uv.y()) + '\n';
    return out;
}

DetectorGeometry parse_geometry(std::string_view text) {
    DetectorGeometry g;
    std::size_t line_no = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", std::nullopt, line_no);
        const auto key = detail::trim(line.substr(0, eq));
        double v = 0.0;
        if (!detail::parse_double(detail::trim(line.substr(eq + 1)), v)) {
            throw ParseError("non-numeric value for '" + std::string(key) + "'", std::nullopt, line_no);
        }
        if (key == "source_x") g.source_x = v;
        else if (key == "detector_x") g.detector_x = v;
        else if (key == "pixel_spacing") g.pixel_spacing = v;
        else if (key == "image_width") g.image_width = static_cast<int>(v);
        else if (key == "image_height") g.image_height = static_cast<int>(v);
        else if (key == "origin_u") g.detector_origin_uv.x() = v;
        else if (key == "origin_v") g.detector_origin_uv.y() = v;
        else throw ParseError("unknown geometry key '" + std::string(key) + "'", std::nullopt, line_no);
    }
    g.validate();
    return g;
}

void save_geometry(const DetectorGeometry& geom, const std::filesystem::path& path) {
    write_file(path, format_geometry(geom));
}

DetectorGeometry load_geometry(const std::filesystem::path& path) { return parse_geometry(read_file(path)); }

}  // namespace cephreg
