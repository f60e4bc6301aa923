#include <doctest.h>

#include <filesystem>
#include <set>

#include "cephreg/mesh_model.hpp"
#include "oracles.hpp"

using namespace cephreg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cephreg_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

TriangleMesh tetrahedron() {
    return make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

}  // namespace

TEST_CASE("unit cube: 8 vertices, 12 faces, lumped area 6") {
    const TriangleMesh cube = oracle::unit_cube();
    CHECK(cube.vertices.size() == 8);
    CHECK(cube.faces.size() == 12);
    double sum = 0.0;
    for (double a : cube.per_vertex_area) sum += a;
    CHECK(sum == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(sum == doctest::Approx(total_face_area(cube)).epsilon(1e-9));
    for (const auto& n : cube.normals) CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
    // Corner normals point away from the cube center.
    for (std::size_t i = 0; i < 8; ++i) CHECK(cube.normals[i].dot(cube.vertices[i] - Vec3(0.5, 0.5, 0.5)) > 0.0);
}

TEST_CASE("unit cube survives an STL file round trip") {
    const fs::path dir = temp_dir("cube");
    save_stl(oracle::unit_cube(), dir / "cube.stl");
    const TriangleMesh back = load_mesh(dir / "cube.stl");
    CHECK(back.vertices.size() == 8);
    CHECK(back.faces.size() == 12);
}

TEST_CASE("empty meshes are rejected") {
    CHECK_THROWS_AS(make_mesh({}, {}), DataError);
    CHECK_THROWS_AS(make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {}), DataError);
    CHECK_THROWS_AS(parse_stl(std::string(84, '\0')), DataError);
    CHECK_THROWS_AS(parse_stl("solid empty\nendsolid empty\n"), DataError);
}

TEST_CASE("ASCII and binary encodings of one tetrahedron agree") {
    const TriangleMesh t = tetrahedron();
    const TriangleMesh a = parse_stl(encode_stl(t, StlEncoding::ascii));
    const TriangleMesh b = parse_stl(encode_stl(t, StlEncoding::binary));
    REQUIRE(a.vertices.size() == 4);
    REQUIRE(b.vertices.size() == 4);
    auto key = [](const Vec3& v) { return std::array<long, 3>{std::lround(v.x() * 1e6), std::lround(v.y() * 1e6), std::lround(v.z() * 1e6)}; };
    std::set<std::array<long, 3>> sa, sb, st;
    for (const auto& v : a.vertices) sa.insert(key(v));
    for (const auto& v : b.vertices) sb.insert(key(v));
    for (const auto& v : t.vertices) st.insert(key(v));
    CHECK(sa == sb);
    CHECK(sa == st);
}

TEST_CASE("load-save-load is a fixpoint") {
    const fs::path dir = temp_dir("fixpoint");
    const TriangleMesh cube = oracle::unit_cube();
    save_stl(cube, dir / "a.stl", StlEncoding::ascii);
    const TriangleMesh m1 = load_mesh(dir / "a.stl");
    save_stl(m1, dir / "b.stl", StlEncoding::binary);
    const TriangleMesh m2 = load_mesh(dir / "b.stl");
    REQUIRE(m1.vertices.size() == m2.vertices.size());
    REQUIRE(m1.faces.size() == m2.faces.size());
    for (std::size_t i = 0; i < m1.vertices.size(); ++i) CHECK((m1.vertices[i] - m2.vertices[i]).norm() < 1e-6);
    CHECK(m1.faces == m2.faces);
}

TEST_CASE("OBJ meshes load") {
    const TriangleMesh m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n");
    CHECK(m.vertices.size() == 4);
    CHECK(m.faces.size() == 4);
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nf 1 2 7\n"), DataError);
}

TEST_CASE("malformed STL reports a byte offset") {
    try {
        parse_stl("solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 abc\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset().has_value());
    }
}

TEST_CASE("contour files") {
    std::string text = "jaw=upper\n";
    for (int i = 0; i < 79; ++i) text += std::to_string(i) + ".5," + std::to_string(2 * i) + "\n";
    const PointSet2D c = parse_contour(text);
    CHECK(c.size() == 79);
    CHECK(c.label == Jaw::upper);
    CHECK(c.points[3].x() == 3.5);
    CHECK(c.points[3].y() == 6.0);

    const PointSet2D one = parse_contour("jaw=lower\n5.0,7.5\n");
    CHECK(one.size() == 1);
    CHECK(one.label == Jaw::lower);
    CHECK(one.points[0] == Vec2(5.0, 7.5));

    CHECK_THROWS_AS(parse_contour(""), DataError);
    CHECK_THROWS_AS(parse_contour("jaw=upper\n"), DataError);
    try {
        parse_contour("jaw=upper\n1,2\n3,x\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.line().has_value());
        CHECK(*e.line() == 3);
    }

    const PointSet2D back = parse_contour(format_contour(c, {"note"}));
    CHECK(back.points == c.points);
}

TEST_CASE("landmark files and groups") {
    const LandmarkSet one = parse_landmarks("UR6_MB: (412.0, 388.5)\n");
    REQUIRE(one.size() == 1);
    const Landmark& lm = one.entries.at("UR6_MB");
    CHECK(lm.group == LandmarkGroup::molar);
    CHECK(lm.position.x() == 412.0);
    CHECK(lm.position.y() == 388.5);
    CHECK(one.dimension == 2);

    try {
        parse_landmarks("UR9_tip: 1,2\n");
        FAIL("expected an unknown-code error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("UR9_tip") != std::string::npos);
    }

    // The twelve evaluation codes: incisors/canines and molars only.
    const char* codes[] = {"UR1_tip", "UR2_tip", "UR3_cusp", "UR6_MB", "UR6_DB", "UR7_MB",
                           "LR1_tip", "LR2_tip", "LR3_cusp", "LR6_MB", "LR6_DB", "LR7_MB"};
    std::string text;
    for (const char* c : codes) text += std::string(c) + ": 1,2\n";
    const LandmarkSet full = parse_landmarks(text);
    CHECK(full.size() == 12);
    CHECK(full.count(LandmarkGroup::incisor_canine) == 6);
    CHECK(full.count(LandmarkGroup::premolar) == 0);
    CHECK(full.count(LandmarkGroup::molar) == 6);

    CHECK(landmark_group("LR4_cusp") == LandmarkGroup::premolar);
    CHECK(landmark_group("UR5_cusp") == LandmarkGroup::premolar);
    CHECK_THROWS_AS(parse_landmarks("UR1_tip: 1,2\nUR1_tip: 3,4\n"), DataError);
    CHECK_THROWS_AS(parse_landmarks("UR1_tip: 1,2\nUR2_tip: 1,2,3\n"), DataError);

    const LandmarkSet three = parse_landmarks("LR7_MB: 1.5,-2,3\n");
    CHECK(three.dimension == 3);
    CHECK(parse_landmarks(format_landmarks(three)).entries.at("LR7_MB").position == Vec3(1.5, -2, 3));
}

TEST_CASE("16-bit PGM normalization") {
    ScalarMap2D m(2, 2, MapMeaning::thickness);
    m.data = {0, 1, 2, 3};
    const std::string bytes = encode_pgm16(m);
    const std::string header = "P5\n2 2\n65535\n";
    REQUIRE(bytes.size() == header.size() + 8);
    CHECK(bytes.substr(0, header.size()) == header);
    auto sample = [&](int k) {
        const auto hi = static_cast<unsigned char>(bytes[header.size() + 2 * k]);
        const auto lo = static_cast<unsigned char>(bytes[header.size() + 2 * k + 1]);
        return hi * 256 + lo;
    };
    CHECK(sample(0) == 0);
    CHECK(sample(1) == 21845);
    CHECK(sample(2) == 43690);
    CHECK(sample(3) == 65535);

    ScalarMap2D constant(3, 2, MapMeaning::thickness, 4.0);
    const std::string cb = encode_pgm16(constant);
    for (std::size_t i = std::string("P5\n3 2\n65535\n").size(); i < cb.size(); ++i) CHECK(cb[i] == '\0');

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 9.0);
    ScalarMap2D r(17, 9, MapMeaning::thickness);
    for (auto& v : r.data) v = u(rng);
    const ScalarMap2D back = decode_pgm(encode_pgm16(r));
    const double lo = r.min_value(), hi = r.max_value();
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        CHECK(std::abs(back.data[i] - (r.data[i] - lo) / (hi - lo)) <= 1.0 / 65535.0);
    }
}

TEST_CASE("frame and geometry records round trip") {
    AnatomicalFrame f;
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.3, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    f.X = R.col(0);
    f.Y = R.col(1);
    f.Z = R.col(2);
    f.origin = Vec3(1.5, -2.25, 7);
    const AnatomicalFrame g = parse_frame(format_frame(f));
    CHECK((g.rotation() - R).norm() == 0.0);
    CHECK(g.origin == f.origin);
    CHECK_THROWS(parse_frame("1 0 0 0 1 0 0 0 1 0 0"));

    DetectorGeometry geom;
    geom.source_x = -1000;
    geom.detector_x = 500;
    geom.pixel_spacing = 0.1;
    const DetectorGeometry h = parse_geometry(format_geometry(geom));
    CHECK(h.source_x == -1000);
    CHECK(h.detector_x == 500);
    CHECK(h.pixel_spacing == 0.1);
    DetectorGeometry bad;
    bad.pixel_spacing = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("frame validation") {
    AnatomicalFrame f;
    CHECK_NOTHROW(validate(f));
    f.Y = -f.Y;  // left-handed
    CHECK_THROWS_AS(validate(f), NumericalError);
}
