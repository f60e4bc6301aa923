#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cephreg/mesh_model.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cephreg_cli_tests";

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    fs::create_directories(kWork);
    const fs::path log = kWork / ("out_" + std::to_string(counter++) + ".txt");
    const std::string cmd = "cd '" + kWork.string() + "' && " + env + " '" CEPHREG_CLI "' " + args + " > '" +
                            log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) { return cephreg::read_file(p); }

// One synthetic case shared by the tests below.
const fs::path& case_dir() {
    static const fs::path dir = [] {
        fs::remove_all(kWork);
        const Run r = run("synth --out case --seed 9 --teeth 12");
        REQUIRE(r.code == 0);
        return kWork / "case";
    }();
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("bogus").code == 2);
    CHECK(run("register --case '" + case_dir().string() + "' --mode fastest").code == 2);
    CHECK(run("register").code == 2);
    CHECK(run("synth --out x --type round").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("data errors exit with 3") {
    CHECK(run("evaluate --report missing.json").code == 3);
    CHECK(run("register --case '" + kWork.string() + "'").code == 3);
    std::ofstream(kWork / "bad.json") << "{not json";
    CHECK(run("evaluate --report bad.json").code == 3);
    std::ofstream(kWork / "bad_contour.txt") << "jaw=upper\n1,2\nx,y\n";
    CHECK(run("register --cr bad_contour.txt --silhouette bad_contour.txt").code == 3);
    const Run lm = run("evaluate --cr case/cr_contour_upper.txt --registered case/cr_contour_upper.txt "
                       "--mesh-landmarks case/none.txt --cr-landmarks case/cr_landmarks.txt "
                       "--transform case/none.txt --frame case/none.txt");
    CHECK(lm.code == 3);
}

TEST_CASE("frame command writes shared frames; single jaw warns") {
    case_dir();
    const Run r = run("frame --upper case/mesh_upper.stl --lower case/mesh_lower.stl --out frames");
    REQUIRE(r.code == 0);
    const auto fu = cephreg::load_frame(kWork / "frames/frame_upper.txt");
    const auto fl = cephreg::load_frame(kWork / "frames/frame_lower.txt");
    CHECK(fu.Y == fl.Y);
    CHECK(fs::file_size(kWork / "frames/crown_candidates_upper.txt") > 100);
    CHECK(r.out.find("warning") == std::string::npos);

    const Run single = run("frame --upper case/mesh_upper.stl --out frames1");
    CHECK(single.code == 0);
    CHECK(single.out.find("warning") != std::string::npos);
    CHECK(run("frame --upper case/nothing.stl --out frames2").code == 3);
}

TEST_CASE("render command") {
    case_dir();
    const Run r = run("render --mesh case/mesh_upper.stl --out render --target-count 441");
    REQUIRE(r.code == 0);
    const auto s = cephreg::load_contour(kWork / "render/silhouette_upper.txt");
    CHECK(s.size() == 441);
    CHECK(slurp(kWork / "render/thickness_upper.pgm").rfind("P5\n512 384\n65535\n", 0) == 0);
    CHECK(fs::exists(kWork / "render/intensity_upper.pgm"));
    REQUIRE(run("render --mesh case/mesh_upper.stl --out render2 --target-count 441").code == 0);
    // Identical apart from the echoed output directory.
    auto body = [](const std::string& text) { return text.substr(text.find("\njaw=")); };
    CHECK(body(slurp(kWork / "render/silhouette_upper.txt")) == body(slurp(kWork / "render2/silhouette_upper.txt")));
    CHECK(slurp(kWork / "render/thickness_upper.pgm") == slurp(kWork / "render2/thickness_upper.pgm"));
}

TEST_CASE("register, evaluate and overlay on a case") {
    case_dir();
    REQUIRE(run("register --case case --mode bbox_only").code == 0);
    REQUIRE(run("register --case case --seed 3").code == 0);
    const std::string first = slurp(kWork / "case/report_dentalscr.json");
    REQUIRE(run("register --case case", "CEPHREG_SEED=3").code == 0);
    CHECK(slurp(kWork / "case/report_dentalscr.json") == first);
    CHECK(first.find("\"seed\": 3") != std::string::npos);

    const Run ev = run("evaluate --report case/report_bbox_only.json --report case/report_dentalscr.json");
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("Inc&Can") != std::string::npos);
    CHECK(ev.out.find("report_dentalscr/upper") != std::string::npos);

    const Run truth = run("evaluate --cr case/cr_contour_upper.txt --registered case/cr_contour_upper.txt");
    REQUIRE(truth.code == 0);
    CHECK(truth.out.find("0.000") != std::string::npos);

    const Run lm = run("evaluate --cr case/cr_contour_upper.txt --registered case/registered_upper_dentalscr.txt "
                       "--mesh-landmarks case/mesh_landmarks.txt --cr-landmarks case/cr_landmarks.txt "
                       "--transform case/transform_upper_dentalscr.txt --frame frames/frame_upper.txt "
                       "--geometry case/geometry.cfg");
    CHECK(lm.code == 0);
    CHECK(lm.out.find("Landmark errors") != std::string::npos);

    REQUIRE(run("overlay --cr case/cr_contour_upper.txt --cr case/cr_contour_lower.txt "
                "--registered case/registered_upper_dentalscr.txt --out overlay.ppm")
                .code == 0);
    const std::string ppm = slurp(kWork / "overlay.ppm");
    CHECK(ppm.rfind("P6\n703 938\n255\n", 0) == 0);
    CHECK(ppm.size() == std::string("P6\n703 938\n255\n").size() + 703u * 938u * 3u);
    CHECK(ppm.find(std::string("\xdc\x00\x00", 3)) != std::string::npos);  // upper CR in red
    CHECK(ppm.find(std::string("\x00\xa0\x00", 3)) != std::string::npos);  // lower CR in green
}

TEST_CASE("pair registration and config files") {
    case_dir();
    REQUIRE(run("render --mesh case/mesh_upper.stl --out pair --target-count 441").code == 0);
    std::ofstream(kWork / "pair.ini") << "[register]\nmode=single_stage\nseed=4\n";
    const Run r = run("--config pair.ini register --cr case/cr_contour_upper.txt --silhouette pair/silhouette_upper.txt "
                      "--out pair/report.json --transform-out pair/t.txt --registered-out pair/reg.txt");
    REQUIRE(r.code == 0);
    const std::string rep = slurp(kWork / "pair/report.json");
    CHECK(rep.find("\"mode\": \"single_stage\"") != std::string::npos);
    CHECK(rep.find("\"seed\": 4") != std::string::npos);
    CHECK(fs::exists(kWork / "pair/t.txt"));
    CHECK(cephreg::load_contour(kWork / "pair/reg.txt").size() == 441);

    // Flags win over the config file.
    REQUIRE(run("--config pair.ini register --mode bbox_only --cr case/cr_contour_upper.txt "
                "--silhouette pair/silhouette_upper.txt --out pair/report2.json")
                .code == 0);
    CHECK(slurp(kWork / "pair/report2.json").find("\"mode\": \"bbox_only\"") != std::string::npos);
}

TEST_CASE("synth writes several cases") {
    REQUIRE(run("synth --out many --seed 100 --count 2 --noise 1 --type square --teeth 8").code == 0);
    CHECK(fs::exists(kWork / "many/case_000/truth.txt"));
    CHECK(fs::exists(kWork / "many/case_001/truth.txt"));
    CHECK(slurp(kWork / "many/case_001/truth.txt").find("seed=101") != std::string::npos);
}
