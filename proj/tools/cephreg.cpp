// cephreg: command-line front end.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cephreg/mesh_model.hpp"
#include "cephreg/metrics.hpp"
#include "cephreg/pipeline.hpp"
#include "cephreg/registration.hpp"
#include "cephreg/report.hpp"
#include "cephreg/surface_drr.hpp"
#include "cephreg/synth.hpp"
#include "cephreg/umda_frame.hpp"

namespace fs = std::filesystem;
using namespace cephreg;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Effective settings of a command as `key=value` comment lines.
std::vector<std::string> echo(const CLI::App& cmd) {
    std::vector<std::string> lines{"cephreg " + cmd.get_name()};
    for (const CLI::Option* opt : cmd.get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
        if (opt->get_lnames().empty()) continue;
        const auto& results = opt->results();
        std::string value;
        for (std::size_t i = 0; i < results.size(); ++i) value += (i ? " " : "") + results[i];
        if (results.empty()) value = opt->get_expected_max() == 0 ? "false" : opt->get_default_str();
        lines.push_back(opt->get_lnames().front() + "=" + value);
    }
    return lines;
}

std::string comment_block(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += "# " + l + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Shared option groups.

struct GeometryOptions {
    std::string geometry_file;
    std::optional<double> source_x, detector_x, pixel_spacing;

    void add(CLI::App* cmd) {
        cmd->add_option("--geometry", geometry_file, "Detector geometry file (key=value)")->check(CLI::ExistingFile);
        cmd->add_option("--source-x", source_x, "Source position on the projection axis (mm)");
        cmd->add_option("--detector-x", detector_x, "Detector plane position (mm)");
        cmd->add_option("--pixel-spacing", pixel_spacing, "Detector pixel spacing (mm/px)");
    }
    DetectorGeometry resolve() const {
        DetectorGeometry g = geometry_file.empty() ? DetectorGeometry{} : load_geometry(geometry_file);
        if (source_x) g.source_x = *source_x;
        if (detector_x) g.detector_x = *detector_x;
        if (pixel_spacing) g.pixel_spacing = *pixel_spacing;
        g.validate();
        return g;
    }
};

struct SplatOptions {
    drr::SplatParams params;
    double threshold = 0.05;

    void add(CLI::App* cmd) {
        cmd->add_option("--sigma", params.sigma_px, "Splat width (px)")->capture_default_str();
        cmd->add_option("--mu0", params.mu0, "Effective attenuation")->capture_default_str();
        cmd->add_option("--rho0", params.rho0, "Shell density")->capture_default_str();
        cmd->add_option("--kernel-radius", params.kernel_truncation_radius, "Kernel window in sigmas")
            ->capture_default_str();
        cmd->add_flag("--supersample", params.face_supersampling, "Also splat face centroids");
        cmd->add_option("--threshold", threshold, "Silhouette threshold as a fraction of the maximum")
            ->capture_default_str();
    }
};

std::uint64_t parse_seed(const std::string& text) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos, 0);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw UsageError("seed must be a nonnegative integer, got '" + text + "'");
    }
}

// ---------------------------------------------------------------------------
// frame

struct FrameCmd {
    std::string upper, lower, out;
    double crown_percentile = 20.0;
    double molar_fraction = 0.15;

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("frame", "Build the anatomical frame of one or two jaw meshes");
        cmd->add_option("--upper", upper, "Upper jaw mesh (STL/OBJ)");
        cmd->add_option("--lower", lower, "Lower jaw mesh (STL/OBJ)");
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->add_option("--crown-percentile", crown_percentile, "Crown candidate percentage")->capture_default_str();
        cmd->add_option("--molar-fraction", molar_fraction, "Arch tail fraction for molar endpoints")
            ->capture_default_str();
        cmd->callback([this, cmd] { run(*cmd); });
    }

    umda::UmdaParams params(Jaw jaw) const {
        umda::UmdaParams p = umda::default_params(jaw);
        p.crown_percentile = crown_percentile;
        p.molar_fraction = molar_fraction;
        p.validate();
        return p;
    }

    void run(const CLI::App& cmd) {
        if (upper.empty() && lower.empty()) throw UsageError("frame needs --upper and/or --lower");
        fs::create_directories(out);
        std::optional<TriangleMesh> mu, ml;
        if (!upper.empty()) mu = load_mesh(upper);
        if (!lower.empty()) ml = load_mesh(lower);
        std::optional<AnatomicalFrame> fu, fl;
        if (mu && ml) {
            const auto shared =
                umda::shared_frame(umda::jaw_axes(*mu, params(Jaw::upper)), umda::jaw_axes(*ml, params(Jaw::lower)));
            fu = shared.upper;
            fl = shared.lower;
        } else {
            std::cerr << "warning: single jaw given; its lateral axis is not shared\n";
            if (mu) fu = umda::single_jaw_frame(umda::jaw_axes(*mu, params(Jaw::upper)));
            if (ml) fl = umda::single_jaw_frame(umda::jaw_axes(*ml, params(Jaw::lower)));
        }
        const std::string header = comment_block(echo(cmd));
        auto emit = [&](Jaw jaw, const TriangleMesh& mesh, const AnatomicalFrame& frame) {
            const std::string name(to_string(jaw));
            write_file(fs::path(out) / ("frame_" + name + ".txt"), header + format_frame(frame));
            std::ostringstream pts;
            pts << header << "# crown candidates jaw=" << name << " (x y z, mm)\n";
            pts.precision(17);
            for (std::size_t i : umda::crown_candidates(mesh, params(jaw))) {
                const Vec3& v = mesh.vertices[i];
                pts << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
            }
            write_file(fs::path(out) / ("crown_candidates_" + name + ".txt"), pts.str());
            std::cout << "frame_" << name << ": " << format_frame(frame);
        };
        if (fu) emit(Jaw::upper, *mu, *fu);
        if (fl) emit(Jaw::lower, *ml, *fl);
    }
};

// ---------------------------------------------------------------------------
// render

struct RenderCmd {
    std::string mesh, frame, out, jaw = "upper";
    bool no_umda = false;
    std::size_t target_count = 0;
    GeometryOptions geometry;
    SplatOptions splat;

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("render", "Render thickness, intensity and silhouette of a jaw mesh");
        cmd->add_option("--mesh", mesh, "Jaw mesh (STL/OBJ)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--jaw", jaw, "upper or lower")->check(CLI::IsMember({"upper", "lower"}))->capture_default_str();
        cmd->add_option("--frame", frame, "Frame file; default builds the single-jaw anatomical frame")
            ->check(CLI::ExistingFile);
        cmd->add_flag("--no-umda", no_umda, "Use world axes at the centroid instead of the anatomical frame");
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->add_option("--target-count", target_count, "Resample the silhouette to this many points (0 keeps all)")
            ->capture_default_str();
        geometry.add(cmd);
        splat.add(cmd);
        cmd->callback([this, cmd] { run(*cmd); });
    }

    void run(const CLI::App& cmd) {
        const Jaw j = parse_jaw(jaw);
        const TriangleMesh m = load_mesh(mesh);
        AnatomicalFrame f;
        if (!frame.empty()) {
            f = load_frame(frame);
        } else if (no_umda) {
            f = umda::centroid_frame(m);
        } else {
            f = umda::single_jaw_frame(umda::jaw_axes(m, umda::default_params(j)));
        }
        const DetectorGeometry g = geometry.resolve();
        splat.params.validate();
        const ScalarMap2D thickness = drr::render_thickness(umda::to_projection_coords(m, f), g, splat.params);
        drr::SilhouetteParams sp;
        sp.threshold_fraction = splat.threshold;
        if (target_count > 0) sp.target_count = target_count;
        PointSet2D sil = drr::extract_silhouette(thickness, sp);
        sil.label = j;
        sil.kind = PointSetKind::ios_silhouette;
        fs::create_directories(out);
        const std::string name(to_string(j));
        save_map(thickness, fs::path(out) / ("thickness_" + name + ".pgm"));
        save_map(drr::intensity(thickness, splat.params), fs::path(out) / ("intensity_" + name + ".pgm"));
        save_contour(sil, fs::path(out) / ("silhouette_" + name + ".txt"), echo(cmd));
        write_file(fs::path(out) / ("frame_" + name + ".txt"), comment_block(echo(cmd)) + format_frame(f));
        std::cout << "silhouette_" << name << ": " << sil.size() << " points\n";
    }
};

// ---------------------------------------------------------------------------
// register

struct RegisterCmd {
    std::vector<std::string> cases;
    std::string cr, silhouette, out, transform_out, registered_out;
    std::string mode = "dentalscr";
    std::string seed_text = "0";
    bool one_sided = false, no_umda = false;
    std::vector<int> image_size{703, 938};
    unsigned jobs = 1;
    SplatOptions splat;

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("register", "Register projected silhouettes to CR contours");
        cmd->add_option("--case", cases, "Case directory (repeatable)")->check(CLI::ExistingDirectory);
        cmd->add_option("--cr", cr, "CR contour file")->check(CLI::ExistingFile);
        cmd->add_option("--silhouette", silhouette, "Silhouette file (detector pixels)")->check(CLI::ExistingFile);
        cmd->add_option("--mode", mode, "dentalscr, bbox_only or single_stage")->capture_default_str();
        cmd->add_flag("--one-sided", one_sided, "Optimize the silhouette-to-CR term only");
        cmd->add_flag("--no-umda", no_umda, "Render cases in world axes at the centroid");
        cmd->add_option("--seed", seed_text, "Random seed (falls back to CEPHREG_SEED)")
            ->envname("CEPHREG_SEED")
            ->capture_default_str();
        cmd->add_option("--image-size", image_size, "CR image width and height")->expected(2)->capture_default_str();
        cmd->add_option("--out", out, "Report path (pair mode) or output directory (case mode, default: the case)");
        cmd->add_option("--transform-out", transform_out, "Transform file (pair mode)");
        cmd->add_option("--registered-out", registered_out, "Registered silhouette file (pair mode)");
        cmd->add_option("--jobs", jobs, "Cases processed in parallel")->check(CLI::PositiveNumber)->capture_default_str();
        splat.add(cmd);
        cmd->callback([this, cmd] { run(*cmd); });
    }

    pipeline::Config config() const {
        pipeline::Config c;
        try {
            c.mode = pipeline::parse_mode(mode);
        } catch (const DataError& e) {
            throw UsageError(e.what());
        }
        c.one_sided = one_sided;
        c.no_umda = no_umda;
        c.seed = parse_seed(seed_text);
        if (image_size[0] <= 0 || image_size[1] <= 0) throw UsageError("image size must be positive");
        c.cr_image = Lattice{0, 0, image_size[0], image_size[1]};
        c.splat = splat.params;
        c.splat.validate();
        c.threshold_fraction = splat.threshold;
        return c;
    }

    void run(const CLI::App& cmd) {
        const pipeline::Config c = config();
        if (!cases.empty() && (!cr.empty() || !silhouette.empty())) {
            throw UsageError("use either --case or --cr/--silhouette");
        }
        if (cases.empty()) {
            if (cr.empty() || silhouette.empty()) throw UsageError("register needs --case or both --cr and --silhouette");
            run_pair(cmd, c);
            return;
        }
        run_cases(cmd, c);
    }

    void run_pair(const CLI::App& cmd, const pipeline::Config& c) const {
        const PointSet2D crs = load_contour(cr);
        const PointSet2D sil = load_contour(silhouette);
        const auto r = pipeline::run_pair(crs, sil, c);
        report::Json j = pipeline::pair_report(r, c);
        j["inputs"] = {{"cr", cr}, {"silhouette", silhouette}};
        const std::string text = j.dump(2) + "\n";
        if (out.empty()) {
            std::cout << text;
        } else {
            write_file(out, text);
        }
        if (!transform_out.empty()) {
            write_file(transform_out, comment_block(echo(cmd)) + report::format_transform(r.registration.transform));
        }
        if (!registered_out.empty()) save_contour(r.registered, registered_out, echo(cmd));
        if (!out.empty()) {
            std::cout << "final_loss=" << r.registration.final_loss
                      << " chamfer_bidir_mean=" << r.contour.chamfer_bidir_mean << "\n";
        }
    }

    // One case; returns the summary line.
    std::string run_one(const std::string& dir, const pipeline::Config& c, const std::vector<std::string>& header) const {
        const auto in = pipeline::load_case(dir);
        const auto result = pipeline::run_case(in, c);
        report::Json j = pipeline::case_report(result);
        j["inputs"] = {{"case", fs::path(dir).filename().string()}};
        const fs::path target = out.empty() ? fs::path(dir) : fs::path(out) / fs::path(dir).filename();
        fs::create_directories(target);
        const std::string tag(pipeline::to_string(c.mode));
        const std::string suffix = tag + (c.one_sided ? "_one_sided" : "") + (c.no_umda ? "_no_umda" : "");
        write_file(target / ("report_" + suffix + ".json"), j.dump(2) + "\n");
        for (const auto& jr : result.jaws) {
            const std::string name(to_string(jr.jaw));
            write_file(target / ("transform_" + name + "_" + suffix + ".txt"),
                       comment_block(header) + report::format_transform(jr.registration.transform));
            save_contour(jr.registered, target / ("registered_" + name + "_" + suffix + ".txt"), header);
        }
        std::ostringstream line;
        line << dir << ": " << suffix;
        for (const auto& jr : result.metrics.jaws) {
            line << " " << to_string(jr.jaw) << ".chamfer=" << jr.contour.chamfer_bidir_mean;
        }
        if (result.metrics.combined) line << " lm_mean=" << result.metrics.combined->mean;
        return line.str();
    }

    void run_cases(const CLI::App& cmd, const pipeline::Config& c) const {
        // Case paths and output locations are left out so headers match across runs.
        std::vector<std::string> header{"cephreg register"};
        for (const auto& line : echo(cmd)) {
            if (line.rfind("case=", 0) == 0 || line.rfind("out=", 0) == 0 || line.rfind("jobs=", 0) == 0) continue;
            if (line != "cephreg register") header.push_back(line);
        }
        std::vector<std::string> lines(cases.size());
        std::vector<std::exception_ptr> errors(cases.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < cases.size(); i = next++) {
                try {
                    lines[i] = run_one(cases[i], c, header);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cases.size())));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < cases.size(); ++i) {
            if (errors[i]) std::rethrow_exception(errors[i]);
            std::cout << lines[i] << "\n";
        }
    }
};

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateCmd {
    std::vector<std::string> reports;
    std::string cr, registered, transform, mesh_landmarks, cr_landmarks, frame, json_out;
    GeometryOptions geometry;

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("evaluate", "Contour and landmark tables");
        cmd->add_option("--report", reports, "Registration report JSON (repeatable)");
        cmd->add_option("--cr", cr, "CR contour file");
        cmd->add_option("--registered", registered, "Registered silhouette (CR pixels)");
        cmd->add_option("--transform", transform, "Transform file, needed for landmarks");
        cmd->add_option("--mesh-landmarks", mesh_landmarks, "3D mesh landmark file");
        cmd->add_option("--cr-landmarks", cr_landmarks, "2D CR landmark file");
        cmd->add_option("--frame", frame, "Frame the silhouette was rendered in");
        cmd->add_option("--json", json_out, "Also write the metrics as JSON");
        geometry.add(cmd);
        cmd->callback([this, cmd] { run(*cmd); });
    }

    void run(const CLI::App& cmd) {
        if (!reports.empty()) {
            if (!cr.empty() || !registered.empty()) throw UsageError("use either --report or --cr/--registered");
            from_reports();
            return;
        }
        if (cr.empty() || registered.empty()) throw UsageError("evaluate needs --report or --cr and --registered");
        const PointSet2D crs = load_contour(cr);
        const PointSet2D reg_sil = load_contour(registered);
        metrics::JawInput in;
        in.jaw = crs.label;
        in.cr_contour = crs;
        in.ios_transformed = reg_sil;
        const bool any_lm = !mesh_landmarks.empty() || !cr_landmarks.empty();
        if (any_lm) {
            if (mesh_landmarks.empty() || cr_landmarks.empty() || transform.empty() || frame.empty()) {
                throw UsageError("landmark evaluation needs --mesh-landmarks, --cr-landmarks, --transform and --frame");
            }
            in.mesh_landmarks = load_landmarks(mesh_landmarks);
            in.cr_landmarks = load_landmarks(cr_landmarks);
            in.transform = report::parse_transform(read_file(transform));
            in.frame = load_frame(frame);
            in.geom = geometry.resolve();
        }
        const metrics::FullReport r = metrics::full_report({in});
        std::cout << comment_block(echo(cmd)) << report::format_tables(r);
        if (!json_out.empty()) write_file(json_out, report::to_json(r).dump(2) + "\n");
    }

    void from_reports() const {
        std::vector<std::pair<std::string, metrics::ContourMetrics>> contour;
        std::vector<std::pair<std::string, metrics::LandmarkStats>> landmarks;
        for (const auto& path : reports) {
            report::Json j;
            try {
                j = report::Json::parse(read_file(path));
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(path + ": " + e.what(), e.byte);
            }
            std::string label = fs::path(path).stem().string();
            const metrics::FullReport r = report::full_report_from_json(j.at("metrics"));
            for (const auto& jr : r.jaws) {
                contour.emplace_back(label + "/" + std::string(to_string(jr.jaw)), jr.contour);
                if (jr.landmarks) landmarks.emplace_back(label + "/" + std::string(to_string(jr.jaw)), *jr.landmarks);
            }
            if (r.combined) landmarks.emplace_back(label, *r.combined);
        }
        std::cout << "Contour distances (px)\n" << report::contour_table(contour);
        if (!landmarks.empty()) std::cout << "\nLandmark errors (px)\n" << report::landmark_table(landmarks);
    }
};

// ---------------------------------------------------------------------------
// overlay

struct Rgb {
    unsigned char r, g, b;
};

struct Canvas {
    int width, height;
    std::vector<Rgb> px;

    Canvas(int w, int h) : width(w), height(h), px(static_cast<std::size_t>(w) * h, Rgb{255, 255, 255}) {}

    void dot(int x, int y, Rgb c) {
        if (x >= 0 && y >= 0 && x < width && y < height) px[static_cast<std::size_t>(y) * width + x] = c;
    }
    void line(Vec2 a, Vec2 b, Rgb c) {
        const double len = (b - a).norm();
        const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
        for (int k = 0; k <= steps; ++k) {
            const Vec2 p = a + (b - a) * (static_cast<double>(k) / steps);
            dot(static_cast<int>(std::lround(p.x())), static_cast<int>(std::lround(p.y())), c);
        }
    }
    void polyline(const std::vector<Vec2>& pts, bool closed, Rgb c) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) line(pts[i], pts[i + 1], c);
        if (closed && pts.size() > 2) line(pts.back(), pts.front(), c);
        if (pts.size() == 1) line(pts[0], pts[0], c);
    }
    std::string ppm() const {
        std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        out.reserve(out.size() + px.size() * 3);
        for (const auto& p : px) {
            out.push_back(static_cast<char>(p.r));
            out.push_back(static_cast<char>(p.g));
            out.push_back(static_cast<char>(p.b));
        }
        return out;
    }
};

struct OverlayCmd {
    std::vector<std::string> crs, registered;
    std::string image, out;
    std::vector<int> size{703, 938};

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("overlay", "Draw CR contours and registered silhouettes (PPM)");
        cmd->add_option("--cr", crs, "CR contour file (repeatable)");
        cmd->add_option("--registered", registered, "Registered silhouette file (repeatable)");
        cmd->add_option("--image", image, "CR image (PGM) used as background and for the canvas size")
            ->check(CLI::ExistingFile);
        cmd->add_option("--size", size, "Canvas width and height without --image")->expected(2)->capture_default_str();
        cmd->add_option("--out", out, "Output PPM")->required();
        cmd->callback([this] { run(); });
    }

    void run() {
        if (crs.empty() && registered.empty()) throw UsageError("overlay needs --cr and/or --registered");
        std::optional<ScalarMap2D> bg;
        if (!image.empty()) bg = load_map(image);
        const int w = bg ? bg->width : size[0];
        const int h = bg ? bg->height : size[1];
        if (w <= 0 || h <= 0) throw UsageError("canvas size must be positive");
        Canvas canvas(w, h);
        if (bg) {
            const double peak = bg->max_value() > 0.0 ? bg->max_value() : 1.0;
            for (int j = 0; j < h; ++j) {
                for (int i = 0; i < w; ++i) {
                    const auto g = static_cast<unsigned char>(std::lround(255.0 * std::clamp(bg->at(i, j) / peak, 0.0, 1.0)));
                    canvas.px[static_cast<std::size_t>(j) * w + i] = Rgb{g, g, g};
                }
            }
        }
        // Upper red, lower green; registered silhouettes in blue shades.
        for (const auto& path : registered) {
            const PointSet2D s = load_contour(path);
            canvas.polyline(s.points, true, s.label == Jaw::upper ? Rgb{0, 60, 255} : Rgb{0, 170, 255});
        }
        for (const auto& path : crs) {
            const PointSet2D s = load_contour(path);
            canvas.polyline(s.points, false, s.label == Jaw::upper ? Rgb{220, 0, 0} : Rgb{0, 160, 0});
        }
        write_file(out, canvas.ppm());
        std::cout << "overlay " << w << "x" << h << " -> " << out << "\n";
    }
};

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
    std::string out, type = "ovoid", seed_text = "0";
    int teeth = 14;
    double noise = 0.0;
    int count = 1;

    void add(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("synth", "Write synthetic cases with known ground truth");
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->add_option("--type", type, "square, ovoid or tapered")
            ->check(CLI::IsMember({"square", "ovoid", "tapered"}))
            ->capture_default_str();
        cmd->add_option("--teeth", teeth, "Number of teeth (even, 2-14)")->capture_default_str();
        cmd->add_option("--noise", noise, "CR contour jitter (px)")->capture_default_str();
        cmd->add_option("--seed", seed_text, "Random seed (falls back to CEPHREG_SEED)")
            ->envname("CEPHREG_SEED")
            ->capture_default_str();
        cmd->add_option("--count", count, "Number of cases; more than one writes case_NNN subdirectories")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->callback([this] { run(); });
    }

    void run() {
        const std::uint64_t seed = parse_seed(seed_text);
        for (int k = 0; k < count; ++k) {
            synth::CaseOptions o;
            o.type = synth::parse_arch_type(type);
            o.n_teeth = teeth;
            o.seed = seed + static_cast<std::uint64_t>(k);
            o.cr_noise_px = noise;
            const synth::SynthCase c = synth::make_full_case(o);
            char name[32];
            std::snprintf(name, sizeof name, "case_%03d", k);
            const fs::path dir = count == 1 ? fs::path(out) : fs::path(out) / name;
            synth::write_case(c, dir);
            std::cout << dir.string() << ": s=" << c.truth.s << " theta=" << c.truth.theta << " t=(" << c.truth.tx
                      << ", " << c.truth.ty << ")\n";
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cephreg: dental scan to cephalogram silhouette registration"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key=value, [subcommand] sections); flags take precedence");
    FrameCmd frame;
    RenderCmd render;
    RegisterCmd registration;
    EvaluateCmd evaluate;
    OverlayCmd overlay;
    SynthCmd synthcmd;
    frame.add(app);
    render.add(app);
    registration.add(app);
    evaluate.add(app);
    overlay.add(app);
    synthcmd.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
