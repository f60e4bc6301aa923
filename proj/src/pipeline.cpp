#include "cephreg/pipeline.hpp"

#include <cmath>

namespace cephreg::pipeline {

namespace fs = std::filesystem;

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::dentalscr: return "dentalscr";
        case Mode::bbox_only: return "bbox_only";
        case Mode::single_stage: return "single_stage";
    }
    return "dentalscr";
}

Mode parse_mode(std::string_view text) {
    if (text == "dentalscr") return Mode::dentalscr;
    if (text == "bbox_only") return Mode::bbox_only;
    if (text == "single_stage") return Mode::single_stage;
    throw DataError("unknown mode '" + std::string(text) + "'");
}

double image_diagonal(const Lattice& image) {
    return std::hypot(static_cast<double>(image.width), static_cast<double>(image.height));
}

reg::Schedule schedule_for(const Config& config) {
    const double diag = image_diagonal(config.cr_image);
    switch (config.mode) {
        case Mode::dentalscr: return reg::Schedule::three_stage(diag);
        case Mode::single_stage: return reg::Schedule::single_stage(diag);
        case Mode::bbox_only: return reg::Schedule::none();
    }
    return reg::Schedule::none();
}

reg::RegistrationOptions registration_options(const Config& config) {
    reg::RegistrationOptions o;
    o.schedule = schedule_for(config);
    o.loss = config.one_sided ? reg::LossKind::one_sided : reg::LossKind::symmetric;
    o.seed = config.seed;
    o.cr_image = config.cr_image;
    return o;
}

report::Json config_json(const Config& c) {
    using report::Json;
    Json stages = Json::array();
    for (const auto& s : schedule_for(c).stages) {
        stages.push_back(Json{{"name", s.name},
                              {"scale", {s.scale.lo, s.scale.hi}},
                              {"theta", {s.theta.lo, s.theta.hi}},
                              {"tx", {s.tx.lo, s.tx.hi}},
                              {"ty", {s.ty.lo, s.ty.hi}},
                              {"iterations", s.iterations},
                              {"samples_per_iter", s.samples_per_iter},
                              {"min_step_fraction", s.min_step_fraction},
                              {"max_polls", s.max_polls}});
    }
    return Json{{"mode", std::string(to_string(c.mode))},
                {"one_sided", c.one_sided},
                {"no_umda", c.no_umda},
                {"seed", c.seed},
                {"cr_image", {c.cr_image.width, c.cr_image.height}},
                {"geometry",
                 {{"source_x", c.geom.source_x},
                  {"detector_x", c.geom.detector_x},
                  {"pixel_spacing", c.geom.pixel_spacing},
                  {"image_width", c.geom.image_width},
                  {"image_height", c.geom.image_height},
                  {"origin_u", c.geom.detector_origin_uv.x()},
                  {"origin_v", c.geom.detector_origin_uv.y()}}},
                {"splat",
                 {{"rho0", c.splat.rho0},
                  {"mu0", c.splat.mu0},
                  {"I0", c.splat.I0},
                  {"sigma_px", c.splat.sigma_px},
                  {"kernel_truncation_radius", c.splat.kernel_truncation_radius},
                  {"face_supersampling", c.splat.face_supersampling}}},
                {"threshold_fraction", c.threshold_fraction},
                {"points", {c.upper_points, c.lower_points}},
                {"crown_percentile", c.crown_percentile},
                {"molar_fraction", c.molar_fraction},
                {"schedule", stages}};
}

LandmarkSet landmarks_of(const LandmarkSet& set, Jaw jaw) {
    LandmarkSet out;
    out.dimension = set.dimension;
    const std::string prefix = jaw == Jaw::upper ? "UR" : "LR";
    for (const auto& [code, lm] : set.entries) {
        if (code.rfind(prefix, 0) == 0) out.entries.emplace(code, lm);
    }
    return out;
}

CaseInputs load_case(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("case directory not found: " + dir.string());
    CaseInputs in;
    std::optional<LandmarkSet> mesh_lm, cr_lm;
    if (fs::exists(dir / "mesh_landmarks.txt")) mesh_lm = load_landmarks(dir / "mesh_landmarks.txt");
    if (fs::exists(dir / "cr_landmarks.txt")) cr_lm = load_landmarks(dir / "cr_landmarks.txt");
    if (mesh_lm && mesh_lm->dimension != 3) throw DataError("mesh_landmarks.txt must hold 3D points");
    if (cr_lm && cr_lm->dimension != 2) throw DataError("cr_landmarks.txt must hold 2D points");
    bool any = false;
    for (Jaw jaw : {Jaw::upper, Jaw::lower}) {
        const std::string name(to_string(jaw));
        JawInputs& j = in.jaws[static_cast<std::size_t>(jaw)];
        for (const char* ext : {".stl", ".obj"}) {
            const fs::path p = dir / ("mesh_" + name + ext);
            if (fs::exists(p)) {
                j.mesh = load_mesh(p);
                break;
            }
        }
        const fs::path c = dir / ("cr_contour_" + name + ".txt");
        if (fs::exists(c)) {
            j.cr_contour = load_contour(c);
            if (j.cr_contour->label != jaw) throw DataError(c.string() + ": jaw label does not match file name");
        }
        if (mesh_lm) j.mesh_landmarks = landmarks_of(*mesh_lm, jaw);
        if (cr_lm) j.cr_landmarks = landmarks_of(*cr_lm, jaw);
        if (j.mesh_landmarks && j.mesh_landmarks->size() == 0) j.mesh_landmarks.reset();
        if (j.cr_landmarks && j.cr_landmarks->size() == 0) j.cr_landmarks.reset();
        any |= j.mesh && j.cr_contour;
    }
    if (!any) throw DataError(dir.string() + ": no jaw has both a mesh and a CR contour");
    if (fs::exists(dir / "geometry.cfg")) in.geom = load_geometry(dir / "geometry.cfg");
    if (fs::exists(dir / "cr_image.pgm")) {
        const ScalarMap2D img = load_map(dir / "cr_image.pgm");
        in.cr_image = Lattice{0, 0, img.width, img.height};
    }
    return in;
}

std::array<std::optional<AnatomicalFrame>, 2> case_frames(const CaseInputs& in, const Config& config) {
    std::array<std::optional<AnatomicalFrame>, 2> frames;
    const auto& up = in.jaws[0].mesh;
    const auto& lo = in.jaws[1].mesh;
    if (config.no_umda) {
        if (up) frames[0] = umda::centroid_frame(*up);
        if (lo) frames[1] = umda::centroid_frame(*lo);
        return frames;
    }
    auto params = [&](Jaw jaw) {
        umda::UmdaParams p = umda::default_params(jaw);
        p.crown_percentile = config.crown_percentile;
        p.molar_fraction = config.molar_fraction;
        return p;
    };
    if (up && lo) {
        const auto shared =
            umda::shared_frame(umda::jaw_axes(*up, params(Jaw::upper)), umda::jaw_axes(*lo, params(Jaw::lower)));
        frames[0] = shared.upper;
        frames[1] = shared.lower;
    } else if (up) {
        frames[0] = umda::single_jaw_frame(umda::jaw_axes(*up, params(Jaw::upper)));
    } else if (lo) {
        frames[1] = umda::single_jaw_frame(umda::jaw_axes(*lo, params(Jaw::lower)));
    }
    return frames;
}

CaseResult run_case(const CaseInputs& in, const Config& base) {
    Config config = base;
    if (in.geom) config.geom = *in.geom;
    if (in.cr_image) config.cr_image = *in.cr_image;
    const auto frames = case_frames(in, config);
    const auto options = registration_options(config);

    CaseResult result;
    result.config = config;
    std::vector<metrics::JawInput> eval;
    for (Jaw jaw : {Jaw::upper, Jaw::lower}) {
        const std::size_t idx = static_cast<std::size_t>(jaw);
        const JawInputs& j = in.jaws[idx];
        if (!j.mesh || !j.cr_contour) continue;
        JawResult jr;
        jr.jaw = jaw;
        jr.frame = *frames[idx];
        drr::SilhouetteParams sp;
        sp.threshold_fraction = config.threshold_fraction;
        sp.target_count = jaw == Jaw::upper ? config.upper_points : config.lower_points;
        const TriangleMesh m = umda::to_projection_coords(*j.mesh, jr.frame);
        jr.silhouette = drr::extract_silhouette(drr::render_thickness(m, config.geom, config.splat), sp);
        jr.silhouette.label = jaw;
        jr.silhouette.kind = PointSetKind::ios_silhouette;
        jr.registration = reg::register_silhouette(*j.cr_contour, jr.silhouette, options);
        jr.registered = reg::apply_similarity(jr.registration.transform, jr.silhouette);

        metrics::JawInput ji;
        ji.jaw = jaw;
        ji.cr_contour = *j.cr_contour;
        ji.ios_transformed = jr.registered;
        if (j.mesh_landmarks && j.cr_landmarks) {
            ji.mesh_landmarks = j.mesh_landmarks;
            ji.cr_landmarks = j.cr_landmarks;
        }
        ji.frame = jr.frame;
        ji.geom = config.geom;
        ji.transform = jr.registration.transform;
        eval.push_back(std::move(ji));
        result.jaws.push_back(std::move(jr));
    }
    result.metrics = metrics::full_report(eval);
    return result;
}

report::Json case_report(const CaseResult& result) {
    using report::Json;
    Json regs = Json::array();
    for (const auto& j : result.jaws) {
        Json o{{"jaw", std::string(to_string(j.jaw))}};
        o["frame"] = Json::array();
        const Eigen::Matrix3d R = j.frame.rotation();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) o["frame"].push_back(R(r, c));
        for (int k = 0; k < 3; ++k) o["frame"].push_back(j.frame.origin[k]);
        o["silhouette_points"] = j.silhouette.size();
        o["registration"] = report::to_json(j.registration);
        regs.push_back(o);
    }
    return Json{{"config", config_json(result.config)}, {"registrations", regs}, {"metrics", report::to_json(result.metrics)}};
}

PairResult run_pair(const PointSet2D& cr, const PointSet2D& silhouette, const Config& config) {
    PairResult r;
    r.registration = reg::register_silhouette(cr, silhouette, registration_options(config));
    r.registered = reg::apply_similarity(r.registration.transform, silhouette);
    r.contour = metrics::contour_metrics(cr, r.registered);
    return r;
}

report::Json pair_report(const PairResult& result, const Config& config) {
    using report::Json;
    metrics::FullReport fr;
    metrics::JawReport jr;
    jr.jaw = result.registered.label;
    jr.contour = result.contour;
    fr.jaws.push_back(jr);
    return Json{{"config", config_json(config)},
                {"registrations", Json::array({Json{{"jaw", std::string(to_string(result.registered.label))},
                                                    {"registration", report::to_json(result.registration)}}})},
                {"metrics", report::to_json(fr)}};
}

}  // namespace cephreg::pipeline
