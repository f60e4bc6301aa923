#include "cephreg/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "text_util.hpp"

namespace cephreg::report {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> number_or_null(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? cell(*v) : "-"; }

std::string render(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out << "  ";
            const std::string pad(width[c] - r[c].size(), ' ');
            out << (c == 0 ? r[c] + pad : pad + r[c]);
        }
        out << "\n";
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    for (const auto& r : rows) line(r);
    return out.str();
}

}  // namespace

Json to_json(const reg::SimilarityTransform2D& t) {
    return Json{{"s", t.s}, {"theta", t.theta}, {"tx", t.tx}, {"ty", t.ty}};
}

Json to_json(const reg::StageResult& r) {
    return Json{{"stage", r.stage}, {"loss", r.loss}, {"evaluations", r.evaluations}, {"transform", to_json(r.transform)}};
}

Json to_json(const reg::RegistrationResult& r) {
    Json trace = Json::array();
    for (const auto& s : r.trace) trace.push_back(to_json(s));
    return Json{{"initial", to_json(r.initial)},
                {"initial_loss", r.initial_loss},
                {"transform", to_json(r.transform)},
                {"final_loss", r.final_loss},
                {"trace", trace}};
}

Json to_json(const metrics::ContourMetrics& m) {
    return Json{{"chamfer_bidir_mean", m.chamfer_bidir_mean},
                {"hausdorff_sym", m.hausdorff_sym},
                {"ios_to_cr_mean", m.ios_to_cr_mean},
                {"cr_to_ios_mean", m.cr_to_ios_mean}};
}

Json to_json(const metrics::LandmarkStats& s) {
    Json per = Json::array();
    for (const auto& e : s.errors) {
        per.push_back(Json{{"code", e.code},
                           {"group", std::string(to_string(e.group))},
                           {"predicted", {e.predicted.x(), e.predicted.y()}},
                           {"reference", {e.reference.x(), e.reference.y()}},
                           {"error", e.error}});
    }
    return Json{{"lm_mean", s.mean},
                {"lm_rmse", s.rmse},
                {"lm_std", s.std},
                {"lm_group_inc_can", optional_number(s.group_inc_can)},
                {"lm_group_prem", optional_number(s.group_prem)},
                {"lm_group_molar", optional_number(s.group_molar)},
                {"landmarks", per}};
}

Json to_json(const metrics::FullReport& r) {
    Json jaws = Json::array();
    for (const auto& j : r.jaws) {
        Json o{{"jaw", std::string(to_string(j.jaw))}, {"contour", to_json(j.contour)}};
        o["landmarks"] = j.landmarks ? to_json(*j.landmarks) : Json(nullptr);
        jaws.push_back(o);
    }
    Json out{{"jaws", jaws}};
    out["combined_landmarks"] = r.combined ? to_json(*r.combined) : Json(nullptr);
    return out;
}

reg::SimilarityTransform2D transform_from_json(const Json& j) {
    try {
        reg::SimilarityTransform2D t;
        t.s = j.at("s").get<double>();
        t.theta = j.at("theta").get<double>();
        t.tx = j.at("tx").get<double>();
        t.ty = j.at("ty").get<double>();
        t.validate();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed transform record: ") + e.what());
    }
}

std::string format_transform(const reg::SimilarityTransform2D& t) {
    using detail::format_double;
    return "s=" + format_double(t.s) + "\ntheta=" + format_double(t.theta) + "\ntx=" + format_double(t.tx) +
           "\nty=" + format_double(t.ty) + "\n";
}

reg::SimilarityTransform2D parse_transform(std::string_view text) {
    std::map<std::string, double> kv;
    std::size_t line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const std::string_view line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", std::nullopt, line_no);
        const std::string key(detail::trim(line.substr(0, eq)));
        double value = 0.0;
        if (!detail::parse_double(detail::trim(line.substr(eq + 1)), value)) {
            throw ParseError("non-numeric value for '" + key + "'", std::nullopt, line_no);
        }
        kv[key] = value;
    }
    reg::SimilarityTransform2D t;
    for (const char* key : {"s", "theta", "tx", "ty"}) {
        if (!kv.count(key)) throw DataError(std::string("transform record lacks '") + key + "'");
    }
    t.s = kv["s"];
    t.theta = kv["theta"];
    t.tx = kv["tx"];
    t.ty = kv["ty"];
    t.validate();
    return t;
}

std::string landmark_table(const std::vector<std::pair<std::string, metrics::LandmarkStats>>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& [label, s] : rows) {
        cells.push_back({label, cell(s.mean), cell(s.rmse), cell(s.std), cell(s.group_inc_can), cell(s.group_prem),
                         cell(s.group_molar)});
    }
    return render({"", "Mean", "RMSE", "Std", "Inc&Can", "PreM", "Molars"}, cells);
}

std::string contour_table(const std::vector<std::pair<std::string, metrics::ContourMetrics>>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& [label, m] : rows) {
        cells.push_back({label, cell(m.chamfer_bidir_mean), cell(m.hausdorff_sym), cell(m.ios_to_cr_mean),
                         cell(m.cr_to_ios_mean)});
    }
    return render({"", "Chamfer", "Hausdorff", "IOS->CR", "CR->IOS"}, cells);
}

std::string format_tables(const metrics::FullReport& r) {
    std::vector<std::pair<std::string, metrics::ContourMetrics>> contour;
    std::vector<std::pair<std::string, metrics::LandmarkStats>> landmarks;
    for (const auto& j : r.jaws) {
        contour.emplace_back(std::string(to_string(j.jaw)), j.contour);
        if (j.landmarks) landmarks.emplace_back(std::string(to_string(j.jaw)), *j.landmarks);
    }
    if (r.combined) landmarks.emplace_back("combined", *r.combined);
    std::string out = "Contour distances (px)\n" + contour_table(contour);
    if (!landmarks.empty()) out += "\nLandmark errors (px)\n" + landmark_table(landmarks);
    return out;
}

metrics::FullReport full_report_from_json(const Json& j) {
    try {
        auto stats = [](const Json& o) {
            metrics::LandmarkStats s;
            s.mean = o.at("lm_mean").get<double>();
            s.rmse = o.at("lm_rmse").get<double>();
            s.std = o.at("lm_std").get<double>();
            s.group_inc_can = number_or_null(o.at("lm_group_inc_can"));
            s.group_prem = number_or_null(o.at("lm_group_prem"));
            s.group_molar = number_or_null(o.at("lm_group_molar"));
            return s;
        };
        metrics::FullReport r;
        for (const auto& jo : j.at("jaws")) {
            metrics::JawReport jr;
            jr.jaw = parse_jaw(jo.at("jaw").get<std::string>());
            const auto& c = jo.at("contour");
            jr.contour.chamfer_bidir_mean = c.at("chamfer_bidir_mean").get<double>();
            jr.contour.hausdorff_sym = c.at("hausdorff_sym").get<double>();
            jr.contour.ios_to_cr_mean = c.at("ios_to_cr_mean").get<double>();
            jr.contour.cr_to_ios_mean = c.at("cr_to_ios_mean").get<double>();
            if (!jo.at("landmarks").is_null()) jr.landmarks = stats(jo.at("landmarks"));
            r.jaws.push_back(jr);
        }
        if (j.contains("combined_landmarks") && !j.at("combined_landmarks").is_null()) {
            r.combined = stats(j.at("combined_landmarks"));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed metrics report: ") + e.what());
    }
}

}  // namespace cephreg::report
