#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cephreg/metrics.hpp"
#include "cephreg/registration.hpp"

namespace cephreg::report {

using Json = nlohmann::ordered_json;

Json to_json(const reg::SimilarityTransform2D& t);
Json to_json(const reg::StageResult& r);
Json to_json(const reg::RegistrationResult& r);
Json to_json(const metrics::ContourMetrics& m);
Json to_json(const metrics::LandmarkStats& s);
Json to_json(const metrics::FullReport& r);

reg::SimilarityTransform2D transform_from_json(const Json& j);

/// `s=..`, `theta=..`, `tx=..`, `ty=..` lines, shortest round-trip numbers.
std::string format_transform(const reg::SimilarityTransform2D& t);
reg::SimilarityTransform2D parse_transform(std::string_view text);

/// Landmark table with columns Mean, RMSE, Std, Inc&Can, PreM, Molars; one
/// row per (label, stats). Missing groups print as "-".
std::string landmark_table(const std::vector<std::pair<std::string, metrics::LandmarkStats>>& rows);

/// Contour table with columns Chamfer, Hausdorff, IOS->CR, CR->IOS.
std::string contour_table(const std::vector<std::pair<std::string, metrics::ContourMetrics>>& rows);

/// Both tables for one full report: contour rows per jaw, landmark rows per
/// jaw plus the combined row.
std::string format_tables(const metrics::FullReport& r);

/// Rebuilds the tables from a report previously emitted by to_json.
metrics::FullReport full_report_from_json(const Json& j);

}  // namespace cephreg::report
