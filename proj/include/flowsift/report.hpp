#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>

#include "flowsift/importance.hpp"
#include "flowsift/ingest.hpp"
#include "flowsift/metrics.hpp"

namespace flowsift {

/// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double value);

nlohmann::json to_json(const IngestStats& stats);
nlohmann::json to_json(const ThresholdMetrics& metrics);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const ImportanceReport& report);

/// Columns threshold,x,y. The leading point carries threshold "inf".
void write_curve_csv(const std::filesystem::path& path, const Curve& curve);
/// Columns threshold,precision,recall,f1,tp,fp.
void write_sweep_csv(const std::filesystem::path& path, const ThresholdSweep& sweep);
/// Columns rank,feature,mean_drop,std_drop.
void write_importance_csv(const std::filesystem::path& path, const ImportanceReport& report);

/// Minimal self-contained SVG line chart of a curve on the unit square.
std::string curve_svg(const Curve& curve, std::string_view title, std::string_view x_label,
                      std::string_view y_label);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace flowsift
