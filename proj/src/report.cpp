#include "flowsift/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flowsift/error.hpp"

namespace flowsift {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

json to_json(const IngestStats& stats) {
  json reasons = json::object();
  for (const auto& [reason, count] : stats.drop_reasons) reasons[reason] = count;
  return {{"rows_read", stats.rows_read},
          {"rows_kept", stats.rows_kept},
          {"rows_dropped", stats.rows_dropped},
          {"drop_reasons", reasons}};
}

json to_json(const ThresholdMetrics& m) {
  return {{"threshold", m.threshold},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"tp", m.confusion.tp},
          {"fp", m.confusion.fp},
          {"tn", m.confusion.tn},
          {"fn", m.confusion.fn}};
}

json to_json(const EvalReport& r) {
  return {{"examples", r.examples},     {"positives", r.positives},
          {"prevalence", r.prevalence}, {"roc_auc", r.roc_auc},
          {"pr_auc", r.pr_auc},         {"at_default", to_json(r.at_default)},
          {"at_tuned", to_json(r.at_tuned)}};
}

json to_json(const ImportanceReport& r) {
  json features = json::array();
  for (const auto& f : r.features)
    features.push_back({{"feature", f.feature},
                        {"index", f.index},
                        {"mean_drop", f.mean_drop},
                        {"std_drop", f.std_drop},
                        {"drops", f.drops}});
  return {{"baseline_pr_auc", r.baseline_pr_auc},
          {"repeats", r.repeats},
          {"seed", r.seed},
          {"features", features}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const Curve& curve) {
  auto out = open_out(path);
  out << "threshold,x,y\n";
  for (const auto& p : curve.points)
    out << format_double(p.threshold) << ',' << format_double(p.x) << ',' << format_double(p.y)
        << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const ThresholdSweep& sweep) {
  auto out = open_out(path);
  out << "threshold,precision,recall,f1,tp,fp\n";
  for (const auto& p : sweep.table)
    out << format_double(p.threshold) << ',' << format_double(p.precision) << ','
        << format_double(p.recall) << ',' << format_double(p.f1) << ',' << p.tp << ',' << p.fp
        << '\n';
}

void write_importance_csv(const std::filesystem::path& path, const ImportanceReport& report) {
  auto out = open_out(path);
  out << "rank,feature,mean_drop,std_drop\n";
  for (std::size_t i = 0; i < report.features.size(); ++i) {
    const auto& f = report.features[i];
    out << i + 1 << ',' << f.feature << ',' << format_double(f.mean_drop) << ','
        << format_double(f.std_drop) << '\n';
  }
}

std::string curve_svg(const Curve& curve, std::string_view title, std::string_view x_label,
                      std::string_view y_label) {
  constexpr double kWidth = 480, kHeight = 400, kLeft = 60, kTop = 40, kPlot = 320;
  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")"
      << kHeight << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << R"(<text x=")" << kWidth / 2 << R"(" y="20" text-anchor="middle" font-size="14">)"
      << title << "</text>\n";
  svg << R"(<rect x=")" << kLeft << R"(" y=")" << kTop << R"(" width=")" << kPlot
      << R"(" height=")" << kPlot << R"(" fill="none" stroke="black"/>)" << '\n';
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    svg << R"(<text x=")" << kLeft + v * kPlot << R"(" y=")" << kTop + kPlot + 16
        << R"(" text-anchor="middle">)" << v << "</text>\n";
    svg << R"(<text x=")" << kLeft - 6 << R"(" y=")" << kTop + (1 - v) * kPlot + 4
        << R"(" text-anchor="end">)" << v << "</text>\n";
  }
  svg << R"(<text x=")" << kLeft + kPlot / 2 << R"(" y=")" << kTop + kPlot + 36
      << R"(" text-anchor="middle">)" << x_label << "</text>\n";
  svg << R"(<text x="16" y=")" << kTop + kPlot / 2
      << R"svg(" text-anchor="middle" transform="rotate(-90 16 )svg" << kTop + kPlot / 2
      << R"svg()">)svg" << y_label << "</text>\n";
  svg << R"(<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points=")";
  for (const auto& p : curve.points) {
    svg << kLeft + p.x * kPlot << ',' << kTop + (1 - p.y) * kPlot << ' ';
  }
  svg << "\"/>\n";
  svg << R"(<text x=")" << kLeft + kPlot - 4 << R"(" y=")" << kTop + 16
      << R"(" text-anchor="end">area = )" << format_double(std::round(curve.area * 1e4) / 1e4)
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace flowsift
