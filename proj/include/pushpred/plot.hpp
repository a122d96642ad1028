#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushpred/io.hpp"
#include "pushpred/metrics.hpp"

namespace pushpred {

struct PlotSeries {
  std::string name;
  std::string color;
  std::vector<double> values;
};

namespace detail {

inline std::string fixed2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace detail

// Minimal hand-emitted line chart; no plotting dependency. One polyline per
// series, axes with ticks, optional dashed horizontal reference line.
inline std::string render_line_chart_svg(
    const std::string& title, const std::vector<PlotSeries>& series,
    std::optional<double> reference = std::nullopt,
    const std::string& reference_label = "offline") {
  if (series.empty()) {
    throw std::invalid_argument("render_line_chart_svg: no series");
  }
  std::size_t n = 0;
  double y_max = 0.0;
  for (const auto& s : series) {
    if (s.values.empty()) {
      throw std::invalid_argument("render_line_chart_svg: empty series '" +
                                  s.name + "'");
    }
    n = std::max(n, s.values.size());
    for (double v : s.values) y_max = std::max(y_max, v);
  }
  if (reference) y_max = std::max(y_max, *reference);
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  const double width = 720, height = 440;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double x_span = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const auto px = [&](double step) { return ml + pw * step / x_span; };
  const auto py = [&](double v) { return mt + ph * (1.0 - v / y_max); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\""
      << ml + pw << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double fy = y_max * i / n_ticks;
    const double y = py(fy);
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << detail::fixed2(y)
        << "\" x2=\"" << ml << "\" y2=\"" << detail::fixed2(y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << detail::fixed2(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << detail::tick_label(fy) << "</text>\n";
    const double fx = x_span * i / n_ticks;
    const double x = px(fx);
    svg << "<line x1=\"" << detail::fixed2(x) << "\" y1=\"" << mt + ph
        << "\" x2=\"" << detail::fixed2(x) << "\" y2=\"" << mt + ph + 4
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << detail::fixed2(x) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << detail::tick_label(fx) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">step</text>\n";

  if (reference) {
    const double y = py(*reference);
    svg << "<line x1=\"" << ml << "\" y1=\"" << detail::fixed2(y) << "\" x2=\""
        << ml + pw << "\" y2=\"" << detail::fixed2(y)
        << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << ml + pw - 4 << "\" y=\"" << detail::fixed2(y - 5)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << reference_label << "</text>\n";
  }

  double legend_x = ml + 10;
  for (const auto& s : series) {
    svg << "<rect x=\"" << legend_x << "\" y=\"" << mt + 6
        << "\" width=\"12\" height=\"4\" fill=\"" << s.color << "\"/>\n";
    svg << "<text x=\"" << legend_x + 16 << "\" y=\"" << mt + 12
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
        << "</text>\n";
    legend_x += 16 + 10 + 9 * static_cast<double>(s.name.size());
  }

  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) svg << ' ';
      svg << detail::fixed2(px(static_cast<double>(i))) << ','
          << detail::fixed2(py(s.values[i]));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// Parsed loss-curve CSV: per model, per component series.
struct LossCurves {
  // model -> component series in order pos_x, pos_y, rot, total
  std::map<std::string, std::array<std::vector<double>, 4>> by_model;
  std::vector<std::string> model_order;
};

inline LossCurves read_loss_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  LossCurves curves;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where =
        path.string() + ": row " + std::to_string(line_no);
    if (!saw_header) {
      if (line != "step,model,pos_x,pos_y,rot,total") {
        throw std::runtime_error(where + ": unexpected header");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split_csv_row(line);
    if (fields.size() != 6) {
      throw std::runtime_error(where + ": expected 6 fields");
    }
    const std::string model(fields[1]);
    auto it = curves.by_model.find(model);
    if (it == curves.by_model.end()) {
      it = curves.by_model.emplace(model,
                                   std::array<std::vector<double>, 4>{})
               .first;
      curves.model_order.push_back(model);
    }
    for (int c = 0; c < 4; ++c) {
      it->second[c].push_back(
          parse_double(fields[c + 2], where + ": value"));
    }
  }
  if (!saw_header) {
    throw std::runtime_error(path.string() + ": empty loss csv");
  }
  return curves;
}

inline std::string series_color(const std::string& model) {
  if (model == "fixed") return "#1f77b4";   // blue, as in the figures
  if (model == "online") return "#ff7f0e";  // orange
  if (model == "nn") return "#2ca02c";
  return "#7f7f7f";
}

// Emits one SVG per loss component plus total, 10-step moving average
// applied, optional offline-loss reference line. Returns the files written.
inline std::vector<std::filesystem::path> write_loss_plots(
    const std::filesystem::path& csv_path,
    const std::filesystem::path& out_prefix,
    std::optional<double> offline_loss = std::nullopt, int window = 10) {
  const LossCurves curves = read_loss_csv(csv_path);
  if (curves.by_model.empty()) {
    throw std::runtime_error("write_loss_plots: no data rows in " +
                             csv_path.string());
  }
  const std::array<const char*, 4> components = {"pos_x", "pos_y", "rot",
                                                 "total"};
  std::vector<std::filesystem::path> written;
  for (int c = 0; c < 4; ++c) {
    std::vector<PlotSeries> series;
    for (const auto& model : curves.model_order) {
      const auto& values = curves.by_model.at(model)[c];
      series.push_back(
          {model, series_color(model), moving_average(values, window)});
    }
    const std::string svg = render_line_chart_svg(
        std::string("online loss (") + components[c] + ", " +
            std::to_string(window) + "-step moving average)",
        series, offline_loss);
    std::filesystem::path out = out_prefix;
    out += std::string("_") + components[c] + ".svg";
    write_file(out, svg);
    written.push_back(out);
  }
  return written;
}

}  // namespace pushpred
