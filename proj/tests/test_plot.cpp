#include <catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "pushpred/io.hpp"
#include "pushpred/plot.hpp"

using namespace pushpred;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pushpred_plot_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// minimal well-formedness check: tags balance, attributes quoted
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_decl = false;
  while (i < text.size()) {
    const std::size_t open = text.find('<', i);
    if (open == std::string::npos) break;
    const std::size_t close = text.find('>', open);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(open + 1, close - open - 1);
    i = close + 1;
    if (tag.rfind("?", 0) == 0) {
      if (seen_decl) return false;
      seen_decl = true;
      continue;
    }
    if (tag.rfind("!", 0) == 0) continue;  // comments/doctype
    const bool closing = tag.rfind("/", 0) == 0;
    const bool self_closing = !tag.empty() && tag.back() == '/';
    // unescaped angle brackets or quotes imbalance
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    std::string name = closing ? tag.substr(1) : tag;
    name = name.substr(0, name.find_first_of(" \t\n/"));
    if (name.empty()) return false;
    if (closing) {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_closing) {
      stack.push_back(name);
    }
  }
  return stack.empty() && seen_decl;
}

std::string write_sample_csv(const fs::path& path, int steps) {
  std::string csv = "step,model,pos_x,pos_y,rot,total\n";
  for (int i = 0; i < steps; ++i) {
    for (const char* model : {"online", "fixed", "nn"}) {
      const double base = model == std::string("online") ? 0.2 : 0.6;
      csv += std::to_string(i);
      csv += ",";
      csv += model;
      for (int c = 0; c < 4; ++c) {
        csv += "," + format_double(base + 0.01 * i + 0.1 * c);
      }
      csv += "\n";
    }
  }
  write_file(path, csv);
  return csv;
}

}  // namespace

TEST_CASE("render_line_chart_svg rejects empty series") {
  CHECK_THROWS_AS(render_line_chart_svg("t", {}), std::invalid_argument);
  CHECK_THROWS_AS(
      render_line_chart_svg("t", {{"a", "#000000", {}}}),
      std::invalid_argument);
}

TEST_CASE("rendered chart is well-formed xml with the expected pieces") {
  const std::vector<PlotSeries> series = {
      {"online", "#ff7f0e", {0.5, 0.4, 0.3, 0.2}},
      {"fixed", "#1f77b4", {0.6, 0.6, 0.6, 0.6}}};
  const std::string svg =
      render_line_chart_svg("demo", series, 0.25, "offline");
  CHECK(xml_well_formed(svg));
  CHECK_THAT(svg, ContainsSubstring("<svg"));
  CHECK_THAT(svg, ContainsSubstring("polyline"));
  CHECK_THAT(svg, ContainsSubstring("#ff7f0e"));
  CHECK_THAT(svg, ContainsSubstring("stroke-dasharray"));
  CHECK_THAT(svg, ContainsSubstring("offline"));
}

TEST_CASE("reference line sits at the requested loss value") {
  // with y_max = 1.05 * 1.0 and the chart geometry fixed, y(ref) is exact
  const std::vector<PlotSeries> series = {{"online", "#ff7f0e", {1.0, 0.5}}};
  const std::string with_ref =
      render_line_chart_svg("demo", series, 0.5, "ref");
  // the dashed line's y must equal py(0.5); recompute the formula here
  const double y_max = 1.05, mt = 40, ph = 440 - 40 - 50;
  const double expect = mt + ph * (1.0 - 0.5 / y_max);
  char needle[64];
  std::snprintf(needle, sizeof(needle), "y1=\"%.2f\"", expect);
  CHECK_THAT(with_ref, ContainsSubstring(needle));
}

TEST_CASE("read_loss_csv parses models and reports row numbers on errors") {
  TempDir tmp;
  const fs::path csv = tmp.path / "losses.csv";
  write_sample_csv(csv, 12);
  const LossCurves curves = read_loss_csv(csv);
  REQUIRE(curves.model_order.size() == 3);
  CHECK(curves.model_order[0] == "online");
  CHECK(curves.by_model.at("fixed")[3].size() == 12);

  write_file(tmp.path / "bad.csv",
             "step,model,pos_x,pos_y,rot,total\n0,online,1,2,3\n");
  CHECK_THROWS_WITH(read_loss_csv(tmp.path / "bad.csv"),
                    ContainsSubstring("row 2"));

  write_file(tmp.path / "empty.csv", "");
  CHECK_THROWS_AS(read_loss_csv(tmp.path / "empty.csv"), std::runtime_error);
}

TEST_CASE("write_loss_plots emits four well-formed SVGs") {
  TempDir tmp;
  const fs::path csv = tmp.path / "losses.csv";
  write_sample_csv(csv, 30);
  const auto written =
      write_loss_plots(csv, tmp.path / "curves", 0.33, 10);
  REQUIRE(written.size() == 4);
  for (const auto& p : written) {
    INFO(p.string());
    CHECK(fs::exists(p));
    const std::string svg = read_file(p);
    CHECK(xml_well_formed(svg));
    CHECK(svg.find("online") != std::string::npos);
    CHECK(svg.find("nn") != std::string::npos);
  }
  CHECK(fs::exists(tmp.path / "curves_pos_x.svg"));
  CHECK(fs::exists(tmp.path / "curves_pos_y.svg"));
  CHECK(fs::exists(tmp.path / "curves_rot.svg"));
  CHECK(fs::exists(tmp.path / "curves_total.svg"));
}

TEST_CASE("plots apply the moving average") {
  TempDir tmp;
  const fs::path csv = tmp.path / "losses.csv";
  // a spiky series: after a 10-step average the peak flattens well below
  // the raw max, so the y-axis label for the top tick shrinks
  std::string text = "step,model,pos_x,pos_y,rot,total\n";
  for (int i = 0; i < 40; ++i) {
    const double v = i == 20 ? 10.0 : 0.0;
    text += std::to_string(i) + ",online";
    for (int c = 0; c < 4; ++c) text += "," + format_double(v);
    text += "\n";
  }
  write_file(csv, text);
  const auto written = write_loss_plots(csv, tmp.path / "spike", {}, 10);
  const std::string svg = read_file(written[3]);
  // max of the averaged series is 1.0, not 10
  CHECK(svg.find(">10<") == std::string::npos);
  CHECK(svg.find(">1.05<") != std::string::npos);
}
