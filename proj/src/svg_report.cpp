#include "psyprobe/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace psyprobe {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Canvas {
  double x_min, x_max, y_min, y_max;
  std::ostringstream body;

  double px(double x) const {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    return kHeight - kMarginBottom -
           (y - y_min) / (y_max - y_min) * (kHeight - kMarginTop - kMarginBottom);
  }

  void axes(const std::string& x_label, const std::string& y_label) {
    body << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
         << kWidth - kMarginLeft - kMarginRight << "\" height=\""
         << kHeight - kMarginTop - kMarginBottom
         << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_min + (x_max - x_min) * i / 4.0;
      const double yv = y_min + (y_max - y_min) * i / 4.0;
      body << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << kHeight - kMarginBottom + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
      body << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py(yv) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
      body << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << kHeight - kMarginBottom
           << "\" x2=\"" << fmt(px(xv)) << "\" y2=\"" << kHeight - kMarginBottom + 4
           << "\" stroke=\"#333\"/>\n";
      body << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << fmt(py(yv)) << "\" x2=\""
           << kMarginLeft << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"#333\"/>\n";
    }
    body << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\""
         << kHeight - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
         << escape_xml(x_label) << "</text>\n";
    body << "<text x=\"16\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
         << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
         << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\">" << escape_xml(y_label)
         << "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color,
                double width, double opacity) {
    body << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
         << "\" stroke-opacity=\"" << opacity << "\" points=\"";
    for (const auto& [x, y] : pts) body << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    body << "\"/>\n";
  }

  void circle(double x, double y, double r, const char* color) {
    body << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << r
         << "\" fill=\"" << color << "\" fill-opacity=\"0.8\"/>\n";
  }

  std::string finish(const std::string& title, const std::string& data_comment) const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
        << "\">\n"
        << "<!-- data:\n" << data_comment << "\n-->\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-size=\"15\" "
        << "text-anchor=\"middle\" font-weight=\"bold\">" << escape_xml(title)
        << "</text>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

}  // namespace

std::string svg_psychometric_curves(const std::vector<PsychometricFit>& replicate_fits,
                                    const PsychometricFit* pooled,
                                    const std::vector<double>& alpha_grid,
                                    const std::vector<double>& proportion_cue2,
                                    const std::string& title) {
  Canvas canvas{0.0, 1.0, 0.0, 1.0, {}};
  canvas.axes("alpha (cue-2 weight)", "P(choose cue 2)");

  std::ostringstream data;
  data << "alpha,proportion_cue2\n";
  for (std::size_t i = 0; i < alpha_grid.size() && i < proportion_cue2.size(); ++i) {
    data << fmt(alpha_grid[i]) << ',' << fmt(proportion_cue2[i]) << '\n';
  }

  auto curve_points = [](const PsychometricFit& fit) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 200; ++i) {
      const double a = i / 200.0;
      pts.emplace_back(a, psychometric_value(fit, a));
    }
    return pts;
  };
  for (std::size_t r = 0; r < replicate_fits.size(); ++r) {
    canvas.polyline(curve_points(replicate_fits[r]), kPalette[r % kPaletteSize], 1.0, 0.45);
  }
  if (pooled != nullptr) {
    canvas.polyline(curve_points(*pooled), "#000000", 2.0, 1.0);
    data << "pooled_mu," << fmt(pooled->location) << "\npooled_sigma,"
         << fmt(pooled->scale) << '\n';
  }
  for (std::size_t i = 0; i < alpha_grid.size() && i < proportion_cue2.size(); ++i) {
    canvas.circle(alpha_grid[i], proportion_cue2[i], 3.5, "#444444");
  }
  // 50/50 reference
  canvas.polyline({{0.0, 0.5}, {1.0, 0.5}}, "#999999", 0.8, 0.8);
  canvas.polyline({{0.5, 0.0}, {0.5, 1.0}}, "#999999", 0.8, 0.8);
  return canvas.finish(title, data.str());
}

std::string svg_scatter(const std::vector<LabeledPoint>& points,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  if (!points.empty()) {
    x_min = x_max = points[0].x;
    y_min = y_max = points[0].y;
    for (const auto& p : points) {
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
      y_min = std::min(y_min, p.y);
      y_max = std::max(y_max, p.y);
    }
    const double pad_x = std::max(0.05 * (x_max - x_min), 1e-6);
    const double pad_y = std::max(0.05 * (y_max - y_min), 1e-6);
    x_min -= pad_x;
    x_max += pad_x;
    y_min -= pad_y;
    y_max += pad_y;
  }
  Canvas canvas{x_min, x_max, y_min, y_max, {}};
  canvas.axes(x_label, y_label);
  std::ostringstream data;
  data << "x,y,label,series\n";
  for (const auto& p : points) {
    canvas.circle(p.x, p.y, 4.0, kPalette[p.series % kPaletteSize]);
    if (!p.label.empty()) {
      canvas.body << "<text x=\"" << fmt(canvas.px(p.x) + 6) << "\" y=\""
                  << fmt(canvas.py(p.y) - 4) << "\" font-size=\"10\">"
                  << escape_xml(p.label) << "</text>\n";
    }
    data << fmt(p.x) << ',' << fmt(p.y) << ',' << p.label << ',' << p.series << '\n';
  }
  return canvas.finish(title, data.str());
}

std::string svg_bars(const std::vector<std::pair<std::string, double>>& bars,
                     const std::string& y_label, const std::string& title) {
  double y_max = 0.0;
  for (const auto& [_, v] : bars) y_max = std::max(y_max, v);
  if (y_max <= 0.0) y_max = 1.0;
  Canvas canvas{0.0, static_cast<double>(bars.size()), 0.0, y_max * 1.1, {}};
  canvas.axes("", y_label);
  std::ostringstream data;
  data << "label,value\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x0 = canvas.px(i + 0.15);
    const double x1 = canvas.px(i + 0.85);
    const double y0 = canvas.py(0.0);
    const double y1 = canvas.py(bars[i].second);
    canvas.body << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\""
                << fmt(x1 - x0) << "\" height=\"" << fmt(y0 - y1) << "\" fill=\""
                << kPalette[i % kPaletteSize] << "\" fill-opacity=\"0.85\"/>\n";
    canvas.body << "<text x=\"" << fmt(canvas.px(i + 0.5)) << "\" y=\""
                << kHeight - kMarginBottom + 18
                << "\" font-size=\"11\" text-anchor=\"middle\">"
                << escape_xml(bars[i].first) << "</text>\n";
    data << bars[i].first << ',' << fmt(bars[i].second) << '\n';
  }
  return canvas.finish(title, data.str());
}

std::string svg_acf(const std::vector<std::vector<double>>& rho_per_dim,
                    const std::string& title) {
  std::size_t max_lag = 0;
  for (const auto& rho : rho_per_dim) max_lag = std::max(max_lag, rho.size());
  Canvas canvas{-0.5, static_cast<double>(max_lag) - 0.5, -0.25, 1.05, {}};
  canvas.axes("lag", "autocorrelation");
  std::ostringstream data;
  data << "dimension,lag,rho\n";
  const double bar_width = 0.8 / std::max<std::size_t>(rho_per_dim.size(), 1);
  for (std::size_t d = 0; d < rho_per_dim.size(); ++d) {
    for (std::size_t k = 0; k < rho_per_dim[d].size(); ++k) {
      const double x0 = canvas.px(k - 0.4 + d * bar_width);
      const double x1 = canvas.px(k - 0.4 + (d + 1) * bar_width);
      const double base = canvas.py(0.0);
      const double top = canvas.py(rho_per_dim[d][k]);
      canvas.body << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(std::min(base, top))
                  << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
                  << fmt(std::fabs(base - top)) << "\" fill=\""
                  << kPalette[d % kPaletteSize] << "\" fill-opacity=\"0.8\"/>\n";
      data << d << ',' << k << ',' << fmt(rho_per_dim[d][k]) << '\n';
    }
  }
  canvas.polyline({{-0.5, 0.0}, {static_cast<double>(max_lag) - 0.5, 0.0}}, "#333333",
                  1.0, 1.0);
  return canvas.finish(title, data.str());
}

}  // namespace psyprobe
