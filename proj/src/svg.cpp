#include "cogrelay/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cogrelay {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Largest 1/2/5 * 10^k step that yields at least four intervals.
double nice_step(double span) {
  if (span <= 0.0) return 1.0;
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0}) {
    if (mag * m <= raw) return mag * m;
  }
  return mag;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
  if (spec.series.empty()) {
    throw std::invalid_argument("chart needs at least one series");
  }

  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool first = true;
  for (const ChartSeries& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (first) throw std::invalid_argument("chart series have no points");
  // Rates live near zero; anchoring there keeps charts comparable.
  y_min = std::min(y_min, 0.0);
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  y_max += (y_max - y_min) * 0.05;

  const int margin_left = 64, margin_right = 16, margin_top = 40,
            margin_bottom = 78;
  const double plot_w = spec.width - margin_left - margin_right;
  const double plot_h = spec.height - margin_top - margin_bottom;
  const auto sx = [&](double x) {
    return margin_left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return margin_top + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << ' ' << spec.height << "\">\n";
  out << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"22\" font-family=\"sans-serif\""
      << " font-size=\"15\" text-anchor=\"middle\">" << escape(spec.title)
      << "</text>\n";

  // Gridlines and ticks.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double ys = nice_step(y_max - y_min);
  for (double ty = std::ceil(y_min / ys) * ys; ty <= y_max + 1e-12; ty += ys) {
    const double py = sy(ty);
    out << "<line x1=\"" << margin_left << "\" y1=\"" << fmt(py) << "\" x2=\""
        << margin_left + plot_w << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << margin_left - 6 << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\">" << fmt(ty) << "</text>\n";
  }
  const double xs = nice_step(x_max - x_min);
  for (double tx = std::ceil(x_min / xs) * xs; tx <= x_max + 1e-12; tx += xs) {
    const double px = sx(tx);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << margin_top << "\" x2=\""
        << fmt(px) << "\" y2=\"" << margin_top + plot_h
        << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\""
        << margin_top + plot_h + 16 << "\" text-anchor=\"middle\">" << fmt(tx)
        << "</text>\n";
  }
  out << "</g>\n";

  // Axes.
  out << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h
      << "\" x2=\"" << margin_left + plot_w << "\" y2=\""
      << margin_top + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\""
      << margin_left << "\" y2=\"" << margin_top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\""
      << margin_top + plot_h + 34
      << "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << margin_top + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << margin_top + plot_h / 2 << ")\">" << escape(spec.y_label)
      << "</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const ChartSeries& s = spec.series[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(*kPalette))];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (const auto& [x, y] : s.points) {
      out << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
    }
    out << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      out << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
          << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    }
  }

  // Legend below the x-axis label, laid out horizontally.
  const double legend_y = margin_top + plot_h + 54;
  double legend_x = margin_left;
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const ChartSeries& s = spec.series[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(*kPalette))];
    out << "<line x1=\"" << fmt(legend_x) << "\" y1=\"" << fmt(legend_y - 4)
        << "\" x2=\"" << fmt(legend_x + 22) << "\" y2=\"" << fmt(legend_y - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << fmt(legend_x + 27) << "\" y=\"" << fmt(legend_y)
        << "\">" << escape(s.label) << "</text>\n";
    legend_x += 34 + 7.0 * static_cast<double>(s.label.size());
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace cogrelay
