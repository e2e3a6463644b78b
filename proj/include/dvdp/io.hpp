#pragma once

// Flat-file output: CSV with round-trip precision and a commented header
// recording what produced it, and a small SVG polyline plotter.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dvdp/errors.hpp"

namespace dvdp::io {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : cols_(std::move(columns)) {}

  void meta(const std::string& key, const std::string& value) { meta_[key] = value; }
  void meta(const std::string& key, double value) { meta_[key] = fmt(value); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_.size()) throw ConfigError("csv row width mismatch");
    rows_.push_back(cells);
  }
  void row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    for (double v : cells) s.push_back(fmt(v));
    row(s);
  }

  std::string str() const {
    std::ostringstream os;
    for (const auto& [k, v] : meta_) os << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i];
    os << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
    return os.str();
  }

  void write(const std::string& path) const { write_text(path, str()); }

  static void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << text;
  }

 private:
  std::vector<std::string> cols_;
  std::map<std::string, std::string> meta_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::vector<std::array<double, 2>> pts;
  std::string color = "#1f77b4";
  double width = 1.0;
  bool dots = false;
  std::string label;
};

/// Plot series in data coordinates with a frame and axis ranges.
inline std::string svg(const std::vector<Series>& series, const std::string& title, double w = 640,
                       double h = 480) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& p : s.pts)
      if (std::isfinite(p[0]) && std::isfinite(p[1])) {
        x0 = std::min(x0, p[0]);
        x1 = std::max(x1, p[0]);
        y0 = std::min(y0, p[1]);
        y1 = std::max(y1, p[1]);
      }
  if (!(x1 > x0)) x0 -= 1, x1 += 1;
  if (!(y1 > y0)) y0 -= 1, y1 += 1;
  const double m = 40;
  auto X = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto Y = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << m << "\" y=\"" << m - 12 << "\" font-size=\"13\">" << title << "</text>\n";
  os << "<text x=\"" << m << "\" y=\"" << h - 12 << "\" font-size=\"10\">x: [" << fmt(x0) << ", " << fmt(x1)
     << "]  y: [" << fmt(y0) << ", " << fmt(y1) << "]</text>\n";
  int li = 0;
  for (const auto& s : series) {
    if (s.dots) {
      for (const auto& p : s.pts)
        if (std::isfinite(p[0]) && std::isfinite(p[1]))
          os << "<circle cx=\"" << X(p[0]) << "\" cy=\"" << Y(p[1]) << "\" r=\"" << s.width << "\" fill=\"" << s.color
             << "\"/>\n";
    } else if (s.pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width << "\" points=\"";
      for (const auto& p : s.pts)
        if (std::isfinite(p[0]) && std::isfinite(p[1])) os << X(p[0]) << "," << Y(p[1]) << " ";
      os << "\"/>\n";
    }
    if (!s.label.empty())
      os << "<text x=\"" << w - m - 120 << "\" y=\"" << m + 14 + 14 * li++ << "\" font-size=\"11\" fill=\"" << s.color
         << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dvdp::io
