#pragma once

// Minimal fixed-canvas SVG writer for the bench plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace uca::svg {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#7b3294", "#2ca02c", "#ff7f0e"};
  return colors[k % 5];
}

class Plot {
 public:
  static constexpr double kWidth = 800, kHeight = 500;
  static constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

  Plot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  // Data ranges; degenerate ranges are widened so mapping stays finite.
  void set_range(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    x0_ = x0; x1_ = x1; y0_ = y0 - pad; y1_ = y1 + pad;
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color,
                const char* dash = nullptr) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dash) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << " points=\"";
    for (const auto& [x, y] : pts) body_ << num(px(x)) << ',' << num(py(y)) << ' ';
    body_ << "\"/>\n";
  }

  void segment(double x0, double y0, double x1, double y1, const char* color, double width = 1.5) {
    body_ << "<line x1=\"" << num(px(x0)) << "\" y1=\"" << num(py(y0)) << "\" x2=\""
          << num(px(x1)) << "\" y2=\"" << num(py(y1)) << "\" stroke=\"" << color
          << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }

  void dot(double x, double y, const char* color, double r = 1.5) {
    body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(r)
          << "\" fill=\"" << color << "\" fill-opacity=\"0.5\"/>\n";
  }

  void rect(double x0, double y0, double x1, double y1, const char* color) {
    const double left = px(x0), right = px(x1), top = py(y1), bottom = py(y0);
    body_ << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
          << num(std::max(0.0, right - left)) << "\" height=\"" << num(std::max(0.0, bottom - top))
          << "\" fill=\"" << color << "\"/>\n";
  }

  void label(double x, double y, const std::string& text, const char* color = "#000") {
    body_ << "<text x=\"" << num(px(x)) << "\" y=\"" << num(py(y)) << "\" font-size=\"12\" fill=\""
          << color << "\">" << escape(text) << "</text>\n";
  }

  void legend(const std::string& text, const char* color) {
    const double y = kTop + 18.0 * static_cast<double>(legend_rows_++);
    const double x = kWidth - kRight - 170;
    body_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24)
          << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\" font-size=\"12\">"
          << escape(text) << "</text>\n";
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    axes(out);
    out << body_.str() << "</svg>\n";
  }

 private:
  void axes(std::ostream& out) const {
    const double bottom = kHeight - kBottom, right = kWidth - kRight;
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">"
        << escape(title_) << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"#000\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << bottom << "\" stroke=\"#000\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double xv = x0_ + (x1_ - x0_) * k / 5.0;
      const double yv = y0_ + (y1_ - y0_) * k / 5.0;
      out << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << kTop << "\" x2=\"" << num(px(xv))
          << "\" y2=\"" << bottom << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(bottom + 18)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
      out << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << right
          << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
    }
    out << "<text x=\"" << num((kLeft + right) / 2) << "\" y=\"" << num(kHeight - 16)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel_) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num((kTop + bottom) / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num((kTop + bottom) / 2) << ")\">" << escape(ylabel_) << "</text>\n";
  }

  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, std::fabs(v) >= 1000 ? "%.0f" : "%.3g", v);
    return buf;
  }

  std::string title_, xlabel_, ylabel_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  int legend_rows_ = 0;
  std::ostringstream body_;
};

}  // namespace uca::svg
