#include "srd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>


namespace srd {
namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

std::string tick_label(double v) {
  if (std::fabs(v) < 1e-12) v = 0.0;
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double f = r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0;
  return f * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void render_panel(std::ostringstream& os, const PlotPanel& panel, double ox, int w, int h) {
  const double left = ox + 64.0, right = ox + w - 16.0, top = 36.0, bottom = h - 48.0;
  Range xr, yr;
  for (const auto& s : panel.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: series x/y length mismatch");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  const double pad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= pad;
  yr.hi += pad;
  const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
  const auto py = [&](double y) { return bottom - (y - yr.lo) / (yr.hi - yr.lo) * (bottom - top); };

  os << "<g>\n";
  os << "<text x=\"" << num(ox + w / 2.0) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(panel.title) << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left) << "\" height=\""
     << num(bottom - top) << "\" fill=\"none\" stroke=\"#000\"/>\n";

  const double xs = nice_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px(t)) << "\" y2=\""
       << num(bottom + 4) << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
       << tick_label(t) << "</text>\n";
  }
  const double ys = nice_step(yr.hi - yr.lo, 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
       << num(py(t)) << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(h - 12.0)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(ox + 16) << "," << num((top + bottom) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.y_label) << "</text>\n";

  for (const auto& s : panel.series) {
    if (s.x.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"5,3\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i && s.step) os << num(px(s.x[i])) << ',' << num(py(s.y[i - 1])) << ' ';
      os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
  }

  double ly = top + 14.0;
  for (const auto& s : panel.series) {
    os << "<line x1=\"" << num(left + 8) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(left + 28) << "\" y2=\""
       << num(ly - 4) << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"5,3\"";
    os << "/>\n";
    os << "<text x=\"" << num(left + 32) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape(s.label)
       << "</text>\n";
    ly += 15.0;
  }
  os << "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<PlotPanel>& panels, int panel_width, int panel_height) {
  if (panels.empty()) throw std::invalid_argument("render_svg: no panels");
  std::ostringstream os;
  const int width = panel_width * static_cast<int>(panels.size());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << panel_height
     << "\" viewBox=\"0 0 " << width << ' ' << panel_height << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(os, panels[i], static_cast<double>(i) * panel_width, panel_width, panel_height);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace srd
