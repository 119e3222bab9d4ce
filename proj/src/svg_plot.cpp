#include "roughvol/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace roughvol {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(const char* pattern, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string num(double v) { return fmt("%.2f", v); }

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

void fit_range(Axis& axis, double lo, double hi)
{
  if (!(lo <= hi)) {
    lo = axis.log ? 1.0 : 0.0;
    hi = lo;
  }
  double a = axis.map(lo), b = axis.map(hi);
  if (b - a < 1e-12) {
    const double pad = std::max(std::abs(a) * 0.05, axis.log ? 0.5 : 1e-3);
    a -= pad;
    b += pad;
  } else if (!axis.log) {
    const double pad = 0.05 * (b - a);
    a -= pad;
    b += pad;
  }
  if (axis.log) {
    a = std::floor(a);
    b = std::ceil(b);
  }
  axis.lo = a;
  axis.hi = b;
}

std::vector<double> ticks(const Axis& axis)
{
  std::vector<double> out;
  if (axis.log) {
    for (double e = axis.lo; e <= axis.hi + 1e-9; e += 1.0)
      out.push_back(std::pow(10.0, e));
    return out;
  }
  const double raw = (axis.hi - axis.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

double y_value(const PlotStyle& style, double v) { return style.log_y ? std::abs(v) : v; }

}  // namespace

std::string emit_plot(std::span<const TermSeries> series, const PlotStyle& style)
{
  if (series.empty())
    throw std::invalid_argument("emit_plot: no series to draw");
  for (const auto& s : series) {
    s.validate();
    if (s.maturities.empty())
      throw std::invalid_argument("emit_plot: series '" + s.label + "' is empty");
  }

  Axis x{style.log_x}, y{style.log_y};
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.maturities.size(); ++i) {
      const double t = s.maturities[i], v = y_value(style, s.values[i]);
      if (!x.usable(t) || !y.usable(v))
        continue;
      xlo = std::min(xlo, t);
      xhi = std::max(xhi, t);
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  for (const auto& r : style.references) {
    const double v = y_value(style, r.value);
    if (y.usable(v)) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  fit_range(x, xlo, xhi);
  fit_range(y, ylo, yhi);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double t) { return kLeft + pw * x.frac(t); };
  const auto py = [&](double v) { return kTop + ph * (1.0 - y.frac(v)); };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kTop / 2 + 6) +
         "\" text-anchor=\"middle\" font-size=\"15\">" + escape(style.title) + "</text>\n";

  // Axes, grid and tick labels.
  out += "<g class=\"axes\" stroke=\"#444\" fill=\"none\">\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" fill=\"#222\">\n";
  for (double t : ticks(x)) {
    const double p = px(t);
    out += "<line x1=\"" + num(p) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(p) + "\" y2=\"" + num(kTop + ph) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(p) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           fmt("%g", t) + "</text>\n";
  }
  for (double v : ticks(y)) {
    const double p = py(v);
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(p) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" + num(p) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(p + 4) + "\" text-anchor=\"end\">" + fmt("%g", v) +
           "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) + "\" text-anchor=\"middle\">" +
         escape(style.x_label) + (style.log_x ? " (log)" : "") + "</text>\n";
  out += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(kTop + ph / 2) + ")\">" + escape(style.y_label) + (style.log_y ? " (log |.|)" : "") + "</text>\n";
  out += "</g>\n";

  double legend_y = kTop + 10;
  std::size_t colour = 0;
  for (const auto& r : style.references) {
    const double v = y_value(style, r.value);
    if (!y.usable(v))
      continue;
    const double p = py(v);
    out += "<line class=\"reference\" x1=\"" + num(kLeft) + "\" y1=\"" + num(p) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(p) + "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
    out += "<text x=\"" + num(kLeft + pw + 8) + "\" y=\"" + num(p + 4) + "\" fill=\"#555\">" + escape(r.label) +
           "</text>\n";
  }

  for (const auto& s : series) {
    const char* c = kPalette[colour++ % (sizeof kPalette / sizeof kPalette[0])];
    std::string points;
    std::string bars;
    for (std::size_t i = 0; i < s.maturities.size(); ++i) {
      const double t = s.maturities[i], v = y_value(style, s.values[i]);
      if (!x.usable(t) || !y.usable(v))
        continue;
      if (!points.empty())
        points += ' ';
      points += num(px(t)) + "," + num(py(v));
      const double se = s.std_errors[i];
      if (style.error_bars && std::isfinite(se) && se > 0.0) {
        const double lo = v - 2.0 * se, hi = v + 2.0 * se;
        if (y.usable(lo) && y.usable(hi))
          bars += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(py(lo)) + "\" x2=\"" + num(px(t)) + "\" y2=\"" +
                  num(py(hi)) + "\"/>\n";
      }
    }
    out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(c) +
           "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
    if (!bars.empty())
      out += "<g class=\"error-bars\" stroke=\"" + std::string(c) + "\">\n" + bars + "</g>\n";
    out += "<text x=\"" + num(kLeft + pw + 8) + "\" y=\"" + num(legend_y) + "\" fill=\"" + c + "\">" +
           escape(s.label) + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace roughvol
