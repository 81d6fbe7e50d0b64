#include "cascade/report.hpp"

#include "cascade/density_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cascade {

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CsvTable: empty header");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render(const std::string& manifest_ref) const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  out += "# manifest: " + manifest_ref + "\n";
  return out;
}

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 80, kRight = 170, kTop = 50, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
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

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

struct Axes {
  double x0, x1, y0, y1;
  bool log_x;
  double px(double x) const {
    const double u = log_x ? (std::log10(x) - std::log10(x0)) / (std::log10(x1) - std::log10(x0)) : (x - x0) / (x1 - x0);
    return kLeft + u * (kWidth - kLeft - kRight);
  }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void frame(std::ostringstream& s, const PlotSpec& spec, const Axes& ax) {
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  s << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(spec.title)
    << "</text>\n";
  s << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << escape(spec.x_label) << "</text>\n";
  s << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << kTop + plot_h / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

  std::vector<double> xt;
  if (ax.log_x) {
    for (double d = std::floor(std::log10(ax.x0)); d <= std::ceil(std::log10(ax.x1)); d += 1.0)
      for (double m : {1.0, 2.0, 5.0}) {
        const double v = m * std::pow(10.0, d);
        if (v >= ax.x0 * (1 - 1e-9) && v <= ax.x1 * (1 + 1e-9)) xt.push_back(v);
      }
  } else {
    xt = nice_ticks(ax.x0, ax.x1);
  }
  for (double v : xt) {
    const double x = ax.px(v);
    s << "<line x1=\"" << fmt(x) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << fmt(x) << "\" y2=\""
      << kHeight - kBottom + 5 << "\" stroke=\"#333\"/>\n";
    s << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << tick_label(v) << "</text>\n";
  }
  for (double v : nice_ticks(ax.y0, ax.y1)) {
    const double y = ax.py(v);
    s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#333\"/>\n";
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << tick_label(v) << "</text>\n";
  }
}

void polylines(std::ostringstream& s, const Axes& ax, const std::vector<Series>& series, bool legend) {
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& sr = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\""
          << (sr.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts << "\"/>\n";
        pts.clear();
      }
    };
    for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i]) || (ax.log_x && sr.x[i] <= 0)) {
        flush();
        continue;
      }
      pts += fmt(ax.px(sr.x[i])) + "," + fmt(ax.py(std::clamp(sr.y[i], ax.y0, ax.y1))) + " ";
    }
    flush();
    if (legend) {
      const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
      const double lx = kWidth - kRight + 12;
      s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
        << colour << "\" stroke-width=\"2\"" << (sr.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
      s << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << escape(sr.label) << "</text>\n";
    }
  }
}

std::string header() {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s.str();
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& sr : series)
    for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i]) || (spec.log_x && sr.x[i] <= 0)) continue;
      xlo = std::min(xlo, sr.x[i]);
      xhi = std::max(xhi, sr.x[i]);
      ylo = std::min(ylo, sr.y[i]);
      yhi = std::max(yhi, sr.y[i]);
    }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (xhi == xlo) xhi = xlo + 1;
  auto [y0, y1] = padded(ylo, yhi);
  if (spec.y_min) y0 = *spec.y_min;
  if (spec.y_max) y1 = *spec.y_max;
  const Axes ax{xlo, xhi, y0, y1, spec.log_x};

  std::ostringstream s;
  s << header();
  frame(s, spec, ax);
  polylines(s, ax, series, true);
  s << "</svg>\n";
  return s.str();
}

std::string heatmap_svg(const PlotSpec& spec, const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<std::vector<double>>& values, const std::vector<Series>& overlay) {
  if (xs.empty() || ys.empty() || values.size() != ys.size())
    throw std::invalid_argument("heatmap_svg: grid does not match values");
  double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
  for (const auto& row : values) {
    if (row.size() != xs.size()) throw std::invalid_argument("heatmap_svg: grid does not match values");
    for (double v : row)
      if (std::isfinite(v)) vlo = std::min(vlo, v), vhi = std::max(vhi, v);
  }
  if (!std::isfinite(vlo)) vlo = 0, vhi = 1;
  if (vhi == vlo) vhi = vlo + 1e-12;

  // Cell edges halfway between grid points.
  auto edges = [](const std::vector<double>& g) {
    std::vector<double> e(g.size() + 1);
    if (g.size() == 1) return std::vector<double>{g[0] - 0.5, g[0] + 0.5};
    for (std::size_t i = 1; i < g.size(); ++i) e[i] = 0.5 * (g[i - 1] + g[i]);
    e.front() = g.front() - (e[1] - g.front());
    e.back() = g.back() + (g.back() - e[g.size() - 1]);
    return e;
  };
  const auto ex = edges(xs), ey = edges(ys);
  const Axes ax{ex.front(), ex.back(), ey.front(), ey.back(), false};

  std::ostringstream s;
  s << header();
  for (std::size_t iy = 0; iy < ys.size(); ++iy)
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const double v = values[iy][ix];
      std::string fill = "#cccccc";
      if (std::isfinite(v)) {
        const double u = (v - vlo) / (vhi - vlo);
        // dark blue -> teal -> yellow
        const int r = static_cast<int>(std::lround(255 * std::clamp(1.6 * u - 0.6, 0.0, 1.0)));
        const int g = static_cast<int>(std::lround(255 * std::clamp(0.15 + 0.85 * u, 0.0, 1.0)));
        const int b = static_cast<int>(std::lround(255 * std::clamp(0.55 - 0.5 * u + 0.3 * (1 - u), 0.0, 1.0)));
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        fill = buf;
      }
      const double x0 = ax.px(ex[ix]), x1 = ax.px(ex[ix + 1]);
      const double y0 = ax.py(ey[iy + 1]), y1 = ax.py(ey[iy]);
      s << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0 + 0.3) << "\" height=\""
        << fmt(y1 - y0 + 0.3) << "\" fill=\"" << fill << "\"/>\n";
    }
  frame(s, spec, ax);
  polylines(s, ax, overlay, true);
  // Colour bar labels.
  const double bx = kWidth - kRight + 12, by = kHeight - kBottom - 120;
  for (int k = 0; k <= 10; ++k) {
    const double u = k / 10.0;
    const int r = static_cast<int>(std::lround(255 * std::clamp(1.6 * u - 0.6, 0.0, 1.0)));
    const int g = static_cast<int>(std::lround(255 * std::clamp(0.15 + 0.85 * u, 0.0, 1.0)));
    const int b = static_cast<int>(std::lround(255 * std::clamp(0.55 - 0.5 * u + 0.3 * (1 - u), 0.0, 1.0)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    s << "<rect x=\"" << bx << "\" y=\"" << fmt(by + 110 - 11 * k) << "\" width=\"16\" height=\"11\" fill=\"" << buf
      << "\"/>\n";
  }
  s << "<text x=\"" << bx + 22 << "\" y=\"" << by + 118 << "\" font-size=\"11\">" << tick_label(vlo) << "</text>\n";
  s << "<text x=\"" << bx + 22 << "\" y=\"" << by + 8 << "\" font-size=\"11\">" << tick_label(vhi) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace cascade
