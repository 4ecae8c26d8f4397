#include "plume/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "plume/errors.hpp"

namespace plume {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad(double fraction) {
    if (!(hi > lo)) {
      const double w = std::max(1.0, std::abs(lo));
      lo -= 0.5 * w;
      hi += 0.5 * w;
      return;
    }
    const double d = (hi - lo) * fraction;
    lo -= d;
    hi += d;
  }
  double span() const { return hi - lo; }
};

class Canvas {
 public:
  Canvas(Range x, Range y) : x_(x), y_(y) {}

  double px(double x) const { return kLeft + (x - x_.lo) / x_.span() * plot_w(); }
  double py(double y) const { return kTop + (y_.hi - y) / y_.span() * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void begin(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
         << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\""
         << " data-x-range=\"" << fmt("%.9g", x_.lo) << ' ' << fmt("%.9g", x_.hi) << "\""
         << " data-y-range=\"" << fmt("%.9g", y_.lo) << ' ' << fmt("%.9g", y_.hi) << "\""
         << " data-plot-area=\"" << kLeft << ' ' << kTop << ' ' << plot_w() << ' ' << plot_h()
         << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" fill=\"white\"/>\n";
    out_ << "<rect class=\"frame\" x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
         << plot_w() << "\" height=\"" << plot_h()
         << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    text(kWidth / 2, 18, title, "middle");
    text(kLeft + plot_w() / 2, kHeight - 10, xlabel, "middle");
    out_ << "<text x=\"16\" y=\"" << fmt("%.2f", kTop + plot_h() / 2)
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\""
         << " transform=\"rotate(-90 16 " << fmt("%.2f", kTop + plot_h() / 2) << ")\">"
         << ylabel << "</text>\n";
    ticks();
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& cls, const std::string& color,
                const std::string& extra = "") {
    out_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.5\"" << extra << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ << ' ';
      out_ << fmt("%.2f", px(pts[i].x())) << ',' << fmt("%.2f", py(pts[i].y()));
    }
    out_ << "\"/>\n";
  }

  void marker(const Vec2& p, const std::string& cls, const std::string& color) {
    out_ << "<circle class=\"" << cls << "\" cx=\"" << fmt("%.2f", px(p.x())) << "\" cy=\""
         << fmt("%.2f", py(p.y())) << "\" r=\"5\" fill=\"" << color << "\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kTop + 14;
    for (const auto& [label, color] : entries) {
      out_ << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << fmt("%.2f", y - 4) << "\" x2=\""
           << kLeft + 30 << "\" y2=\"" << fmt("%.2f", y - 4) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
      text(kLeft + 36, y, label, "start");
      y += 16;
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void text(double x, double y, const std::string& s, const char* anchor) {
    out_ << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << fmt("%.2f", y)
         << "\" text-anchor=\"" << anchor << "\" font-family=\"sans-serif\" font-size=\"12\">"
         << s << "</text>\n";
  }

  void ticks() {
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_.lo + x_.span() * i / 4.0;
      const double yv = y_.lo + y_.span() * i / 4.0;
      text(px(xv), kTop + plot_h() + 16, fmt("%.4g", xv), "middle");
      text(kLeft - 6, py(yv) + 4, fmt("%.4g", yv), "end");
    }
  }

  Range x_;
  Range y_;
  std::ostringstream out_;
};

}  // namespace

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "trajectory-xy") return PlotKind::kTrajectory;
  if (s == "concentration-timeseries") return PlotKind::kTimeseries;
  throw InputError("unknown plot kind '" + s + "'");
}

std::string render_trajectory(const RunLog& log, const std::vector<Vec2>& source_path) {
  if (log.records.empty()) throw InputError("log has no records");
  std::vector<Vec2> path;
  Range xr, yr;
  for (const auto& r : log.records) {
    path.push_back(r.head);
    xr.include(r.head.x());
    yr.include(r.head.y());
  }
  for (const auto& p : source_path) {
    xr.include(p.x());
    yr.include(p.y());
  }
  // Equal aspect: widen the narrower range to the canvas proportions.
  const double aspect = Canvas::plot_w() / Canvas::plot_h();
  const double w = std::max(xr.span(), yr.span() * aspect);
  const double h = w / aspect;
  const double cx = 0.5 * (xr.lo + xr.hi);
  const double cy = 0.5 * (yr.lo + yr.hi);
  xr = {cx - 0.5 * w, cx + 0.5 * w};
  yr = {cy - 0.5 * h, cy + 0.5 * h};
  xr.pad(0.05);
  yr.pad(0.05);

  Canvas canvas(xr, yr);
  canvas.begin("Head-point trajectory", "x [m]", "y [m]");
  if (!source_path.empty()) canvas.polyline(source_path, "source-path", "#d62728");
  canvas.polyline(path, "head-path", "#1f77b4");
  canvas.marker(path.front(), "start", "#2ca02c");
  canvas.marker(path.back(), "end", "#000000");
  std::vector<std::pair<std::string, std::string>> legend{{"head point z", "#1f77b4"}};
  if (!source_path.empty()) legend.emplace_back("plume centroid", "#d62728");
  canvas.legend(legend);
  return canvas.finish();
}

std::string render_timeseries(const RunLog& log, double c0) {
  if (log.records.empty()) throw InputError("log has no records");
  Range tr, cr;
  cr.include(c0);
  for (const auto& r : log.records) {
    tr.include(r.t);
    for (double c : r.readings) cr.include(c);
    cr.include(r.c_hat);
  }
  if (!(tr.hi > tr.lo)) tr.pad(0.0);
  cr.pad(0.05);

  Canvas canvas(tr, cr);
  canvas.begin("Sensor concentrations", "t [s]", "c [ppb]");
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"};
  std::vector<std::pair<std::string, std::string>> legend;
  for (int i = 0; i < kSensorCount; ++i) {
    std::vector<Vec2> pts;
    for (const auto& r : log.records) pts.emplace_back(r.t, r.readings[i]);
    canvas.polyline(pts, "sensor sensor-" + std::to_string(i + 1), kColors[i]);
    legend.emplace_back("c" + std::to_string(i + 1), kColors[i]);
  }
  std::vector<Vec2> mean;
  for (const auto& r : log.records) mean.emplace_back(r.t, r.c_hat);
  canvas.polyline(mean, "mean", "#000000");
  legend.emplace_back("mean", "#000000");
  canvas.polyline({Vec2(tr.lo, c0), Vec2(tr.hi, c0)}, "reference", "#d62728",
                  " stroke-dasharray=\"6 4\" data-value=\"" + fmt("%.9g", c0) + "\"");
  legend.emplace_back("c0 = " + fmt("%.6g", c0), "#d62728");
  canvas.legend(legend);
  return canvas.finish();
}

}  // namespace plume
