#include "dres/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dres {

std::string_view to_string(PlotKind k) {
  switch (k) {
    case PlotKind::Portrait: return "portrait";
    case PlotKind::Areas: return "areas";
    case PlotKind::Probability: return "probability";
    case PlotKind::Histogram: return "histogram";
    case PlotKind::Scan: return "scan";
    case PlotKind::Compare: return "compare";
  }
  return "?";
}

PlotKind plot_kind_from_string(std::string_view name) {
  for (PlotKind k : {PlotKind::Portrait, PlotKind::Areas, PlotKind::Probability, PlotKind::Histogram, PlotKind::Scan,
                     PlotKind::Compare})
    if (to_string(k) == name) return k;
  throw DomainError("unknown plot kind '" + std::string(name) + "'");
}

std::string_view region_color(RegionLabel l) {
  switch (l) {
    case RegionLabel::East: return "#d62728";
    case RegionLabel::North: return "#2ca02c";
    case RegionLabel::West: return "#1f77b4";
    case RegionLabel::South: return "#ff7f0e";
    case RegionLabel::Core: return "#9467bd";
    case RegionLabel::External: return "#dddddd";
  }
  return "#000000";
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

int column(const Table& t, std::string_view name, bool required = true) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return static_cast<int>(i);
  if (required) throw DomainError("plot input lacks column '" + std::string(name) + "'");
  return -1;
}

std::vector<double> values(const Table& t, int c) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(cell_as_double(r[c]));
  return v;
}

std::string text_of(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return num(cell_as_double(c));
}

struct Series {
  std::vector<double> x, y;
  std::string color;
  std::string label;
  bool dashed = false;
  bool markers = false;
};

// Axes box in SVG coordinates with a data range; log_x maps through log10.
struct Panel {
  Panel(double l, double t, double w, double h) : left(l), top(t), width(w), height(h) {}
  double left, top, width, height;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool log_x = false;
  std::string title, xlabel, ylabel;

  double fx(double x) const {
    const double a = log_x ? std::log10(x0) : x0, b = log_x ? std::log10(x1) : x1;
    const double u = log_x ? std::log10(x) : x;
    return left + (b > a ? (u - a) / (b - a) : 0.5) * width;
  }
  double fy(double y) const { return top + height - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * height; }
};

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none") {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
         << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void line(double xa, double ya, double xb, double yb, std::string_view color = "#000", double width = 1) {
    out_ << "<line x1=\"" << num(xa) << "\" y1=\"" << num(ya) << "\" x2=\"" << num(xb) << "\" y2=\"" << num(yb)
         << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
  }
  void text(double x, double y, std::string_view s, int size = 11, std::string_view anchor = "middle",
            double rotate = 0) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
         << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0) out_ << " transform=\"rotate(" << rotate << " " << num(x) << " " << num(y) << ")\"";
    out_ << ">";
    for (char c : s) {
      if (c == '<') out_ << "&lt;";
      else if (c == '>') out_ << "&gt;";
      else if (c == '&') out_ << "&amp;";
      else out_ << c;
    }
    out_ << "</text>\n";
  }

  void frame(const Panel& p) {
    rect(p.left, p.top, p.width, p.height, "none", "#000");
    text(p.left + p.width / 2, p.top - 8, p.title, 12);
    text(p.left + p.width / 2, p.top + p.height + 32, p.xlabel);
    text(p.left - 40, p.top + p.height / 2, p.ylabel, 11, "middle", -90);
    for (double t : ticks(p.x0, p.x1, p.log_x)) {
      const double x = p.fx(t);
      line(x, p.top + p.height, x, p.top + p.height + 4);
      text(x, p.top + p.height + 16, num(t), 10);
    }
    for (double t : ticks(p.y0, p.y1, false)) {
      const double y = p.fy(t);
      line(p.left - 4, y, p.left, y);
      text(p.left - 6, y + 3, num(t), 10, "end");
    }
  }

  void series(const Panel& p, const Series& s) {
    std::ostringstream pts;
    bool any = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (p.log_x && s.x[i] <= 0)) continue;
      pts << num(p.fx(s.x[i])) << "," << num(p.fy(s.y[i])) << " ";
      any = true;
    }
    if (!any) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
         << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && !(p.log_x && s.x[i] <= 0))
          out_ << "<circle cx=\"" << num(p.fx(s.x[i])) << "\" cy=\"" << num(p.fy(s.y[i])) << "\" r=\"2.5\" fill=\""
               << s.color << "\"/>\n";
  }

  void legend(double x, double y, const std::vector<Series>& all) {
    for (const auto& s : all) {
      line(x, y - 4, x + 18, y - 4, s.color, 2);
      text(x + 22, y, s.label, 10, "start");
      y += 14;
    }
  }

  std::string str() const {
    std::ostringstream doc;
    doc << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << out_.str() << "</svg>\n";
    return doc.str();
  }

 private:
  static std::vector<double> ticks(double a, double b, bool log) {
    std::vector<double> t;
    if (!(b > a)) return {a};
    if (log) {
      for (double e = std::floor(std::log10(a)); e <= std::ceil(std::log10(b)); ++e) {
        const double v = std::pow(10.0, e);
        if (v >= a * (1 - 1e-9) && v <= b * (1 + 1e-9)) t.push_back(v);
      }
      if (t.size() < 2) t = {a, b};
      return t;
    }
    const double raw = (b - a) / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
    for (double v = std::ceil(a / step) * step; v <= b + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0 : v);
    return t;
  }

  double w_, h_;
  std::ostringstream out_;
};

void fit_ranges(Panel& p, const std::vector<Series>& all, bool zero_based_y) {
  double xa = std::numeric_limits<double>::infinity(), xb = -xa, ya = xa, yb = -xa;
  for (const auto& s : all)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (p.log_x && s.x[i] <= 0) continue;
      xa = std::min(xa, s.x[i]);
      xb = std::max(xb, s.x[i]);
      ya = std::min(ya, s.y[i]);
      yb = std::max(yb, s.y[i]);
    }
  if (!std::isfinite(xa)) xa = 0, xb = 1, ya = 0, yb = 1;
  if (zero_based_y) ya = std::min(ya, 0.0);
  if (yb <= ya) yb = ya + 1;
  if (xb <= xa) xb = xa + (p.log_x ? xa : 1);
  p.x0 = xa;
  p.x1 = xb;
  p.y0 = ya;
  p.y1 = yb + 0.05 * (yb - ya);
}

bool wants_log(const std::vector<double>& x) {
  if (x.empty()) return false;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo > 0 && *hi / *lo > 50;
}

// Region fraction curves for one block of trap rows, plus islands and the dominant share.
std::vector<Series> report_series(const Table& t, const std::vector<std::size_t>& rows, const std::vector<double>& x) {
  std::vector<Series> out;
  for (RegionLabel l : kAllRegions) {
    const int c = column(t, to_string(l));
    Series s{x, {}, std::string(region_color(l)), std::string(to_string(l))};
    if (l == RegionLabel::External) s.color = "#888888";
    for (std::size_t r : rows) s.y.push_back(cell_as_double(t.rows[r][c]));
    out.push_back(std::move(s));
  }
  Series isl{x, {}, "#000000", "islands"};
  Series share{x, {}, "#000000", "main share", true};
  const int ci = column(t, "islands"), cs = column(t, "share");
  for (std::size_t r : rows) {
    isl.y.push_back(cell_as_double(t.rows[r][ci]));
    share.y.push_back(cell_as_double(t.rows[r][cs]));
  }
  out.push_back(std::move(isl));
  out.push_back(std::move(share));
  return out;
}

std::string portrait(const Table& t) {
  const int cd = column(t, "delta_hat"), cr = column(t, "row"), cc = column(t, "col"), cx = column(t, "x"),
            cp = column(t, "p"), cl = column(t, "label");
  std::vector<double> order;
  std::map<double, std::vector<std::size_t>> panels;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double d = cell_as_double(t.rows[i][cd]);
    if (!panels.count(d)) order.push_back(d);
    panels[d].push_back(i);
  }
  const double side = 300, gap = 70;
  Svg svg(gap + order.size() * (side + gap), side + 120);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& rows = panels[order[k]];
    int n = 0;
    double hw = 0;
    for (std::size_t i : rows) {
      n = std::max(n, static_cast<int>(cell_as_double(t.rows[i][cc])) + 1);
      hw = std::max({hw, std::abs(cell_as_double(t.rows[i][cx])), std::abs(cell_as_double(t.rows[i][cp]))});
    }
    if (n > 1) hw *= static_cast<double>(n) / (n - 1);  // centres sit half a cell inside the window
    Panel p(gap + k * (side + gap), 40, side, side);
    p.x0 = p.y0 = -hw;
    p.x1 = p.y1 = hw;
    p.title = "delta_hat = " + num(order[k]);
    p.xlabel = "x";
    p.ylabel = "p";
    svg.rect(p.left, p.top, p.width, p.height, region_color(RegionLabel::External));
    const double cell = side / std::max(n, 1);
    // Merge horizontal runs of equal labels to keep the file small.
    std::map<std::pair<int, int>, std::string> lab;
    for (std::size_t i : rows)
      lab[{static_cast<int>(cell_as_double(t.rows[i][cr])), static_cast<int>(cell_as_double(t.rows[i][cc]))}] =
          text_of(t.rows[i][cl]);
    for (int r = 0; r < n; ++r) {
      int c = 0;
      while (c < n) {
        auto it = lab.find({r, c});
        const std::string l = it == lab.end() ? "External" : it->second;
        int e = c + 1;
        while (e < n) {
          auto jt = lab.find({r, e});
          if ((jt == lab.end() ? "External" : jt->second) != l) break;
          ++e;
        }
        if (l != "External")
          svg.rect(p.left + c * cell, p.top + r * cell, (e - c) * cell, cell, region_color(region_from_string(l)));
        c = e;
      }
    }
    svg.frame(p);
  }
  std::vector<Series> keys;
  for (RegionLabel l : kAllRegions) keys.push_back({{}, {}, std::string(region_color(l)), std::string(to_string(l))});
  double x = gap;
  for (const auto& s : keys) {
    svg.rect(x, side + 95, 12, 12, s.color, "#000");
    svg.text(x + 16, side + 105, s.label, 10, "start");
    x += 80;
  }
  return svg.str();
}

std::string areas(const Table& t) {
  const auto x = values(t, column(t, "delta_hat"));
  std::vector<Series> curves;
  std::vector<double> sum(x.size(), 0.0);
  for (RegionLabel l : {RegionLabel::East, RegionLabel::North, RegionLabel::West, RegionLabel::South,
                        RegionLabel::Core}) {
    Series s{x, values(t, column(t, "A_" + std::string(to_string(l)))), std::string(region_color(l)),
             std::string(to_string(l))};
    s.markers = true;
    if (is_island(l))
      for (std::size_t i = 0; i < x.size(); ++i) sum[i] += s.y[i];
    curves.push_back(std::move(s));
  }
  const auto east = values(t, column(t, "A_East"));
  Series share{x, {}, "#000000", "East / islands"};
  share.markers = true;
  for (std::size_t i = 0; i < x.size(); ++i)
    share.y.push_back(sum[i] > 0 ? east[i] / sum[i] : std::numeric_limits<double>::quiet_NaN());
  Svg svg(900, 420);
  Panel a(80, 40, 330, 320);
  a.title = "region areas";
  a.xlabel = "delta_hat";
  a.ylabel = "area";
  fit_ranges(a, curves, true);
  svg.frame(a);
  for (const auto& s : curves) svg.series(a, s);
  svg.legend(a.left + 10, a.top + 16, curves);
  Panel b(530, 40, 330, 320);
  b.title = "main island share";
  b.xlabel = "delta_hat";
  b.ylabel = "A_East / sum of islands";
  fit_ranges(b, {share}, true);
  b.y1 = std::max(b.y1, 1.0);
  svg.frame(b);
  svg.series(b, share);
  return svg.str();
}

std::string probability(const Table& t) {
  const auto lo = values(t, column(t, "a_min")), hi = values(t, column(t, "a_max"));
  std::vector<double> x;
  for (std::size_t i = 0; i < lo.size(); ++i) x.push_back((lo[i] + hi[i]) / 2);
  std::vector<Series> curves;
  for (RegionLabel l : kAllRegions) {
    const std::string name(to_string(l));
    curves.push_back({x, values(t, column(t, "P_" + name)), std::string(region_color(l)), "P " + name});
    const int f = column(t, "F_" + name, false);
    if (f >= 0) {
      Series m{x, values(t, f), std::string(region_color(l)), "measured " + name, true, true};
      curves.push_back(std::move(m));
    }
  }
  Svg svg(560, 440);
  Panel p(80, 40, 380, 320);
  p.title = "capture probability";
  p.xlabel = "initial amplitude sqrt(2 J0)";
  p.ylabel = "probability";
  fit_ranges(p, curves, true);
  svg.frame(p);
  for (const auto& s : curves) svg.series(p, s);
  svg.legend(p.left + p.width + 8, p.top + 10, curves);
  return svg.str();
}

std::string histogram(const Table& t) {
  const auto lo = values(t, column(t, "a_min")), hi = values(t, column(t, "a_max"));
  Svg svg(600, 440);
  Panel p(80, 40, 400, 320);
  p.title = "trapping per amplitude bin";
  p.xlabel = "initial amplitude sqrt(2 J0)";
  p.ylabel = "fraction";
  p.x0 = lo.empty() ? 0 : *std::min_element(lo.begin(), lo.end());
  p.x1 = hi.empty() ? 1 : *std::max_element(hi.begin(), hi.end());
  p.y0 = 0;
  p.y1 = 1;
  std::vector<Series> keys;
  for (RegionLabel l : kIslands) {
    keys.push_back({{}, {}, std::string(region_color(l)), std::string(to_string(l))});
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    double base = 0;
    for (RegionLabel l : kIslands) {
      const double f = cell_as_double(t.rows[i][column(t, to_string(l))]);
      svg.rect(p.fx(lo[i]), p.fy(base + f), p.fx(hi[i]) - p.fx(lo[i]), p.fy(base) - p.fy(base + f),
               region_color(l));
      base += f;
    }
  }
  svg.frame(p);
  svg.legend(p.left + p.width + 8, p.top + 10, keys);
  return svg.str();
}

std::string scan(const Table& t) {
  const int ca = column(t, "axis"), cv = column(t, "value");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string a = text_of(t.rows[i][ca]);
    if (!blocks.count(a)) order.push_back(a);
    blocks[a].push_back(i);
  }
  const double pw = 300, ph = 230;
  Svg svg(3 * (pw + 90) + 130, 2 * (ph + 90) + 20);
  std::vector<Series> legend_curves;
  for (std::size_t k = 0; k < 6; ++k) {
    Panel p(80 + (k % 3) * (pw + 90), 40 + (k / 3) * (ph + 90), pw, ph);
    p.title = std::string(1, static_cast<char>('a' + k)) + ")";
    if (k >= order.size()) {
      svg.frame(p);
      continue;
    }
    const auto& rows = blocks[order[k]];
    std::vector<double> x;
    for (std::size_t r : rows) x.push_back(cell_as_double(t.rows[r][cv]));
    p.log_x = wants_log(x);
    p.title += " " + order[k];
    p.xlabel = order[k];
    p.ylabel = "fraction";
    auto curves = report_series(t, rows, x);
    for (auto& s : curves) s.markers = true;
    fit_ranges(p, curves, true);
    p.y1 = std::max(p.y1, 1.0);
    svg.frame(p);
    for (const auto& s : curves) svg.series(p, s);
    legend_curves = curves;
  }
  svg.legend(3 * (pw + 90) + 10, 60, legend_curves);
  return svg.str();
}

std::string compare(const Table& t) {
  const auto x = values(t, column(t, "J_avg"));
  std::vector<Series> curves{{x, values(t, column(t, "islands_exciter")), "#000000", "with exciter"},
                             {x, values(t, column(t, "islands_henon")), "#000000", "without exciter", true}};
  for (auto& s : curves) s.markers = true;
  Svg svg(560, 420);
  Panel p(80, 40, 400, 320);
  p.log_x = wants_log(x);
  p.title = "total island trapping";
  p.xlabel = "<J>";
  p.ylabel = "island fraction";
  fit_ranges(p, curves, true);
  p.y1 = std::max(p.y1, 1.0);
  svg.frame(p);
  for (const auto& s : curves) svg.series(p, s);
  svg.legend(p.left + 200, p.top + 16, curves);
  return svg.str();
}

}  // namespace

std::string render_plot(const Table& table, PlotKind kind) {
  switch (kind) {
    case PlotKind::Portrait: return portrait(table);
    case PlotKind::Areas: return areas(table);
    case PlotKind::Probability: return probability(table);
    case PlotKind::Histogram: return histogram(table);
    case PlotKind::Scan: return scan(table);
    case PlotKind::Compare: return compare(table);
  }
  throw DomainError("unknown plot kind");
}

void emit_plot(const Table& table, PlotKind kind, const std::filesystem::path& path) {
  const std::string svg = render_plot(table, kind);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << svg;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace dres
