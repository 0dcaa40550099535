#include "rlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

namespace rlab {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 190.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v, const char* f = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double frac(double v) const {
    const double a = log ? std::log10(v) : v;
    return hi == lo ? 0.5 : (a - lo) / (hi - lo);
  }
};

Axis make_axis(std::vector<double> vals, bool log) {
  Axis ax;
  ax.log = log;
  if (log) std::erase_if(vals, [](double v) { return !(v > 0.0); });
  if (vals.empty()) return ax;
  double lo = *std::min_element(vals.begin(), vals.end());
  double hi = *std::max_element(vals.begin(), vals.end());
  if (log) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : (log ? 0.5 : std::max(std::abs(lo) * 0.1, 1e-12));
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  return ax;
}

std::vector<double> ticks(const Axis& ax) {
  std::vector<double> t;
  if (ax.log) {
    const double step = ax.hi - ax.lo > 8 ? 2.0 : 1.0;
    for (double e = std::ceil(ax.lo); e <= ax.hi; e += step) t.push_back(std::pow(10.0, e));
    if (t.size() < 2) {
      // Narrow range: fall back to 1-2-5 steps in linear space.
      t.clear();
      const double lo = std::pow(10.0, ax.lo);
      const double hi = std::pow(10.0, ax.hi);
      const double raw = (hi - lo) / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      const double s = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
      for (double v = std::ceil(lo / s) * s; v <= hi; v += s)
        if (v > 0) t.push_back(v);
    }
    return t;
  }
  const double raw = (ax.hi - ax.lo) / 5.0;
  if (!(raw > 0.0)) return {ax.lo};
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double s = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
  for (double v = std::ceil(ax.lo / s) * s; v <= ax.hi + 1e-12 * s; v += s) t.push_back(std::abs(v) < 1e-12 * s ? 0.0 : v);
  return t;
}

bool wants_log(const std::vector<double>& vals) {
  double lo = INFINITY;
  double hi = 0.0;
  for (double v : vals) {
    if (!(v > 0.0)) return false;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return !vals.empty() && hi / lo > 100.0;
}

}  // namespace

std::string line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      xs.push_back(p.x);
      ys.push_back(p.y);
      if (p.err > 0.0) {
        ys.push_back(p.y + p.err);
        if (!spec.log_y || p.y - p.err > 0.0) ys.push_back(p.y - p.err);
      }
    }
  const Axis ax = make_axis(xs, spec.log_x);
  const Axis ay = make_axis(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.frac(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.frac(y)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  o += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" + escape(spec.title) + "</text>\n";
  o += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    if (ax.frac(t) < 0 || ax.frac(t) > 1) continue;
    const std::string x = fmt(px(t));
    o += "<line x1=\"" + x + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + x + "\" y2=\"" + fmt(kTop + ph + 5) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + x + "\" y=\"" + fmt(kTop + ph + 20) + "\" text-anchor=\"middle\">" + fmt(t, "%.4g") +
         "</text>\n";
  }
  for (double t : ticks(ay)) {
    if (ay.frac(t) < 0 || ay.frac(t) > 1) continue;
    const std::string y = fmt(py(t));
    o += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + y + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + y +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(t) + 4) + "\" text-anchor=\"end\">" + fmt(t, "%.3g") +
         "</text>\n";
  }
  o += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 20) + "\" text-anchor=\"middle\">" +
       escape(spec.x_label) + (spec.log_x ? " (log)" : "") + "</text>\n";
  o += "<text transform=\"translate(22," + fmt(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(spec.y_label) + (spec.log_y ? " (log)" : "") + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::string poly;
    std::string marks;
    for (const auto& p : series[k].points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      if ((spec.log_x && p.x <= 0) || (spec.log_y && p.y <= 0)) continue;
      const std::string x = fmt(px(p.x));
      const std::string y = fmt(py(p.y));
      poly += (poly.empty() ? "" : " ") + x + "," + y;
      marks += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      if (p.err > 0.0) {
        const double lo = spec.log_y ? std::max(p.y - p.err, p.y * 1e-3) : p.y - p.err;
        marks += "<line x1=\"" + x + "\" y1=\"" + fmt(py(lo)) + "\" x2=\"" + x + "\" y2=\"" + fmt(py(p.y + p.err)) +
                 "\" stroke=\"" + color + "\"/>\n";
      }
    }
    if (!poly.empty())
      o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + poly +
           "\"/>\n";
    o += marks;
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    o += "<line x1=\"" + fmt(kWidth - kRight + 15) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(kWidth - kRight + 35) +
         "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fmt(kWidth - kRight + 40) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(series[k].name) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

namespace {

struct Agg {
  std::vector<double> v;
  SeriesPoint point(double x) const {
    const Summary s = summarize(v);
    return {x, s.mean, s.std_error};
  }
};

std::string file_safe(std::string s) {
  for (char& c : s)
    if (c == ':' || c == '/' || c == ' ') c = '-';
  return s;
}

std::vector<double> ys_of(const std::vector<Series>& ss) {
  std::vector<double> out;
  for (const auto& s : ss)
    for (const auto& p : s.points) out.push_back(p.y);
  return out;
}

}  // namespace

std::vector<Figure> sweep_figures(const std::vector<SweepRow>& rows) {
  // Keys keep first-seen order of schemes for stable output.
  std::vector<std::string> schemes;
  std::vector<std::size_t> depths;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, Agg> stab;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, Agg> kappa;
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::size_t>, Agg> kappa_epoch;
  for (const auto& r : rows) {
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
    if (std::find(depths.begin(), depths.end(), r.depth) == depths.end()) depths.push_back(r.depth);
    if (r.status != "ok") continue;
    stab[{r.scheme, r.depth, r.width}].v.push_back(r.stability_mean);
    kappa[{r.scheme, r.depth, r.width}].v.push_back(r.kappa);
    for (const auto& e : r.epochs) kappa_epoch[{r.scheme, r.depth, r.width, e.epoch}].v.push_back(e.kappa);
  }
  std::sort(depths.begin(), depths.end());

  auto width_series = [&](const auto& table, const std::string& scheme, std::size_t depth, std::string name) {
    Series s{std::move(name), {}};
    for (const auto& [key, agg] : table)
      if (std::get<0>(key) == scheme && std::get<1>(key) == depth)
        s.points.push_back(agg.point(static_cast<double>(std::get<2>(key))));
    return s;
  };

  std::vector<Figure> figs;
  for (const auto& sc : schemes) {
    std::vector<Series> ss;
    for (auto d : depths) ss.push_back(width_series(stab, sc, d, "L=" + std::to_string(d)));
    ChartSpec spec{"Perturbation stability vs width (" + sc + ")", "width m", "stability", true, wants_log(ys_of(ss))};
    figs.push_back({"stability_width_depth_" + file_safe(sc) + ".svg", line_chart(spec, ss)});
  }
  for (auto d : depths) {
    std::vector<Series> ss;
    for (const auto& sc : schemes) ss.push_back(width_series(stab, sc, d, sc));
    ChartSpec spec{"Perturbation stability vs width, L=" + std::to_string(d), "width m", "stability", true,
                   wants_log(ys_of(ss))};
    figs.push_back({"stability_width_scheme_L" + std::to_string(d) + ".svg", line_chart(spec, ss)});
  }
  {
    std::vector<Series> ss;
    for (const auto& sc : schemes)
      for (auto d : depths) ss.push_back(width_series(kappa, sc, d, sc + " L=" + std::to_string(d)));
    ChartSpec spec{"Lazy training ratio vs width", "width m", "kappa", true, wants_log(ys_of(ss))};
    figs.push_back({"kappa_width.svg", line_chart(spec, ss)});
  }
  {
    std::map<std::tuple<std::string, std::size_t, std::size_t>, Series> by_run;
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> order;
    for (const auto& [key, agg] : kappa_epoch) {
      const auto run = std::make_tuple(std::get<0>(key), std::get<1>(key), std::get<2>(key));
      auto [it, fresh] = by_run.try_emplace(run);
      if (fresh) {
        it->second.name = std::get<0>(key) + " L=" + std::to_string(std::get<1>(key)) + " m=" +
                          std::to_string(std::get<2>(key));
        order.push_back(run);
      }
      if (std::get<3>(key) > 0) it->second.points.push_back(agg.point(static_cast<double>(std::get<3>(key))));
    }
    std::vector<Series> ss;
    for (const auto& run : order) ss.push_back(by_run[run]);
    ChartSpec spec{"Lazy training ratio vs epoch", "epoch", "kappa", false, wants_log(ys_of(ss))};
    figs.push_back({"kappa_epoch.svg", line_chart(spec, ss)});
  }
  return figs;
}

}  // namespace rlab
