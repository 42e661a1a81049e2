#include "fbmlt/report.hpp"

#include "fbmlt/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace fbmlt {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 640, Hgt = 400, L = 70, R = 20, Tp = 40, B = 50;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double a) { return L + (a - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double b) { return Hgt - B - (b - y0) / (y1 - y0) * (Hgt - Tp - B); };
  auto label = [](double v, bool lg) { return fmt("%.4g", lg ? std::pow(10.0, v) : v); };

  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
        "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  os << "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Hgt - B << "\" x2=\"" << W - R << "\" y2=\"" << Hgt - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tp << "\" x2=\"" << L << "\" y2=\"" << Hgt - B
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << Hgt - B + 16 << "\" text-anchor=\"middle\">"
     << label(x0, spec.log_x) << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << Hgt - B + 16 << "\" text-anchor=\"middle\">"
     << label(x1, spec.log_x) << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << Hgt - B << "\" text-anchor=\"end\">"
     << label(y0, spec.log_y) << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << Tp + 4 << "\" text-anchor=\"end\">"
     << label(y1, spec.log_y) << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << Hgt - 12 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << (Tp + Hgt - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (Tp + Hgt - B) / 2 << ")\">" << escape(spec.y_label) << (spec.log_y ? " (log)" : "")
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colours[k % std::size(colours)];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      os << (first ? "" : " ") << fmt("%.2f", px(a)) << ',' << fmt("%.2f", py(b));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << Tp + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\""
       << c << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<PlotArtifact> make_plots(const ExperimentReport& report) {
  const auto& agg = report.aggregates;
  if (!agg.contains("series") || !agg.at("series").is_array())
    throw DomainError("report has no aggregate series to plot");
  const std::string kind = report.config.value("experiment", std::string("clt"));
  std::vector<PlotArtifact> out;

  auto g = [](double v) { return fmt("%.17g", v); };

  if (kind == "clt") {
    // group by (f, t)
    std::map<std::pair<std::string, double>, std::vector<const nlohmann::json*>> groups;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& row : agg.at("series")) {
      const auto key = std::make_pair(row.at("f").get<std::string>(), row.at("t").get<double>());
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(&row);
    }
    std::ostringstream csv;
    csv << "f,t,n,mean_Z,se_Z,slope,a_hat,char_distance\n";
    std::vector<Series> dser, sser, zser;
    for (const auto& key : order) {
      Series d{key.first + " t=" + fmt("%g", key.second), {}, {}};
      Series sl = d, z = d;
      for (const auto* r : groups[key]) {
        const double n = r->at("n").get<double>();
        csv << '"' << key.first << "\"," << g(key.second) << ',' << g(n) << ','
            << g(r->at("mean_Z").get<double>()) << ',' << g(r->at("se_Z").get<double>()) << ','
            << g(r->at("slope").get<double>()) << ',' << g(r->at("a_hat").get<double>()) << ','
            << g(r->at("char_distance").get<double>()) << '\n';
        d.x.push_back(n);
        d.y.push_back(r->at("char_distance").get<double>());
        sl.x.push_back(n);
        sl.y.push_back(r->at("slope").get<double>() / r->at("a_hat").get<double>());
        z.x.push_back(n);
        const double se = r->at("se_Z").get<double>();
        z.y.push_back(se > 0 ? r->at("mean_Z").get<double>() / se : 0.0);
      }
      dser.push_back(std::move(d));
      sser.push_back(std::move(sl));
      zser.push_back(std::move(z));
    }
    out.push_back({"clt_series.csv", csv.str()});
    out.push_back({"char_distance.svg",
                   render_svg({"characteristic-function distance", "n", "D(n)", true, false}, dser)});
    out.push_back({"slope_ratio.svg",
                   render_svg({"slope / limit constant", "n", "ratio", true, false}, sser)});
    out.push_back({"mean_z.svg", render_svg({"mean Z in standard errors", "n", "mean/SE", true, false}, zser)});
  } else if (kind == "derivative") {
    std::map<double, Series> by_t;
    std::vector<double> order;
    std::ostringstream csv;
    csv << "t,n,e_norm,first_order_l2\n";
    for (const auto& row : agg.at("series")) {
      const double t = row.at("t").get<double>(), n = row.at("n").get<double>();
      const double e = row.at("e_norm").get<double>();
      csv << g(t) << ',' << g(n) << ',' << g(e) << ',' << g(row.at("first_order_l2").get<double>())
          << '\n';
      if (!by_t.count(t)) {
        order.push_back(t);
        by_t[t].label = "t=" + fmt("%g", t);
      }
      by_t[t].x.push_back(n);
      by_t[t].y.push_back(e);
    }
    std::vector<Series> ser;
    for (double t : order) ser.push_back(by_t[t]);
    out.push_back({"derivative_series.csv", csv.str()});
    out.push_back({"error_norm.svg", render_svg({"L2 error norm", "n", "||e_n||", true, true}, ser)});
  } else {
    throw DomainError("report: unknown experiment kind '" + kind + "'");
  }
  return out;
}

}  // namespace fbmlt
