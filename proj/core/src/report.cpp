#include "hydroprice/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "hydroprice/calendar_detrend.hpp"
#include "hydroprice/errors.hpp"
#include "hydroprice/format.hpp"

namespace hydroprice {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string svg_num(double v) { return format_fixed(v, 2); }

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::string tau_label(double tau) { return format_double(tau); }

RenderedTable render_table(std::span<const RegressionResult* const> results, const std::string& title) {
  RenderedTable t;
  t.csv = "model,coefficient,estimate,std_error,p_value\n";

  struct Row {
    std::string model, coef, est, se, p;
  };
  std::vector<Row> rows;
  for (const auto* r : results) {
    const auto model = r->spec.formula();
    for (std::size_t k = 0; k < r->estimates.size(); ++k) {
      const std::string coef = "b" + std::to_string(k);
      t.csv += "\"" + model + "\"," + coef + "," + format_double(r->estimates[k]) + "," +
               format_double(r->std_errors[k]) + "," + format_double(r->p_values[k]) + "\n";
      rows.push_back(Row{k == 0 ? model : std::string(), coef, format_fixed(r->estimates[k], 2),
                         format_fixed(r->std_errors[k], 2), format_fixed(r->p_values[k], 2)});
    }
  }

  const std::vector<std::string> header = {"Model", "Coefficients", "Estimate", "Std. Error", "P-value"};
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    width[0] = std::max(width[0], r.model.size());
    width[1] = std::max(width[1], r.coef.size());
    width[2] = std::max(width[2], r.est.size());
    width[3] = std::max(width[3], r.se.size());
    width[4] = std::max(width[4], r.p.size());
  }
  std::size_t total = 0;
  for (auto w : width) total += w;
  total += 2 * (width.size() - 1);
  const std::string rule(total, '-');

  std::ostringstream text;
  if (!title.empty()) text << title << '\n';
  text << rule << '\n';
  text << pad_right(header[0], width[0]) << "  " << pad_right(header[1], width[1]) << "  "
       << pad_left(header[2], width[2]) << "  " << pad_left(header[3], width[3]) << "  "
       << pad_left(header[4], width[4]) << '\n';
  text << rule << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && !r.model.empty()) text << rule << '\n';
    text << pad_right(r.model, width[0]) << "  " << pad_right(r.coef, width[1]) << "  "
         << pad_left(r.est, width[2]) << "  " << pad_left(r.se, width[3]) << "  "
         << pad_left(r.p, width[4]) << '\n';
  }
  text << rule << '\n';
  t.text = text.str();
  return t;
}

std::vector<QuantilePlotSeries> quantile_plot_series(const ResultsBundle& bundle, Response response,
                                                     const std::vector<Regressor>& regressors) {
  const auto* ols = bundle.find(response, regressors, std::nullopt);
  std::vector<const RegressionResult*> qr;
  for (const auto& f : bundle.quantile_fits) {
    if (f.ok() && f.task.spec.response == response && f.task.spec.regressors == regressors)
      qr.push_back(&*f.result);
  }
  std::sort(qr.begin(), qr.end(),
            [](const auto* a, const auto* b) { return a->method.tau < b->method.tau; });

  std::vector<QuantilePlotSeries> out;
  for (std::size_t k = 0; k < regressors.size(); ++k) {
    const std::size_t coef = k + 1;
    QuantilePlotSeries s;
    s.regressor = to_string(regressors[k]);
    for (const auto* r : qr) {
      const double est = r->estimates[coef];
      const double half = kCiMultiplier * r->std_errors[coef];
      s.taus.push_back(r->method.tau);
      s.estimates.push_back(est);
      s.lower.push_back(est - half);
      s.upper.push_back(est + half);
    }
    if (ols) {
      s.ols_estimate = ols->estimates[coef];
      s.ols_lower = s.ols_estimate - kCiMultiplier * ols->std_errors[coef];
      s.ols_upper = s.ols_estimate + kCiMultiplier * ols->std_errors[coef];
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_quantile_plot(std::span<const QuantilePlotSeries> series, const std::string& title) {
  for (const auto& s : series) {
    if (s.taus.size() < 2) throw ParameterError("quantile plot needs at least two quantile points");
    if (s.estimates.size() != s.taus.size() || s.lower.size() != s.taus.size() ||
        s.upper.size() != s.taus.size())
      throw ParameterError("quantile plot series has ragged columns");
    for (std::size_t i = 1; i < s.taus.size(); ++i)
      if (!(s.taus[i] > s.taus[i - 1])) throw ParameterError("quantile plot taus must be increasing");
  }

  constexpr double kPanelW = 320, kPanelH = 260, kLeft = 56, kRight = 14, kTop = 34, kBottom = 40;
  const double width = std::max(1.0, static_cast<double>(series.size())) * kPanelW;
  const double height = kPanelH + 30;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(width) << "\" height=\""
      << svg_num(height) << "\" viewBox=\"0 0 " << svg_num(width) << ' ' << svg_num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << svg_num(width) << "\" height=\"" << svg_num(height)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << svg_num(width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";

  for (std::size_t p = 0; p < series.size(); ++p) {
    const auto& s = series[p];
    const double x0 = static_cast<double>(p) * kPanelW + kLeft;
    const double x1 = static_cast<double>(p + 1) * kPanelW - kRight;
    const double y0 = 30 + kTop;
    const double y1 = 30 + kPanelH - kBottom;

    double lo = std::min({s.ols_lower, s.ols_estimate, s.ols_upper});
    double hi = std::max({s.ols_lower, s.ols_estimate, s.ols_upper});
    for (std::size_t i = 0; i < s.taus.size(); ++i) {
      lo = std::min({lo, s.lower[i], s.estimates[i]});
      hi = std::max({hi, s.upper[i], s.estimates[i]});
    }
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto px = [&](double tau) { return x0 + tau * (x1 - x0); };
    auto py = [&](double v) { return y1 - (v - lo) / (hi - lo) * (y1 - y0); };

    svg << "<g class=\"panel\" data-regressor=\"" << xml_escape(s.regressor) << "\">\n";
    svg << "<text x=\"" << svg_num((x0 + x1) / 2) << "\" y=\"" << svg_num(y0 - 10)
        << "\" text-anchor=\"middle\">" << xml_escape(s.regressor) << "</text>\n";

    // Quantile error band.
    svg << "<polygon class=\"qr-band\" fill=\"#bbbbbb\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.taus.size(); ++i)
      svg << (i ? " " : "") << svg_num(px(s.taus[i])) << ',' << svg_num(py(s.upper[i]));
    for (std::size_t i = s.taus.size(); i-- > 0;)
      svg << ' ' << svg_num(px(s.taus[i])) << ',' << svg_num(py(s.lower[i]));
    svg << "\"/>\n";

    // Least-squares estimate and its confidence band.
    svg << "<line class=\"ols\" x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(py(s.ols_estimate))
        << "\" x2=\"" << svg_num(x1) << "\" y2=\"" << svg_num(py(s.ols_estimate))
        << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
    for (double v : {s.ols_lower, s.ols_upper}) {
      svg << "<line class=\"ols-ci\" x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(py(v)) << "\" x2=\""
          << svg_num(x1) << "\" y2=\"" << svg_num(py(v))
          << "\" stroke=\"red\" stroke-dasharray=\"5,3\"/>\n";
    }

    svg << "<polyline class=\"qr\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.taus.size(); ++i)
      svg << (i ? " " : "") << svg_num(px(s.taus[i])) << ',' << svg_num(py(s.estimates[i]));
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.taus.size(); ++i) {
      svg << "<circle class=\"qr-point\" cx=\"" << svg_num(px(s.taus[i])) << "\" cy=\""
          << svg_num(py(s.estimates[i])) << "\" r=\"3\" fill=\"black\"/>\n";
    }

    // Axes.
    svg << "<line x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(y1) << "\" x2=\"" << svg_num(x1)
        << "\" y2=\"" << svg_num(y1) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(y0) << "\" x2=\"" << svg_num(x0)
        << "\" y2=\"" << svg_num(y1) << "\" stroke=\"black\"/>\n";
    for (double tau : s.taus) {
      svg << "<text x=\"" << svg_num(px(tau)) << "\" y=\"" << svg_num(y1 + 14)
          << "\" text-anchor=\"middle\">" << format_fixed(tau, 2) << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
      const double v = lo + (hi - lo) * k / 4.0;
      svg << "<text x=\"" << svg_num(x0 - 4) << "\" y=\"" << svg_num(py(v) + 4)
          << "\" text-anchor=\"end\">" << format_fixed(v, 2) << "</text>\n";
    }
    svg << "<text x=\"" << svg_num((x0 + x1) / 2) << "\" y=\"" << svg_num(y1 + 30)
        << "\" text-anchor=\"middle\">quantile</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_correlation_svg(const std::vector<std::string>& names, const Eigen::MatrixXd& r) {
  constexpr double kCell = 56, kLabel = 130;
  const auto k = static_cast<double>(names.size());
  const double size = kLabel + k * kCell + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(size) << "\" height=\""
      << svg_num(size) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << svg_num(size) << "\" height=\"" << svg_num(size)
      << "\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kLabel + static_cast<double>(i) * kCell;
    svg << "<text x=\"" << svg_num(kLabel - 6) << "\" y=\"" << svg_num(y + kCell / 2 + 3)
        << "\" text-anchor=\"end\">" << xml_escape(names[i]) << "</text>\n";
    svg << "<text x=\"" << svg_num(y + kCell / 2) << "\" y=\"" << svg_num(kLabel - 6)
        << "\" text-anchor=\"start\" transform=\"rotate(-45 " << svg_num(y + kCell / 2) << ' '
        << svg_num(kLabel - 6) << ")\">" << xml_escape(names[i]) << "</text>\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
      const double v = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double x = kLabel + static_cast<double>(j) * kCell;
      // Blue for negative, red for positive.
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
      char color[8];
      if (v >= 0)
        std::snprintf(color, sizeof color, "#ff%02x%02x", shade, shade);
      else
        std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
      svg << "<rect x=\"" << svg_num(x) << "\" y=\"" << svg_num(y) << "\" width=\"" << svg_num(kCell)
          << "\" height=\"" << svg_num(kCell) << "\" fill=\"" << color << "\" stroke=\"white\"/>\n";
      svg << "<text x=\"" << svg_num(x + kCell / 2) << "\" y=\"" << svg_num(y + kCell / 2 + 3)
          << "\" text-anchor=\"middle\">" << format_fixed(v, 2) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

ViolinExport export_violin_data(std::span<const Timestamp> timestamps, std::span<const double> values,
                                double trim) {
  if (!(trim > 0.9 && trim <= 1.0)) throw ParameterError("violin trim must lie in (0.9, 1]");
  if (timestamps.size() != values.size()) throw ParameterError("timestamps and values differ in length");

  std::array<std::vector<double>, 4> groups;
  for (std::size_t i = 0; i < values.size(); ++i)
    groups[static_cast<std::size_t>(season_of(timestamps[i]))].push_back(values[i]);

  ViolinExport out;
  out.data_csv = "season,value\n";
  out.summary_csv = "season,n,min,q25,median,q75,max\n";
  const double tail = (1.0 - trim) / 2.0;
  for (auto season : kAllSeasons) {
    const auto& g = groups[static_cast<std::size_t>(season)];
    const std::string name(to_string(season));
    if (g.empty()) {
      out.skipped_groups.push_back(name);
      continue;
    }
    const double lo = trim < 1.0 ? empirical_quantile(g, tail) : -std::numeric_limits<double>::infinity();
    const double hi = trim < 1.0 ? empirical_quantile(g, 1.0 - tail) : std::numeric_limits<double>::infinity();
    std::vector<double> kept;
    for (double v : g) {
      if (v < lo || v > hi) continue;
      kept.push_back(v);
      out.data_csv += name + "," + format_double(v) + "\n";
    }
    out.retained += kept.size();
    if (kept.empty()) {
      out.skipped_groups.push_back(name);
      continue;
    }
    out.summary_csv += name + "," + std::to_string(kept.size()) + "," +
                       format_double(empirical_quantile(kept, 0.0)) + "," +
                       format_double(empirical_quantile(kept, 0.25)) + "," +
                       format_double(empirical_quantile(kept, 0.5)) + "," +
                       format_double(empirical_quantile(kept, 0.75)) + "," +
                       format_double(empirical_quantile(kept, 1.0)) + "\n";
  }
  return out;
}

ViolinExport export_violin_data(const StudyFrame& frame, const std::string& column, double trim) {
  return export_violin_data(frame.timestamps, frame.column(column), trim);
}

std::string seasonal_penetration_csv(const StudyFrame& frame) {
  struct Acc {
    double hydro = 0, solar = 0, wind = 0;
    std::size_t n = 0;
  };
  std::array<Acc, 4> acc;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    auto& a = acc[static_cast<std::size_t>(season_of(frame.timestamps[i]))];
    a.hydro += frame.hydro_pct[i];
    a.solar += frame.solar_pct[i];
    a.wind += frame.wind_pct[i];
    ++a.n;
  }
  std::string csv = "season,n,hydro_pct,solar_pct,wind_pct\n";
  for (auto season : kAllSeasons) {
    const auto& a = acc[static_cast<std::size_t>(season)];
    if (a.n == 0) continue;
    const double n = static_cast<double>(a.n);
    csv += std::string(to_string(season)) + "," + std::to_string(a.n) + "," + format_double(a.hydro / n) +
           "," + format_double(a.solar / n) + "," + format_double(a.wind / n) + "\n";
  }
  return csv;
}

std::string render_stats_csv(const ResultsBundle& bundle) {
  std::string csv = "column,n,min,max,median,mean,std,degenerate\n";
  for (const auto& [name, s] : bundle.stats) {
    csv += name + "," + std::to_string(s.n) + "," + format_double(s.min) + "," + format_double(s.max) +
           "," + format_double(s.median) + "," + format_double(s.mean) + "," + format_double(s.std) +
           "," + (s.degenerate ? "true" : "false") + "\n";
  }
  return csv;
}

std::string render_correlation_csv(const ResultsBundle& bundle) {
  std::string csv = "column";
  for (const auto& n : bundle.correlation_names) csv += "," + n;
  csv += "\n";
  for (std::size_t i = 0; i < bundle.correlation_names.size(); ++i) {
    csv += bundle.correlation_names[i];
    for (std::size_t j = 0; j < bundle.correlation_names.size(); ++j)
      csv += "," + format_double(bundle.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    csv += "\n";
  }
  return csv;
}

void write_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());

  write_file(dir / "stats.csv", render_stats_csv(bundle));
  write_file(dir / "correlation.csv", render_correlation_csv(bundle));
  for (auto response : {Response::detrended_price, Response::detrended_volatility}) {
    const auto rs = bundle.results(response, std::nullopt);
    write_file(dir / ("mean_" + to_string(response) + ".csv"), render_table(rs).csv);
  }
  std::vector<double> taus;
  for (const auto& f : bundle.quantile_fits)
    if (f.task.tau && std::find(taus.begin(), taus.end(), *f.task.tau) == taus.end()) taus.push_back(*f.task.tau);
  for (double tau : taus) {
    for (auto response : {Response::detrended_price, Response::detrended_volatility}) {
      const auto rs = bundle.results(response, tau);
      write_file(dir / ("qr_" + to_string(response) + "_tau" + tau_label(tau) + ".csv"), render_table(rs).csv);
    }
  }
  write_file(dir / "provenance.json", bundle.provenance.dump(2) + "\n");
  write_file(dir / "bundle.json", bundle.to_json().dump(2) + "\n");
  write_file(dir / "detrend_model.json", bundle.detrend.to_json().dump(2) + "\n");
  write_file(dir / "ingest_report.json", bundle.ingest.to_json().dump(2) + "\n");
  std::ostringstream frame;
  write_study_frame_csv(frame, bundle.frame);
  write_file(dir / "study_frame.csv", frame.str());
}

void write_report(const ResultsBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::string tables;
  for (auto response : {Response::detrended_price, Response::detrended_volatility}) {
    const auto rs = bundle.results(response, std::nullopt);
    tables += render_table(rs, "Average effects: least squares, detrended " + to_string(response)).text + "\n";
  }
  std::vector<double> taus;
  for (const auto& f : bundle.quantile_fits)
    if (f.task.tau && std::find(taus.begin(), taus.end(), *f.task.tau) == taus.end()) taus.push_back(*f.task.tau);
  for (auto response : {Response::detrended_price, Response::detrended_volatility}) {
    for (double tau : taus) {
      const auto rs = bundle.results(response, tau);
      tables += render_table(rs, "Quantile effects: detrended " + to_string(response) + ", tau = " +
                                     tau_label(tau)).text + "\n";
    }
  }
  write_file(dir / "tables.txt", tables);

  const std::vector<Regressor> joint = {Regressor::hydro, Regressor::wind, Regressor::solar};
  for (auto response : {Response::detrended_price, Response::detrended_volatility}) {
    const auto series = quantile_plot_series(bundle, response, joint);
    if (!series.empty() && series.front().taus.size() >= 2) {
      write_file(dir / ("fig_qr_" + to_string(response) + ".svg"),
                 render_quantile_plot(series, "Quantile coefficients, hydro + wind + solar, detrended " +
                                                  to_string(response)));
    }
  }
  if (bundle.correlation.size() > 0)
    write_file(dir / "fig_correlation.svg", render_correlation_svg(bundle.correlation_names, bundle.correlation));

  if (bundle.frame.size() > 0) {
    // Price and hydro share as in the main violin figure; solar and wind
    // with the 99% trim of the appendix figures.
    const std::vector<std::pair<std::string, double>> violins = {
        {"detrended_price", 0.9999}, {"hydro_pct", 0.9999}, {"solar_pct", 0.99}, {"wind_pct", 0.99}};
    for (const auto& [column, trim] : violins) {
      const auto v = export_violin_data(bundle.frame, column, trim);
      write_file(dir / ("violin_" + column + ".csv"), v.data_csv);
      write_file(dir / ("violin_" + column + "_summary.csv"), v.summary_csv);
    }
    write_file(dir / "seasonal_penetration.csv", seasonal_penetration_csv(bundle.frame));
  }
}

ResultsBundle read_bundle(const std::filesystem::path& dir) {
  std::ifstream in(dir / "bundle.json");
  if (!in) throw DataError("cannot open " + (dir / "bundle.json").string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad bundle.json: " + std::string(e.what()));
  }
  auto bundle = ResultsBundle::from_json(j);
  std::ifstream frame(dir / "study_frame.csv");
  if (frame) bundle.frame = read_study_frame_csv(frame);
  return bundle;
}

}  // namespace hydroprice
