#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lqioc/experiment.hpp"

namespace lqioc {

namespace {

std::string fmt(double x, int precision = 17) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

std::string fixed(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("bad integer '" + s + "'", line);
  }
  return v;
}

constexpr const char* kHeader = "kind,batch,M,rel_error,mean,std";

Json fit_json(const std::optional<LogLogFit>& fit) {
  if (!fit) return nullptr;
  return Json{{"slope", fit->slope}, {"intercept", fit->intercept}, {"r_squared", fit->r_squared}};
}

}  // namespace

void write_results_csv(std::ostream& os, const ConsistencyResult& result) {
  os << kHeader << '\n';
  for (const auto& c : result.cells) {
    os << "cell," << c.batch << ',' << c.m << ',' << (c.failed ? "nan" : fmt(c.rel_error)) << ",,\n";
  }
  for (const auto& s : result.summaries) {
    os << "summary,," << s.m << ",," << fmt(s.mean) << ',' << fmt(s.std) << '\n';
  }
}

ConsistencyResult read_results_csv(std::istream& is) {
  ConsistencyResult result;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line != kHeader) {
    throw ParseError(std::string("expected header '") + kHeader + "'", 1);
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw ParseError("expected 6 columns, got " + std::to_string(f.size()), lineno);
    if (f[0] == "cell") {
      ConsistencyCell c;
      c.batch = static_cast<int>(parse_int(f[1], lineno));
      c.m = parse_int(f[2], lineno);
      c.rel_error = parse_double(f[3], lineno);
      c.failed = std::isnan(c.rel_error);
      if (c.failed) ++result.failures;
      result.cells.push_back(c);
    } else if (f[0] == "summary") {
      ConsistencySummary s;
      s.m = parse_int(f[2], lineno);
      s.mean = parse_double(f[4], lineno);
      s.std = parse_double(f[5], lineno);
      result.summaries.push_back(s);
    } else {
      throw ParseError("unknown row kind '" + f[0] + "'", lineno);
    }
  }
  return result;
}

Json report_json(const ConsistencyResult& result) {
  Json j;
  j["slope_mean"] = result.fit_mean ? Json(result.fit_mean->slope) : Json(nullptr);
  j["slope_std"] = result.fit_std ? Json(result.fit_std->slope) : Json(nullptr);
  j["intercepts"] = {{"mean", result.fit_mean ? Json(result.fit_mean->intercept) : Json(nullptr)},
                     {"std", result.fit_std ? Json(result.fit_std->intercept) : Json(nullptr)}};
  j["r_squared"] = {{"mean", result.fit_mean ? Json(result.fit_mean->r_squared) : Json(nullptr)},
                    {"std", result.fit_std ? Json(result.fit_std->r_squared) : Json(nullptr)}};
  j["fit_mean"] = fit_json(result.fit_mean);
  j["fit_std"] = fit_json(result.fit_std);
  if (!result.fit_note.empty()) j["fit_note"] = result.fit_note;
  Json summary = Json::array();
  for (const auto& s : result.summaries) {
    summary.push_back({{"M", s.m},
                       {"mean", std::isnan(s.mean) ? Json(nullptr) : Json(s.mean)},
                       {"std", std::isnan(s.std) ? Json(nullptr) : Json(s.std)},
                       {"count", s.count}});
  }
  j["summary"] = std::move(summary);
  j["failures"] = result.failures;
  j["warnings"] = result.warnings;
  if (result.k_bar.size() > 0) j["K_bar"] = to_json(result.k_bar);
  j["config"] = result.config_echo;
  j["artifact_version"] = kArtifactVersion;
  return j;
}

void write_svg(std::ostream& os, const ConsistencyResult& result) {
  constexpr double width = 640.0;
  constexpr double height = 440.0;
  constexpr double left = 70.0;
  constexpr double right = 190.0;
  constexpr double top = 30.0;
  constexpr double bottom = 50.0;

  struct Series {
    std::vector<std::pair<double, double>> pts;  // (log10 M, log10 value)
    const char* colour;
    const char* label;
    const std::optional<LogLogFit>* fit;
  };
  Series mean{{}, "#1f77b4", "mean error", &result.fit_mean};
  Series sd{{}, "#d62728", "std of error", &result.fit_std};
  for (const auto& s : result.summaries) {
    const double lm = std::log10(static_cast<double>(s.m));
    if (s.mean > 0.0 && std::isfinite(s.mean)) mean.pts.emplace_back(lm, std::log10(s.mean));
    if (s.std > 0.0 && std::isfinite(s.std)) sd.pts.emplace_back(lm, std::log10(s.std));
  }

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Series* s : {&mean, &sd}) {
    for (const auto& [x, y] : s->pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x0 > x1) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = -1.0;
    y1 = 0.0;
  }
  x0 = std::floor(x0 - 0.1);
  x1 = std::ceil(x1 + 0.1);
  y0 = std::floor(y0 - 0.1);
  y1 = std::ceil(y1 + 0.1);

  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  os << "<g id=\"ticks\">\n";
  for (double d = x0; d <= x1 + 1e-9; d += 1.0) {
    os << "<line x1=\"" << fixed(px(d)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(px(d))
       << "\" y2=\"" << fixed(top + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(px(d)) << "\" y=\"" << fixed(top + ph + 18)
       << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (double d = y0; d <= y1 + 1e-9; d += 1.0) {
    os << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(d)) << "\" x2=\"" << fixed(left)
       << "\" y2=\"" << fixed(py(d)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(d) + 4)
       << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 10)
     << "\" text-anchor=\"middle\">M (trajectories)</text>\n";
  os << "<text x=\"15\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << fixed(top + ph / 2) << ")\">relative gain error</text>\n";

  int legend_row = 0;
  for (const Series* s : {&mean, &sd}) {
    os << "<g class=\"series\" stroke=\"" << s->colour << "\" fill=\"" << s->colour << "\">\n";
    for (const auto& [x, y] : s->pts) {
      os << "<circle class=\"marker\" cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"4\"/>\n";
    }
    const auto& fit = *s->fit;
    if (fit && s->pts.size() >= 2) {
      const double xa = s->pts.front().first;
      const double xb = s->pts.back().first;
      // Fit is in natural logs; the slope is the same in any base.
      const double ia = (fit->intercept + fit->slope * xa * std::log(10.0)) / std::log(10.0);
      const double ib = (fit->intercept + fit->slope * xb * std::log(10.0)) / std::log(10.0);
      os << "<line class=\"fit\" x1=\"" << fixed(px(xa)) << "\" y1=\"" << fixed(py(ia)) << "\" x2=\""
         << fixed(px(xb)) << "\" y2=\"" << fixed(py(ib)) << "\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
    }
    os << "</g>\n";
    const double ly = top + 10 + 20.0 * legend_row++;
    const double lx = left + pw + 15;
    os << "<circle cx=\"" << fixed(lx) << "\" cy=\"" << fixed(ly) << "\" r=\"4\" fill=\"" << s->colour
       << "\"/>\n";
    os << "<text class=\"legend\" x=\"" << fixed(lx + 10) << "\" y=\"" << fixed(ly + 4) << "\">" << s->label;
    if (fit) {
      os << ", slope " << fmt(fit->slope, 3);
    } else {
      os << ", no fit";
    }
    os << "</text>\n";
  }
  os << "</svg>\n";
}

void emit_results(const ConsistencyResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "results.csv");
    if (!os) throw Error("cannot open " + (dir / "results.csv").string() + " for writing");
    write_results_csv(os, result);
  }
  {
    std::ofstream os(dir / "consistency.svg");
    if (!os) throw Error("cannot open " + (dir / "consistency.svg").string() + " for writing");
    write_svg(os, result);
  }
  write_json(dir / "report.json", report_json(result));
}

}  // namespace lqioc
