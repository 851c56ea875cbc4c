#include "ppoc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppoc/common.hpp"
#include "ppoc/experiment.hpp"

namespace ppoc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& s, const std::string& file, int line) {
  try {
    size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return d;
  } catch (const std::exception&) {
    throw ContractViolation(file + ":" + std::to_string(line) + ": malformed value '" + s + "'");
  }
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Round axis limits to friendly tick positions.
std::vector<double> ticks_for(double lo, double hi, int target) {
  const double span = hi - lo;
  if (span <= 0) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    out.push_back(t);
  return out;
}

}  // namespace

CurveData read_summary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open summary: " + path);
  CurveData c;
  c.label = std::filesystem::path(path).parent_path().filename().string();
  if (c.label.empty()) c.label = std::filesystem::path(path).stem().string();
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line.rfind("iteration,", 0) != 0)
        throw ContractViolation(path + ":" + std::to_string(lineno) +
                                ": expected header 'iteration,steps,return_mean,return_std'");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4)
      throw ContractViolation(path + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                              std::to_string(f.size()));
    c.x.push_back(parse_field(f[0], path, lineno));
    c.mean.push_back(parse_field(f[2], path, lineno));
    c.std.push_back(parse_field(f[3], path, lineno));
  }
  if (c.x.empty()) throw ContractViolation(path + ": no data rows");
  return c;
}

std::string render_curves_svg(const std::vector<CurveData>& curves) {
  if (curves.empty()) throw ContractViolation("render_curves_svg: need at least one curve");
  const double width = 860, height = 520;
  const double ml = 72, mr = 190, mt = 28, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = curves[0].x.front(), x_hi = curves[0].x.back();
  double y_lo = 1e300, y_hi = -1e300;
  for (const CurveData& c : curves) {
    x_lo = std::min(x_lo, c.x.front());
    x_hi = std::max(x_hi, c.x.back());
    for (size_t i = 0; i < c.mean.size(); ++i) {
      y_lo = std::min(y_lo, c.mean[i] - c.std[i]);
      y_hi = std::max(y_hi, c.mean[i] + c.std[i]);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) {
    y_hi = y_lo + 1;
    y_lo -= 1;
  }
  const double y_pad = 0.04 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // grid and ticks
  for (double t : ticks_for(y_lo, y_hi, 6)) {
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(sy(t)) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(sy(t) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">" << fmt(t) << "</text>\n";
  }
  for (double t : ticks_for(x_lo, x_hi, 8)) {
    svg << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(sx(t))
        << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(mt + ph + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">" << fmt(t) << "</text>\n";
  }
  svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 14)
      << "\" font-size=\"14\" text-anchor=\"middle\">iteration</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt(mt + ph / 2)
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << fmt(mt + ph / 2)
      << ")\">mean return</text>\n";

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const CurveData& c = curves[ci];
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
    // +/- one deviation band
    std::ostringstream band;
    for (size_t i = 0; i < c.x.size(); ++i)
      band << fmt(sx(c.x[i])) << "," << fmt(sy(c.mean[i] + c.std[i])) << " ";
    for (size_t i = c.x.size(); i-- > 0;)
      band << fmt(sx(c.x[i])) << "," << fmt(sy(c.mean[i] - c.std[i])) << " ";
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    std::ostringstream linepts;
    for (size_t i = 0; i < c.x.size(); ++i)
      linepts << fmt(sx(c.x[i])) << "," << fmt(sy(c.mean[i])) << " ";
    svg << "<polyline points=\"" << linepts.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    // legend entry
    const double ly = mt + 14 + 20 * static_cast<double>(ci);
    svg << "<line x1=\"" << fmt(ml + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(ml + pw + 36) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(ml + pw + 42) << "\" y=\"" << fmt(ly + 4)
        << "\" font-size=\"12\" class=\"legend\">" << c.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void plot_curves(const std::vector<std::string>& summary_paths, const std::string& out_path) {
  if (summary_paths.empty()) throw ContractViolation("plot_curves: need at least one summary");
  std::vector<CurveData> curves;
  curves.reserve(summary_paths.size());
  for (const std::string& p : summary_paths) curves.push_back(read_summary_csv(p));
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw ContractViolation("cannot write " + out_path);
  os << render_curves_svg(curves);
}

}  // namespace ppoc
