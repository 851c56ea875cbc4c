#ifndef PPOC_PLOT_HPP_
#define PPOC_PLOT_HPP_

#include <string>
#include <vector>

namespace ppoc {

struct CurveData {
  std::string label;
  std::vector<double> x;     // iteration
  std::vector<double> mean;  // return mean across seeds
  std::vector<double> std;   // return deviation across seeds
};

// Reads a cross-seed summary CSV (iteration,steps,return_mean,return_std).
// Malformed input raises an error naming the file and line.
CurveData read_summary_csv(const std::string& path);

// Renders one mean line plus a +/-1 deviation band per curve as a
// standalone SVG document (axes labeled iterations vs return, legend per
// curve).
std::string render_curves_svg(const std::vector<CurveData>& curves);

// Convenience: read every input summary and write the SVG to out_path.
void plot_curves(const std::vector<std::string>& summary_paths, const std::string& out_path);

}  // namespace ppoc

#endif  // PPOC_PLOT_HPP_
