#pragma once

// Shared fixtures for the test suite.  Target measures are built from raw
// density formulas here, independently of the generators in the library, so
// that a bug in one side cannot hide in the other.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "til/measures.hpp"
#include "til/potentials.hpp"

namespace testutil {

inline double normal_pdf(double x, double m, double s) {
  const double z = (x - m) / s;
  return std::exp(-0.5 * z * z) / s;
}

inline til::GridMeasure density1d(const til::Grid& grid,
                                  const std::function<double(double)>& rho,
                                  const std::string& source = "synthetic") {
  til::GridMeasure mu;
  mu.grid = grid;
  mu.weights.resize(grid.size());
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    mu.weights[i] = rho(grid.axis_coord(0, static_cast<int>(i)));
    total += mu.weights[i];
  }
  for (double& w : mu.weights) w /= total;
  mu.source = source;
  return mu;
}

inline til::GridMeasure normal1d(const til::Grid& grid, double m, double s) {
  std::ostringstream os;
  os << "normal(" << m << "," << s << ")";
  return density1d(grid, [=](double x) { return normal_pdf(x, m, s); }, os.str());
}

inline til::GridMeasure product2d(const til::Grid& grid2,
                                  const std::function<double(double)>& ra,
                                  const std::function<double(double)>& rb,
                                  const std::string& source = "product") {
  til::GridMeasure mu;
  mu.grid = grid2;
  const int na = grid2.shape[0], nb = grid2.shape[1];
  mu.weights.resize(grid2.size());
  double total = 0.0;
  for (int i = 0; i < na; ++i) {
    const double wa = ra(grid2.axis_coord(0, i));
    for (int j = 0; j < nb; ++j) {
      const double w = wa * rb(grid2.axis_coord(1, j));
      mu.weights[static_cast<std::size_t>(i) * nb + j] = w;
      total += w;
    }
  }
  for (double& w : mu.weights) w /= total;
  mu.source = source;
  return mu;
}

inline til::Grid grid1d(double lo, double hi, int res) {
  return til::Grid::regular(til::make_box(1, lo, hi), res);
}

inline til::GridMeasure gaussian1d(int res, double lo = -8.0, double hi = 8.0) {
  return til::discretize(til::make_gaussian(1), til::make_box(1, lo, hi), res);
}

inline til::GridMeasure quartic1d(int res) {
  return til::discretize(til::make_quadratic_plus_quartic(1, 1.0, 1.0),
                         til::make_box(1, -4.0, 4.0), res);
}

#ifdef TIL_CLI_PATH
struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Runs the binary with the working directory set to `dir` so that relative
// output paths land in the scratch area.
inline CliResult run_cli(const std::string& args, const std::string& dir) {
  CliResult r;
  const std::string cmd = "cd '" + dir + "' && '" + TIL_CLI_PATH + "' " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  if (status == -1)
    r.code = -1;
  else
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -2;
  r.out = slurp(dir + "/cli_stdout.txt");
  r.err = slurp(dir + "/cli_stderr.txt");
  return r;
}
#endif

}  // namespace testutil
