#include "til/measures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "til/errors.hpp"

namespace til {

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

void Grid::decode(std::size_t flat, int* idx) const {
  for (int a = dimension() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % shape[a]);
    flat /= shape[a];
  }
}

Vec Grid::point(std::size_t flat) const {
  const int d = dimension();
  Vec x(d);
  int idx[8];
  decode(flat, idx);
  for (int a = 0; a < d; ++a) x[a] = axis_coord(a, idx[a]);
  return x;
}

bool Grid::same_as(const Grid& other, double tol) const {
  if (shape != other.shape) return false;
  for (int a = 0; a < dimension(); ++a) {
    if (std::abs(lo[a] - other.lo[a]) > tol) return false;
    if (std::abs(hi[a] - other.hi[a]) > tol) return false;
  }
  return true;
}

Grid Grid::regular(const Box& box, int resolution) {
  if (resolution < 2) throw InputError("Grid: resolution must be >= 2");
  const int d = static_cast<int>(box.lo.size());
  if (d < 1 || d > 8) throw InputError("Grid: dimension out of range");
  Grid g;
  g.lo = box.lo;
  g.hi = box.hi;
  g.shape.assign(d, resolution);
  g.spacing.resize(d);
  for (int a = 0; a < d; ++a) {
    if (!(box.hi[a] > box.lo[a])) throw InputError("Grid: empty box");
    g.spacing[a] = (box.hi[a] - box.lo[a]) / resolution;
  }
  return g;
}

double GridMeasure::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void validate(const GridMeasure& mu, bool require_positive) {
  if (mu.weights.size() != mu.grid.size())
    throw GridError("GridMeasure: weight count does not match grid");
  double sum = 0.0;
  for (double w : mu.weights) {
    if (!(w >= 0.0)) throw InputError("GridMeasure: negative or NaN weight");
    if (require_positive && w == 0.0)
      throw InputError("GridMeasure: zero weight in measure from a potential");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InputError("GridMeasure: weights sum to " + std::to_string(sum));
}

std::vector<Vec> fd_gradient(const Grid& grid, const std::vector<double>& values) {
  const int d = grid.dimension();
  const std::size_t n = grid.size();
  if (values.size() != n) throw GridError("fd_gradient: size mismatch");
  std::vector<Vec> out(n, Vec::Zero(d));

  // stride of axis a in the row-major flattening
  std::vector<std::size_t> stride(d, 1);
  for (int a = d - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(grid.shape[a + 1]);

  int idx[8];
  for (std::size_t f = 0; f < n; ++f) {
    grid.decode(f, idx);
    for (int a = 0; a < d; ++a) {
      const double h = grid.spacing[a];
      const int i = idx[a];
      const int na = grid.shape[a];
      double g;
      if (na == 1) {
        g = 0.0;
      } else if (i == 0) {
        g = (values[f + stride[a]] - values[f]) / h;
      } else if (i == na - 1) {
        g = (values[f] - values[f - stride[a]]) / h;
      } else {
        g = (values[f + stride[a]] - values[f - stride[a]]) / (2.0 * h);
      }
      out[f][a] = g;
    }
  }
  return out;
}

GridFunction make_grid_function(const Grid& grid,
                                const std::function<double(const Vec&)>& f,
                                bool with_gradient) {
  GridFunction g;
  const std::size_t n = grid.size();
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = f(grid.point(i));
  if (with_gradient) g.gradient_values = fd_gradient(grid, g.values);
  return g;
}

GridMeasure discretize(const PotentialSpec& spec, const Box& domain, int resolution) {
  if (resolution < 2) throw InputError("discretize: resolution must be >= 2");
  integrability_probe(spec, domain, std::max(resolution, 64));

  GridMeasure mu;
  mu.grid = Grid::regular(domain, resolution);
  mu.source = spec.name;
  const std::size_t n = mu.grid.size();
  mu.weights.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(-spec.value_oracle(mu.grid.point(i)));
    mu.weights[i] = w;
    sum += w;
  }
  if (sum <= 0.0) throw OracleError("discretize: zero total mass");
  for (double& w : mu.weights) w /= sum;
  return mu;
}

double relative_entropy(const GridMeasure& nu, const GridMeasure& mu) {
  if (!nu.grid.same_as(mu.grid)) throw GridError("relative_entropy: grid mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < nu.weights.size(); ++i) {
    const double p = nu.weights[i], q = mu.weights[i];
    if (p == 0.0) continue;
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    h += p * std::log(p / q);
  }
  return h;
}

Moments moments(const GridMeasure& mu) {
  const int d = mu.grid.dimension();
  Moments m;
  m.mean = Vec::Zero(d);
  m.covariance = Mat::Zero(d, d);
  for (std::size_t i = 0; i < mu.weights.size(); ++i)
    m.mean += mu.weights[i] * mu.grid.point(i);
  for (std::size_t i = 0; i < mu.weights.size(); ++i) {
    const Vec c = mu.grid.point(i) - m.mean;
    m.covariance += mu.weights[i] * c * c.transpose();
  }
  return m;
}

GridMeasure translate(const GridMeasure& mu, const Vec& v) {
  const int d = mu.grid.dimension();
  if (v.size() != d) throw InputError("translate: dimension mismatch");

  std::vector<long> offset(d);
  for (int a = 0; a < d; ++a) {
    const double steps = v[a] / mu.grid.spacing[a];
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9)
      throw AlignmentError("translate: shift not grid-aligned on axis " +
                           std::to_string(a));
    offset[a] = static_cast<long>(rounded);
  }

  GridMeasure out;
  out.grid = mu.grid;
  out.source = mu.source;
  out.weights.assign(mu.weights.size(), 0.0);

  std::vector<std::size_t> stride(d, 1);
  for (int a = d - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(mu.grid.shape[a + 1]);

  double lost = 0.0;
  int idx[8];
  for (std::size_t f = 0; f < mu.weights.size(); ++f) {
    if (mu.weights[f] == 0.0) continue;
    mu.grid.decode(f, idx);
    bool inside = true;
    std::size_t g = 0;
    for (int a = 0; a < d; ++a) {
      const long j = idx[a] + offset[a];
      if (j < 0 || j >= mu.grid.shape[a]) {
        inside = false;
        break;
      }
      g += static_cast<std::size_t>(j) * stride[a];
    }
    if (inside)
      out.weights[g] = mu.weights[f];
    else
      lost += mu.weights[f];
  }
  if (lost > 1e-10)
    throw TruncationError("translate: mass " + std::to_string(lost) +
                          " pushed outside the grid");
  // Keep round trips bit-exact when nothing fell off; renormalize otherwise.
  if (lost > 0.0) {
    const double scale = 1.0 / (1.0 - lost);
    for (double& w : out.weights) w *= scale;
  }
  return out;
}

GridMeasure perturb(const GridMeasure& mu, const GridFunction& g, double eps) {
  if (g.values.size() != mu.weights.size()) throw GridError("perturb: size mismatch");
  double centering = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i)
    centering += mu.weights[i] * g.values[i];
  if (std::abs(centering) > 1e-10)
    throw PerturbationError("perturb: g not centered, integral g dmu = " +
                            std::to_string(centering));

  GridMeasure out;
  out.grid = mu.grid;
  out.source = mu.source;
  out.weights.resize(mu.weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i) {
    const double factor = 1.0 + eps * g.values[i];
    if (factor <= 0.0)
      throw PerturbationError("perturb: 1 + eps g <= 0 at a grid point");
    out.weights[i] = mu.weights[i] * factor;
    sum += out.weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw PerturbationError("perturb: renormalization factor off by " +
                            std::to_string(sum - 1.0));
  for (double& w : out.weights) w /= sum;
  return out;
}

RecenterResult recenter(const GridMeasure& nu, const GridMeasure& mu) {
  if (!nu.grid.same_as(mu.grid)) throw GridError("recenter: grid mismatch");
  const int d = nu.grid.dimension();
  const Vec target = moments(mu).mean;
  const Vec current = moments(nu).mean;
  Vec shift(d);
  for (int a = 0; a < d; ++a) {
    const double want = target[a] - current[a];
    shift[a] = std::round(want / nu.grid.spacing[a]) * nu.grid.spacing[a];
  }
  RecenterResult r{translate(nu, shift), shift, Vec(d)};
  const Vec new_mean = moments(r.measure).mean;
  for (int a = 0; a < d; ++a) r.residual[a] = new_mean[a] - target[a];
  return r;
}

double mean_of(const GridMeasure& mu, const GridFunction& g) {
  if (g.values.size() != mu.weights.size()) throw GridError("mean_of: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i)
    m += mu.weights[i] * g.values[i];
  return m;
}

double variance_of(const GridMeasure& mu, const GridFunction& g) {
  const double m = mean_of(mu, g);
  double v = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i) {
    const double c = g.values[i] - m;
    v += mu.weights[i] * c * c;
  }
  return v;
}

GridMeasure dilate(const GridMeasure& mu, double a) {
  if (a <= 0.0) throw InputError("dilate: scale must be positive");
  GridMeasure out = mu;
  out.grid.lo *= a;
  out.grid.hi *= a;
  for (double& s : out.grid.spacing) s *= a;
  return out;
}

void save_csv(const GridMeasure& mu, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("save_csv: cannot open " + path);
  os.precision(17);
  const int d = mu.grid.dimension();
  os << "dimension," << d << "\n";
  for (int a = 0; a < d; ++a)
    os << "axis," << mu.grid.lo[a] << "," << mu.grid.hi[a] << "," << mu.grid.shape[a]
       << "\n";
  os << "source," << mu.source << "\n";
  os << "weights\n";
  for (double w : mu.weights) os << w << "\n";
}

GridMeasure load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("load_csv: cannot open " + path);
  std::string line;
  auto next = [&]() {
    if (!std::getline(is, line)) throw InputError("load_csv: truncated file");
    return line;
  };
  std::string header = next();
  if (header.rfind("dimension,", 0) != 0) throw InputError("load_csv: bad header");
  const int d = std::stoi(header.substr(10));
  Box box;
  box.lo = Vec(d);
  box.hi = Vec(d);
  int resolution = 0;
  for (int a = 0; a < d; ++a) {
    std::string row = next();
    if (row.rfind("axis,", 0) != 0) throw InputError("load_csv: bad axis row");
    std::istringstream ss(row.substr(5));
    char comma;
    ss >> box.lo[a] >> comma >> box.hi[a] >> comma >> resolution;
  }
  std::string source_row = next();
  if (source_row.rfind("source,", 0) != 0) throw InputError("load_csv: bad source row");
  GridMeasure mu;
  mu.source = source_row.substr(7);
  if (next() != "weights") throw InputError("load_csv: missing weights header");
  mu.grid = Grid::regular(box, resolution);
  mu.weights.reserve(mu.grid.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    mu.weights.push_back(std::stod(line));
  }
  if (mu.weights.size() != mu.grid.size())
    throw InputError("load_csv: weight count mismatch");
  return mu;
}

}  // namespace til
