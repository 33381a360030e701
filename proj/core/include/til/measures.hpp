#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "til/potentials.hpp"

namespace til {

// Uniform tensor grid of cell midpoints over a box, row-major flattening
// (axis 0 slowest).
struct Grid {
  Vec lo, hi;                   // box
  std::vector<int> shape;       // cells per axis
  std::vector<double> spacing;  // cell width per axis

  int dimension() const { return static_cast<int>(shape.size()); }
  std::size_t size() const;
  double cell_volume() const;
  double axis_coord(int axis, int i) const { return lo[axis] + (i + 0.5) * spacing[axis]; }
  void decode(std::size_t flat, int* idx) const;
  Vec point(std::size_t flat) const;
  bool same_as(const Grid& other, double tol = 1e-9) const;

  static Grid regular(const Box& box, int resolution);
};

struct GridMeasure {
  Grid grid;
  std::vector<double> weights;
  std::string source = "synthetic";  // potential name or "synthetic"

  double total_mass() const;
};

// Throws GridError / InputError when the type invariants fail
// (weights sum to 1 within 1e-12, nonnegative, shape consistent).
void validate(const GridMeasure& mu, bool require_positive = false);

struct GridFunction {
  std::vector<double> values;
  std::optional<std::vector<Vec>> gradient_values;  // central differences
};

// Central differences, one-sided at the boundary.
std::vector<Vec> fd_gradient(const Grid& grid, const std::vector<double>& values);

GridFunction make_grid_function(const Grid& grid,
                                const std::function<double(const Vec&)>& f,
                                bool with_gradient = false);

GridMeasure discretize(const PotentialSpec& spec, const Box& domain, int resolution);

// Sum nu_i log(nu_i / mu_i), 0 log 0 = 0; +inf when nu charges a cell of
// mu-weight zero.
double relative_entropy(const GridMeasure& nu, const GridMeasure& mu);

struct Moments {
  Vec mean;
  Mat covariance;
};
Moments moments(const GridMeasure& mu);

// v must be grid-aligned (integer multiple of spacing per axis).  Weights are
// shifted by the index offset; mass pushed outside the grid must be <= 1e-10.
GridMeasure translate(const GridMeasure& mu, const Vec& v);

// Weights mu_i (1 + eps g_i), renormalized; g must be mu-centered.
GridMeasure perturb(const GridMeasure& mu, const GridFunction& g, double eps);

struct RecenterResult {
  GridMeasure measure;
  Vec shift;     // applied grid-aligned shift
  Vec residual;  // remaining mean mismatch, <= spacing/2 per axis
};
RecenterResult recenter(const GridMeasure& nu, const GridMeasure& mu);

double variance_of(const GridMeasure& mu, const GridFunction& g);

double mean_of(const GridMeasure& mu, const GridFunction& g);

// Pushforward under x -> a x: same weights on the dilated grid.
GridMeasure dilate(const GridMeasure& mu, double a);

// Flat CSV layout: header rows (dimension, axes, source), then weights.
void save_csv(const GridMeasure& mu, const std::string& path);
GridMeasure load_csv(const std::string& path);

}  // namespace til
