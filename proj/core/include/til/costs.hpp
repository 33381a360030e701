#pragma once

#include <memory>

#include "til/measures.hpp"
#include "til/potentials.hpp"

namespace til {

// F(t) = t - log(1+t), the remainder profile applied to map derivatives and
// matrix spectra throughout.
double f_remainder(double t);
// F'(t) = t/(1+t)
double f_remainder_derivative(double t);
// N(t) = min(t^2, t) for t >= 0
double capped_quadratic(double t);

class CostSpec {
 public:
  enum class Kind { bregman, capped_quadratic, combined, quadratic, l1, euclidean_p };

  static CostSpec bregman(std::shared_ptr<const PotentialSpec> V);
  static CostSpec capped(double h);
  static CostSpec combined(std::shared_ptr<const PotentialSpec> V, double h, double c);
  static CostSpec quadratic(double lambda);
  static CostSpec l1();
  static CostSpec euclidean_p(double p);

  double operator()(const Vec& x, const Vec& y) const;

  Kind kind() const { return kind_; }
  double h() const { return h_; }
  double c() const { return c_; }
  const PotentialSpec* potential() const { return potential_.get(); }

 private:
  Kind kind_ = Kind::quadratic;
  std::shared_ptr<const PotentialSpec> potential_;
  double h_ = 1.0;
  double c_ = 0.0;
  double lambda_ = 1.0;
  double p_ = 1.0;
};

double bregman_cost(const PotentialSpec& spec, const Vec& x, const Vec& y);

struct CostMatrix {
  Mat values;  // rows: source points, cols: target points
  Grid source_grid, target_grid;
};

// Dense evaluation; entries capped at 4e7 (SizeError beyond).
CostMatrix cost_matrix(const CostSpec& cost, const GridMeasure& source,
                       const GridMeasure& target);

// Config form, e.g. {"cost":"combined","c":0.05,"h":"auto"}; "auto" resolves h
// to the supplied scale.
CostSpec cost_from_config(const nlohmann::json& j,
                          std::shared_ptr<const PotentialSpec> V, double h_auto);

// Q_c(g)(y_j) = min_i (g_i + c(x_i, y_j)), exhaustive over the grid.
GridFunction inf_convolution(const GridFunction& g, const CostSpec& cost,
                             const GridMeasure& grid);

}  // namespace til
