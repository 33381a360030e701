#pragma once

#include <string>

#include "json.hpp"
#include "til/measures.hpp"
#include "til/potentials.hpp"

namespace til {

// Isoperimetric constant of a 1D grid measure: minimum over interior cell
// edges of density / min(mass below, mass above).  Dimension >= 2 is out of
// scope and raises DimensionError.
double cheeger_constant(const GridMeasure& mu);

// Smallest nonzero eigenvalue of the weighted finite-difference Dirichlet form
// against the weighted L2 form, dimensions 1 and 2.  Inverse iteration with
// deflation of the constant mode; residual tolerance 1e-10.
double poincare_constant(const GridMeasure& mu);

// Integral of 1 / lambda_min(D^2 V) against mu.  The spectral-gap lower bound
// is proportional to the reciprocal; the proportionality constant is reported
// empirically by the harness, not asserted here.
double poincare_curvature_bound(const PotentialSpec& spec, const GridMeasure& mu);

// Margin of the L1 form of the isoperimetric inequality for a candidate h:
// integral |grad g| d mu  -  h * integral |g - mean(g)| d mu.
double l1_poincare_check(const GridMeasure& mu, const GridFunction& g, double h);

// Half-space value for centered Gaussians, used where the grid computation is
// out of scope (2D instances).
double cheeger_gaussian_halfspace(double sigma);

struct SpectralReport {
  double cheeger = std::numeric_limits<double>::quiet_NaN();
  double poincare = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // poincare / cheeger^2
  double lower_bound_integral = std::numeric_limits<double>::quiet_NaN();
  std::string cheeger_method = "none";
  std::string poincare_method = "none";
  std::string lower_bound_method = "none";
};

// Fills in whatever the dimension supports: 1D gets all constants, 2D the
// Poincare constant only.  spec may be null (no curvature integral then).
SpectralReport spectral_report(const PotentialSpec* spec, const GridMeasure& mu);

void to_json(nlohmann::json& j, const SpectralReport& r);

}  // namespace til
