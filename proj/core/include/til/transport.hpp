#pragma once

#include <optional>
#include <string>
#include <vector>

#include "til/costs.hpp"
#include "til/measures.hpp"
#include "til/network_simplex.hpp"
#include "til/potentials.hpp"

namespace til {

enum class SolverTag { exact_lp, entropic, monotone_1d };

const char* solver_tag_name(SolverTag tag);

// Transport plan between two grid measures, stored as sparse triplets over the
// source/target supports.
struct Coupling {
  std::vector<PlanEntry> plan;
  double cost_value = 0.0;
  SolverTag solver = SolverTag::exact_lp;
  double epsilon = 0.0;  // entropic regularization, 0 for exact
  std::optional<double> duality_gap;
  double marginal_violation = 0.0;  // max abs row/col mass error
  int source_size = 0, target_size = 0;
};

// Exact optimal transport via network simplex with a dual certificate.
// Supports (positive-mass points) are limited to 2000 per side.
Coupling solve_ot_exact(const GridMeasure& mu, const GridMeasure& nu, const CostMatrix& C);

// Matrix-scaling (Sinkhorn) solver in the log domain.  cost_value is the plain
// transport cost of the scaled plan, without the entropy term.
Coupling solve_ot_entropic(const GridMeasure& mu, const GridMeasure& nu, const CostMatrix& C,
                           double epsilon, int max_iter);

struct MonotoneMap1D {
  std::vector<double> map_values;              // T(x_i)
  std::vector<double> displacement;            // T(x_i) - x_i
  std::vector<double> map_derivative;          // T'(x_i), density ratio of matched cells
  std::vector<double> displacement_derivative; // T'(x_i) - 1; loses precision when T' ~ 0
  double pushforward_w1 = 0.0;                 // W1 distance from T#mu to nu
};

// 1D monotone rearrangement T = G^{-1} o F by piecewise-linear CDF inversion.
// Requires strictly positive weights on both measures.
MonotoneMap1D monotone_map_1d(const GridMeasure& mu, const GridMeasure& nu);

enum class Metric { w1, w2, l1 };

// W_1, W_2 (Euclidean) or the coordinatewise-l1 transport cost.  1D instances
// use the exact quantile coupling; higher dimensions go through the LP.
double wasserstein(const GridMeasure& mu, const GridMeasure& nu, Metric metric);

// Value of the monotone (quantile) coupling under an arbitrary cost, by exact
// integration over the merged quantile partition with Simpson sub-sampling.
// Optimal whenever the cost is submodular, e.g. Bregman costs of convex V.
double quantile_cost_1d(const GridMeasure& mu, const GridMeasure& nu, const CostSpec& cost);

struct DisplacementDecomposition {
  double transport_term = 0.0;   // sum of c_V(x, T(x)) weights
  double remainder_term = 0.0;   // sum of F(theta'') over interior cells
  double excluded_mass = 0.0;    // boundary-cell mass left out of the remainder
};

// Splits the relative entropy of nu against mu = e^{-V} into the Bregman
// transport term plus the F-remainder of the monotone displacement.
DisplacementDecomposition displacement_remainder_1d(const PotentialSpec& spec,
                                                    const GridMeasure& mu,
                                                    const GridMeasure& nu);

// Triplet CSV (i, j, mass) plus a JSON sidecar at path + ".json" recording the
// cost value, solver tag, gap and marginal violation.
void save_coupling_csv(const Coupling& coupling, const std::string& path);

}  // namespace til
