#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "til/measures.hpp"
#include "til/potentials.hpp"

namespace til {

// One verified statement instance.  For inequality checks, margin >= 0 means
// the claimed inequality holds and pass is margin >= -tolerance.  Identity and
// invariance checks store the absolute drift as margin and pass when it is
// <= tolerance; details["comparison"] distinguishes the two conventions.
struct InequalityReport {
  std::string statement_id;
  std::string instance;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json inputs;  // potential, grid, seeds
  std::optional<double> empirical_constant;
  nlohmann::json details;
};

void to_json(nlohmann::json& j, const InequalityReport& r);

// H(nu||mu) >= Bregman transport cost of V.
InequalityReport check_transport_entropy(const PotentialSpec& spec, const GridMeasure& mu,
                                         const GridMeasure& nu);

// Entropy minus Bregman cost dominates a positive multiple of the capped
// quadratic transport cost at scale h; reports the largest admissible multiple.
InequalityReport check_remainder(const PotentialSpec& spec, const GridMeasure& mu,
                                 const GridMeasure& nu, const std::vector<double>& c_scan);

// 1D identity: H(nu||mu) equals Bregman term plus displacement remainder.
InequalityReport check_mainbound_identity_1d(const PotentialSpec& spec, const GridMeasure& mu,
                                             const GridMeasure& nu);

// The entropy-minus-cost deficit is unchanged when nu is translated.
InequalityReport check_translation_invariance(const PotentialSpec& spec, const GridMeasure& mu,
                                              const GridMeasure& nu,
                                              const std::vector<double>& v_list);

// Dual (infimal convolution) form: integral exp(Q g) <= exp(integral g).
InequalityReport check_dual_infconv(const PotentialSpec& spec, const GridMeasure& mu,
                                    const GridFunction& g);

// (lambda/2) W2^2 <= H under curvature lower bound lambda.
InequalityReport check_talagrand(const PotentialSpec& spec, const GridMeasure& mu,
                                 const GridMeasure& nu, double lambda);

// Quadratic-cost deficit dominates capped-quadratic remainders; records the
// coordinatewise-l1 variants for comparison.
InequalityReport check_gaussian_remainder(const PotentialSpec& spec, const GridMeasure& mu,
                                          const GridMeasure& nu, double lambda);

// Var(g) <= integral (D^2 V)^{-1} grad g . grad g.
InequalityReport check_bl_variance(const PotentialSpec& spec, const GridMeasure& mu,
                                   const GridFunction& g);

// Variance bound strengthened by c h^2 Id inside the inverse, after removing
// the coordinate-correlated component of g; reports the largest feasible c.
InequalityReport check_rbl(const PotentialSpec& spec, const GridMeasure& mu,
                           const GridFunction& g);

// Variance deficit against three explicit remainder functionals of the
// extremal-subtracted part g0.
InequalityReport check_qbl(const PotentialSpec& spec, const GridMeasure& mu,
                           const GridFunction& g);

// Small-perturbation rate: cost(mu, (1+eps g) mu)/eps^2 against the quadratic
// target and the entropy envelope.
InequalityReport check_linearization(const PotentialSpec& spec, const GridMeasure& mu,
                                     const GridFunction& g, const std::vector<double>& eps_list);

// L1 oscillation bound through the isoperimetric constant with the explicit
// factor 192.
InequalityReport check_bh(const GridMeasure& mu, const GridFunction& f);

struct AffineMap {
  Mat A;
  Vec b;
};

// Var and the weighted Dirichlet form are invariant under an affine change of
// variables applied to potential and test function together.  g must be given
// in closed form so it can be composed with the inverse map on the new grid.
InequalityReport check_affine_invariance(const PotentialSpec& spec, const GridMeasure& mu,
                                         const std::function<double(const Vec&)>& g,
                                         const AffineMap& map);

// Zero deficit exactly at grid-aligned translates when V is convex; nonzero
// everywhere when V is not.
InequalityReport check_equality_characterization(const PotentialSpec& spec, const GridMeasure& mu,
                                                 const std::vector<GridMeasure>& candidates);

// Runs fn(0..n-1) on a worker pool capped by thread_count(); results must be
// written to disjoint slots.
void parallel_for(long n, const std::function<void(long)>& fn);

}  // namespace til
