#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace til {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A potential V given by closed-form oracles for V, its gradient and Hessian.
// All measures in this library have densities proportional to exp(-V).
struct PotentialSpec {
  std::string name;
  int dimension = 1;
  std::function<double(const Vec&)> value_oracle;
  std::function<Vec(const Vec&)> gradient_oracle;
  std::function<Mat(const Vec&)> hessian_oracle;
  bool declared_convex = false;
  std::optional<double> curvature_lower_bound;  // D^2 V >= lambda * Id
};

struct EvalResult {
  double value;
  Vec gradient;
  Mat hessian;
};

EvalResult evaluate(const PotentialSpec& spec, const Vec& x);

struct ConvexityReport {
  double min_ratio;       // min over pairs of (grad V(y)-grad V(x)).(y-x)/|y-x|^2
  bool pass;              // min_ratio >= -1e-9
  std::size_t pairs_used; // degenerate x == y pairs are skipped
};

ConvexityReport convexity_probe(const PotentialSpec& spec,
                                const std::vector<std::pair<Vec, Vec>>& pairs);

struct Box {
  Vec lo;
  Vec hi;
};

Box make_box(int dimension, double lo, double hi);

struct IntegrabilityReport {
  double mass_integral;             // midpoint estimate of integral exp(-V)
  double second_moment_integral;    // integral |x|^2 exp(-V)
  double gradient_square_integral;  // integral |grad V|^2 exp(-V)
  double truncation_estimate;       // boundary-cell mass fraction
};

// Throws TruncationWarning when the boundary-cell mass fraction exceeds 1e-8,
// i.e. when the box visibly clips the measure.
IntegrabilityReport integrability_probe(const PotentialSpec& spec, const Box& domain,
                                        int resolution);

// Builtin families.
PotentialSpec make_gaussian(int dimension, double sigma = 1.0);
PotentialSpec make_gaussian_full(const Mat& covariance);
PotentialSpec make_quadratic_plus_quartic(int dimension, double a, double b);
PotentialSpec make_even_power(int dimension, int p);
// base + amplitude * sum_i cos(frequency * x_i); non-convex when
// amplitude * frequency^2 exceeds the base curvature.
PotentialSpec make_perturbed(const PotentialSpec& base, double amplitude,
                             double frequency);

// Config interface, e.g. {"family":"quadratic_plus_quartic","a":1.0,"b":1.0,
// "dimension":1}.  Accepts the families above.
PotentialSpec potential_from_config(const nlohmann::json& config);

}  // namespace til
