#include "til/potentials.hpp"

#include <cmath>
#include <sstream>

#include "til/errors.hpp"

namespace til {

namespace {

void require_finite(double v, const char* oracle, const Vec& x) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << oracle << " returned non-finite value at x = [";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "]";
    throw OracleError(os.str());
  }
}

}  // namespace

EvalResult evaluate(const PotentialSpec& spec, const Vec& x) {
  if (!x.allFinite()) throw InputError("evaluate: non-finite point");
  EvalResult r{spec.value_oracle(x), spec.gradient_oracle(x), spec.hessian_oracle(x)};
  require_finite(r.value, "value_oracle", x);
  for (int i = 0; i < r.gradient.size(); ++i)
    require_finite(r.gradient[i], "gradient_oracle", x);
  for (int i = 0; i < r.hessian.size(); ++i)
    require_finite(r.hessian.data()[i], "hessian_oracle", x);
  return r;
}

ConvexityReport convexity_probe(const PotentialSpec& spec,
                                const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (pairs.empty()) throw InputError("convexity_probe: empty pair list");
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (const auto& [x, y] : pairs) {
    const double d2 = (y - x).squaredNorm();
    if (d2 == 0.0) continue;  // degenerate pair, ratio undefined
    const Vec gx = spec.gradient_oracle(x);
    const Vec gy = spec.gradient_oracle(y);
    min_ratio = std::min(min_ratio, (gy - gx).dot(y - x) / d2);
    ++used;
  }
  return {min_ratio, min_ratio >= -1e-9, used};
}

Box make_box(int dimension, double lo, double hi) {
  Box b;
  b.lo = Vec::Constant(dimension, lo);
  b.hi = Vec::Constant(dimension, hi);
  return b;
}

IntegrabilityReport integrability_probe(const PotentialSpec& spec, const Box& domain,
                                        int resolution) {
  if (resolution < 64) throw InputError("integrability_probe: resolution must be >= 64");
  const int d = spec.dimension;
  if (domain.lo.size() != d || domain.hi.size() != d)
    throw InputError("integrability_probe: domain dimension mismatch");

  Vec spacing(d);
  double cell = 1.0;
  for (int a = 0; a < d; ++a) {
    if (!(domain.hi[a] > domain.lo[a]))
      throw InputError("integrability_probe: empty box");
    spacing[a] = (domain.hi[a] - domain.lo[a]) / resolution;
    cell *= spacing[a];
  }

  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(resolution);

  double mass = 0.0, second = 0.0, gradsq = 0.0, boundary_mass = 0.0;
  std::vector<int> idx(d, 0);
  Vec x(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    bool on_boundary = false;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % resolution);
      rem /= resolution;
      if (idx[a] == 0 || idx[a] == resolution - 1) on_boundary = true;
    }
    for (int a = 0; a < d; ++a) x[a] = domain.lo[a] + (idx[a] + 0.5) * spacing[a];
    const double w = std::exp(-spec.value_oracle(x)) * cell;
    mass += w;
    second += x.squaredNorm() * w;
    gradsq += spec.gradient_oracle(x).squaredNorm() * w;
    if (on_boundary) boundary_mass += w;
  }
  if (mass <= 0.0) throw OracleError("integrability_probe: zero mass on domain");

  IntegrabilityReport rep{mass, second, gradsq, boundary_mass / mass};
  if (rep.truncation_estimate > 1e-8) {
    std::ostringstream os;
    os << "integrability_probe: boundary-cell mass fraction " << rep.truncation_estimate
       << " exceeds 1e-8; enlarge the domain";
    throw TruncationWarning(os.str());
  }
  return rep;
}

PotentialSpec make_gaussian(int dimension, double sigma) {
  if (sigma <= 0.0) throw InputError("make_gaussian: sigma must be positive");
  PotentialSpec s;
  s.name = sigma == 1.0 ? "gaussian" : ("gaussian_sigma" + std::to_string(sigma));
  s.dimension = dimension;
  const double inv = 1.0 / (sigma * sigma);
  s.value_oracle = [inv](const Vec& x) { return 0.5 * inv * x.squaredNorm(); };
  s.gradient_oracle = [inv](const Vec& x) { return Vec(inv * x); };
  s.hessian_oracle = [inv, dimension](const Vec&) {
    return Mat(inv * Mat::Identity(dimension, dimension));
  };
  s.declared_convex = true;
  s.curvature_lower_bound = inv;
  return s;
}

PotentialSpec make_gaussian_full(const Mat& covariance) {
  const int d = static_cast<int>(covariance.rows());
  if (covariance.cols() != d) throw InputError("make_gaussian_full: non-square covariance");
  Eigen::SelfAdjointEigenSolver<Mat> es(covariance);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw InputError("make_gaussian_full: covariance not positive definite");
  const Mat precision = covariance.inverse();
  PotentialSpec s;
  s.name = "gaussian_full";
  s.dimension = d;
  s.value_oracle = [precision](const Vec& x) { return 0.5 * x.dot(precision * x); };
  s.gradient_oracle = [precision](const Vec& x) { return Vec(precision * x); };
  s.hessian_oracle = [precision](const Vec&) { return precision; };
  s.declared_convex = true;
  s.curvature_lower_bound = 1.0 / es.eigenvalues().maxCoeff();
  return s;
}

PotentialSpec make_quadratic_plus_quartic(int dimension, double a, double b) {
  if (a < 0.0 || b < 0.0)
    throw InputError("make_quadratic_plus_quartic: need a, b >= 0");
  PotentialSpec s;
  s.name = "quadratic_plus_quartic";
  s.dimension = dimension;
  s.value_oracle = [a, b](const Vec& x) {
    const double r2 = x.squaredNorm();
    return 0.5 * a * r2 + 0.25 * b * r2 * r2;
  };
  s.gradient_oracle = [a, b](const Vec& x) {
    return Vec((a + b * x.squaredNorm()) * x);
  };
  s.hessian_oracle = [a, b, dimension](const Vec& x) {
    const double r2 = x.squaredNorm();
    Mat h = (a + b * r2) * Mat::Identity(dimension, dimension);
    h += 2.0 * b * x * x.transpose();
    return h;
  };
  s.declared_convex = true;
  s.curvature_lower_bound = a;
  return s;
}

PotentialSpec make_even_power(int dimension, int p) {
  if (p < 2 || p % 2 != 0) throw InputError("make_even_power: p must be even, >= 2");
  PotentialSpec s;
  s.name = "even_power_" + std::to_string(p);
  s.dimension = dimension;
  const double pd = p;
  s.value_oracle = [pd](const Vec& x) { return std::pow(x.norm(), pd) / pd; };
  s.gradient_oracle = [pd](const Vec& x) {
    const double r = x.norm();
    if (r == 0.0) return Vec(Vec::Zero(x.size()));
    return Vec(std::pow(r, pd - 2.0) * x);
  };
  s.hessian_oracle = [pd, dimension](const Vec& x) {
    const double r = x.norm();
    if (r == 0.0) {
      // p = 2 gives the identity; higher even powers have vanishing Hessian at 0.
      if (pd == 2.0) return Mat(Mat::Identity(dimension, dimension));
      return Mat(Mat::Zero(dimension, dimension));
    }
    Mat h = std::pow(r, pd - 2.0) * Mat::Identity(dimension, dimension);
    h += (pd - 2.0) * std::pow(r, pd - 4.0) * x * x.transpose();
    return h;
  };
  s.declared_convex = true;
  s.curvature_lower_bound = (p == 2) ? std::optional<double>(1.0) : std::nullopt;
  return s;
}

PotentialSpec make_perturbed(const PotentialSpec& base, double amplitude,
                             double frequency) {
  PotentialSpec s;
  s.name = base.name + "_cos" + std::to_string(amplitude);
  s.dimension = base.dimension;
  const auto bv = base.value_oracle;
  const auto bg = base.gradient_oracle;
  const auto bh = base.hessian_oracle;
  const double a = amplitude, w = frequency;
  s.value_oracle = [bv, a, w](const Vec& x) {
    double p = 0.0;
    for (int i = 0; i < x.size(); ++i) p += std::cos(w * x[i]);
    return bv(x) + a * p;
  };
  s.gradient_oracle = [bg, a, w](const Vec& x) {
    Vec g = bg(x);
    for (int i = 0; i < x.size(); ++i) g[i] -= a * w * std::sin(w * x[i]);
    return g;
  };
  s.hessian_oracle = [bh, a, w](const Vec& x) {
    Mat h = bh(x);
    for (int i = 0; i < x.size(); ++i) h(i, i) -= a * w * w * std::cos(w * x[i]);
    return h;
  };
  const double drop = std::abs(a) * w * w;
  if (base.curvature_lower_bound && *base.curvature_lower_bound - drop >= 0.0) {
    s.declared_convex = base.declared_convex;
    s.curvature_lower_bound = *base.curvature_lower_bound - drop;
  } else {
    s.declared_convex = false;
  }
  return s;
}

PotentialSpec potential_from_config(const nlohmann::json& config) {
  if (!config.contains("family"))
    throw ConfigError("potential config: missing 'family'");
  const std::string family = config.at("family").get<std::string>();
  const int dim = config.value("dimension", 1);
  if (dim < 1) throw ConfigError("potential config: dimension must be >= 1");

  if (family == "gaussian") {
    return make_gaussian(dim, config.value("sigma", 1.0));
  }
  if (family == "quadratic_plus_quartic") {
    return make_quadratic_plus_quartic(dim, config.value("a", 1.0),
                                       config.value("b", 1.0));
  }
  if (family == "even_power") {
    return make_even_power(dim, config.value("p", 4));
  }
  if (family == "perturbed") {
    nlohmann::json base_cfg = config.value("base", nlohmann::json{{"family", "gaussian"}});
    base_cfg["dimension"] = dim;
    return make_perturbed(potential_from_config(base_cfg),
                          config.value("amplitude", 1.0),
                          config.value("frequency", 1.0));
  }
  throw ConfigError("potential config: unknown family '" + family + "'");
}

}  // namespace til
