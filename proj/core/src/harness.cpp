#include "til/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "til/config.hpp"
#include "til/costs.hpp"
#include "til/errors.hpp"
#include "til/spectral.hpp"
#include "til/transport.hpp"

namespace til {

namespace {

nlohmann::json measure_info(const GridMeasure& m) {
  nlohmann::json j;
  j["source"] = m.source;
  j["dimension"] = m.grid.dimension();
  j["shape"] = m.grid.shape;
  j["lo"] = std::vector<double>(m.grid.lo.data(), m.grid.lo.data() + m.grid.lo.size());
  j["hi"] = std::vector<double>(m.grid.hi.data(), m.grid.hi.data() + m.grid.hi.size());
  return j;
}

nlohmann::json spec_info(const PotentialSpec& s) {
  nlohmann::json j;
  j["potential"] = s.name;
  j["dimension"] = s.dimension;
  j["declared_convex"] = s.declared_convex;
  if (s.curvature_lower_bound) j["curvature_lower_bound"] = *s.curvature_lower_bound;
  return j;
}

nlohmann::json base_inputs(const PotentialSpec& spec, const GridMeasure& mu) {
  nlohmann::json j = spec_info(spec);
  j["mu"] = measure_info(mu);
  return j;
}

std::shared_ptr<const PotentialSpec> shared_spec(const PotentialSpec& spec) {
  return std::make_shared<const PotentialSpec>(spec);
}

bool same_measure(const GridMeasure& a, const GridMeasure& b, double tol = 1e-12) {
  if (!a.grid.same_as(b.grid)) return false;
  for (size_t i = 0; i < a.weights.size(); ++i)
    if (std::abs(a.weights[i] - b.weights[i]) > tol) return false;
  return true;
}

std::vector<Vec> gradient_of(const GridMeasure& mu, const GridFunction& g) {
  if (g.values.size() != mu.grid.size())
    throw GridError("harness: function does not match the measure grid");
  if (g.gradient_values) return *g.gradient_values;
  return fd_gradient(mu.grid, g.values);
}

// integral of (D^2 V + shift Id)^{-1} grad g . grad g  d mu
double weighted_dirichlet(const PotentialSpec& spec, const GridMeasure& mu,
                          const std::vector<Vec>& grad, double shift,
                          double singular_floor = 1e-10) {
  const size_t n = mu.grid.size();
  const int d = mu.grid.dimension();
  const double total = mu.total_mass();
  double acc = 0.0;
  std::vector<int> idx(d);
  Vec x(d);
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (int a = 0; a < d; ++a) x[a] = mu.grid.axis_coord(a, idx[a]);
    Mat H = spec.hessian_oracle(x);
    if (d == 1) {
      double hv = H(0, 0) + shift;
      if (hv <= singular_floor)
        throw SingularHessianError("harness: Hessian not positive definite on the grid");
      acc += grad[i][0] * grad[i][0] / hv * mu.weights[i];
    } else {
      Mat Hs = H + shift * Mat::Identity(d, d);
      Eigen::LDLT<Mat> ldlt(Hs);
      Eigen::SelfAdjointEigenSolver<Mat> es(Hs, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= singular_floor)
        throw SingularHessianError("harness: Hessian not positive definite on the grid");
      acc += grad[i].dot(ldlt.solve(grad[i])) * mu.weights[i];
    }
  }
  return acc / total;
}

// isoperimetric scale used by remainder costs: exact profile in 1D, Gaussian
// half-space value when the potential is a declared Gaussian, conservative
// spectral bracket otherwise
double remainder_scale_h(const PotentialSpec& spec, const GridMeasure& mu, nlohmann::json& note) {
  if (mu.grid.dimension() == 1) {
    note["h_method"] = "isoperimetric_profile";
    return cheeger_constant(mu);
  }
  if (spec.name.rfind("gaussian", 0) == 0 && spec.curvature_lower_bound &&
      *spec.curvature_lower_bound > 0.0) {
    note["h_method"] = "gaussian_halfspace";
    return cheeger_gaussian_halfspace(1.0 / std::sqrt(*spec.curvature_lower_bound));
  }
  note["h_method"] = "spectral_bracket_low";
  return std::sqrt(poincare_constant(mu) / 10.0);
}

double entropy_of(const GridMeasure& nu, const GridMeasure& mu) {
  double H = relative_entropy(nu, mu);
  if (!std::isfinite(H)) throw InputError("harness: relative entropy is not finite");
  return H;
}

double bregman_lp_value(const PotentialSpec& spec, const GridMeasure& mu, const GridMeasure& nu) {
  CostSpec cost = CostSpec::bregman(shared_spec(spec));
  CostMatrix C = cost_matrix(cost, mu, nu);
  return solve_ot_exact(mu, nu, C).cost_value;
}

double lp_value(const CostSpec& cost, const GridMeasure& mu, const GridMeasure& nu) {
  CostMatrix C = cost_matrix(cost, mu, nu);
  return solve_ot_exact(mu, nu, C).cost_value;
}

}  // namespace

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j["statement_id"] = r.statement_id;
  j["instance"] = r.instance;
  auto put = [&](const char* key, double v) {
    if (std::isfinite(v))
      j[key] = v;
    else
      j[key] = v > 0 ? "+inf" : "-inf";
  };
  put("lhs", r.lhs);
  put("rhs", r.rhs);
  put("margin", r.margin);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["inputs"] = r.inputs;
  if (r.empirical_constant)
    j["empirical_constant"] = *r.empirical_constant;
  else
    j["empirical_constant"] = nullptr;
  j["details"] = r.details;
}

InequalityReport check_transport_entropy(const PotentialSpec& spec, const GridMeasure& mu,
                                         const GridMeasure& nu) {
  InequalityReport r;
  r.statement_id = "prop1";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.lhs = bregman_lp_value(spec, mu, nu);
  r.rhs = entropy_of(nu, mu);
  r.margin = r.rhs - r.lhs;
  r.tolerance = 1e-6;
  r.pass = r.margin >= -r.tolerance;
  r.details["comparison"] = "inequality";
  return r;
}

InequalityReport check_remainder(const PotentialSpec& spec, const GridMeasure& mu,
                                 const GridMeasure& nu, const std::vector<double>& c_scan) {
  InequalityReport r;
  r.statement_id = "thm2";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.details["comparison"] = "inequality";

  RecenterResult rc = recenter(nu, mu);
  const GridMeasure& nuc = rc.measure;
  r.details["recenter_shift"] =
      std::vector<double>(rc.shift.data(), rc.shift.data() + rc.shift.size());
  r.details["recenter_residual"] =
      std::vector<double>(rc.residual.data(), rc.residual.data() + rc.residual.size());

  const double H = entropy_of(nuc, mu);
  r.rhs = H;
  if (same_measure(nuc, mu) || H <= 1e-10) {
    r.lhs = 0.0;
    r.margin = 0.0;
    r.tolerance = 0.0;
    r.pass = true;
    r.details["vacuous"] = true;
    return r;
  }

  const double w_v = bregman_lp_value(spec, mu, nuc);
  const double h = remainder_scale_h(spec, mu, r.details);
  const double w_n = lp_value(CostSpec::capped(h), mu, nuc);
  r.lhs = w_v;
  r.details["h"] = h;
  r.details["bregman_value"] = w_v;
  r.details["capped_value"] = w_n;
  if (w_n <= 1e-14)
    throw DegenerateRemainderError("check_remainder: capped transport cost vanished");

  const double deficit = H - w_v;
  r.empirical_constant = deficit / w_n;
  r.margin = deficit;
  r.tolerance = 1e-6;
  r.pass = *r.empirical_constant > 0.0;

  const double w1 = wasserstein(mu, nuc, Metric::w1);
  r.details["w1"] = w1;
  r.details["weak_form_remainder"] = std::min(h * h * w1 * w1, h * w1);

  auto spec_ptr = shared_spec(spec);
  nlohmann::json scan = nlohmann::json::array();
  double prev = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (double c : c_scan) {
    double v = lp_value(CostSpec::combined(spec_ptr, h, c), mu, nuc);
    if (v < prev - 1e-9) monotone = false;
    prev = v;
    scan.push_back({{"c", c}, {"value", v}, {"holds", v <= H + 1e-9}});
  }
  r.details["c_scan"] = scan;
  r.details["c_scan_monotone"] = monotone;
  return r;
}

InequalityReport check_mainbound_identity_1d(const PotentialSpec& spec, const GridMeasure& mu,
                                             const GridMeasure& nu) {
  if (mu.grid.dimension() != 1)
    throw DimensionError("check_mainbound_identity_1d: one-dimensional only");
  InequalityReport r;
  r.statement_id = "mainbound";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.lhs = entropy_of(nu, mu);
  DisplacementDecomposition d = displacement_remainder_1d(spec, mu, nu);
  r.rhs = d.transport_term + d.remainder_term;
  r.details["transport_term"] = d.transport_term;
  r.details["remainder_term"] = d.remainder_term;
  r.details["excluded_mass"] = d.excluded_mass;
  r.details["comparison"] = "identity";
  r.margin = std::abs(r.lhs - r.rhs);
  r.tolerance = 1e-3;
  r.pass = r.margin <= r.tolerance;
  if (d.remainder_term < 0.0) r.pass = false;
  return r;
}

InequalityReport check_translation_invariance(const PotentialSpec& spec, const GridMeasure& mu,
                                              const GridMeasure& nu,
                                              const std::vector<double>& v_list) {
  InequalityReport r;
  r.statement_id = "translation";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.details["comparison"] = "identity";

  auto deficit_of = [&](const GridMeasure& target) {
    return entropy_of(target, mu) - bregman_lp_value(spec, mu, target);
  };
  const double base = deficit_of(nu);
  r.lhs = base;
  double drift = 0.0;
  nlohmann::json sweep = nlohmann::json::array();
  const int d = mu.grid.dimension();
  for (double v : v_list) {
    Vec shift = Vec::Zero(d);
    shift[0] = v;
    GridMeasure moved = translate(nu, shift);
    double def = deficit_of(moved);
    drift = std::max(drift, std::abs(def - base));
    sweep.push_back({{"v", v}, {"deficit", def}});
  }
  r.details["sweep"] = sweep;
  r.rhs = base;
  r.margin = drift;
  r.tolerance = 2e-3;
  r.pass = drift <= r.tolerance;
  return r;
}

InequalityReport check_dual_infconv(const PotentialSpec& spec, const GridMeasure& mu,
                                    const GridFunction& g) {
  InequalityReport r;
  r.statement_id = "ic";
  r.instance = spec.name + " dual form";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "inequality";

  CostSpec cost = CostSpec::bregman(shared_spec(spec));
  const double total = mu.total_mass();

  auto attempt = [&](const GridFunction& gg) -> std::pair<double, double> {
    GridFunction q = inf_convolution(gg, cost, mu);
    double lhs = 0.0, gint = 0.0;
    for (size_t i = 0; i < mu.weights.size(); ++i) {
      lhs += std::exp(q.values[i]) * mu.weights[i];
      gint += gg.values[i] * mu.weights[i];
    }
    return {lhs, std::exp(gint / total)};
  };

  auto [lhs, rhs] = attempt(g);
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
    double gmax = 0.0;
    for (double v : g.values) gmax = std::max(gmax, std::abs(v));
    if (gmax <= 0.0) throw NumericalError("check_dual_infconv: overflow with trivial input");
    GridFunction scaled;
    scaled.values = g.values;
    for (double& v : scaled.values) v *= 100.0 / gmax;
    std::tie(lhs, rhs) = attempt(scaled);
    r.details["rescaled"] = true;
    if (!std::isfinite(lhs) || !std::isfinite(rhs))
      throw NumericalError("check_dual_infconv: overflow persists after rescaling");
  }
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance = 1e-6;
  r.pass = r.margin >= -r.tolerance;
  return r;
}

InequalityReport check_talagrand(const PotentialSpec& spec, const GridMeasure& mu,
                                 const GridMeasure& nu, double lambda) {
  if (!spec.curvature_lower_bound || *spec.curvature_lower_bound < lambda - 1e-12)
    throw InputError("check_talagrand: potential does not declare curvature >= lambda");
  InequalityReport r;
  r.statement_id = "talagrand";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.inputs["lambda"] = lambda;
  r.details["comparison"] = "inequality";

  const double w2 = wasserstein(mu, nu, Metric::w2);
  r.lhs = 0.5 * lambda * w2 * w2;
  r.rhs = entropy_of(nu, mu);
  r.details["w2"] = w2;
  r.margin = r.rhs - r.lhs;
  r.tolerance = 2e-3;
  r.pass = r.margin >= -r.tolerance;
  return r;
}

InequalityReport check_gaussian_remainder(const PotentialSpec& spec, const GridMeasure& mu,
                                          const GridMeasure& nu, double lambda) {
  if (!spec.curvature_lower_bound || *spec.curvature_lower_bound < lambda - 1e-12)
    throw InputError("check_gaussian_remainder: potential does not declare curvature >= lambda");
  InequalityReport r;
  r.statement_id = "qT";
  r.instance = spec.name + " vs " + nu.source;
  r.inputs = base_inputs(spec, mu);
  r.inputs["nu"] = measure_info(nu);
  r.inputs["lambda"] = lambda;
  r.details["comparison"] = "inequality";

  RecenterResult rc = recenter(nu, mu);
  const GridMeasure& nuc = rc.measure;
  const double H = entropy_of(nuc, mu);
  if (same_measure(nuc, mu) || H <= 1e-10) {
    r.pass = true;
    r.details["vacuous"] = true;
    return r;
  }

  const double w2 = wasserstein(mu, nuc, Metric::w2);
  const double deficit = H - 0.5 * lambda * w2 * w2;
  r.lhs = 0.5 * lambda * w2 * w2;
  r.rhs = H;
  r.margin = deficit;
  r.tolerance = 1e-6;

  const double h = remainder_scale_h(spec, mu, r.details);
  const double w_n = lp_value(CostSpec::capped(h), mu, nuc);
  if (w_n <= 1e-14)
    throw DegenerateRemainderError("check_gaussian_remainder: capped transport cost vanished");
  const double w1 = wasserstein(mu, nuc, Metric::w1);
  const double w11 = wasserstein(mu, nuc, Metric::l1);
  const double n = mu.grid.dimension();
  const double min_form = std::min(h * h * w1 * w1, h * w1);
  const double fil_form = std::min(w11 * w11 / n, w11 / std::sqrt(n));

  r.empirical_constant = deficit / w_n;
  r.details["h"] = h;
  r.details["capped_value"] = w_n;
  r.details["w1"] = w1;
  r.details["w11"] = w11;
  r.details["min_form"] = min_form;
  r.details["min_form_constant"] = min_form > 0 ? deficit / min_form : 0.0;
  r.details["fil_remainder"] = fil_form;
  r.details["w1_vs_w11_over_sqrt_n"] = w1 - w11 / std::sqrt(n);
  r.pass = deficit >= -r.tolerance && *r.empirical_constant > 0.0;
  return r;
}

InequalityReport check_bl_variance(const PotentialSpec& spec, const GridMeasure& mu,
                                   const GridFunction& g) {
  InequalityReport r;
  r.statement_id = "bl";
  r.instance = spec.name + " variance bound";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "inequality";

  std::vector<Vec> grad = gradient_of(mu, g);
  r.lhs = variance_of(mu, g);
  r.rhs = weighted_dirichlet(spec, mu, grad, 0.0);
  r.margin = r.rhs - r.lhs;
  r.tolerance = 1e-3 * (1.0 + std::abs(r.rhs));
  r.pass = r.margin >= -r.tolerance;
  return r;
}

InequalityReport check_rbl(const PotentialSpec& spec, const GridMeasure& mu,
                           const GridFunction& g) {
  InequalityReport r;
  r.statement_id = "rbl";
  r.instance = spec.name + " reinforced variance bound";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "inequality";

  const size_t n = mu.grid.size();
  const int d = mu.grid.dimension();
  const double total = mu.total_mass();

  // project out the coordinate-correlated component so that the centering
  // hypothesis integral x (g - mean g) d mu = 0 holds
  Moments mom = moments(mu);
  Vec cov = Vec::Zero(d);
  double gmean = mean_of(mu, g);
  std::vector<int> idx(d);
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (int a = 0; a < d; ++a)
      cov[a] += (mu.grid.axis_coord(a, idx[a]) - mom.mean[a]) * (g.values[i] - gmean) *
                mu.weights[i];
  }
  cov /= total;
  Vec beta = mom.covariance.ldlt().solve(cov);
  GridFunction proj;
  proj.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    double lin = 0.0;
    for (int a = 0; a < d; ++a) lin += beta[a] * mu.grid.axis_coord(a, idx[a]);
    proj.values[i] = g.values[i] - lin;
  }
  r.details["projection_coefficient"] =
      std::vector<double>(beta.data(), beta.data() + beta.size());

  const double var = variance_of(mu, proj);
  const double var_g = variance_of(mu, g);
  r.lhs = var;
  if (var <= 1e-12 * (1.0 + var_g)) {
    r.pass = true;
    r.details["degenerate_input"] = true;
    r.tolerance = 0.0;
    return r;
  }

  const double h = remainder_scale_h(spec, mu, r.details);
  const double h2 = h * h;
  std::vector<Vec> grad = fd_gradient(mu.grid, proj.values);

  auto holds = [&](double c) {
    double rhs = weighted_dirichlet(spec, mu, grad, c * h2);
    return rhs >= var - 1e-12 * (1.0 + var);
  };

  r.rhs = weighted_dirichlet(spec, mu, grad, 0.0);
  double c_star = 0.0;
  if (holds(0.0)) {
    double lo = 0.0, hi = 100.0;
    if (holds(hi)) {
      c_star = hi;
    } else {
      for (int it = 0; it < 30; ++it) {
        double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
      }
      c_star = lo;
    }
  }
  r.empirical_constant = c_star;
  r.details["h"] = h;
  r.margin = c_star;
  r.tolerance = 0.0;
  r.pass = c_star > 0.0;
  return r;
}

InequalityReport check_qbl(const PotentialSpec& spec, const GridMeasure& mu,
                           const GridFunction& g) {
  InequalityReport r;
  r.statement_id = "qbl";
  r.instance = spec.name + " variance deficit remainders";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "inequality";

  const size_t n = mu.grid.size();
  const int d = mu.grid.dimension();
  const double total = mu.total_mass();
  std::vector<int> idx(d);
  Vec x(d);

  const double c0 = mean_of(mu, g);
  Vec v0 = Vec::Zero(d);
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (int a = 0; a < d; ++a)
      v0[a] += mu.grid.axis_coord(a, idx[a]) * (g.values[i] - c0) * mu.weights[i];
  }
  v0 /= total;

  GridFunction g0;
  g0.values.resize(n);
  double g0_sq = 0.0, g0_abs = 0.0;
  double lam_max_sup = 0.0, lam_integral = 0.0;
  const double lambda = poincare_constant(mu);
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (int a = 0; a < d; ++a) x[a] = mu.grid.axis_coord(a, idx[a]);
    Vec gv = spec.gradient_oracle(x);
    g0.values[i] = g.values[i] - gv.dot(v0) - c0;
    g0_sq += g0.values[i] * g0.values[i] * mu.weights[i];
    g0_abs += std::abs(g0.values[i]) * mu.weights[i];
    Mat H = spec.hessian_oracle(x);
    double lmax;
    if (d == 1) {
      lmax = H(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
      lmax = es.eigenvalues().maxCoeff();
    }
    if (lmax <= 0.0)
      throw SingularHessianError("check_qbl: Hessian not positive definite on the grid");
    lam_max_sup = std::max(lam_max_sup, lmax);
    lam_integral += lmax * (lmax + lambda) * mu.weights[i];
  }
  g0_sq /= total;
  g0_abs /= total;
  lam_integral /= total;

  std::vector<Vec> grad_g = gradient_of(mu, g);
  std::vector<Vec> grad_g0 = fd_gradient(mu.grid, g0.values);

  const double dirichlet = weighted_dirichlet(spec, mu, grad_g, 0.0);
  const double var = variance_of(mu, g);
  const double deficit = dirichlet - var;

  // remainder 1: lambda * integral (D^2V)^{-1} (D^2V + lambda)^{-1} grad g0 . grad g0
  double rem1 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (int a = 0; a < d; ++a) x[a] = mu.grid.axis_coord(a, idx[a]);
    Mat H = spec.hessian_oracle(x);
    if (d == 1) {
      double hv = H(0, 0);
      rem1 += grad_g0[i][0] * grad_g0[i][0] / (hv * (hv + lambda)) * mu.weights[i];
    } else {
      Mat M = H * (H + lambda * Mat::Identity(d, d));
      rem1 += grad_g0[i].dot(M.ldlt().solve(grad_g0[i])) * mu.weights[i];
    }
  }
  rem1 *= lambda / total;
  const double rem2 = lambda / (lam_max_sup + lambda) * g0_sq;
  const double rem3 = lambda * lambda / lam_integral * g0_abs * g0_abs;

  r.lhs = var;
  r.rhs = dirichlet;
  r.margin = deficit;
  r.tolerance = 1e-3 * (1.0 + dirichlet);
  r.details["deficit"] = deficit;
  r.details["g0_l2_sq"] = g0_sq;
  r.details["v0"] = std::vector<double>(v0.data(), v0.data() + v0.size());
  r.details["c0"] = c0;
  r.details["lambda"] = lambda;
  r.details["remainder1"] = rem1;
  r.details["remainder2"] = rem2;
  r.details["remainder3"] = rem3;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double rem : {rem1, rem2, rem3}) {
    if (rem > 1e-12) min_ratio = std::min(min_ratio, deficit / rem);
  }
  if (std::isfinite(min_ratio)) r.empirical_constant = min_ratio;
  r.details["ratio1"] = rem1 > 1e-12 ? deficit / rem1 : 0.0;
  r.details["ratio2"] = rem2 > 1e-12 ? deficit / rem2 : 0.0;
  r.details["ratio3"] = rem3 > 1e-12 ? deficit / rem3 : 0.0;

  r.pass = deficit >= -r.tolerance;
  if (deficit <= r.tolerance && g0_sq > 1e-6 * (1.0 + variance_of(mu, g))) r.pass = false;
  return r;
}

InequalityReport check_linearization(const PotentialSpec& spec, const GridMeasure& mu,
                                     const GridFunction& g,
                                     const std::vector<double>& eps_list) {
  if (mu.grid.dimension() != 1)
    throw DimensionError("check_linearization: one-dimensional only");
  if (eps_list.empty()) throw InputError("check_linearization: empty epsilon list");
  InequalityReport r;
  r.statement_id = "linearization";
  r.instance = spec.name + " perturbation rate";
  r.inputs = base_inputs(spec, mu);
  r.inputs["eps_list"] = eps_list;
  r.details["comparison"] = "inequality";
  r.details["solver"] = "quantile_monge";

  const double total = mu.total_mass();
  double g_sq = 0.0;
  for (size_t i = 0; i < mu.weights.size(); ++i)
    g_sq += g.values[i] * g.values[i] * mu.weights[i];
  g_sq /= total;
  std::vector<Vec> grad = gradient_of(mu, g);
  const double denom = weighted_dirichlet(spec, mu, grad, 0.0);
  const double bound = denom > 0.0 ? 0.5 * g_sq * g_sq / denom : 0.0;
  r.details["target_bound"] = bound;
  r.details["entropy_limit_half_g_sq"] = 0.5 * g_sq;

  CostSpec cost = CostSpec::bregman(shared_spec(spec));
  double eps_min = std::numeric_limits<double>::infinity();
  double r_at_min = 0.0;
  bool envelope_ok = true;
  nlohmann::json table = nlohmann::json::array();
  for (double eps : eps_list) {
    GridMeasure nu = perturb(mu, g, eps);
    double value = quantile_cost_1d(mu, nu, cost);
    double rate = value / (eps * eps);
    double env = entropy_of(nu, mu) / (eps * eps);
    if (rate > env + 1e-9) envelope_ok = false;
    table.push_back({{"eps", eps}, {"rate", rate}, {"entropy_rate", env}});
    if (eps < eps_min) {
      eps_min = eps;
      r_at_min = rate;
    }
  }
  r.details["sweep"] = table;
  r.details["envelope_ok"] = envelope_ok;
  r.lhs = 0.95 * bound;
  r.rhs = r_at_min;
  r.margin = r_at_min - 0.95 * bound;
  r.tolerance = 0.0;
  r.empirical_constant = bound > 0.0 ? r_at_min / bound : 0.0;
  r.pass = envelope_ok && r.margin >= 0.0;
  return r;
}

InequalityReport check_bh(const GridMeasure& mu, const GridFunction& f) {
  if (mu.grid.dimension() != 1) throw DimensionError("check_bh: one-dimensional only");
  InequalityReport r;
  r.statement_id = "bh";
  r.instance = mu.source + " oscillation bound";
  r.inputs["mu"] = measure_info(mu);
  r.details["comparison"] = "inequality";

  const double total = mu.total_mass();
  const double h = cheeger_constant(mu);
  std::vector<Vec> grad = gradient_of(mu, f);
  double mean = mean_of(mu, f);
  double lhs = 0.0, rhs_int = 0.0;
  for (size_t i = 0; i < mu.weights.size(); ++i) {
    lhs += f_remainder(std::abs(f.values[i] - mean)) * mu.weights[i];
    rhs_int += f_remainder(grad[i].norm() / h) * mu.weights[i];
  }
  lhs /= total;
  rhs_int /= total;
  r.lhs = lhs;
  r.rhs = 192.0 * rhs_int;
  r.margin = r.rhs - r.lhs;
  r.tolerance = 1e-9;
  r.details["h"] = h;
  if (rhs_int > 1e-14) r.empirical_constant = lhs / rhs_int;
  r.pass = r.margin >= -r.tolerance;
  return r;
}

InequalityReport check_affine_invariance(const PotentialSpec& spec, const GridMeasure& mu,
                                         const std::function<double(const Vec&)>& g,
                                         const AffineMap& map) {
  InequalityReport r;
  r.statement_id = "affine";
  r.instance = spec.name + " affine change of variables";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "identity";

  const int d = mu.grid.dimension();
  if (map.A.rows() != d || map.A.cols() != d || map.b.size() != d)
    throw InputError("check_affine_invariance: map dimension mismatch");
  Eigen::FullPivLU<Mat> lu(map.A);
  if (!lu.isInvertible()) throw InputError("check_affine_invariance: map is singular");
  Mat Ainv = lu.inverse();

  GridFunction gf = make_grid_function(mu.grid, g);
  std::vector<Vec> grad = gradient_of(mu, gf);
  const double var = variance_of(mu, gf);
  const double dir = weighted_dirichlet(spec, mu, grad, 0.0);

  // transformed potential W(y) = V(A^{-1}(y - b)) on the image bounding box
  PotentialSpec tspec;
  tspec.name = spec.name + "_affine";
  tspec.dimension = d;
  tspec.declared_convex = spec.declared_convex;
  Mat AinvT = Ainv.transpose();
  auto base_value = spec.value_oracle;
  auto base_grad = spec.gradient_oracle;
  auto base_hess = spec.hessian_oracle;
  Vec b = map.b;
  tspec.value_oracle = [=](const Vec& y) { return base_value(Ainv * (y - b)); };
  tspec.gradient_oracle = [=](const Vec& y) -> Vec { return AinvT * base_grad(Ainv * (y - b)); };
  tspec.hessian_oracle = [=](const Vec& y) -> Mat {
    return AinvT * base_hess(Ainv * (y - b)) * Ainv;
  };

  Box image = make_box(d, 0.0, 1.0);
  {
    Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    const long corners = 1L << d;
    for (long c = 0; c < corners; ++c) {
      Vec corner(d);
      for (int a = 0; a < d; ++a)
        corner[a] = (c >> a) & 1 ? mu.grid.hi[a] : mu.grid.lo[a];
      Vec img = map.A * corner + b;
      lo = lo.cwiseMin(img);
      hi = hi.cwiseMax(img);
    }
    image.lo = lo;
    image.hi = hi;
  }

  int res = mu.grid.shape[0];
  GridMeasure tmu = discretize(tspec, image, res);
  GridFunction tg = make_grid_function(
      tmu.grid, [&](const Vec& y) { return g(Ainv * (y - b)); });

  std::vector<Vec> tgrad = fd_gradient(tmu.grid, tg.values);
  const double tvar = variance_of(tmu, tg);
  const double tdir = weighted_dirichlet(tspec, tmu, tgrad, 0.0);

  r.lhs = var;
  r.rhs = tvar;
  r.details["dirichlet"] = dir;
  r.details["dirichlet_transformed"] = tdir;
  double drift = std::max(std::abs(tvar - var) / (1.0 + std::abs(var)),
                          std::abs(tdir - dir) / (1.0 + std::abs(dir)));
  r.margin = drift;
  r.tolerance = 1e-3;
  r.pass = drift <= r.tolerance;
  return r;
}

InequalityReport check_equality_characterization(const PotentialSpec& spec, const GridMeasure& mu,
                                                 const std::vector<GridMeasure>& candidates) {
  InequalityReport r;
  r.statement_id = "equality";
  r.instance = spec.name + " equality classification";
  r.inputs = base_inputs(spec, mu);
  r.details["comparison"] = "classification";

  const double tol = 2e-3;
  r.tolerance = tol;
  const int d = mu.grid.dimension();
  Moments base = moments(mu);

  bool all_ok = true;
  double min_sep = std::numeric_limits<double>::infinity();
  nlohmann::json items = nlohmann::json::array();
  for (const auto& nu : candidates) {
    double H = entropy_of(nu, mu);
    double w = bregman_lp_value(spec, mu, nu);
    double deficit = H - w;

    // translate detection: align means on the grid and compare weights
    bool translate_of_mu = false;
    Moments mm = moments(nu);
    Vec shift = mm.mean - base.mean;
    bool aligned = true;
    for (int a = 0; a < d; ++a) {
      double steps = shift[a] / mu.grid.spacing[a];
      if (std::abs(steps - std::round(steps)) > 1e-6) aligned = false;
    }
    if (aligned) {
      try {
        Vec snapped(d);
        for (int a = 0; a < d; ++a)
          snapped[a] = std::round(shift[a] / mu.grid.spacing[a]) * mu.grid.spacing[a];
        GridMeasure moved = translate(mu, snapped);
        translate_of_mu = same_measure(moved, nu, 1e-9);
      } catch (const Error&) {
        translate_of_mu = false;
      }
    }

    bool expect_equality = translate_of_mu && spec.declared_convex;
    bool ok = expect_equality ? std::abs(deficit) <= tol : std::abs(deficit) > tol;
    all_ok = all_ok && ok;
    min_sep = std::min(min_sep, expect_equality ? tol - std::abs(deficit)
                                                : std::abs(deficit) - tol);
    items.push_back({{"source", nu.source},
                     {"deficit", deficit},
                     {"is_translate", translate_of_mu},
                     {"expected_equality", expect_equality},
                     {"ok", ok}});
  }
  r.details["candidates"] = items;
  r.margin = min_sep;
  r.pass = all_ok;
  return r;
}

void parallel_for(long n, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  int workers = std::min<long>(thread_count(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        long i;
        while ((i = next.fetch_add(1)) < n) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace til
