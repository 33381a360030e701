#include "til/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "til/errors.hpp"

namespace til {

namespace {

constexpr int kLpCap = 2000;

struct Support {
  std::vector<int> index;   // original flat indices with positive mass
  std::vector<double> mass;
};

Support positive_support(const GridMeasure& m) {
  Support s;
  const int n = static_cast<int>(m.weights.size());
  s.index.reserve(n);
  s.mass.reserve(n);
  for (int i = 0; i < n; ++i)
    if (m.weights[i] > 0.0) {
      s.index.push_back(i);
      s.mass.push_back(m.weights[i]);
    }
  return s;
}

double marginal_violation_of(const std::vector<PlanEntry>& plan, const GridMeasure& mu,
                             const GridMeasure& nu) {
  std::vector<double> row(mu.weights.size(), 0.0), col(nu.weights.size(), 0.0);
  for (const auto& e : plan) {
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  double viol = 0.0;
  for (size_t i = 0; i < row.size(); ++i) viol = std::max(viol, std::abs(row[i] - mu.weights[i]));
  for (size_t j = 0; j < col.size(); ++j) viol = std::max(viol, std::abs(col[j] - nu.weights[j]));
  return viol;
}

// piecewise-linear quantile function as q-segments; zero-weight cells are
// skipped (the CDF does not advance there)
struct QSeg {
  double q0, q1, x0, slope;
};

std::vector<QSeg> quantile_segments(const GridMeasure& m) {
  if (m.grid.shape.size() != 1)
    throw DimensionError("quantile_segments: one-dimensional measures only");
  const int n = m.grid.shape[0];
  const double dx = m.grid.spacing[0];
  std::vector<QSeg> segs;
  segs.reserve(n);
  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = m.weights[i];
    if (w > 0.0) segs.push_back({cum, cum + w, m.grid.lo[0] + i * dx, dx / w});
    cum += w;
  }
  if (segs.empty()) throw InputError("quantile_segments: measure has no mass");
  return segs;
}

std::vector<QSeg> atom_segments(const std::vector<double>& pos, const std::vector<double>& w) {
  std::vector<QSeg> segs;
  segs.reserve(pos.size());
  double cum = 0.0;
  for (size_t i = 0; i < pos.size(); ++i) {
    if (w[i] > 0.0) segs.push_back({cum, cum + w[i], pos[i], 0.0});
    cum += w[i];
  }
  return segs;
}

// walks the merged quantile partition; fn(q_len, xa, sa, xb, sb) sees the two
// linear pieces x(u) = x + s u for u in [0, q_len]
template <typename Fn>
void merged_quantile_walk(const std::vector<QSeg>& A, const std::vector<QSeg>& B, Fn&& fn) {
  size_t ia = 0, ib = 0;
  double q = std::max(A.front().q0, B.front().q0);
  const double q_end = std::min(A.back().q1, B.back().q1);
  while (ia < A.size() && ib < B.size()) {
    double qn = std::min(A[ia].q1, B[ib].q1);
    qn = std::min(qn, q_end);
    if (qn > q) {
      const QSeg& a = A[ia];
      const QSeg& b = B[ib];
      fn(qn - q, a.x0 + a.slope * (q - a.q0), a.slope, b.x0 + b.slope * (q - b.q0), b.slope);
      q = qn;
    }
    if (A[ia].q1 <= q + 1e-18) ++ia;
    if (ib < B.size() && B[ib].q1 <= q + 1e-18) ++ib;
    if (q >= q_end) break;
  }
}

// integral of |d0 + r u| over [0, L]
double abs_linear_integral(double d0, double r, double L) {
  double d1 = d0 + r * L;
  if (d0 * d1 >= 0.0) return 0.5 * (std::abs(d0) + std::abs(d1)) * L;
  double s = d0 / (d0 - d1) * L;  // zero crossing
  return 0.5 * (std::abs(d0) * s + std::abs(d1) * (L - s));
}

double quantile_w1(const std::vector<QSeg>& A, const std::vector<QSeg>& B) {
  double total = 0.0;
  merged_quantile_walk(A, B, [&](double L, double xa, double sa, double xb, double sb) {
    total += abs_linear_integral(xa - xb, sa - sb, L);
  });
  return total;
}

double quantile_w2_squared(const std::vector<QSeg>& A, const std::vector<QSeg>& B) {
  double total = 0.0;
  merged_quantile_walk(A, B, [&](double L, double xa, double sa, double xb, double sb) {
    double d = xa - xb, r = sa - sb;
    total += L * (d * d + d * r * L + r * r * L * L / 3.0);
  });
  return total;
}

void check_equal_grids_mass(const GridMeasure& mu, const GridMeasure& nu) {
  double sa = mu.total_mass(), sb = nu.total_mass();
  if (std::abs(sa - sb) > 1e-9)
    throw MarginalError("transport: total masses differ by " + std::to_string(std::abs(sa - sb)));
}

}  // namespace

const char* solver_tag_name(SolverTag tag) {
  switch (tag) {
    case SolverTag::exact_lp: return "exact_lp";
    case SolverTag::entropic: return "entropic";
    case SolverTag::monotone_1d: return "monotone_1d";
  }
  return "unknown";
}

Coupling solve_ot_exact(const GridMeasure& mu, const GridMeasure& nu, const CostMatrix& C) {
  check_equal_grids_mass(mu, nu);
  Support su = positive_support(mu), sv = positive_support(nu);
  if (static_cast<int>(su.index.size()) > kLpCap || static_cast<int>(sv.index.size()) > kLpCap)
    throw SizeError("solve_ot_exact: support exceeds 2000 points");
  if (C.values.rows() != static_cast<long>(mu.weights.size()) ||
      C.values.cols() != static_cast<long>(nu.weights.size()))
    throw SizeError("solve_ot_exact: cost matrix does not match measure sizes");

  const int ns = static_cast<int>(su.index.size());
  const int nt = static_cast<int>(sv.index.size());
  Eigen::MatrixXd Cc(ns, nt);
  double cmax = 0.0;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      Cc(i, j) = C.values(su.index[i], sv.index[j]);
      cmax = std::max(cmax, std::abs(Cc(i, j)));
    }

  NsResult R = network_simplex(su.mass, sv.mass, Cc);

  Coupling cpl;
  cpl.solver = SolverTag::exact_lp;
  cpl.source_size = static_cast<int>(mu.weights.size());
  cpl.target_size = static_cast<int>(nu.weights.size());
  cpl.plan.reserve(R.plan.size());
  for (const auto& e : R.plan)
    cpl.plan.push_back({su.index[e.i], sv.index[e.j], e.mass});
  cpl.cost_value = R.primal;
  cpl.duality_gap = std::max(R.gap, 0.0);
  cpl.marginal_violation = marginal_violation_of(cpl.plan, mu, nu);
  // tree potentials telescope costs, so rounding in the certificate scales
  // with the cost magnitude, not with the optimal value
  if (*cpl.duality_gap > 1e-9 * (1.0 + cmax))
    throw NumericalError("solve_ot_exact: duality gap above certificate tolerance");
  return cpl;
}

Coupling solve_ot_entropic(const GridMeasure& mu, const GridMeasure& nu, const CostMatrix& C,
                           double epsilon, int max_iter) {
  if (!(epsilon > 0.0)) throw DomainError("solve_ot_entropic: epsilon must be positive");
  check_equal_grids_mass(mu, nu);
  Support su = positive_support(mu), sv = positive_support(nu);
  const int ns = static_cast<int>(su.index.size());
  const int nt = static_cast<int>(sv.index.size());

  Eigen::MatrixXd Cc(ns, nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) Cc(i, j) = C.values(su.index[i], sv.index[j]);

  std::vector<double> loga(ns), logb(nt), f(ns, 0.0), g(nt, 0.0);
  for (int i = 0; i < ns; ++i) loga[i] = std::log(su.mass[i]);
  for (int j = 0; j < nt; ++j) logb[j] = std::log(sv.mass[j]);

  const double tol = 1e-9;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> scratch(std::max(ns, nt));

  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < ns; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < nt; ++j) {
        scratch[j] = (g[j] - Cc(i, j)) / epsilon + logb[j];
        m = std::max(m, scratch[j]);
      }
      double s = 0.0;
      for (int j = 0; j < nt; ++j) s += std::exp(scratch[j] - m);
      f[i] = -epsilon * (m + std::log(s));
    }
    for (int j = 0; j < nt; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < ns; ++i) {
        scratch[i] = (f[i] - Cc(i, j)) / epsilon + loga[i];
        m = std::max(m, scratch[i]);
      }
      double s = 0.0;
      for (int i = 0; i < ns; ++i) s += std::exp(scratch[i] - m);
      g[j] = -epsilon * (m + std::log(s));
    }
    // column marginals are exact after the g-update; rows carry the residual
    residual = 0.0;
    for (int i = 0; i < ns; ++i) {
      double row = 0.0;
      for (int j = 0; j < nt; ++j)
        row += std::exp((f[i] + g[j] - Cc(i, j)) / epsilon + loga[i] + logb[j]);
      residual = std::max(residual, std::abs(row - su.mass[i]));
    }
    if (residual <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "solve_ot_entropic: marginal residual " << residual << " after " << max_iter
       << " iterations";
    throw ConvergenceError(os.str());
  }

  Coupling cpl;
  cpl.solver = SolverTag::entropic;
  cpl.epsilon = epsilon;
  cpl.source_size = static_cast<int>(mu.weights.size());
  cpl.target_size = static_cast<int>(nu.weights.size());
  double value = 0.0;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      double p = std::exp((f[i] + g[j] - Cc(i, j)) / epsilon + loga[i] + logb[j]);
      if (p > 1e-17) cpl.plan.push_back({su.index[i], sv.index[j], p});
      value += p * Cc(i, j);
    }
  cpl.cost_value = value;
  cpl.marginal_violation = marginal_violation_of(cpl.plan, mu, nu);
  return cpl;
}

MonotoneMap1D monotone_map_1d(const GridMeasure& mu, const GridMeasure& nu) {
  if (mu.grid.shape.size() != 1 || nu.grid.shape.size() != 1)
    throw DimensionError("monotone_map_1d: one-dimensional measures only");
  for (double w : mu.weights)
    if (!(w > 0.0)) throw InputError("monotone_map_1d: source weights must be strictly positive");
  for (double w : nu.weights)
    if (!(w > 0.0)) throw InputError("monotone_map_1d: target weights must be strictly positive");
  check_equal_grids_mass(mu, nu);

  const int n = mu.grid.shape[0];
  const int m = nu.grid.shape[0];
  const double dx = mu.grid.spacing[0];
  const double dy = nu.grid.spacing[0];
  const double y_lo = nu.grid.lo[0];

  // prefix masses from the left and survivals from the right; a single
  // forward sum loses the far tail of the CDF to rounding near 1, which the
  // F-functional amplifies without bound
  std::vector<double> tcum(m), tsurv(m + 1, 0.0);
  {
    double c = 0.0;
    for (int j = 0; j < m; ++j) {
      tcum[j] = c;
      c += nu.weights[j];
    }
    for (int j = m - 1; j >= 0; --j) tsurv[j] = tsurv[j + 1] + nu.weights[j];
  }
  std::vector<double> ssurv(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) ssurv[i] = ssurv[i + 1] + mu.weights[i];
  const double half_mass = 0.5 * ssurv[0];

  MonotoneMap1D map;
  map.map_values.resize(n);
  map.displacement.resize(n);
  map.map_derivative.resize(n);
  map.displacement_derivative.resize(n);

  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    double q = cum + 0.5 * mu.weights[i];  // mass to the midpoint of cell i
    cum += mu.weights[i];
    int k;
    double t;
    if (q <= half_mass) {
      k = static_cast<int>(std::upper_bound(tcum.begin(), tcum.end(), q) - tcum.begin()) - 1;
      k = std::max(k, 0);
      double off = std::clamp(q - tcum[k], 0.0, nu.weights[k]);
      t = y_lo + k * dy + dy * off / nu.weights[k];
    } else {
      double s = ssurv[i + 1] + 0.5 * mu.weights[i];  // mass beyond the midpoint
      k = static_cast<int>(std::lower_bound(tsurv.begin(), tsurv.end() - 1, s,
                                            std::greater<double>()) -
                           tsurv.begin()) -
          1;
      k = std::clamp(k, 0, m - 1);
      double off = std::clamp(s - tsurv[k + 1], 0.0, nu.weights[k]);
      t = y_lo + (k + 1) * dy - dy * off / nu.weights[k];
    }
    map.map_values[i] = t;
    map.displacement[i] = t - mu.grid.axis_coord(0, i);
    // exact derivative of the piecewise-linear quantile interpolation; a
    // finite difference of map_values loses the tails to rounding
    map.map_derivative[i] = (mu.weights[i] / dx) * (dy / nu.weights[k]);
    map.displacement_derivative[i] = map.map_derivative[i] - 1.0;
  }

  std::vector<QSeg> pushed = atom_segments(map.map_values, mu.weights);
  map.pushforward_w1 = quantile_w1(pushed, quantile_segments(nu));
  return map;
}

double wasserstein(const GridMeasure& mu, const GridMeasure& nu, Metric metric) {
  check_equal_grids_mass(mu, nu);
  const size_t dim = mu.grid.shape.size();
  if (dim == 1 && nu.grid.shape.size() == 1) {
    std::vector<QSeg> A = quantile_segments(mu), B = quantile_segments(nu);
    switch (metric) {
      case Metric::w1:
      case Metric::l1: return quantile_w1(A, B);
      case Metric::w2: return std::sqrt(std::max(0.0, quantile_w2_squared(A, B)));
    }
  }
  CostSpec cost = metric == Metric::l1   ? CostSpec::l1()
                  : metric == Metric::w1 ? CostSpec::euclidean_p(1.0)
                                         : CostSpec::euclidean_p(2.0);
  CostMatrix C = cost_matrix(cost, mu, nu);
  Coupling cpl = solve_ot_exact(mu, nu, C);
  double v = std::max(0.0, cpl.cost_value);
  return metric == Metric::w2 ? std::sqrt(v) : v;
}

double quantile_cost_1d(const GridMeasure& mu, const GridMeasure& nu, const CostSpec& cost) {
  check_equal_grids_mass(mu, nu);
  std::vector<QSeg> A = quantile_segments(mu), B = quantile_segments(nu);
  Vec x(1), y(1);
  auto c = [&](double xa, double xb) {
    x[0] = xa;
    y[0] = xb;
    return cost(x, y);
  };
  double total = 0.0;
  merged_quantile_walk(A, B, [&](double L, double xa, double sa, double xb, double sb) {
    double mid = 0.5 * L;
    total += L / 6.0 *
             (c(xa, xb) + 4.0 * c(xa + sa * mid, xb + sb * mid) + c(xa + sa * L, xb + sb * L));
  });
  return total;
}

DisplacementDecomposition displacement_remainder_1d(const PotentialSpec& spec,
                                                    const GridMeasure& mu,
                                                    const GridMeasure& nu) {
  if (mu.grid.shape.size() != 1)
    throw DimensionError("displacement_remainder_1d: one-dimensional measures only");
  MonotoneMap1D map = monotone_map_1d(mu, nu);
  const int n = mu.grid.shape[0];

  DisplacementDecomposition out;
  Vec x(1), y(1);
  for (int i = 0; i < n; ++i) {
    x[0] = mu.grid.axis_coord(0, i);
    y[0] = map.map_values[i];
    out.transport_term += bregman_cost(spec, x, y) * mu.weights[i];
  }
  for (int i = 1; i + 1 < n; ++i) {
    double r = map.map_derivative[i];
    if (!(r > 0.0))
      throw MapDegeneracyError("displacement_remainder_1d: map derivative collapsed at node " +
                               std::to_string(i));
    // F(r - 1) with r - 1 formed only when it does not absorb a tiny ratio
    double F = r > 0.5 ? f_remainder(r - 1.0) : (r - 1.0) - std::log(r);
    out.remainder_term += F * mu.weights[i];
  }
  out.excluded_mass = mu.weights[0] + mu.weights[n - 1];
  return out;
}

void save_coupling_csv(const Coupling& coupling, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("save_coupling_csv: cannot open " + path);
  os.precision(17);
  os << "i,j,mass\n";
  for (const auto& e : coupling.plan) os << e.i << "," << e.j << "," << e.mass << "\n";
  os.close();

  nlohmann::json side;
  side["cost_value"] = coupling.cost_value;
  side["solver"] = solver_tag_name(coupling.solver);
  if (coupling.solver == SolverTag::entropic) side["epsilon"] = coupling.epsilon;
  if (coupling.duality_gap)
    side["duality_gap"] = *coupling.duality_gap;
  else
    side["duality_gap"] = nullptr;
  side["marginal_violation"] = coupling.marginal_violation;
  side["source_size"] = coupling.source_size;
  side["target_size"] = coupling.target_size;
  std::ofstream js(path + ".json");
  if (!js) throw InputError("save_coupling_csv: cannot open " + path + ".json");
  js << side.dump(2) << "\n";
}

}  // namespace til
