#include "til/spectral.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "til/errors.hpp"

namespace til {

namespace {

void require_positive_weights(const GridMeasure& mu, const char* who) {
  for (double w : mu.weights)
    if (!(w > 0.0)) throw InputError(std::string(who) + ": weights must be strictly positive");
}

// graph Laplacian of the grid with edge mass = average of the two cell masses
// divided by spacing^2; quadratic form approximates the weighted Dirichlet
// energy of midpoint samples
Eigen::SparseMatrix<double> dirichlet_matrix(const GridMeasure& mu) {
  const auto& g = mu.grid;
  const size_t dim = g.shape.size();
  const long n = static_cast<long>(mu.weights.size());

  std::vector<long> stride(dim, 1);
  for (size_t a = dim; a-- > 1;) stride[a - 1] = stride[a] * g.shape[a];

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n) * (2 * dim + 1));
  std::vector<double> diag(n, 0.0);
  std::vector<int> idx(dim);
  for (long flat = 0; flat < n; ++flat) {
    g.decode(flat, idx.data());
    for (size_t a = 0; a < dim; ++a) {
      if (idx[a] + 1 >= g.shape[a]) continue;
      long nb = flat + stride[a];
      double w = 0.5 * (mu.weights[flat] + mu.weights[nb]) / (g.spacing[a] * g.spacing[a]);
      trip.emplace_back(flat, nb, -w);
      trip.emplace_back(nb, flat, -w);
      diag[flat] += w;
      diag[nb] += w;
    }
  }
  for (long i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace

double cheeger_constant(const GridMeasure& mu) {
  if (mu.grid.shape.size() != 1)
    throw DimensionError("cheeger_constant: only one-dimensional measures are supported");
  require_positive_weights(mu, "cheeger_constant");
  const int n = mu.grid.shape[0];
  if (n < 3) throw InputError("cheeger_constant: grid too small");
  const double dx = mu.grid.spacing[0];
  const double total = mu.total_mass();

  double best = std::numeric_limits<double>::infinity();
  double cum = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    cum += mu.weights[k];
    double t = cum / total;
    if (t <= 0.0 || t >= 1.0) continue;
    double density = 0.5 * (mu.weights[k] + mu.weights[k + 1]) / (dx * total);
    best = std::min(best, density / std::min(t, 1.0 - t));
  }
  return best;
}

double poincare_constant(const GridMeasure& mu) {
  const size_t dim = mu.grid.shape.size();
  if (dim != 1 && dim != 2)
    throw DimensionError("poincare_constant: dimensions 1 and 2 only");
  require_positive_weights(mu, "poincare_constant");
  const long n = static_cast<long>(mu.weights.size());
  const double total = mu.total_mass();

  Eigen::SparseMatrix<double> K = dirichlet_matrix(mu);
  Eigen::VectorXd m(n);
  for (long i = 0; i < n; ++i) m[i] = mu.weights[i];

  // scale estimate from the coordinate function, an upper bound on the gap
  Eigen::VectorXd x0(n);
  {
    std::vector<int> idx(dim);
    for (long i = 0; i < n; ++i) {
      mu.grid.decode(i, idx.data());
      x0[i] = mu.grid.axis_coord(0, idx[0]);
    }
  }
  double mean0 = x0.dot(m) / total;
  Eigen::VectorXd xc = x0.array() - mean0;
  double var0 = (xc.array().square() * m.array()).sum();
  if (!(var0 > 0.0)) throw NumericalError("poincare_constant: degenerate coordinate variance");
  double scale = xc.dot(K * xc) / var0;
  const double shift = 1e-6 * scale;

  Eigen::SparseMatrix<double> A = K;
  for (long i = 0; i < n; ++i) A.coeffRef(i, i) += shift * m[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw NumericalError("poincare_constant: factorization failed");

  // inverse iteration deflating the constant mode in the weighted inner product
  Eigen::VectorXd y = xc;
  for (long i = 0; i < n; ++i) y[i] += 0.01 * std::sin(3.0 * i + 1.0);
  auto project = [&](Eigen::VectorXd& v) {
    double c = v.dot(m) / total;
    v.array() -= c;
  };
  project(y);
  y /= std::sqrt((y.array().square() * m.array()).sum());

  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd rhs = m.array() * y.array();
    Eigen::VectorXd z = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw NumericalError("poincare_constant: solve failed");
    project(z);
    double nrm = std::sqrt((z.array().square() * m.array()).sum());
    if (!(nrm > 0.0)) throw NumericalError("poincare_constant: iteration collapsed");
    z /= nrm;
    Eigen::VectorXd Kz = K * z;
    Eigen::VectorXd Mz = m.array() * z.array();
    lambda = z.dot(Kz);
    double res = (Kz - lambda * Mz).norm();
    y = z;
    if (res <= 1e-10 * (Kz.norm() + std::abs(lambda) * Mz.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("poincare_constant: inverse iteration did not converge");
  return lambda;
}

double poincare_curvature_bound(const PotentialSpec& spec, const GridMeasure& mu) {
  const size_t dim = mu.grid.shape.size();
  if (spec.dimension != static_cast<int>(dim))
    throw DimensionError("poincare_curvature_bound: potential/measure dimension mismatch");
  const long n = static_cast<long>(mu.weights.size());
  const double total = mu.total_mass();
  double integral = 0.0;
  Vec x(dim);
  std::vector<int> idx(dim);
  for (long i = 0; i < n; ++i) {
    mu.grid.decode(i, idx.data());
    for (size_t a = 0; a < dim; ++a) x[a] = mu.grid.axis_coord(a, idx[a]);
    Mat H = spec.hessian_oracle(x);
    double lam;
    if (dim == 1) {
      lam = H(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(H);
      if (es.info() != Eigen::Success)
        throw NumericalError("poincare_curvature_bound: eigensolver failed");
      lam = es.eigenvalues().minCoeff();
    }
    if (lam <= 1e-3)
      throw SingularHessianError("poincare_curvature_bound: Hessian not positive definite at a grid point");
    integral += mu.weights[i] / lam;
  }
  return integral / total;
}

double l1_poincare_check(const GridMeasure& mu, const GridFunction& g, double h) {
  if (g.values.size() != mu.weights.size())
    throw GridError("l1_poincare_check: function/measure size mismatch");
  for (double v : g.values)
    if (!std::isfinite(v)) throw InputError("l1_poincare_check: non-finite function value");
  const double total = mu.total_mass();

  std::vector<Vec> grad =
      g.gradient_values ? *g.gradient_values : fd_gradient(mu.grid, g.values);
  double lhs = 0.0;
  for (size_t i = 0; i < mu.weights.size(); ++i) lhs += grad[i].norm() * mu.weights[i];

  double mean = 0.0;
  for (size_t i = 0; i < mu.weights.size(); ++i) mean += g.values[i] * mu.weights[i];
  mean /= total;
  double dev = 0.0;
  for (size_t i = 0; i < mu.weights.size(); ++i)
    dev += std::abs(g.values[i] - mean) * mu.weights[i];

  return lhs - h * dev;
}

double cheeger_gaussian_halfspace(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("cheeger_gaussian_halfspace: sigma must be positive");
  return std::sqrt(2.0 / M_PI) / sigma;
}

SpectralReport spectral_report(const PotentialSpec* spec, const GridMeasure& mu) {
  SpectralReport r;
  const size_t dim = mu.grid.shape.size();
  r.poincare = poincare_constant(mu);
  r.poincare_method = "inverse_iteration";
  if (dim == 1) {
    r.cheeger = cheeger_constant(mu);
    r.cheeger_method = "isoperimetric_profile";
    r.ratio = r.poincare / (r.cheeger * r.cheeger);
  }
  if (spec != nullptr) {
    r.lower_bound_integral = poincare_curvature_bound(*spec, mu);
    r.lower_bound_method = "midpoint_quadrature";
  }
  return r;
}

void to_json(nlohmann::json& j, const SpectralReport& r) {
  auto put = [&](const char* key, double v) {
    if (std::isfinite(v))
      j[key] = v;
    else
      j[key] = nullptr;
  };
  put("cheeger", r.cheeger);
  put("poincare", r.poincare);
  put("ratio", r.ratio);
  put("lower_bound_integral", r.lower_bound_integral);
  j["cheeger_method"] = r.cheeger_method;
  j["poincare_method"] = r.poincare_method;
  j["lower_bound_method"] = r.lower_bound_method;
}

}  // namespace til
