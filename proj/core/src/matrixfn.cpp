#include "til/matrixfn.hpp"

#include <cmath>

#include "til/costs.hpp"
#include "til/errors.hpp"
#include "til/rng.hpp"

namespace til {

namespace {

Eigen::SelfAdjointEigenSolver<Mat> decompose_checked(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("matrixfn: eigendecomposition failed");
  double amax = A.cwiseAbs().maxCoeff();
  Mat residual = A * es.eigenvectors() - es.eigenvectors() * es.eigenvalues().asDiagonal();
  if (residual.cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, amax))
    throw NumericalError("matrixfn: eigendecomposition residual above tolerance");
  return es;
}

}  // namespace

SymmetricMatrix make_symmetric(const Mat& A) {
  if (A.rows() != A.cols()) throw InputError("make_symmetric: matrix must be square");
  double amax = A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, amax))
    throw InputError("make_symmetric: matrix is not symmetric");
  SymmetricMatrix S;
  S.entries = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("make_symmetric: eigensolver failed");
  S.eigen_floor = es.eigenvalues().minCoeff();
  return S;
}

SymmetricMatrix matrix_f(const SymmetricMatrix& A) {
  if (!(A.eigen_floor > -1.0))
    throw DomainError("matrix_f: eigenvalue at or below -1");
  auto es = decompose_checked(A.entries);
  Vec fl = es.eigenvalues();
  for (long i = 0; i < fl.size(); ++i) fl[i] = f_remainder(fl[i]);
  SymmetricMatrix R;
  R.entries = es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
  R.entries = 0.5 * (R.entries + R.entries.transpose());
  R.eigen_floor = fl.minCoeff();
  return R;
}

double trace_f(const SymmetricMatrix& A) {
  if (!(A.eigen_floor > -1.0))
    throw DomainError("trace_f: eigenvalue at or below -1");
  auto es = decompose_checked(A.entries);
  double s = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) s += f_remainder(es.eigenvalues()[i]);
  return s;
}

SphereEstimate sphere_average_f(const SymmetricMatrix& A, long n_samples,
                                unsigned long long seed) {
  if (n_samples < 10000) throw InputError("sphere_average_f: need at least 1e4 samples");
  const int n = static_cast<int>(A.entries.rows());
  const double root_n = std::sqrt(static_cast<double>(n));
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  Vec u(n), Au(n);
  for (long s = 0; s < n_samples; ++s) {
    u = rng.sphere(n);
    Au.noalias() = A.entries * u;
    double v = f_remainder(root_n * Au.norm());
    sum += v;
    sumsq += v * v;
  }
  SphereEstimate est;
  est.n_samples = n_samples;
  est.seed = seed;
  est.value = sum / n_samples;
  double var = (sumsq - sum * sum / n_samples) / std::max<long>(1, n_samples - 1);
  est.std_error = std::sqrt(std::max(0.0, var) / n_samples);
  return est;
}

MeanWidthResult mean_width_constants(int n, long n_samples, unsigned long long seed) {
  if (n < 1) throw InputError("mean_width_constants: dimension must be >= 1");
  if (n_samples < 10000) throw InputError("mean_width_constants: need at least 1e4 samples");
  const int probes = 8;
  const double root_n = std::sqrt(static_cast<double>(n));
  MeanWidthResult out;
  out.lower_ratio = std::numeric_limits<double>::infinity();
  out.upper_ratio = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < probes; ++p) {
    Rng rng(Rng::child_seed(seed, p));
    Vec X = rng.sphere(n);
    double sum = 0.0, sumsq = 0.0;
    for (long s = 0; s < n_samples; ++s) {
      double dot = std::abs(X.dot(rng.sphere(n)));
      sum += dot;
      sumsq += dot * dot;
    }
    double ratio = root_n * sum / n_samples;
    double var = (sumsq - sum * sum / n_samples) / std::max<long>(1, n_samples - 1);
    double se = root_n * std::sqrt(std::max(0.0, var) / n_samples);
    out.lower_ratio = std::min(out.lower_ratio, ratio);
    out.upper_ratio = std::max(out.upper_ratio, ratio);
    out.std_error = std::max(out.std_error, se);
  }
  return out;
}

}  // namespace til
