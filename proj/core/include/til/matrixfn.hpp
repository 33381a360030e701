#pragma once

#include "til/potentials.hpp"

namespace til {

struct SymmetricMatrix {
  Mat entries;
  double eigen_floor = 0.0;  // smallest eigenvalue, cached at construction
};

// Validates symmetry to 1e-12 (relative) and caches the spectral floor.
SymmetricMatrix make_symmetric(const Mat& A);

// Spectral calculus for the convex remainder f(t) = t - log(1+t): applies f to
// the eigenvalues, Q f(Lambda) Q^T.  Requires eigen_floor > -1.
SymmetricMatrix matrix_f(const SymmetricMatrix& A);

// Sum of f over the eigenvalues.
double trace_f(const SymmetricMatrix& A);

struct SphereEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  unsigned long long seed = 0;
};

// Monte Carlo estimate of the uniform sphere average of f(sqrt(n) |A u|),
// sampling u as normalized Gaussian vectors.  n_samples must be >= 10^4.
SphereEstimate sphere_average_f(const SymmetricMatrix& A, long n_samples,
                                unsigned long long seed);

struct MeanWidthResult {
  double lower_ratio = 0.0;
  double upper_ratio = 0.0;
  double std_error = 0.0;  // worst per-probe Monte Carlo error
};

// Extremes over random directions X of sqrt(n) * E|X.u| / |X| with u uniform
// on the sphere; the quantity is direction-independent, so the spread between
// the two ratios is pure Monte Carlo noise.
MeanWidthResult mean_width_constants(int n, long n_samples, unsigned long long seed);

}  // namespace til
