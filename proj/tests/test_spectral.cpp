#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nlohmann/json.hpp"
#include "support.hpp"
#include "til/errors.hpp"
#include "til/spectral.hpp"

using namespace til;
using testutil::gaussian1d;
using testutil::grid1d;

TEST_CASE("gaussian spectral constants") {
  GridMeasure mu = gaussian1d(2048);
  const double h = cheeger_constant(mu);
  const double lambda = poincare_constant(mu);
  CHECK(h == doctest::Approx(0.7978845608028654).epsilon(0.02));
  CHECK(lambda == doctest::Approx(1.0).epsilon(0.02));
  CHECK(lambda / (h * h) == doctest::Approx(M_PI / 2.0).epsilon(0.05));

  PotentialSpec V = make_gaussian(1);
  // unit Hessian makes the inverse-curvature integral exactly one
  CHECK(poincare_curvature_bound(V, mu) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lambda >= 1.0 / poincare_curvature_bound(V, mu) - 0.02);
}

TEST_CASE("exponential density constants") {
  Grid g = grid1d(-20.0, 20.0, 2048);
  GridMeasure mu = testutil::density1d(g, [](double x) { return std::exp(-std::abs(x)); });
  CHECK(cheeger_constant(mu) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(poincare_constant(mu) >= 0.25);
}

TEST_CASE("gap scales inversely with variance") {
  Grid g = grid1d(-8.0, 8.0, 1024);
  GridMeasure wide = testutil::normal1d(g, 0.0, 1.2);
  CHECK(poincare_constant(wide) == doctest::Approx(1.0 / 1.44).epsilon(0.02));
  CHECK(cheeger_constant(wide) == doctest::Approx(cheeger_gaussian_halfspace(1.2)).epsilon(0.02));
}

TEST_CASE("dilation rescales both constants exactly") {
  GridMeasure mu = gaussian1d(1024);
  GridMeasure d = dilate(mu, 2.0);
  CHECK(poincare_constant(d) == doctest::Approx(poincare_constant(mu) / 4.0).epsilon(1e-6));
  CHECK(cheeger_constant(d) == doctest::Approx(cheeger_constant(mu) / 2.0).epsilon(1e-9));
}

TEST_CASE("product measures and dimension limits") {
  Grid g2 = Grid::regular(make_box(2, -6.5, 6.5), 48);
  GridMeasure iso = testutil::product2d(
      g2, [](double x) { return testutil::normal_pdf(x, 0.0, 1.0); },
      [](double y) { return testutil::normal_pdf(y, 0.0, 1.0); });
  CHECK(poincare_constant(iso) == doctest::Approx(1.0).epsilon(0.03));
  CHECK_THROWS_AS(cheeger_constant(iso), DimensionError);

  GridMeasure aniso = testutil::product2d(
      g2, [](double x) { return testutil::normal_pdf(x, 0.0, 1.0); },
      [](double y) { return testutil::normal_pdf(y, 0.0, 1.25); });
  Grid axis = grid1d(-6.5, 6.5, 48);
  GridMeasure fa = testutil::normal1d(axis, 0.0, 1.0);
  GridMeasure fb = testutil::normal1d(axis, 0.0, 1.25);
  const double factor_min = std::min(poincare_constant(fa), poincare_constant(fb));
  // the discrete operator on a product grid is a Kronecker sum
  CHECK(poincare_constant(aniso) == doctest::Approx(factor_min).epsilon(1e-6));

  Grid g3 = Grid::regular(make_box(3, -2.0, 2.0), 4);
  GridMeasure flat3;
  flat3.grid = g3;
  flat3.weights.assign(g3.size(), 1.0 / static_cast<double>(g3.size()));
  CHECK_THROWS_AS(poincare_constant(flat3), DimensionError);

  GridMeasure tiny = gaussian1d(2);
  CHECK_THROWS_AS(cheeger_constant(tiny), InputError);
}

TEST_CASE("curvature integral flags degenerate hessians") {
  PotentialSpec quartic = make_quadratic_plus_quartic(1, 1.0, 1.0);
  GridMeasure mq = testutil::quartic1d(1024);
  const double bound = poincare_curvature_bound(quartic, mq);
  CHECK(bound < 1.0);  // V'' = 1 + 3x^2 > 1 away from the origin
  CHECK(bound > 0.5);
  CHECK(poincare_constant(mq) >= 1.0 / bound - 0.05);

  PotentialSpec flat = make_even_power(1, 4);
  GridMeasure mf = discretize(flat, make_box(1, -4.0, 4.0), 1024);
  CHECK_THROWS_AS(poincare_curvature_bound(flat, mf), SingularHessianError);
}

TEST_CASE("l1 margin of the isoperimetric inequality") {
  GridMeasure mu = gaussian1d(1024);
  const double h = cheeger_constant(mu);

  GridFunction c = make_grid_function(mu.grid, [](const Vec&) { return 2.0; });
  CHECK(l1_poincare_check(mu, c, h) == 0.0);

  GridFunction s = make_grid_function(mu.grid, [](const Vec& x) { return std::sin(x[0]); });
  CHECK(l1_poincare_check(mu, s, 0.0) >= 0.0);

  // tanh(20 x) is nearly the optimal split at the median
  GridFunction t = make_grid_function(mu.grid,
                                      [](const Vec& x) { return std::tanh(20.0 * x[0]); });
  const double margin = l1_poincare_check(mu, t, h);
  CHECK(margin >= -1e-3);
  GridFunction tg = t;
  double lhs = 0.0;
  {
    auto grad = fd_gradient(mu.grid, t.values);
    for (std::size_t i = 0; i < mu.weights.size(); ++i) lhs += grad[i].norm() * mu.weights[i];
  }
  CHECK(margin <= 0.15 * lhs);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.3, 2.0), phase(0.0, 6.28);
  for (int k = 0; k < 20; ++k) {
    const double a0 = amp(rng), a1 = amp(rng), w0 = freq(rng), w1 = freq(rng);
    const double p0 = phase(rng), p1 = phase(rng);
    GridFunction gk = make_grid_function(mu.grid, [&](const Vec& x) {
      return a0 * std::cos(w0 * x[0] + p0) + a1 * std::cos(w1 * x[0] + p1);
    });
    CHECK(l1_poincare_check(mu, gk, h) >= -1e-6);
  }

  GridFunction shorty;
  shorty.values.assign(16, 0.0);
  CHECK_THROWS_AS(l1_poincare_check(mu, shorty, h), GridError);
  GridFunction nan = c;
  nan.values[3] = std::nan("");
  CHECK_THROWS_AS(l1_poincare_check(mu, nan, h), InputError);
}

TEST_CASE("halfspace closed form") {
  CHECK(cheeger_gaussian_halfspace(1.0) ==
        doctest::Approx(0.7978845608028654).epsilon(1e-15));
  CHECK(cheeger_gaussian_halfspace(2.0) ==
        doctest::Approx(0.5 * 0.7978845608028654).epsilon(1e-15));
  CHECK_THROWS_AS(cheeger_gaussian_halfspace(0.0), DomainError);
}

TEST_CASE("report carries methods for each dimension") {
  GridMeasure mu = gaussian1d(512);
  PotentialSpec V = make_gaussian(1);
  SpectralReport r1 = spectral_report(&V, mu);
  CHECK(r1.cheeger_method == "isoperimetric_profile");
  CHECK(r1.poincare_method == "inverse_iteration");
  CHECK(r1.lower_bound_method == "midpoint_quadrature");
  CHECK(r1.ratio == doctest::Approx(r1.poincare / (r1.cheeger * r1.cheeger)));

  Grid g2 = Grid::regular(make_box(2, -6.0, 6.0), 32);
  GridMeasure iso = testutil::product2d(
      g2, [](double x) { return testutil::normal_pdf(x, 0.0, 1.0); },
      [](double y) { return testutil::normal_pdf(y, 0.0, 1.0); });
  SpectralReport r2 = spectral_report(nullptr, iso);
  CHECK(r2.cheeger_method == "none");
  CHECK(std::isnan(r2.cheeger));
  CHECK(std::isnan(r2.ratio));
  CHECK(std::isnan(r2.lower_bound_integral));
  CHECK(r2.poincare > 0.0);

  nlohmann::json j;
  to_json(j, r2);
  CHECK(j["cheeger"].is_null());
  CHECK(j["poincare"].is_number());
  CHECK(j["poincare_method"].get<std::string>() == "inverse_iteration");
}
