#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "support.hpp"
#include "til/errors.hpp"
#include "til/measures.hpp"

using namespace til;
using testutil::gaussian1d;
using testutil::grid1d;

TEST_CASE("regular grid geometry") {
  Grid g = Grid::regular(make_box(1, -8.0, 8.0), 2048);
  CHECK(g.size() == 2048);
  CHECK(g.spacing[0] == doctest::Approx(16.0 / 2048).epsilon(1e-15));
  CHECK(g.axis_coord(0, 0) == doctest::Approx(-8.0 + 0.5 * g.spacing[0]));
  CHECK(g.axis_coord(0, 2047) == doctest::Approx(8.0 - 0.5 * g.spacing[0]));
  CHECK(g.cell_volume() == doctest::Approx(g.spacing[0]));

  Grid g2 = Grid::regular(make_box(2, -1.0, 1.0), 16);
  CHECK(g2.size() == 256);
  int idx[2];
  g2.decode(17, idx);  // row-major, axis 0 slowest
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 1);

  CHECK_THROWS_AS(Grid::regular(make_box(1, -1.0, 1.0), 1), InputError);
  CHECK_THROWS_AS(Grid::regular(make_box(1, 1.0, -1.0), 16), InputError);
}

TEST_CASE("discretized gaussian has unit mass and the right moments") {
  GridMeasure mu = gaussian1d(2048);
  validate(mu, true);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  Moments m = moments(mu);
  CHECK(std::abs(m.mean[0]) <= 1e-12);
  CHECK(m.covariance(0, 0) == doctest::Approx(1.0).epsilon(1e-4));

  CHECK_THROWS_AS(discretize(make_gaussian(1), make_box(1, -8.0, 8.0), 1), InputError);
}

TEST_CASE("validation rejects malformed weight vectors") {
  GridMeasure mu = gaussian1d(64);
  GridMeasure bad = mu;
  bad.weights[3] = -bad.weights[3];
  CHECK_THROWS_AS(validate(bad), InputError);
  bad = mu;
  bad.weights.pop_back();
  CHECK_THROWS_AS(validate(bad), GridError);
  bad = mu;
  bad.weights[5] += 0.1;
  CHECK_THROWS_AS(validate(bad), InputError);
}

TEST_CASE("relative entropy of a translated gaussian") {
  GridMeasure mu = gaussian1d(2048);
  GridMeasure nu = translate(mu, Vec::Constant(1, 0.5));
  // closed form for translates: |v|^2 / 2
  CHECK(relative_entropy(nu, mu) == doctest::Approx(0.125).epsilon(1e-3 / 0.125));
  CHECK(relative_entropy(mu, mu) == doctest::Approx(0.0).epsilon(1e-15));

  GridMeasure point = mu;
  for (double& w : point.weights) w = 0.0;
  point.weights[1024] = 1.0;
  GridMeasure zero_cell = mu;
  zero_cell.weights[1024] = 0.0;
  CHECK(std::isinf(relative_entropy(point, zero_cell)));
}

TEST_CASE("translate requires grid alignment and preserves weights") {
  GridMeasure mu = gaussian1d(512);
  const double dx = mu.grid.spacing[0];

  CHECK_THROWS_AS(translate(mu, Vec::Constant(1, 0.3 * dx)), AlignmentError);

  // compact support, so no mass leaves and no renormalization happens
  GridMeasure compact = testutil::density1d(
      mu.grid, [](double x) { return std::abs(x) < 4.0 ? std::exp(-0.5 * x * x) : 0.0; },
      "synthetic");
  GridMeasure fwd = translate(compact, Vec::Constant(1, 8.0 * dx));
  GridMeasure back = translate(fwd, Vec::Constant(1, -8.0 * dx));
  for (std::size_t i = 0; i < compact.weights.size(); ++i)
    CHECK(back.weights[i] == compact.weights[i]);  // bit-exact round trip

  // a shift that pushes visible mass outside the box must be refused
  CHECK_THROWS_AS(translate(mu, Vec::Constant(1, 6.0)), TruncationError);
}

TEST_CASE("perturbation enforces centering and renormalizes") {
  GridMeasure mu = gaussian1d(512);
  GridFunction raw = make_grid_function(mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  CHECK_THROWS_AS(perturb(mu, raw, 0.1), PerturbationError);

  GridFunction centered = make_grid_function(
      mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  double mean = mean_of(mu, centered);
  for (double& v : centered.values) v -= mean;
  GridMeasure nu = perturb(mu, centered, 0.1);
  validate(nu, true);
  CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  // first-order mass change cancels for centered g
  CHECK(relative_entropy(nu, mu) > 0.0);
}

TEST_CASE("variance against closed-form gaussian moments") {
  GridMeasure mu = gaussian1d(2048);
  GridFunction id = make_grid_function(mu.grid, [](const Vec& x) { return x[0]; });
  CHECK(variance_of(mu, id) == doctest::Approx(1.0).epsilon(1e-3));
  GridFunction sq = make_grid_function(mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  CHECK(variance_of(mu, sq) == doctest::Approx(2.0).epsilon(1e-2 / 2.0));
}

TEST_CASE("recentering aligns the mean up to half a cell") {
  GridMeasure mu = gaussian1d(512);
  GridMeasure nu = testutil::normal1d(mu.grid, 0.7, 0.9);
  RecenterResult rc = recenter(nu, mu);
  validate(rc.measure, false);
  Moments m = moments(rc.measure);
  Moments base = moments(mu);
  CHECK(std::abs(m.mean[0] - base.mean[0]) <= 0.5 * mu.grid.spacing[0] + 1e-12);
  CHECK(std::abs(rc.residual[0]) <= 0.5 * mu.grid.spacing[0] + 1e-12);
  const double steps = rc.shift[0] / mu.grid.spacing[0];
  CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-9));
}

TEST_CASE("dilation rescales moments") {
  GridMeasure mu = gaussian1d(1024);
  GridMeasure d = dilate(mu, 2.0);
  Moments m = moments(d);
  CHECK(m.covariance(0, 0) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK_THROWS_AS(dilate(mu, 0.0), InputError);
}

TEST_CASE("finite-difference gradient is exact on linear functions") {
  Grid g = grid1d(-2.0, 2.0, 64);
  std::vector<double> vals(g.size());
  for (int i = 0; i < 64; ++i) vals[i] = 3.0 * g.axis_coord(0, i) - 1.0;
  auto grad = fd_gradient(g, vals);
  for (const auto& v : grad) CHECK(v[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("csv round trip preserves weights exactly") {
  GridMeasure mu = gaussian1d(128);
  const std::string path =
      (std::filesystem::temp_directory_path() / "til_measure_roundtrip.csv").string();
  save_csv(mu, path);
  GridMeasure back = load_csv(path);
  REQUIRE(back.weights.size() == mu.weights.size());
  CHECK(back.grid.same_as(mu.grid));
  CHECK(back.source == mu.source);
  for (std::size_t i = 0; i < mu.weights.size(); ++i) CHECK(back.weights[i] == mu.weights[i]);
  std::remove(path.c_str());
}
