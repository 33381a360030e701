#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <vector>

#include "support.hpp"
#include "til/battery.hpp"
#include "til/errors.hpp"
#include "til/harness.hpp"

using namespace til;
using testutil::gaussian1d;
using testutil::normal_pdf;

namespace {

double bump(double u) {
  const double u2 = u * u;
  return u2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u2)) : 0.0;
}

GridMeasure mixture384() {
  return testutil::density1d(testutil::grid1d(-8.0, 8.0, 384), [](double x) {
    return 0.6 * normal_pdf(x, -0.8, 0.75) + 0.4 * normal_pdf(x, 1.2, 0.85);
  });
}

}  // namespace

TEST_CASE("entropy dominates the bregman transport cost") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(384);

  InequalityReport self = check_transport_entropy(V, mu, mu);
  CHECK(self.statement_id == "prop1");
  CHECK(self.details["comparison"] == "inequality");
  CHECK(std::abs(self.margin) <= 1e-9);
  CHECK(self.pass);

  GridMeasure nu = translate(mu, Vec::Constant(1, 0.5));
  InequalityReport shift = check_transport_entropy(V, mu, nu);
  CHECK(shift.lhs == doctest::Approx(0.125).epsilon(2e-2));
  CHECK(std::abs(shift.margin) <= 2e-3);  // translates are the equality case
  CHECK(shift.pass);

  GridMeasure wide = testutil::normal1d(mu.grid, 0.0, 1.2);
  InequalityReport dil = check_transport_entropy(V, mu, wide);
  CHECK(dil.margin > 0.012);
  CHECK(dil.margin < 0.023);  // H - W = 0.0377 - 0.02 for this dilation
  CHECK(dil.pass);
}

TEST_CASE("remainder multiple is positive and scans monotonically") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(384);
  InequalityReport r = check_remainder(V, mu, mixture384(), {0.25, 1.0});
  CHECK(r.statement_id == "thm2");
  CHECK(r.pass);
  REQUIRE(r.empirical_constant.has_value());
  CHECK(*r.empirical_constant > 0.0);
  CHECK(r.details["h"].get<double>() > 0.0);
  CHECK(r.details["c_scan"].size() == 2);
  CHECK(r.details["c_scan_monotone"].get<bool>());
  CHECK(r.details.contains("recenter_shift"));

  InequalityReport vac = check_remainder(V, mu, mu, {1.0});
  CHECK(vac.pass);
  CHECK(vac.details["vacuous"].get<bool>());
}

TEST_CASE("one dimensional identity decomposition") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(2048);
  GridMeasure nu = testutil::normal1d(mu.grid, 0.3, 1.2);
  InequalityReport r = check_mainbound_identity_1d(V, mu, nu);
  CHECK(r.statement_id == "mainbound");
  CHECK(r.details["comparison"] == "identity");
  CHECK(r.margin <= 1e-3);
  CHECK(r.pass);
  CHECK(r.details["remainder_term"].get<double>() >= 0.0);
  CHECK(r.details["transport_term"].get<double>() == doctest::Approx(0.065).epsilon(0.2));
  CHECK(r.details["excluded_mass"].get<double>() <= 1e-6);
}

TEST_CASE("deficit is invariant under target translation") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(512);
  GridMeasure nu = testutil::density1d(mu.grid, [](double x) {
    return 0.5 * normal_pdf(x, -0.5, 0.8) + 0.5 * normal_pdf(x, 0.6, 0.7);
  });
  InequalityReport r = check_translation_invariance(V, mu, nu, {0.25, -0.25});
  CHECK(r.statement_id == "translation");
  CHECK(r.details["comparison"] == "identity");
  CHECK(r.margin <= 2e-3);
  CHECK(r.pass);
  CHECK(r.details["sweep"].size() == 2);
}

TEST_CASE("talagrand inequality under a curvature bound") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(512);

  GridMeasure nu = translate(mu, Vec::Constant(1, 0.5));
  InequalityReport eq = check_talagrand(V, mu, nu, 1.0);
  CHECK(eq.statement_id == "talagrand");
  CHECK(std::abs(eq.margin) <= 2e-3);
  CHECK(eq.pass);
  CHECK(eq.details["w2"].get<double>() == doctest::Approx(0.5).epsilon(1e-2));

  GridMeasure wide = testutil::normal1d(mu.grid, 0.0, 1.2);
  InequalityReport strict = check_talagrand(V, mu, wide, 1.0);
  CHECK(strict.margin > 0.01);
  CHECK(strict.margin < 0.025);

  CHECK_THROWS_AS(check_talagrand(V, mu, nu, 2.0), InputError);
}

TEST_CASE("dual bound on exponential moments") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(1024);

  GridFunction zero = make_grid_function(mu.grid, [](const Vec&) { return 0.0; });
  InequalityReport rz = check_dual_infconv(V, mu, zero);
  CHECK(rz.statement_id == "ic");
  CHECK(std::abs(rz.margin) <= 1e-12);
  CHECK(rz.pass);

  GridFunction c = make_grid_function(mu.grid, [](const Vec&) { return 2.5; });
  InequalityReport rc = check_dual_infconv(V, mu, c);
  CHECK(std::abs(rc.margin) <= 1e-9 * std::exp(2.5));
  CHECK(rc.pass);

  // linear g saturates the bound for a quadratic potential
  GridFunction lin = make_grid_function(mu.grid, [](const Vec& x) { return x[0]; });
  InequalityReport rl = check_dual_infconv(V, mu, lin);
  CHECK(rl.margin >= -1e-6);
  CHECK(rl.margin <= 2e-2);
  CHECK(rl.pass);
}

TEST_CASE("variance bound with inverse hessian weights") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(1024);
  GridFunction sq = make_grid_function(mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  InequalityReport r = check_bl_variance(V, mu, sq);
  CHECK(r.statement_id == "bl");
  CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(r.rhs == doctest::Approx(4.0).epsilon(1e-2));
  CHECK(r.margin == doctest::Approx(2.0).epsilon(5e-2 / 2.0));
  CHECK(r.pass);

  // g = V' is the equality case
  PotentialSpec Q = make_quadratic_plus_quartic(1, 1.0, 1.0);
  GridMeasure mq = testutil::quartic1d(1024);
  GridFunction vp = make_grid_function(
      mq.grid, [](const Vec& x) { return x[0] + x[0] * x[0] * x[0]; });
  InequalityReport re = check_bl_variance(Q, mq, vp);
  CHECK(re.margin / re.rhs <= 1e-3);
  CHECK(re.pass);
}

TEST_CASE("reinforced variance bound finds a positive strengthening") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(512);
  GridFunction sq = make_grid_function(mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  InequalityReport r = check_rbl(V, mu, sq);
  CHECK(r.statement_id == "rbl");
  CHECK(r.pass);
  REQUIRE(r.empirical_constant.has_value());
  // for the gaussian with g = x^2 the sharp strengthening is pi/2
  CHECK(*r.empirical_constant == doctest::Approx(M_PI / 2.0).epsilon(0.02));

  GridFunction lin = make_grid_function(mu.grid, [](const Vec& x) { return x[0]; });
  InequalityReport rl = check_rbl(V, mu, lin);
  CHECK(rl.pass);
  CHECK(rl.details["degenerate_input"].get<bool>());
}

TEST_CASE("variance deficit dominates explicit remainders") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(2048);
  GridFunction sq = make_grid_function(mu.grid, [](const Vec& x) { return x[0] * x[0]; });
  InequalityReport r = check_qbl(V, mu, sq);
  CHECK(r.statement_id == "qbl");
  CHECK(r.pass);
  CHECK(r.details["deficit"].get<double>() == doctest::Approx(2.0).epsilon(5e-2 / 2.0));
  CHECK(r.details["ratio1"].get<double>() >= 1.0 - 1e-6);
  CHECK(r.details["ratio2"].get<double>() >= 1.0 - 1e-6);
  CHECK(r.details["ratio3"].get<double>() >= 1.0 - 1e-6);

  // affine images of V' span the zero-deficit directions
  PotentialSpec Q = make_quadratic_plus_quartic(1, 1.0, 1.0);
  GridMeasure mq = testutil::quartic1d(1024);
  GridFunction ext = make_grid_function(
      mq.grid, [](const Vec& x) { return 0.7 * (x[0] + x[0] * x[0] * x[0]) + 0.3; });
  InequalityReport rext = check_qbl(Q, mq, ext);
  CHECK(rext.pass);
  double g_sq = 0.0;
  for (std::size_t i = 0; i < mq.weights.size(); ++i)
    g_sq += mq.weights[i] * ext.values[i] * ext.values[i];
  CHECK(rext.details["g0_l2_sq"].get<double>() <= 1e-6 * g_sq);
}

TEST_CASE("perturbation rate against quadratic target and entropy envelope") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(4096);
  GridFunction g = make_grid_function(mu.grid, [](const Vec& x) {
    return std::sin(3.0 * x[0]) * bump(x[0] / 3.5);
  });
  InequalityReport r = check_linearization(V, mu, g, {0.1, 0.03, 0.01});
  CHECK(r.statement_id == "linearization");
  CHECK(r.details["solver"] == "quantile_monge");
  CHECK(r.details["envelope_ok"].get<bool>());
  CHECK(r.details["sweep"].size() == 3);
  CHECK(r.details["target_bound"].get<double>() > 0.0);
  CHECK(r.margin >= 0.0);
  CHECK(r.pass);

  GridFunction zero = make_grid_function(mu.grid, [](const Vec&) { return 0.0; });
  InequalityReport rz = check_linearization(V, mu, zero, {0.1, 0.01});
  CHECK(rz.pass);
  CHECK(rz.details["target_bound"].get<double>() == 0.0);
}

TEST_CASE("oscillation bound with the explicit constant") {
  GridMeasure mu = gaussian1d(1024);

  GridFunction lin = make_grid_function(mu.grid, [](const Vec& x) { return x[0]; });
  InequalityReport r = check_bh(mu, lin);
  CHECK(r.statement_id == "bh");
  CHECK(r.margin > 0.0);
  CHECK(r.pass);
  REQUIRE(r.empirical_constant.has_value());
  CHECK(*r.empirical_constant > 0.0);
  CHECK(*r.empirical_constant < 192.0);

  GridFunction c = make_grid_function(mu.grid, [](const Vec&) { return 1.0; });
  InequalityReport rc = check_bh(mu, c);
  CHECK(rc.margin == 0.0);
  CHECK(rc.pass);
  CHECK_FALSE(rc.empirical_constant.has_value());
}

TEST_CASE("affine invariance of variance and dirichlet forms") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(512);
  auto g = [](const Vec& x) { return x[0] * x[0]; };

  AffineMap dilation{Mat::Identity(1, 1) * 2.0, Vec::Zero(1)};
  InequalityReport rd = check_affine_invariance(V, mu, g, dilation);
  CHECK(rd.statement_id == "affine");
  CHECK(rd.margin <= 1e-3);
  CHECK(rd.pass);
  CHECK(rd.details["dirichlet"].get<double>() > 0.0);

  AffineMap shift{Mat::Identity(1, 1), Vec::Constant(1, 1.0)};
  InequalityReport rs = check_affine_invariance(V, mu, g, shift);
  CHECK(rs.margin <= 1e-3);
  CHECK(rs.pass);
}

TEST_CASE("equality holds exactly at translates of convex potentials") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(256);
  std::vector<GridMeasure> candidates;
  candidates.push_back(translate(mu, Vec::Constant(1, 0.5)));
  candidates.push_back(testutil::density1d(mu.grid, [](double x) {
    return 0.5 * normal_pdf(x, -1.0, 0.7) + 0.5 * normal_pdf(x, 1.2, 0.65);
  }));
  InequalityReport r = check_equality_characterization(V, mu, candidates);
  CHECK(r.statement_id == "equality");
  CHECK(r.pass);
  CHECK(r.margin > 0.0);
  CHECK(r.details["candidates"][0]["is_translate"].get<bool>());
  CHECK(r.details["candidates"][0]["expected_equality"].get<bool>());
  CHECK_FALSE(r.details["candidates"][1]["is_translate"].get<bool>());

  // without convexity even the identity develops a nonzero deficit: the
  // bregman cost turns negative and transport profits from the wells
  PotentialSpec W = make_perturbed(make_gaussian(1), 1.5, 1.0);
  GridMeasure mw = discretize(W, make_box(1, -8.0, 8.0), 256);
  std::vector<GridMeasure> self{mw};
  InequalityReport rw = check_equality_characterization(W, mw, self);
  CHECK(rw.pass);
  CHECK(rw.details["candidates"][0]["is_translate"].get<bool>());
  CHECK_FALSE(rw.details["candidates"][0]["expected_equality"].get<bool>());
}

TEST_CASE("quadratic deficit controls the capped remainder forms") {
  PotentialSpec V = make_gaussian(1);
  GridMeasure mu = gaussian1d(384);
  InequalityReport r = check_gaussian_remainder(V, mu, mixture384(), 1.0);
  CHECK(r.statement_id == "qT");
  CHECK(r.pass);
  REQUIRE(r.empirical_constant.has_value());
  CHECK(*r.empirical_constant > 0.0);
  CHECK(r.details["h"].get<double>() > 0.0);
  CHECK(r.details["w1"].get<double>() > 0.0);
  // in one dimension the euclidean and coordinatewise distances coincide
  CHECK(std::abs(r.details["w1_vs_w11_over_sqrt_n"].get<double>()) <= 1e-9);
  CHECK(r.details["min_form"].get<double>() >= 0.0);
  CHECK(r.details["fil_remainder"].get<double>() >= 0.0);
}

TEST_CASE("parallel for covers every index once and propagates errors") {
  const long n = 1000;
  std::vector<long> slot(n, -1);
  parallel_for(n, [&](long i) { slot[i] = i; });
  for (long i = 0; i < n; ++i) CHECK(slot[i] == i);

  parallel_for(0, [&](long) { CHECK(false); });

  std::atomic<int> calls{0};
  CHECK_THROWS_AS(parallel_for(64,
                               [&](long i) {
                                 calls.fetch_add(1);
                                 if (i == 5) throw InputError("boom");
                               }),
                  InputError);
  CHECK(calls.load() >= 1);
}

TEST_CASE("battery runs are deterministic for a fixed config") {
  nlohmann::json j = {{"battery", {"talagrand"}}, {"resolution", 256}, {"seed", 3}};
  RunConfig cfg = run_config_from_json(j);
  RunManifest a = run_battery(cfg);
  RunManifest b = run_battery(cfg);
  CHECK(a.passed > 0);
  CHECK(a.failed == 0);
  CHECK(a.all_pass());
  CHECK(!a.config_digest.empty());
  CHECK(a.config_digest == b.config_digest);
  CHECK(manifest_json(a).dump() == manifest_json(b).dump());

  const std::string csv = reports_csv(a.reports);
  CHECK(csv.rfind("statement_id,instance,lhs,rhs,margin,tolerance,pass,empirical_constant",
                  0) == 0);
  const std::string md = manifest_markdown(a);
  CHECK(md.find("statement") != std::string::npos);
  CHECK(md.find("talagrand") != std::string::npos);

  RunConfig empty = cfg;
  empty.battery.clear();
  CHECK_THROWS_AS(run_battery(empty), ConfigError);
  RunConfig unknown = cfg;
  unknown.battery = {"no_such_statement"};
  CHECK_THROWS_AS(run_battery(unknown), ConfigError);

  CHECK(battery_has("prop1"));
  CHECK_FALSE(battery_has("no_such_statement"));
  const auto& ids = battery_statement_ids();
  CHECK(ids.size() == 19);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
}
