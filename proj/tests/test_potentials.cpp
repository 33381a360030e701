#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "support.hpp"
#include "til/errors.hpp"
#include "til/potentials.hpp"
#include "til/rng.hpp"

using namespace til;

namespace {

Vec pt(double x) { return Vec::Constant(1, x); }

// central difference of the value oracle, step scaled to the point
double fd_grad(const PotentialSpec& s, double x) {
  const double h = 1e-4 * (1.0 + std::abs(x));
  return (s.value_oracle(pt(x + h)) - s.value_oracle(pt(x - h))) / (2.0 * h);
}

}  // namespace

TEST_CASE("closed-form oracles at pinned points") {
  PotentialSpec g = make_gaussian(1);
  EvalResult e = evaluate(g, pt(2.0));
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.gradient[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.hessian(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  PotentialSpec q = make_quadratic_plus_quartic(1, 1.0, 1.0);
  EvalResult eq = evaluate(q, pt(1.0));
  CHECK(eq.value == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(eq.gradient[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eq.hessian(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK_THROWS_AS(evaluate(g, pt(std::numeric_limits<double>::quiet_NaN())), InputError);
}

TEST_CASE("gradient oracles agree with finite differences of the value") {
  std::vector<PotentialSpec> specs;
  specs.push_back(make_gaussian(1));
  specs.push_back(make_gaussian(1, 1.3));
  specs.push_back(make_quadratic_plus_quartic(1, 1.0, 1.0));
  specs.push_back(make_even_power(1, 4));
  specs.push_back(make_perturbed(make_gaussian(1), 0.3, 2.0));

  Rng rng(91);
  for (const auto& s : specs) {
    for (int k = 0; k < 40; ++k) {
      const double x = rng.uniform(-3.0, 3.0);
      const double g = s.gradient_oracle(pt(x))[0];
      const double fd = fd_grad(s, x);
      CHECK(std::abs(g - fd) <= 1e-5 * (1.0 + std::abs(g)));
    }
  }
}

TEST_CASE("hessian oracles agree with finite differences of the gradient") {
  PotentialSpec q = make_quadratic_plus_quartic(1, 0.5, 2.0);
  Rng rng(17);
  for (int k = 0; k < 30; ++k) {
    const double x = rng.uniform(-2.5, 2.5);
    const double h = 1e-5 * (1.0 + std::abs(x));
    const double fd =
        (q.gradient_oracle(pt(x + h))[0] - q.gradient_oracle(pt(x - h))[0]) / (2.0 * h);
    CHECK(q.hessian_oracle(pt(x))(0, 0) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("even power family edge behavior at the origin") {
  PotentialSpec p2 = make_even_power(1, 2);
  CHECK(p2.hessian_oracle(pt(0.0))(0, 0) == doctest::Approx(1.0));
  PotentialSpec p4 = make_even_power(1, 4);
  CHECK(p4.hessian_oracle(pt(0.0))(0, 0) == doctest::Approx(0.0));
  CHECK(p4.gradient_oracle(pt(0.0))[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(make_even_power(1, 3), InputError);
  CHECK_THROWS_AS(make_even_power(1, 0), InputError);
}

TEST_CASE("declared curvature metadata") {
  CHECK(*make_gaussian(1).curvature_lower_bound == doctest::Approx(1.0));
  CHECK(*make_gaussian(1, 2.0).curvature_lower_bound == doctest::Approx(0.25));
  CHECK(*make_quadratic_plus_quartic(1, 1.0, 1.0).curvature_lower_bound == doctest::Approx(1.0));
  CHECK_FALSE(make_even_power(1, 4).curvature_lower_bound.has_value());

  // amplitude * frequency^2 below the base curvature keeps the declaration
  PotentialSpec mild = make_perturbed(make_gaussian(1), 0.2, 1.0);
  CHECK(mild.declared_convex);
  CHECK(*mild.curvature_lower_bound == doctest::Approx(0.8));
  PotentialSpec wild = make_perturbed(make_gaussian(1), 1.5, 2.0);
  CHECK_FALSE(wild.declared_convex);
}

TEST_CASE("convexity probe separates convex from perturbed potentials") {
  Rng rng(5);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 200; ++k)
    pairs.emplace_back(pt(rng.uniform(-3.0, 3.0)), pt(rng.uniform(-3.0, 3.0)));

  ConvexityReport cg = convexity_probe(make_gaussian(1), pairs);
  CHECK(cg.pass);
  CHECK(cg.min_ratio >= 1.0 - 1e-9);

  ConvexityReport cq = convexity_probe(make_quadratic_plus_quartic(1, 1.0, 1.0), pairs);
  CHECK(cq.pass);

  // amplitude 1.5 at frequency 2 dips the second derivative to 1 - 6 < 0
  ConvexityReport cp = convexity_probe(make_perturbed(make_gaussian(1), 1.5, 2.0), pairs);
  CHECK_FALSE(cp.pass);
  CHECK(cp.min_ratio < 0.0);

  CHECK_THROWS_AS(convexity_probe(make_gaussian(1), {}), InputError);
}

TEST_CASE("integrability probe measures mass and detects clipping") {
  PotentialSpec g = make_gaussian(1);
  IntegrabilityReport r = integrability_probe(g, make_box(1, -10.0, 10.0), 4096);
  CHECK(r.mass_integral == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-6));
  CHECK(r.second_moment_integral / r.mass_integral == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.gradient_square_integral / r.mass_integral == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.truncation_estimate <= 1e-8);

  CHECK_THROWS_AS(integrability_probe(g, make_box(1, -1.0, 1.0), 4096), TruncationWarning);
  CHECK_THROWS_AS(integrability_probe(g, make_box(1, -10.0, 10.0), 32), InputError);
}

TEST_CASE("potential config round trip") {
  PotentialSpec g = potential_from_config({{"family", "gaussian"}, {"dimension", 1}});
  CHECK(g.name == "gaussian");
  CHECK(g.value_oracle(pt(2.0)) == doctest::Approx(2.0));

  PotentialSpec q = potential_from_config(
      {{"family", "quadratic_plus_quartic"}, {"a", 1.0}, {"b", 1.0}, {"dimension", 1}});
  CHECK(q.value_oracle(pt(1.0)) == doctest::Approx(0.75));

  PotentialSpec p = potential_from_config(
      {{"family", "perturbed"}, {"amplitude", 0.2}, {"frequency", 1.0}, {"dimension", 1}});
  CHECK(p.declared_convex);

  CHECK_THROWS_AS(potential_from_config({{"dimension", 1}}), ConfigError);
  CHECK_THROWS_AS(potential_from_config({{"family", "cauchy"}}), ConfigError);
  CHECK_THROWS_AS(potential_from_config({{"family", "gaussian"}, {"dimension", 0}}), ConfigError);
}
