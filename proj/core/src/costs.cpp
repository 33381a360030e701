#include "til/costs.hpp"

#include <cmath>

#include "til/errors.hpp"

namespace til {

double f_remainder(double t) {
  if (t <= -1.0) throw DomainError("f_remainder: t must exceed -1");
  return t - std::log1p(t);
}

double f_remainder_derivative(double t) {
  if (t <= -1.0) throw DomainError("f_remainder_derivative: t must exceed -1");
  return t / (1.0 + t);
}

double capped_quadratic(double t) {
  if (t < 0.0) throw DomainError("capped_quadratic: t must be nonnegative");
  return std::min(t * t, t);
}

CostSpec CostSpec::bregman(std::shared_ptr<const PotentialSpec> V) {
  CostSpec s;
  s.kind_ = Kind::bregman;
  s.potential_ = std::move(V);
  return s;
}

CostSpec CostSpec::capped(double h) {
  if (h < 0.0) throw DomainError("CostSpec::capped: h must be nonnegative");
  CostSpec s;
  s.kind_ = Kind::capped_quadratic;
  s.h_ = h;
  return s;
}

CostSpec CostSpec::combined(std::shared_ptr<const PotentialSpec> V, double h, double c) {
  if (h < 0.0 || c < 0.0) throw DomainError("CostSpec::combined: h, c must be >= 0");
  CostSpec s;
  s.kind_ = Kind::combined;
  s.potential_ = std::move(V);
  s.h_ = h;
  s.c_ = c;
  return s;
}

CostSpec CostSpec::quadratic(double lambda) {
  CostSpec s;
  s.kind_ = Kind::quadratic;
  s.lambda_ = lambda;
  return s;
}

CostSpec CostSpec::l1() {
  CostSpec s;
  s.kind_ = Kind::l1;
  return s;
}

CostSpec CostSpec::euclidean_p(double p) {
  if (p <= 0.0) throw DomainError("CostSpec::euclidean_p: p must be positive");
  CostSpec s;
  s.kind_ = Kind::euclidean_p;
  s.p_ = p;
  return s;
}

double bregman_cost(const PotentialSpec& spec, const Vec& x, const Vec& y) {
  return spec.value_oracle(y) - spec.value_oracle(x) -
         spec.gradient_oracle(x).dot(y - x);
}

double CostSpec::operator()(const Vec& x, const Vec& y) const {
  switch (kind_) {
    case Kind::bregman:
      return bregman_cost(*potential_, x, y);
    case Kind::capped_quadratic:
      return capped_quadratic(h_ * (y - x).norm());
    case Kind::combined:
      return bregman_cost(*potential_, x, y) +
             c_ * capped_quadratic(h_ * (y - x).norm());
    case Kind::quadratic:
      return 0.5 * lambda_ * (y - x).squaredNorm();
    case Kind::l1:
      return (y - x).cwiseAbs().sum();
    case Kind::euclidean_p:
      return std::pow((y - x).norm(), p_);
  }
  throw Error("CostSpec: unreachable");
}

CostMatrix cost_matrix(const CostSpec& cost, const GridMeasure& source,
                       const GridMeasure& target) {
  const std::size_t ns = source.grid.size(), nt = target.grid.size();
  if (static_cast<double>(ns) * static_cast<double>(nt) > 4e7)
    throw SizeError(
        "cost_matrix: " + std::to_string(ns * nt) +
        " entries exceed the dense budget; use the entropic solver on the fly");

  CostMatrix C;
  C.source_grid = source.grid;
  C.target_grid = target.grid;
  C.values.resize(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));
  // 1D fast path: scalar coordinates, no Vec churn.
  if (source.grid.dimension() == 1 && target.grid.dimension() == 1) {
    Vec x(1), y(1);
    for (std::size_t i = 0; i < ns; ++i) {
      x[0] = source.grid.axis_coord(0, static_cast<int>(i));
      for (std::size_t j = 0; j < nt; ++j) {
        y[0] = target.grid.axis_coord(0, static_cast<int>(j));
        C.values(i, j) = cost(x, y);
      }
    }
    return C;
  }
  for (std::size_t i = 0; i < ns; ++i) {
    const Vec x = source.grid.point(i);
    for (std::size_t j = 0; j < nt; ++j)
      C.values(i, j) = cost(x, target.grid.point(j));
  }
  return C;
}

CostSpec cost_from_config(const nlohmann::json& j,
                          std::shared_ptr<const PotentialSpec> V, double h_auto) {
  if (!j.is_object() || !j.contains("cost") || !j["cost"].is_string())
    throw ConfigError("cost_from_config: need a table with a 'cost' string");
  const std::string kind = j["cost"].get<std::string>();
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("cost_from_config: ") + key);
    return j[key].get<double>();
  };
  auto h_of = [&]() {
    if (j.contains("h") && j["h"].is_string()) {
      if (j["h"].get<std::string>() != "auto")
        throw ConfigError("cost_from_config: h must be a number or \"auto\"");
      return h_auto;
    }
    return num("h", h_auto);
  };
  if (kind == "bregman") {
    if (!V) throw ConfigError("cost_from_config: bregman cost needs a potential");
    return CostSpec::bregman(std::move(V));
  }
  if (kind == "capped_quadratic") return CostSpec::capped(h_of());
  if (kind == "combined") {
    if (!V) throw ConfigError("cost_from_config: combined cost needs a potential");
    return CostSpec::combined(std::move(V), h_of(), num("c", 1.0));
  }
  if (kind == "quadratic") return CostSpec::quadratic(num("lambda", 1.0));
  if (kind == "l1") return CostSpec::l1();
  if (kind == "euclidean_p") return CostSpec::euclidean_p(num("p", 2.0));
  throw ConfigError("cost_from_config: unknown cost kind '" + kind + "'");
}

GridFunction inf_convolution(const GridFunction& g, const CostSpec& cost,
                             const GridMeasure& mu) {
  const std::size_t n = mu.grid.size();
  if (g.values.size() != n) throw GridError("inf_convolution: size mismatch");
  if (static_cast<double>(n) * static_cast<double>(n) > 4e7)
    throw SizeError("inf_convolution: pair count exceeds the dense budget");
  for (double v : g.values)
    if (!std::isfinite(v)) throw InputError("inf_convolution: non-finite g");

  GridFunction q;
  q.values.assign(n, 0.0);
  std::vector<Vec> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = mu.grid.point(i);
  for (std::size_t j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = g.values[i] + cost(pts[i], pts[j]);
      if (v < best) best = v;
    }
    q.values[j] = best;
  }
  return q;
}

}  // namespace til
