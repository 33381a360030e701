#pragma once

#include <Eigen/Dense>
#include <vector>

namespace til {

struct PlanEntry {
  int i, j;
  double mass;
};

struct NsResult {
  std::vector<PlanEntry> plan;  // basic arcs with positive flow
  double primal = 0.0;          // plan cost
  double dual = 0.0;            // certified dual objective (after feasibility shift)
  double gap = 0.0;             // primal - dual, nonnegative up to roundoff
  std::vector<double> u, v;     // dual potentials, u_i + v_j <= C_ij + shift
  long iterations = 0;
};

// Transportation problem min <pi, C> s.t. pi 1 = a, pi^T 1 = b, pi >= 0 on the
// dense bipartite graph, solved by primal network simplex with a block pivot
// rule and an artificial root basis.  Costs may be negative.  The returned gap
// is a genuine weak-duality certificate: the reported dual value is feasible
// after shifting by the worst reduced cost, so primal - dual bounds the
// distance to optimality.
NsResult network_simplex(const std::vector<double>& a, const std::vector<double>& b,
                         const Eigen::MatrixXd& C);

}  // namespace til
