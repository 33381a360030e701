#include "til/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "til/errors.hpp"

namespace til {

namespace {

struct Solver {
  int ns, nt, nnode, root;
  long marcs;  // real arcs
  std::vector<double> cost;  // row-major real arc costs
  double art_cost;
  double mass_total;

  // rooted spanning tree
  std::vector<int> parent;
  std::vector<long> pred;  // arc to parent; >= marcs means artificial
  std::vector<double> tflow;  // flow on pred arc
  std::vector<double> pi;
  std::vector<int> head, sib, order;  // scratch for tree walks

  long arc_tail(long e) const {
    if (e < marcs) return static_cast<int>(e / nt);
    long k = e - marcs;
    return k < ns ? k : root;  // source->root, root->target
  }
  long arc_head(long e) const {
    if (e < marcs) return ns + static_cast<int>(e % nt);
    long k = e - marcs;
    return k < ns ? root : k;
  }
  double arc_cost(long e) const { return e < marcs ? cost[e] : art_cost; }

  double reduced(long e) const { return arc_cost(e) - pi[arc_tail(e)] + pi[arc_head(e)]; }

  // Rebuild depth-first order and potentials from the parent array.
  void refresh_potentials(std::vector<int>& depth) {
    std::fill(head.begin(), head.end(), -1);
    for (int w = 0; w < nnode; ++w) {
      if (w == root) continue;
      sib[w] = head[parent[w]];
      head[parent[w]] = w;
    }
    pi[root] = 0.0;
    depth[root] = 0;
    int top = 0;
    order[top++] = root;
    while (top > 0) {
      int p = order[--top];
      for (int c = head[p]; c >= 0; c = sib[c]) {
        long e = pred[c];
        if (arc_tail(e) == c)
          pi[c] = arc_cost(e) + pi[p];
        else
          pi[c] = pi[p] - arc_cost(e);
        depth[c] = depth[p] + 1;
        order[top++] = c;
      }
    }
  }
};

}  // namespace

NsResult network_simplex(const std::vector<double>& a, const std::vector<double>& b,
                         const Eigen::MatrixXd& C) {
  const int ns = static_cast<int>(a.size());
  const int nt = static_cast<int>(b.size());
  if (ns == 0 || nt == 0) throw InputError("network_simplex: empty marginal");
  if (C.rows() != ns || C.cols() != nt)
    throw SizeError("network_simplex: cost matrix shape does not match marginals");

  double sa = 0.0, sb = 0.0;
  for (double x : a) {
    if (!(x >= 0.0)) throw InputError("network_simplex: negative source mass");
    sa += x;
  }
  for (double x : b) {
    if (!(x >= 0.0)) throw InputError("network_simplex: negative target mass");
    sb += x;
  }
  if (std::abs(sa - sb) > 1e-9 * std::max(1.0, std::max(sa, sb)))
    throw MarginalError("network_simplex: total masses differ beyond 1e-9");

  Solver S;
  S.ns = ns;
  S.nt = nt;
  S.nnode = ns + nt + 1;
  S.root = ns + nt;
  S.marcs = static_cast<long>(ns) * nt;
  S.mass_total = 0.5 * (sa + sb);

  S.cost.resize(S.marcs);
  double cmax = 0.0;
  {
    long k = 0;
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j, ++k) {
        double cij = C(i, j);
        if (!std::isfinite(cij)) throw InputError("network_simplex: non-finite cost entry");
        S.cost[k] = cij;
        cmax = std::max(cmax, std::abs(cij));
      }
  }
  S.art_cost = (cmax + 1.0) * (ns + nt + 2);

  S.parent.assign(S.nnode, S.root);
  S.pred.assign(S.nnode, 0);
  S.tflow.assign(S.nnode, 0.0);
  S.pi.assign(S.nnode, 0.0);
  S.head.assign(S.nnode, -1);
  S.sib.assign(S.nnode, -1);
  S.order.assign(S.nnode, 0);

  // initial all-artificial basis
  const double scale = sb / sa;  // absorb the (tiny) mass mismatch on one side
  for (int i = 0; i < ns; ++i) {
    S.pred[i] = S.marcs + i;
    S.tflow[i] = a[i] * scale;
  }
  for (int j = 0; j < nt; ++j) {
    S.pred[ns + j] = S.marcs + ns + j;
    S.tflow[ns + j] = b[j];
  }
  S.parent[S.root] = -1;
  S.pred[S.root] = -1;

  std::vector<int> depth(S.nnode, 0);
  S.refresh_potentials(depth);

  const double enter_tol = 1e-12 * (cmax + 1.0);
  const long block =
      std::max<long>(64, static_cast<long>(std::lround(std::sqrt(static_cast<double>(S.marcs)))));
  const long max_pivots = std::max<long>(200000, 400L * (ns + nt));
  long next_arc = 0;
  long pivots = 0;
  long degenerate_streak = 0;
  bool bland = false;

  std::vector<long> path_u, path_v;
  path_u.reserve(64);
  path_v.reserve(64);

  while (true) {
    // entering arc: most negative reduced cost within a block sweep
    long enter = -1;
    double best = -enter_tol;
    if (!bland) {
      long scanned = 0;
      long k = next_arc;
      int i = static_cast<int>(k / nt), j = static_cast<int>(k % nt);
      while (scanned < S.marcs) {
        long stop = std::min<long>(block, S.marcs - scanned);
        for (long s = 0; s < stop; ++s) {
          double rc = S.cost[k] - S.pi[i] + S.pi[ns + j];
          if (rc < best) {
            best = rc;
            enter = k;
          }
          ++k;
          ++j;
          if (j == nt) {
            j = 0;
            ++i;
            if (i == ns) {
              i = 0;
              k = 0;
            }
          }
        }
        scanned += stop;
        if (enter >= 0) break;
      }
      next_arc = k;
    } else {
      long k = 0;
      for (int i = 0; i < ns && enter < 0; ++i)
        for (int j = 0; j < nt; ++j, ++k) {
          double rc = S.cost[k] - S.pi[i] + S.pi[ns + j];
          if (rc < -enter_tol) {
            enter = k;
            break;
          }
        }
    }
    if (enter < 0) break;

    if (++pivots > max_pivots)
      throw ConvergenceError("network_simplex: pivot limit exceeded");

    const int eu = static_cast<int>(enter / nt);
    const int ev = ns + static_cast<int>(enter % nt);

    // cycle: entering arc plus tree path between its endpoints
    path_u.clear();
    path_v.clear();
    int pu = eu, pv = ev;
    while (depth[pu] > depth[pv]) {
      path_u.push_back(pu);
      pu = S.parent[pu];
    }
    while (depth[pv] > depth[pu]) {
      path_v.push_back(pv);
      pv = S.parent[pv];
    }
    while (pu != pv) {
      path_u.push_back(pu);
      path_v.push_back(pv);
      pu = S.parent[pu];
      pv = S.parent[pv];
    }

    // push theta from eu across the entering arc to ev, back through the tree;
    // arcs traversed against their orientation limit theta
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;  // node whose pred arc leaves the basis
    for (int w : path_v)
      if (S.arc_tail(S.pred[w]) != w && S.tflow[w] < theta) {
        theta = S.tflow[w];
        leave = w;
      }
    for (int w : path_u)
      if (S.arc_tail(S.pred[w]) == w && S.tflow[w] < theta) {
        theta = S.tflow[w];
        leave = w;
      }
    if (leave < 0) throw NumericalError("network_simplex: unbounded pivot cycle");

    degenerate_streak = theta <= 0.0 ? degenerate_streak + 1 : 0;
    if (degenerate_streak > 4L * (ns + nt)) bland = true;

    for (int w : path_v) S.tflow[w] += S.arc_tail(S.pred[w]) == w ? theta : -theta;
    for (int w : path_u) S.tflow[w] += S.arc_tail(S.pred[w]) == w ? -theta : theta;

    // re-hang the detached subtree from the entering arc
    bool leave_on_u = false;
    for (int w : path_u)
      if (w == leave) leave_on_u = true;
    int z = leave_on_u ? eu : ev;       // endpoint inside the detached subtree
    int zp = leave_on_u ? ev : eu;      // endpoint that stays attached
    int node = z;
    int old_parent = S.parent[z];
    long old_arc = S.pred[z];
    double old_flow = S.tflow[z];
    S.parent[z] = zp;
    S.pred[z] = enter;
    S.tflow[z] = theta;
    while (node != leave) {
      int nxt = old_parent;
      int save_parent = S.parent[nxt];
      long save_arc = S.pred[nxt];
      double save_flow = S.tflow[nxt];
      S.parent[nxt] = node;
      S.pred[nxt] = old_arc;
      S.tflow[nxt] = old_flow;
      node = nxt;
      old_parent = save_parent;
      old_arc = save_arc;
      old_flow = save_flow;
    }
    S.refresh_potentials(depth);
  }

  // assemble plan and certify
  NsResult R;
  R.iterations = pivots;
  double primal = 0.0;
  double art_residual = 0.0;
  for (int w = 0; w < S.nnode; ++w) {
    if (w == S.root) continue;
    long e = S.pred[w];
    double f = S.tflow[w];
    if (e < S.marcs) {
      if (f > 0.0) {
        int i = static_cast<int>(e / nt);
        int j = static_cast<int>(e % nt);
        R.plan.push_back({i, j, f});
        primal += f * S.cost[e];
      }
    } else {
      art_residual = std::max(art_residual, f);
    }
  }
  if (art_residual > 1e-9 * std::max(1.0, S.mass_total))
    throw ConvergenceError("network_simplex: artificial flow remains in the optimal basis");

  std::sort(R.plan.begin(), R.plan.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });

  R.u.resize(ns);
  R.v.resize(nt);
  for (int i = 0; i < ns; ++i) R.u[i] = S.pi[i];
  for (int j = 0; j < nt; ++j) R.v[j] = -S.pi[ns + j];

  double delta = 0.0;  // worst reduced cost over real arcs
  {
    long k = 0;
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j, ++k)
        delta = std::min(delta, S.cost[k] - R.u[i] - R.v[j]);
  }
  if (delta < 0.0) {
    // shift u so that u_i + v_j <= C_ij holds exactly; keeps dual feasible
    for (int i = 0; i < ns; ++i) R.u[i] += delta;
  }
  double dual = 0.0;
  for (int i = 0; i < ns; ++i) dual += R.u[i] * a[i];
  for (int j = 0; j < nt; ++j) dual += R.v[j] * b[j];

  R.primal = primal;
  R.dual = dual;
  R.gap = primal - dual;
  return R;
}

}  // namespace til
