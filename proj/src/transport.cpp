#include "bipstab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "bipstab/errors.hpp"

namespace bipstab {

namespace {

// Dense network simplex on the bipartite transportation graph.
//
// Nodes: sources 0..n-1, sinks n..n+m-1. Arc id a = i*m + j runs from source i
// to sink n + j; the cost matrix is row-major so a indexes C.data() directly.
//
// The basis is the northwest-corner spanning tree rooted at source 0. With the
// tie rule "move down", every zero-flow basic arc points toward the root, so
// the initial tree is strongly feasible when all weights are positive; the
// leaving arc is then chosen as the last blocking arc met when traversing the
// pivot cycle along its orientation from the apex, which keeps the tree
// strongly feasible and bounds degenerate runs. The entering arc comes from a
// cyclic block search (most negative reduced cost within a block, lowest index
// on ties). A long degenerate stall switches to Bland's rule, which cannot
// cycle, until progress resumes. Tree updates re-hang only the cut subtree;
// potentials drift-correct with a periodic full recompute.
class NetworkSimplex {
 public:
  NetworkSimplex(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 const CostMatrix& C)
      : a_(a),
        b_(b),
        C_(C),
        n_(static_cast<int>(a.size())),
        m_(static_cast<int>(b.size())),
        V_(n_ + m_),
        A_(static_cast<long long>(n_) * m_),
        in_tree_(static_cast<size_t>(A_), 0),
        parent_(V_, -1),
        parent_slot_(V_, -1),
        depth_(V_, 0),
        pot_(V_, 0.0L),
        pot_d_(V_, 0.0),
        first_child_(V_, -1),
        next_sib_(V_, -1),
        prev_sib_(V_, -1),
        stack_(V_, 0) {
    const double max_c = C_.size() > 0 ? C_.cwiseAbs().maxCoeff() : 0.0;
    enter_tol_ = 1e-12 * (1.0 + max_c);
    block_size_ = std::max<long long>(
        64, static_cast<long long>(std::sqrt(static_cast<double>(A_))));
    stall_limit_ = 32LL * V_ + 64;
  }

  void solve() {
    init_northwest();
    refresh_tree_from_slots();
    const long long max_pivots = 2000LL * V_ + 2000000LL;
    const long long refresh_every = 4LL * V_ + 64;
    long long pivots = 0;
    long long degenerate_run = 0;
    long long since_refresh = 0;
    bool bland = false;
    while (true) {
      const long long e = bland ? find_entering_bland() : find_entering_block();
      if (e < 0) break;
      const double delta = pivot(e);
      if (delta == 0.0) {
        if (++degenerate_run > stall_limit_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (++since_refresh >= refresh_every) {
        refresh_potentials();
        since_refresh = 0;
      }
      if (++pivots > max_pivots)
        throw std::runtime_error("network simplex exceeded pivot budget");
    }
    refresh_potentials();  // long-double pass tightens the dual certificate
  }

  TransportPlan extract_plan() const {
    TransportPlan plan;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(slot_arc_.size());
    long double primal = 0.0L;
    for (size_t s = 0; s < slot_arc_.size(); ++s) {
      const long long a = slot_arc_[s];
      const double x = slot_flow_[s];
      if (x <= 0.0) continue;
      const int i = static_cast<int>(a / m_);
      const int j = static_cast<int>(a % m_);
      trip.emplace_back(i, j, x);
      primal += static_cast<long double>(x) * C_(i, j);
    }
    plan.coupling.resize(n_, m_);
    plan.coupling.setFromTriplets(trip.begin(), trip.end());
    plan.primal_cost = static_cast<double>(primal);
    plan.dual_u.resize(n_);
    plan.dual_v.resize(m_);
    for (int i = 0; i < n_; ++i) plan.dual_u[i] = static_cast<double>(pot_[i]);
    for (int j = 0; j < m_; ++j)
      plan.dual_v[j] = static_cast<double>(-pot_[n_ + j]);
    plan.solver_tag = "exact";
    plan.converged = true;
    return plan;
  }

 private:
  int src_of(long long a) const { return static_cast<int>(a / m_); }
  int dst_of(long long a) const { return n_ + static_cast<int>(a % m_); }

  void init_northwest() {
    slot_arc_.clear();
    slot_flow_.clear();
    slot_arc_.reserve(V_ - 1);
    slot_flow_.reserve(V_ - 1);
    int i = 0;
    int j = 0;
    double ra = a_[0];
    double rb = b_[0];
    while (true) {
      const bool last = (i == n_ - 1) && (j == m_ - 1);
      double t = last ? 0.5 * (ra + rb) : std::min(ra, rb);
      t = std::max(t, 0.0);
      const long long arc = static_cast<long long>(i) * m_ + j;
      slot_arc_.push_back(arc);
      slot_flow_.push_back(t);
      in_tree_[static_cast<size_t>(arc)] = 1;
      if (last) break;
      ra -= t;
      rb -= t;
      bool move_down;
      if (i == n_ - 1)
        move_down = false;
      else if (j == m_ - 1)
        move_down = true;
      else
        move_down = (ra <= rb);  // ties move down: keeps the tree strongly feasible
      if (move_down) {
        ++i;
        ra = a_[i];
      } else {
        ++j;
        rb = b_[j];
      }
    }
  }

  void attach_child(int v, int p) {
    prev_sib_[v] = -1;
    next_sib_[v] = first_child_[p];
    if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = v;
    first_child_[p] = v;
    parent_[v] = p;
  }

  void detach_child(int v) {
    const int p = parent_[v];
    if (p < 0) return;
    if (prev_sib_[v] >= 0)
      next_sib_[prev_sib_[v]] = next_sib_[v];
    else
      first_child_[p] = next_sib_[v];
    if (next_sib_[v] >= 0) prev_sib_[next_sib_[v]] = prev_sib_[v];
    prev_sib_[v] = next_sib_[v] = -1;
  }

  // Full reconstruction of parents/children/depths/potentials from the slots.
  void refresh_tree_from_slots() {
    std::vector<std::vector<std::pair<int, int>>> adj(V_);
    for (size_t s = 0; s < slot_arc_.size(); ++s) {
      const long long a = slot_arc_[s];
      adj[src_of(a)].push_back({dst_of(a), static_cast<int>(s)});
      adj[dst_of(a)].push_back({src_of(a), static_cast<int>(s)});
    }
    std::fill(first_child_.begin(), first_child_.end(), -1);
    std::fill(next_sib_.begin(), next_sib_.end(), -1);
    std::fill(prev_sib_.begin(), prev_sib_.end(), -1);
    std::vector<char> seen(V_, 0);
    int top = 0;
    stack_[top++] = 0;
    seen[0] = 1;
    parent_[0] = -1;
    parent_slot_[0] = -1;
    depth_[0] = 0;
    pot_[0] = 0.0L;
    while (top > 0) {
      const int v = stack_[--top];
      for (const auto& [w, s] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_slot_[w] = s;
        attach_child(w, v);
        depth_[w] = depth_[v] + 1;
        const long long a = slot_arc_[s];
        const long double c = C_.data()[a];
        pot_[w] = (w >= n_) ? pot_[v] - c : pot_[v] + c;
        stack_[top++] = w;
      }
    }
    for (int v = 0; v < V_; ++v) pot_d_[v] = static_cast<double>(pot_[v]);
  }

  // Recomputes potentials (only) along the existing tree in long double.
  void refresh_potentials() {
    pot_[0] = 0.0L;
    int top = 0;
    stack_[top++] = 0;
    while (top > 0) {
      const int v = stack_[--top];
      for (int w = first_child_[v]; w >= 0; w = next_sib_[w]) {
        const long double c = C_.data()[slot_arc_[parent_slot_[w]]];
        pot_[w] = (w >= n_) ? pot_[v] - c : pot_[v] + c;
        stack_[top++] = w;
      }
    }
    for (int v = 0; v < V_; ++v) pot_d_[v] = static_cast<double>(pot_[v]);
  }

  long long find_entering_block() {
    const long long blocks = (A_ + block_size_ - 1) / block_size_;
    for (long long pass = 0; pass < blocks; ++pass) {
      const long long blk = (cursor_block_ + pass) % blocks;
      const long long lo = blk * block_size_;
      const long long hi = std::min(lo + block_size_, A_);
      double best = -enter_tol_;
      long long best_arc = -1;
      int i = static_cast<int>(lo / m_);
      int j = static_cast<int>(lo % m_);
      double pot_i = pot_d_[i];
      const double* crow = C_.data();
      for (long long a = lo; a < hi; ++a) {
        const double rc = crow[a] - pot_i + pot_d_[n_ + j];
        if (rc < best && !in_tree_[static_cast<size_t>(a)]) {
          best = rc;
          best_arc = a;
        }
        if (++j == m_) {
          j = 0;
          pot_i = pot_d_[++i];
        }
      }
      if (best_arc >= 0) {
        cursor_block_ = (blk + 1) % blocks;
        return best_arc;
      }
    }
    return -1;
  }

  long long find_entering_bland() const {
    int i = 0;
    int j = 0;
    double pot_i = pot_d_[0];
    const double* crow = C_.data();
    for (long long a = 0; a < A_; ++a) {
      const double rc = crow[a] - pot_i + pot_d_[n_ + j];
      if (rc < -enter_tol_ && !in_tree_[static_cast<size_t>(a)]) return a;
      if (++j == m_) {
        j = 0;
        if (i + 1 < n_) pot_i = pot_d_[++i];
      }
    }
    return -1;
  }

  // Pushes flow around the cycle closed by arc e and re-hangs the cut
  // subtree; returns the pivot step.
  double pivot(long long e) {
    const int u0 = src_of(e);
    const int v0 = dst_of(e);
    u_path_.clear();
    v_path_.clear();
    int x = u0;
    int z = v0;
    while (depth_[x] > depth_[z]) {
      u_path_.push_back(x);
      x = parent_[x];
    }
    while (depth_[z] > depth_[x]) {
      v_path_.push_back(z);
      z = parent_[z];
    }
    while (x != z) {
      u_path_.push_back(x);
      x = parent_[x];
      v_path_.push_back(z);
      z = parent_[z];
    }

    // Cycle orientation: apex -> u0 (descending) -> e -> v0 -> apex (climbing).
    // A child on the u-side rides against the cycle when it is a source; on
    // the v-side when it is a sink.
    double delta = std::numeric_limits<double>::infinity();
    int leave_node = -1;
    bool leave_on_u_side = false;
    // u-side traversal order from the apex is the reverse of the climb, so
    // scanning the climb forward and keeping the FIRST min-ratio arc found
    // yields the last blocking arc of that segment; on the v-side the climb
    // order is the traversal order, so keep the LAST (>= relaxes to latest).
    for (int c : u_path_) {
      if (c >= n_) continue;  // sink child: forward on the u-side
      const double f = slot_flow_[parent_slot_[c]];
      if (f < delta) {
        delta = f;
        leave_node = c;
        leave_on_u_side = true;
      }
    }
    for (int c : v_path_) {
      if (c < n_) continue;  // source child: forward on the v-side
      const double f = slot_flow_[parent_slot_[c]];
      if (f <= delta) {
        delta = f;
        leave_node = c;
        leave_on_u_side = false;
      }
    }
    if (leave_node < 0)
      throw std::runtime_error("transport pivot found no blocking arc");

    for (int c : u_path_) {
      const int s = parent_slot_[c];
      if (c >= n_)
        slot_flow_[s] += delta;
      else
        slot_flow_[s] = std::max(0.0, slot_flow_[s] - delta);
    }
    for (int c : v_path_) {
      const int s = parent_slot_[c];
      if (c < n_)
        slot_flow_[s] += delta;
      else
        slot_flow_[s] = std::max(0.0, slot_flow_[s] - delta);
    }
    slot_flow_[parent_slot_[leave_node]] = 0.0;

    // The entering arc replaces the leaving arc's slot; the subtree that was
    // hanging below the cut re-roots at the entering endpoint inside it.
    const int slot = parent_slot_[leave_node];
    const double rc_e = C_.data()[e] - pot_d_[u0] + pot_d_[n_ + (e % m_)];
    in_tree_[static_cast<size_t>(slot_arc_[slot])] = 0;
    slot_arc_[slot] = e;
    slot_flow_[slot] = delta;
    in_tree_[static_cast<size_t>(e)] = 1;

    const int r_sub = leave_on_u_side ? u0 : v0;
    const int r_other = leave_on_u_side ? v0 : u0;
    // Reverse parents along r_sub -> ... -> leave_node.
    chain_nodes_.clear();
    chain_slots_.clear();
    for (int c = r_sub; c != leave_node; c = parent_[c]) {
      chain_nodes_.push_back(c);
      chain_slots_.push_back(parent_slot_[c]);
    }
    chain_nodes_.push_back(leave_node);
    for (size_t k = 0; k < chain_nodes_.size(); ++k) detach_child(chain_nodes_[k]);
    attach_child(r_sub, r_other);
    parent_slot_[r_sub] = slot;
    for (size_t k = 0; k + 1 < chain_nodes_.size(); ++k) {
      attach_child(chain_nodes_[k + 1], chain_nodes_[k]);
      parent_slot_[chain_nodes_[k + 1]] = chain_slots_[k];
    }

    // Potentials in the re-hung subtree shift by a common constant chosen so
    // the entering arc's reduced cost vanishes; depths follow the new parents.
    const double shift = (r_sub == u0) ? rc_e : -rc_e;
    const long double shift_l = static_cast<long double>(shift);
    int top = 0;
    depth_[r_sub] = depth_[r_other] + 1;
    pot_[r_sub] += shift_l;
    pot_d_[r_sub] = static_cast<double>(pot_[r_sub]);
    stack_[top++] = r_sub;
    while (top > 0) {
      const int v = stack_[--top];
      for (int w = first_child_[v]; w >= 0; w = next_sib_[w]) {
        depth_[w] = depth_[v] + 1;
        pot_[w] += shift_l;
        pot_d_[w] = static_cast<double>(pot_[w]);
        stack_[top++] = w;
      }
    }
    return delta;
  }

  const Eigen::VectorXd& a_;
  const Eigen::VectorXd& b_;
  const CostMatrix& C_;
  const int n_;
  const int m_;
  const int V_;
  const long long A_;

  std::vector<long long> slot_arc_;
  std::vector<double> slot_flow_;
  std::vector<char> in_tree_;
  std::vector<int> parent_;
  std::vector<int> parent_slot_;
  std::vector<int> depth_;
  std::vector<long double> pot_;
  std::vector<double> pot_d_;
  std::vector<int> first_child_;
  std::vector<int> next_sib_;
  std::vector<int> prev_sib_;
  std::vector<int> stack_;
  std::vector<int> u_path_;
  std::vector<int> v_path_;
  std::vector<int> chain_nodes_;
  std::vector<int> chain_slots_;

  double enter_tol_ = 1e-12;
  long long block_size_ = 64;
  long long cursor_block_ = 0;
  long long stall_limit_ = 0;
};

}  // namespace

Eigen::VectorXd TransportPlan::row_sums() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(coupling.rows());
  for (int k = 0; k < coupling.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(coupling, k); it; ++it)
      r[it.row()] += it.value();
  return r;
}

Eigen::VectorXd TransportPlan::col_sums() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(coupling.cols());
  for (int k = 0; k < coupling.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(coupling, k); it; ++it)
      c[it.col()] += it.value();
  return c;
}

double TransportPlan::dual_objective(const Eigen::VectorXd& source_w,
                                     const Eigen::VectorXd& target_w) const {
  return dual_u.dot(source_w) + dual_v.dot(target_w);
}

TransportPlan solve_transport(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const CostMatrix& C) {
  if (a.size() != C.rows() || b.size() != C.cols())
    throw DimensionMismatch("cost matrix does not match marginal sizes");
  if (std::abs(a.sum() - b.sum()) > 1e-9)
    throw UnbalancedWeights("marginal masses differ beyond 1e-9");
  NetworkSimplex simplex(a, b, C);
  simplex.solve();
  return simplex.extract_plan();
}

TransportPlan exact_ot(const ParticleMeasure& source, const ParticleMeasure& target,
                       const DistanceLikeCost& cost, Eigen::Index instance_cap) {
  if (source.size() * target.size() > instance_cap)
    throw InstanceTooLarge("transport instance exceeds the entry cap");
  CostMatrix C = cost_matrix(cost, source, target);
  if (!C.allFinite())
    throw InvalidMeasure("cost matrix has non-finite entries");
  return solve_transport(source.weights, target.weights, C);
}

double quantile_coupling_cost(const ParticleMeasure& source,
                              const ParticleMeasure& target, double p) {
  if (source.dim() != 1 || target.dim() != 1)
    throw DimensionMismatch("quantile coupling requires 1D measures");
  if (p < 1.0) throw ConfigError("quantile coupling requires p >= 1");
  const Eigen::Index n = source.size();
  const Eigen::Index m = target.size();
  std::vector<Eigen::Index> ia(n), ib(m);
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::sort(ia.begin(), ia.end(), [&](Eigen::Index l, Eigen::Index r) {
    return source.points(l, 0) < source.points(r, 0);
  });
  std::sort(ib.begin(), ib.end(), [&](Eigen::Index l, Eigen::Index r) {
    return target.points(l, 0) < target.points(r, 0);
  });

  long double cost = 0.0L;
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double ra = source.weights[ia[0]];
  double rb = target.weights[ib[0]];
  while (i < n && j < m) {
    const double t = std::min(ra, rb);
    if (t > 0.0) {
      const double d = std::abs(source.points(ia[i], 0) - target.points(ib[j], 0));
      cost += static_cast<long double>(t) *
              (p == 1.0 ? d : (p == 2.0 ? d * d : std::pow(d, p)));
    }
    ra -= t;
    rb -= t;
    if (ra <= rb) {
      ++i;
      if (i < n) ra = source.weights[ia[i]];
    } else {
      ++j;
      if (j < m) rb = target.weights[ib[j]];
    }
  }
  return static_cast<double>(cost);
}

double w1_1d_oracle(const ParticleMeasure& source, const ParticleMeasure& target,
                    double p) {
  const double c = quantile_coupling_cost(source, target, p);
  return p == 1.0 ? c : std::pow(c, 1.0 / p);
}

namespace {

double log_sum_exp(const Eigen::ArrayXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf
  return m + std::log((v - m).exp().sum());
}

}  // namespace

TransportPlan sinkhorn(const ParticleMeasure& source, const ParticleMeasure& target,
                       const DistanceLikeCost& cost, const SinkhornOptions& opts) {
  if (opts.epsilon <= 0.0) throw ConfigError("sinkhorn requires epsilon > 0");

  // Zero-weight particles carry no mass; drop them from the iteration.
  std::vector<Eigen::Index> ia, ib;
  for (Eigen::Index i = 0; i < source.size(); ++i)
    if (source.weights[i] > 0.0) ia.push_back(i);
  for (Eigen::Index j = 0; j < target.size(); ++j)
    if (target.weights[j] > 0.0) ib.push_back(j);
  const Eigen::Index n = static_cast<Eigen::Index>(ia.size());
  const Eigen::Index m = static_cast<Eigen::Index>(ib.size());

  Eigen::MatrixXd sub_a(n, source.dim()), sub_b(m, target.dim());
  Eigen::VectorXd wa(n), wb(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    sub_a.row(i) = source.points.row(ia[i]);
    wa[i] = source.weights[ia[i]];
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    sub_b.row(j) = target.points.row(ib[j]);
    wb[j] = target.weights[ib[j]];
  }
  ParticleMeasure msub_a{sub_a, wa}, msub_b{sub_b, wb};
  CostMatrix C = cost_matrix(cost, msub_a, msub_b);

  const double eps = opts.epsilon;
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(m);
  Eigen::ArrayXd loga = wa.array().log();
  Eigen::ArrayXd logb = wb.array().log();

  bool converged = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i)
      f[i] = -eps * log_sum_exp((g - C.row(i).transpose().array()) / eps + logb);
    for (Eigen::Index j = 0; j < m; ++j)
      g[j] = -eps * log_sum_exp((f - C.col(j).array()) / eps + loga);
    // Column marginals are exact after the g-update; check the rows.
    double violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row =
          std::exp(log_sum_exp((f[i] + g - C.row(i).transpose().array()) / eps +
                               loga[i] + logb));
      violation += std::abs(row - wa[i]);
    }
    if (violation <= opts.tol) {
      converged = true;
      break;
    }
  }

  TransportPlan plan;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n * m));
  long double primal = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double pij =
          std::exp((f[i] + g[j] - C(i, j)) / eps + loga[i] + logb[j]);
      if (pij > 0.0) {
        trip.emplace_back(static_cast<int>(ia[i]), static_cast<int>(ib[j]), pij);
        primal += static_cast<long double>(pij) * C(i, j);
      }
    }
  }
  plan.coupling.resize(source.size(), target.size());
  plan.coupling.setFromTriplets(trip.begin(), trip.end());
  plan.primal_cost = static_cast<double>(primal);
  plan.dual_u = Eigen::VectorXd::Zero(source.size());
  plan.dual_v = Eigen::VectorXd::Zero(target.size());
  for (Eigen::Index i = 0; i < n; ++i) plan.dual_u[ia[i]] = f[i];
  for (Eigen::Index j = 0; j < m; ++j) plan.dual_v[ib[j]] = g[j];
  plan.solver_tag = converged ? "sinkhorn" : "sinkhorn(max_iter_exceeded)";
  plan.converged = converged;
  return plan;
}

IpmValue ipm_value(const ParticleMeasure& source, const ParticleMeasure& target,
                   const DistanceLikeCost& cost, Eigen::Index instance_cap) {
  IpmValue out;
  out.mode = cost.is_metric ? IpmMode::exact : IpmMode::upper_bound;
  if (source.dim() == 1 && cost.kind == DistanceLikeCost::Kind::norm_power) {
    // Closed-form exact OT for convex 1D ground costs.
    out.value = quantile_coupling_cost(source, target, cost.power);
    return out;
  }
  out.value = exact_ot(source, target, cost, instance_cap).primal_cost;
  return out;
}

CouplingCostEstimate coupling_cost(const Eigen::MatrixXd& xs,
                                   const Eigen::MatrixXd& ys,
                                   const DistanceLikeCost& cost) {
  if (xs.rows() != ys.rows() || xs.cols() != ys.cols())
    throw DimensionMismatch("coupled samples must pair up");
  const Eigen::Index k = xs.rows();
  Eigen::VectorXd c(k);
  for (Eigen::Index r = 0; r < k; ++r)
    c[r] = cost(xs.row(r).transpose(), ys.row(r).transpose());
  const double mean = c.mean();
  double var = 0.0;
  if (k > 1) var = (c.array() - mean).square().sum() / static_cast<double>(k - 1);
  return CouplingCostEstimate{mean, std::sqrt(var / static_cast<double>(k))};
}

void write_plan_csv(const TransportPlan& plan, std::ostream& os) {
  os << "i,j,mass\n";
  for (int k = 0; k < plan.coupling.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(plan.coupling, k); it; ++it)
      os << it.row() << "," << it.col() << "," << format_double(it.value())
         << "\n";
}

}  // namespace bipstab
