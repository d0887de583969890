// Discrete optimal transport between particle measures with arbitrary
// distance-like costs. The exact solver is a dense network simplex over the
// bipartite transportation graph; a 1D quantile coupling serves as an
// independent oracle, and a log-domain Sinkhorn covers larger instances.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "bipstab/costs.hpp"
#include "bipstab/particle_measure.hpp"

namespace bipstab {

struct TransportPlan {
  Eigen::SparseMatrix<double> coupling;  // n x m, nonnegative entries
  double primal_cost = 0.0;
  Eigen::VectorXd dual_u;  // length n
  Eigen::VectorXd dual_v;  // length m
  std::string solver_tag;
  bool converged = true;

  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd col_sums() const;
  double dual_objective(const Eigen::VectorXd& source_w,
                        const Eigen::VectorXd& target_w) const;
};

inline constexpr Eigen::Index kDefaultInstanceCap = 4096LL * 4096LL;

// Exact optimal transport by network simplex. Marginals must agree within
// 1e-9; flat instances above the entry cap are rejected.
TransportPlan exact_ot(const ParticleMeasure& source, const ParticleMeasure& target,
                       const DistanceLikeCost& cost,
                       Eigen::Index instance_cap = kDefaultInstanceCap);

// Solves min <C, P> over couplings of (a, b) for an explicit cost matrix.
// Exposed for tests that need full control of the instance.
TransportPlan solve_transport(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const CostMatrix& C);

// Transport cost sum_k mass_k |x_(k) - y_(k)|^p of the 1D quantile coupling,
// which is the optimal coupling for convex |.|^p, p >= 1.
double quantile_coupling_cost(const ParticleMeasure& source,
                              const ParticleMeasure& target, double p);

// W_p between 1D measures: quantile_coupling_cost^(1/p).
double w1_1d_oracle(const ParticleMeasure& source, const ParticleMeasure& target,
                    double p);

struct SinkhornOptions {
  double epsilon = 1e-2;
  int max_iter = 10000;
  double tol = 1e-9;  // L1 marginal violation
};

// Entropic-regularized plan, always iterated in the log domain. On hitting the
// iteration cap the best iterate is returned with converged = false.
TransportPlan sinkhorn(const ParticleMeasure& source, const ParticleMeasure& target,
                       const DistanceLikeCost& cost, const SinkhornOptions& opts);

enum class IpmMode { exact, upper_bound, coupling };

struct IpmValue {
  double value = 0.0;
  IpmMode mode = IpmMode::upper_bound;
};

// Lipschitz-ball IPM of the cost: the OT value, flagged exact when the cost is
// a metric (Kantorovich duality) and upper_bound otherwise. 1D instances with
// |u-v|^p costs are routed through the closed-form quantile coupling.
IpmValue ipm_value(const ParticleMeasure& source, const ParticleMeasure& target,
                   const DistanceLikeCost& cost,
                   Eigen::Index instance_cap = kDefaultInstanceCap);

struct CouplingCostEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo cost of an explicit coupling given as paired rows; an upper
// bound on the OT cost between the empirical marginals.
CouplingCostEstimate coupling_cost(const Eigen::MatrixXd& xs,
                                   const Eigen::MatrixXd& ys,
                                   const DistanceLikeCost& cost);

// Plan export: rows "i,j,mass" with indices 0-based.
void write_plan_csv(const TransportPlan& plan, std::ostream& os);

}  // namespace bipstab
