// Distance-like cost functions: positive, symmetric, vanishing exactly on the
// diagonal, but not necessarily triangle inequalities. Costs carry structural
// metadata so pairwise cost matrices can be assembled with Eigen broadcasts
// instead of per-pair callbacks.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>

#include "bipstab/particle_measure.hpp"

namespace bipstab {

// Local Lipschitz field L(u, v; y) of a potential. Structured kinds keep the
// adapted-cost assembly vectorizable; `generic` is the escape hatch.
struct LipschitzField {
  enum class Kind {
    constant_of_y,  // L = c0 + c1 * |y|, constant in (u, v)
    norm_sum_of_y,  // L = k * (|u| + |v| + |y|)
    generic
  };
  Kind kind = Kind::constant_of_y;
  double c0 = 0.0;
  double c1 = 0.0;
  double k = 0.0;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&,
                       const Eigen::VectorXd&)>
      generic;
  // True when L(.,.;y) depends on y only through |y| and is nondecreasing in it.
  bool y_norm_monotone = true;
  // Optional explicit maximizer of L over the data ball of radius r.
  std::function<Eigen::VectorXd(double)> ball_maximizer;

  double eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
              const Eigen::VectorXd& y) const;
};

LipschitzField constant_lipschitz_field(double c0, double c1 = 0.0);
LipschitzField norm_sum_lipschitz_field(double k);

// Replaces the y argument with the sup over the data ball B_r(0); with r = 0
// the field is pinned at the supplied data vector. Throws NotMonotone when the
// field declares no monotonicity and no maximizer rule.
LipschitzField uniform_over_data_ball(const LipschitzField& field, double radius,
                                      const Eigen::VectorXd& data_y);

struct DistanceLikeCost;

// Ingredients of the likelihood-adapted cost
//   c_y(u,v) = [1 v c(u,0) v c(v,0)] * [f(u) v f(v)] * [1 v L(u,v;y)] * c(u,v).
struct AdaptedCostSpec {
  std::shared_ptr<const DistanceLikeCost> base;
  ScalarFn growth_f;       // the envelope f; null means f == 1
  LipschitzField lipschitz;
  Eigen::VectorXd data_y;
};

struct DistanceLikeCost {
  enum class Kind {
    norm_power,  // |u - v|^p
    growth,      // (offset + |u| + |v|)^power * |u - v|
    adapted,
    generic
  };
  Kind kind = Kind::generic;
  double power = 1.0;
  double offset = 0.0;
  bool is_metric = false;
  double weak_triangle_constant = 1.0;
  std::string description;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> generic_eval;
  std::shared_ptr<const AdaptedCostSpec> adapted;

  double operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  // c(u, 0) with 0 the origin of the coordinate space.
  double to_origin(const Eigen::VectorXd& u) const;
};

// c(u,v) = |u - v|^p for p >= 1; a metric iff p == 1.
DistanceLikeCost norm_cost(double p_power);

// c(u,v) = (|u| + |v|)^s |u - v| for s >= 0; a metric iff s == 0.
// Weak triangle constant 2^(1 v (2s-1)).
DistanceLikeCost weighted_growth_cost(double s);

// c(u,v) = (offset + |u| + |v|)^power |u - v|; generalizes the growth cost.
DistanceLikeCost offset_growth_cost(double offset, double power);

// Config-key registry: "norm_p" -> norm_cost(param), "growth_s" ->
// weighted_growth_cost(param). The "adapted" key is resolved by the caller
// that owns a potential; it is rejected here.
DistanceLikeCost cost_from_config(const std::string& name, double param);

DistanceLikeCost adapted_cost(AdaptedCostSpec spec);

// Dense pairwise cost matrix C(i, j) = c(a_i, b_j). Row-major so that the OT
// solver's flat arc ids walk contiguously.
using CostMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
CostMatrix cost_matrix(const DistanceLikeCost& cost, const ParticleMeasure& a,
                       const ParticleMeasure& b);

}  // namespace bipstab
