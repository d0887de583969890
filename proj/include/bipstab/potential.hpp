// Likelihood potentials packaged with the envelope functions that bound
// exp(-phi) from above and below, plus local Lipschitz data. Envelopes are
// executable metadata: the bound assembly integrates them against particle
// clouds rather than reasoning about them symbolically.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "bipstab/costs.hpp"
#include "bipstab/particle_measure.hpp"

namespace bipstab {

using PotentialFn =
    std::function<double(const Eigen::VectorXd& u, const Eigen::VectorXd& y)>;
using DataFn = std::function<double(const Eigen::VectorXd& y)>;
using JointFn =
    std::function<double(const Eigen::VectorXd& u, const Eigen::VectorXd& y)>;

struct ForwardMap {
  enum class Kind { tanh_saturating, linear_operator, linear_on_unit_box };
  Kind kind = Kind::tanh_saturating;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g_map;
  double operator_norm_bound = std::numeric_limits<double>::quiet_NaN();
  int input_dim = 0;
  int output_dim = 0;
};

// (tanh(u_1), ..., tanh(u_d)); |G(u)| <= sqrt(d).
ForwardMap tanh_forward(int d);
// u -> A u with the operator norm computed from A.
ForwardMap linear_forward(const Eigen::MatrixXd& A);
// Same map, flagged as restricted to [0,1]^d (compact-domain envelopes).
ForwardMap linear_forward_on_box(const Eigen::MatrixXd& A);

// Envelope sandwich:  -log f(u) - log g(y) <= phi(u; y) <= -log h(u, y).
struct Potential {
  PotentialFn phi;
  ScalarFn envelope_f;   // positive growth envelope in u
  DataFn envelope_g;     // positive data envelope
  JointFn envelope_h;    // positive lower envelope of exp(-phi)
  std::optional<LipschitzField> lipschitz_L;
  ScalarFn data_lipschitz_b;  // optional; |phi(u;y)-phi(u;y')| <= b(u)|y-y'|
  std::optional<double> data_ball_radius;
  std::string name;
  std::shared_ptr<const ForwardMap> forward;  // set for residual potentials
  double sigma = 0.0;
};

// phi(u; y) = |G(u) - y|^2 / (2 sigma^2) with envelopes keyed to the forward
// map: the tanh map gives constant f, g and h = exp(-(d+|y|^2)/sigma^2) with a
// constant-in-(u,v) Lipschitz field; bounded linear maps give a Gaussian-tail
// h and a norm-sum Lipschitz field. Throws MissingEnvelope when the map
// carries no boundedness metadata.
Potential gaussian_residual_potential(const ForwardMap& fwd, double sigma);

// Installs the data-Lipschitz envelope b(u) = (|G(u)| + |y| + r)/sigma^2 valid
// on the ball of radius r around y.
Potential with_data_ball(Potential pot, const Eigen::VectorXd& y, double radius);

// phi frozen at a fixed data vector.
ScalarFn at_data(const Potential& pot, const Eigen::VectorXd& y);

// Pointwise f v f', g v g', h ^ h' used when two potentials must share one
// envelope triple.
struct MergedEnvelopes {
  ScalarFn f;
  DataFn g;
  JointFn h;
};
MergedEnvelopes merge_envelopes(const Potential& a, const Potential& b);

// Spot check of the sandwich at every particle; throws InvalidMeasure with
// diagnostics on violation.
void check_envelope_sandwich(const Potential& pot, const ParticleMeasure& m,
                             const Eigen::VectorXd& y, double rel_tol = 1e-9);

}  // namespace bipstab
