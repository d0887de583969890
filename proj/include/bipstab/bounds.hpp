// Monte-Carlo assembly of the stability bounds: likelihood perturbations
// (envelope and explicit-evidence variants), data perturbations, prior
// perturbations through the adapted cost, the product-prior coupling bound,
// and the empirical-measure rate envelope.
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "bipstab/potential.hpp"
#include "bipstab/transport.hpp"

namespace bipstab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Conjugate exponents with 1/p + 1/q = 1 (1/inf = 0).
struct HolderPair {
  double p = kInf;
  double q = 1.0;
};
void validate(const HolderPair& h);

struct LpNorm {
  double value = 0.0;
  double std_error = 0.0;  // zero for p = inf (support max, no MC error)
};

// ( sum_i w_i |fn(u_i)|^p )^(1/p) with a delta-method standard error; for
// p = inf the max over particles.
LpNorm lp_norm_under_prior(const ScalarFn& fn, const ParticleMeasure& prior,
                           double p);

// Self-normalized evidence estimate z = sum_i w_i exp(-phi(u_i)) with its
// Monte-Carlo standard error.
struct EvidenceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
EvidenceEstimate evidence_with_se(const ParticleMeasure& prior,
                                  const ScalarFn& phi_at_y);

struct BoundReport {
  std::string label;
  double lhs_estimate = 0.0;
  IpmMode lhs_mode = IpmMode::exact;
  double rhs_value = 0.0;
  std::map<std::string, double> rhs_components;
  std::map<std::string, double> mc_standard_errors;  // includes "combined"
  bool satisfied = false;
  double margin = 0.0;  // rhs + 3 se - lhs

  std::string to_json_line() const;
};

// Finalizes satisfied/margin from lhs, rhs and the combined standard error.
void finalize_report(BoundReport& report);

// Posterior discrepancy under a likelihood swap, bounded by
//   2 g~(y)^2 |f~ c(.,0)|_p |f~|_p / |h~(.,y)|_1^2 * |phi - phi'|_q
// with the envelope triple merged pointwise across the two potentials.
BoundReport likelihood_bound_rhs(const Potential& phi, const Potential& phi_prime,
                                 const ParticleMeasure& prior,
                                 const DistanceLikeCost& cost,
                                 const HolderPair& holder,
                                 const Eigen::VectorXd& y);

// Evidence-explicit variant:
//   g~ |f~ c(.,0)|_p [ z + g~ |f~|_p ] / (z z') * |phi - phi'|_q.
BoundReport likelihood_bound_rhs_explicit(
    const Potential& phi, const Potential& phi_prime, const ParticleMeasure& prior,
    const DistanceLikeCost& cost, const HolderPair& holder,
    const Eigen::VectorXd& y, const EvidenceEstimate& z_hat,
    const EvidenceEstimate& z_prime_hat);

// Data perturbation within the ball of radius r around y. The report's rhs is
// the Lipschitz variant (|b|_q |y - y'|) when phi carries a data-Lipschitz
// envelope, else the direct |phi(.;y) - phi(.;y')|_q variant; both appear in
// the components.
BoundReport data_perturbation_bound(const Potential& phi,
                                    const ParticleMeasure& prior,
                                    const DistanceLikeCost& cost,
                                    const HolderPair& holder,
                                    const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& y_prime, double radius);

struct PriorBoundReports {
  BoundReport envelope;    // h-denominator form
  BoundReport explicit_z;  // evidence-explicit form
};

// Prior perturbation: the discrepancy of the priors is measured in the
// adapted cost c_y, either by exact OT (upper bound) or, when coupled sample
// pairs are supplied, by the Monte-Carlo cost of that explicit coupling.
PriorBoundReports prior_bound_rhs(
    const Potential& phi, const ParticleMeasure& prior,
    const ParticleMeasure& prior_star, const DistanceLikeCost& cost,
    const Eigen::VectorXd& y,
    const std::optional<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>&
        coupling_pairs = std::nullopt);

// Closed-form coupling bound for product priors sharing coefficient law eta:
//   2^((1 v (2s-1))/2 + 1) (m_2s + m*_2s)^(1/2)
//     (W2(eta,eta*)^2 sum lambda + sum lambda |x_j - x*_j|^2
//        + sum (sqrt(lambda) - sqrt(lambda*))^2 )^(1/2).
double product_coupling_bound(const Eigen::VectorXd& lambdas,
                              const Eigen::VectorXd& lambdas_star,
                              const Eigen::VectorXd& basis_gram_diffs,
                              double w2_eta, double s, double moment_2s,
                              double moment_2s_star);

// Dimension-dependent empirical-measure rate bracket (constant-free):
//   N^(-1/2) + N^(-1/3)                d < 4
//   N^(-1/2) log(1+N) + N^(-1/3)       d = 4
//   N^(-2/d) + N^(-1/3)                d > 4
double fournier_rate_envelope(int d, double N, double moment3);

}  // namespace bipstab
