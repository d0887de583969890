// Weighted particle clouds standing in for probability measures on R^d,
// plus Bayes reweighting and moment estimation on top of them.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>

#include "bipstab/seed.hpp"

namespace bipstab {

// One particle per row of `points`; `weights` are nonnegative and sum to one
// (within 1e-12 relative). Treated as immutable after construction.
struct ParticleMeasure {
  Eigen::MatrixXd points;   // n x d
  Eigen::VectorXd weights;  // n

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

inline constexpr double kWeightSumRelTol = 1e-12;

// Throws InvalidMeasure on any violated invariant.
void validate(const ParticleMeasure& m);

ParticleMeasure make_measure(Eigen::MatrixXd points, Eigen::VectorXd weights);

// Equal-weight cloud from a point matrix.
ParticleMeasure make_equal_weight(Eigen::MatrixXd points);

// Single unit-mass particle.
ParticleMeasure dirac(const Eigen::VectorXd& point);

// n i.i.d. standard normal points in R^dim, equal weights.
ParticleMeasure sample_standard_gaussian(Eigen::Index dim, Eigen::Index n,
                                         SeedSpec seed);

// Scalar evaluator over particle rows.
using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

// Integral of f against the measure: sum_i w_i f(x_i).
double weighted_moment(const ParticleMeasure& m, const ScalarFn& f);

// Same integrand with a Monte-Carlo standard error for the weighted mean
// (self-normalized importance-sampling variance estimate).
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
MomentEstimate weighted_moment_se(const ParticleMeasure& m, const ScalarFn& f);

// Bayes reweighting: posterior weight_i ∝ w_i * exp(-phi(x_i)), normalized in
// log space. Returns the posterior (same points) and the self-normalized
// evidence estimate z_hat = sum_i w_i exp(-phi(x_i)).
// Throws AllWeightsUnderflow when every exp(-phi) vanishes.
std::pair<ParticleMeasure, double> reweight(const ParticleMeasure& prior,
                                            const ScalarFn& phi);

// Weighted mean vector and covariance matrix of the cloud.
Eigen::VectorXd mean(const ParticleMeasure& m);
Eigen::MatrixXd covariance(const ParticleMeasure& m);

// CSV block: header "w,x1,...,xd", one row per particle, 17 significant digits.
void write_csv(const ParticleMeasure& m, std::ostream& os);
ParticleMeasure read_csv(std::istream& is);
void save_csv(const ParticleMeasure& m, const std::string& path);
ParticleMeasure load_csv(const std::string& path);

// Decimal text used everywhere a value lands in a report file.
std::string format_double(double v);

}  // namespace bipstab
