// Prior constructors: truncated Karhunen-Loeve Gaussians with Matern-type
// spectra, empirical subsamples, and pushforwards of a reference measure
// through registered transport maps.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "bipstab/particle_measure.hpp"
#include "bipstab/seed.hpp"

namespace bipstab {

// Abstract sampler: n i.i.d. draws as an equal-weight cloud.
using MeasureSampler =
    std::function<ParticleMeasure(Eigen::Index n, SeedSpec seed)>;

MeasureSampler standard_gaussian_sampler(Eigen::Index dim);
MeasureSampler uniform_box_sampler(Eigen::Index dim);

// Covariance gamma^2 (Laplacian + tau I)^(-2 alpha) on [0,1], truncated to the
// first J Karhunen-Loeve modes; samples live in coefficient space R^J, which
// is isometric to the function-space norm by Parseval.
struct KLSpec {
  double gamma = 1.0;
  double tau = 1.0;
  int alpha = 2;
  int truncation_J = 32;
};

// Dirichlet spectrum of the 1D Laplacian on [0,1]:
// eigenvalues (pi j)^2 and eigenfunctions sqrt(2) sin(pi j t), j = 1..J.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;
  // j is 1-based to match the mode index.
  double eigenfunction(int j, double t) const;
};
LaplacianSpectrum laplacian_spectrum_1d(int J);

// lambda_j = gamma^2 ((pi j)^2 + tau)^(-2 alpha), positive and decreasing.
Eigen::VectorXd kl_eigenvalues(const KLSpec& spec);

// Shares of the eigenvalue mass beyond the truncation, relative to the total
// (total extended well past J for the comparison).
double kl_tail_mass_ratio(const KLSpec& spec);

// Coefficient vectors (sqrt(lambda_1) xi_1, ..., sqrt(lambda_J) xi_J) with
// xi_j i.i.d. standard normal.
ParticleMeasure kl_gaussian_sampler(const KLSpec& spec, Eigen::Index n,
                                    SeedSpec seed);

// Empirical approximation: N i.i.d. draws from the base sampler.
ParticleMeasure empirical_subsample(const MeasureSampler& base, Eigen::Index N,
                                    SeedSpec seed);

using TransportMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PushforwardSpec {
  TransportMap transport;
  MeasureSampler reference;
  Eigen::Index dim = 1;
};

// Applies the map to reference draws. Images may exceed [0,1]^d by at most
// 1e-12 (clamped); larger escapes throw DomainEscape.
ParticleMeasure pushforward_sampler(const PushforwardSpec& spec, Eigen::Index n,
                                    SeedSpec seed);

// Named transport maps for experiment configs:
//   identity         : u
//   affine           : a + b u (componentwise)
//   poly2            : u^2 (componentwise)
//   perturbed_affine : a + b u + shift + scale * u
TransportMap make_transport_map(const std::string& name, double a = 0.0,
                                double b = 1.0, double shift = 0.0,
                                double scale = 0.0);

struct LpDistanceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of ||T - T*||_{L^p(reference)} with common draws.
LpDistanceEstimate lp_map_distance(const TransportMap& T, const TransportMap& T_star,
                                   const MeasureSampler& reference, double p,
                                   Eigen::Index n, SeedSpec seed);

// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
Quadrature gauss_legendre(int n, double a, double b);

// Compactly supported smooth bump exp(-1/(1 - ((x-center)/width)^2)) on
// |x - center| < width, zero outside.
double bump(double x, double center, double width);

// Filter matrix G(i, j) = <kappa_i, x_j> for m bump filters with centers
// equispaced in (0,1) and the given width, against the first J Laplacian
// eigenfunctions; 64-node Gauss-Legendre per filter support.
Eigen::MatrixXd bump_filter_matrix(int m, int J, double width = 0.1);

}  // namespace bipstab
