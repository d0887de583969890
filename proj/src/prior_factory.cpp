#include "bipstab/prior_factory.hpp"

#include <cmath>
#include <iostream>

#include "bipstab/errors.hpp"

namespace bipstab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

MeasureSampler standard_gaussian_sampler(Eigen::Index dim) {
  return [dim](Eigen::Index n, SeedSpec seed) {
    return sample_standard_gaussian(dim, n, seed);
  };
}

MeasureSampler uniform_box_sampler(Eigen::Index dim) {
  return [dim](Eigen::Index n, SeedSpec seed) {
    CounterRng rng(seed);
    Eigen::MatrixXd pts(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) pts(i, j) = rng.uniform();
    return make_equal_weight(std::move(pts));
  };
}

double LaplacianSpectrum::eigenfunction(int j, double t) const {
  return std::sqrt(2.0) * std::sin(kPi * j * t);
}

LaplacianSpectrum laplacian_spectrum_1d(int J) {
  if (J < 1) throw ConfigError("spectrum needs J >= 1");
  LaplacianSpectrum s;
  s.eigenvalues.resize(J);
  for (int j = 1; j <= J; ++j)
    s.eigenvalues[j - 1] = (kPi * j) * (kPi * j);
  return s;
}

Eigen::VectorXd kl_eigenvalues(const KLSpec& spec) {
  if (spec.truncation_J < 1) throw ConfigError("KL truncation needs J >= 1");
  if (spec.gamma < 0.0 || spec.tau < 0.0 || spec.alpha < 1)
    throw ConfigError("KL spec needs gamma, tau >= 0 and alpha >= 1");
  auto spectrum = laplacian_spectrum_1d(spec.truncation_J);
  Eigen::VectorXd lam(spec.truncation_J);
  for (int j = 0; j < spec.truncation_J; ++j)
    lam[j] = spec.gamma * spec.gamma *
             std::pow(spectrum.eigenvalues[j] + spec.tau, -2.0 * spec.alpha);
  return lam;
}

double kl_tail_mass_ratio(const KLSpec& spec) {
  KLSpec extended = spec;
  extended.truncation_J = std::max(4 * spec.truncation_J, 4096);
  Eigen::VectorXd lam = kl_eigenvalues(extended);
  const double total = lam.sum();
  const double head = lam.head(spec.truncation_J).sum();
  return total > 0.0 ? (total - head) / total : 0.0;
}

ParticleMeasure kl_gaussian_sampler(const KLSpec& spec, Eigen::Index n,
                                    SeedSpec seed) {
  Eigen::VectorXd scale = kl_eigenvalues(spec).cwiseSqrt();
  CounterRng rng(seed);
  const int J = spec.truncation_J;
  Eigen::MatrixXd pts(n, J);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < J; ++j) pts(i, j) = scale[j] * rng.normal();
  return make_equal_weight(std::move(pts));
}

ParticleMeasure empirical_subsample(const MeasureSampler& base, Eigen::Index N,
                                    SeedSpec seed) {
  if (N < 1) throw ConfigError("empirical subsample needs N >= 1");
  return base(N, seed);
}

ParticleMeasure pushforward_sampler(const PushforwardSpec& spec, Eigen::Index n,
                                    SeedSpec seed) {
  ParticleMeasure ref = spec.reference(n, seed);
  Eigen::MatrixXd pts(n, spec.dim);
  long clamped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd img = spec.transport(ref.points.row(i).transpose());
    if (img.size() != spec.dim)
      throw DimensionMismatch("transport map changed the dimension");
    for (Eigen::Index j = 0; j < spec.dim; ++j) {
      if (img[j] < -1e-12 || img[j] > 1.0 + 1e-12)
        throw DomainEscape("transport image left [0,1]^d at particle " +
                           std::to_string(i));
      if (img[j] < 0.0 || img[j] > 1.0) {
        img[j] = std::min(1.0, std::max(0.0, img[j]));
        ++clamped;
      }
    }
    pts.row(i) = img.transpose();
  }
  if (clamped > 0)
    std::cerr << "pushforward_sampler: clamped " << clamped
              << " coordinates within 1e-12 of the box\n";
  return make_equal_weight(std::move(pts));
}

TransportMap make_transport_map(const std::string& name, double a, double b,
                                double shift, double scale) {
  if (name == "identity")
    return [](const Eigen::VectorXd& u) { return u; };
  if (name == "affine")
    return [a, b](const Eigen::VectorXd& u) -> Eigen::VectorXd {
      return (a + (b * u).array()).matrix();
    };
  if (name == "poly2")
    return [](const Eigen::VectorXd& u) -> Eigen::VectorXd {
      return u.array().square().matrix();
    };
  if (name == "perturbed_affine")
    return [a, b, shift, scale](const Eigen::VectorXd& u) -> Eigen::VectorXd {
      return (a + shift + ((b + scale) * u).array()).matrix();
    };
  throw ConfigError("unknown transport map: " + name);
}

LpDistanceEstimate lp_map_distance(const TransportMap& T, const TransportMap& T_star,
                                   const MeasureSampler& reference, double p,
                                   Eigen::Index n, SeedSpec seed) {
  if (p < 1.0) throw ConfigError("lp map distance needs p >= 1");
  ParticleMeasure ref = reference(n, seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = ref.points.row(i).transpose();
    v[i] = std::pow((T(x) - T_star(x)).norm(), p);
  }
  const double mean_v = v.mean();
  double var = 0.0;
  if (n > 1)
    var = (v.array() - mean_v).square().sum() / static_cast<double>(n - 1) /
          static_cast<double>(n);
  const double value = std::pow(mean_v, 1.0 / p);
  // Delta method through x -> x^(1/p).
  double se = 0.0;
  if (mean_v > 0.0)
    se = std::sqrt(var) * std::pow(mean_v, 1.0 / p - 1.0) / p;
  return LpDistanceEstimate{value, se};
}

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("quadrature needs n >= 1");
  // Newton iteration on Legendre polynomials, nodes symmetric about 0.
  Eigen::VectorXd x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
      }
      dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    const double wi = 2.0 / ((1.0 - t * t) * dp * dp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  Quadrature q;
  q.nodes = (0.5 * (b - a) * x.array() + 0.5 * (a + b)).matrix();
  q.weights = 0.5 * (b - a) * w;
  return q;
}

double bump(double x, double center, double width) {
  const double r = (x - center) / width;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

Eigen::MatrixXd bump_filter_matrix(int m, int J, double width) {
  if (m < 1 || J < 1) throw ConfigError("filter matrix needs m, J >= 1");
  auto spectrum = laplacian_spectrum_1d(J);
  Eigen::MatrixXd G(m, J);
  for (int i = 0; i < m; ++i) {
    const double center = static_cast<double>(i + 1) / (m + 1);
    const double lo = std::max(0.0, center - width);
    const double hi = std::min(1.0, center + width);
    Quadrature q = gauss_legendre(64, lo, hi);
    for (int j = 1; j <= J; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < q.nodes.size(); ++k)
        acc += q.weights[k] * bump(q.nodes[k], center, width) *
               spectrum.eigenfunction(j, q.nodes[k]);
      G(i, j - 1) = acc;
    }
  }
  return G;
}

}  // namespace bipstab
