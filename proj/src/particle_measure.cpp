#include "bipstab/particle_measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bipstab/errors.hpp"

namespace bipstab {

void validate(const ParticleMeasure& m) {
  if (m.points.rows() == 0) throw InvalidMeasure("measure has no particles");
  if (m.points.cols() < 1) throw InvalidMeasure("measure has dimension < 1");
  if (m.weights.size() != m.points.rows())
    throw InvalidMeasure("weight count does not match particle count");
  if ((m.weights.array() < 0.0).any())
    throw InvalidMeasure("negative particle weight");
  if (!m.points.allFinite() || !m.weights.allFinite())
    throw InvalidMeasure("non-finite entry in measure");
  const double s = m.weights.sum();
  if (std::abs(s - 1.0) > kWeightSumRelTol * std::max(1.0, std::abs(s)))
    throw InvalidMeasure("weights sum to " + std::to_string(s) + ", not 1");
}

ParticleMeasure make_measure(Eigen::MatrixXd points, Eigen::VectorXd weights) {
  ParticleMeasure m{std::move(points), std::move(weights)};
  validate(m);
  return m;
}

ParticleMeasure make_equal_weight(Eigen::MatrixXd points) {
  const Eigen::Index n = points.rows();
  return make_measure(std::move(points),
                      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

ParticleMeasure dirac(const Eigen::VectorXd& point) {
  Eigen::MatrixXd pts(1, point.size());
  pts.row(0) = point.transpose();
  return make_measure(std::move(pts), Eigen::VectorXd::Ones(1));
}

ParticleMeasure sample_standard_gaussian(Eigen::Index dim, Eigen::Index n,
                                         SeedSpec seed) {
  if (dim < 1 || n < 1) throw InvalidMeasure("dim and n must be >= 1");
  CounterRng rng(seed);
  Eigen::MatrixXd pts(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) pts(i, j) = rng.normal();
  return make_equal_weight(std::move(pts));
}

double weighted_moment(const ParticleMeasure& m, const ScalarFn& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    acc += m.weights[i] * f(m.points.row(i).transpose());
  return acc;
}

MomentEstimate weighted_moment_se(const ParticleMeasure& m, const ScalarFn& f) {
  // Var of the self-normalized estimator: sum_i w_i^2 (f_i - mean)^2.
  const Eigen::Index n = m.size();
  Eigen::VectorXd fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv[i] = f(m.points.row(i).transpose());
  const double mu = m.weights.dot(fv);
  const double var = (m.weights.array().square() *
                      (fv.array() - mu).square())
                         .sum();
  return MomentEstimate{mu, std::sqrt(std::max(var, 0.0))};
}

std::pair<ParticleMeasure, double> reweight(const ParticleMeasure& prior,
                                            const ScalarFn& phi) {
  const Eigen::Index n = prior.size();
  Eigen::VectorXd neg_phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = phi(prior.points.row(i).transpose());
    if (std::isnan(v)) throw AllWeightsUnderflow("potential evaluated to NaN");
    neg_phi[i] = -v;
  }
  // Log-sum-exp shift before exponentiating.
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (prior.weights[i] > 0.0 && neg_phi[i] > shift) shift = neg_phi[i];
  if (!std::isfinite(shift))
    throw AllWeightsUnderflow("every particle has zero posterior mass");
  Eigen::VectorXd w = prior.weights.array() * (neg_phi.array() - shift).exp();
  const double total = w.sum();
  if (!(total > 0.0))
    throw AllWeightsUnderflow("posterior weights underflowed to zero");
  const double z_hat = total * std::exp(shift);
  ParticleMeasure post{prior.points, w / total};
  return {std::move(post), z_hat};
}

Eigen::VectorXd mean(const ParticleMeasure& m) {
  return m.points.transpose() * m.weights;
}

Eigen::MatrixXd covariance(const ParticleMeasure& m) {
  const Eigen::VectorXd mu = mean(m);
  Eigen::MatrixXd centered = m.points.rowwise() - mu.transpose();
  return centered.transpose() * m.weights.asDiagonal() * centered;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_csv(const ParticleMeasure& m, std::ostream& os) {
  os << "w";
  for (Eigen::Index j = 0; j < m.dim(); ++j) os << ",x" << (j + 1);
  os << "\n";
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    os << format_double(m.weights[i]);
    for (Eigen::Index j = 0; j < m.dim(); ++j)
      os << "," << format_double(m.points(i, j));
    os << "\n";
  }
}

ParticleMeasure read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidMeasure("empty CSV stream");
  Eigen::Index dim = 0;
  for (char c : line)
    if (c == ',') ++dim;
  if (dim < 1) throw InvalidMeasure("CSV header has no coordinate columns");

  std::vector<double> wv;
  std::vector<double> xv;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0)
        wv.push_back(v);
      else
        xv.push_back(v);
      ++col;
    }
    if (col != dim + 1) throw InvalidMeasure("CSV row has wrong column count");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(wv.size());
  Eigen::MatrixXd pts(n, dim);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = wv[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < dim; ++j)
      pts(i, j) = xv[static_cast<size_t>(i * dim + j)];
  }
  return make_measure(std::move(pts), std::move(w));
}

void save_csv(const ParticleMeasure& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidMeasure("cannot open " + path + " for writing");
  write_csv(m, os);
}

ParticleMeasure load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidMeasure("cannot open " + path);
  return read_csv(is);
}

}  // namespace bipstab
