#include "bipstab/potential.hpp"

#include <cmath>

#include "bipstab/errors.hpp"

namespace bipstab {

ForwardMap tanh_forward(int d) {
  ForwardMap f;
  f.kind = ForwardMap::Kind::tanh_saturating;
  f.g_map = [](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return u.array().tanh();
  };
  f.operator_norm_bound = std::sqrt(static_cast<double>(d));  // |G(u)| <= sqrt(d)
  f.input_dim = d;
  f.output_dim = d;
  return f;
}

namespace {

ForwardMap linear_forward_impl(const Eigen::MatrixXd& A, ForwardMap::Kind kind) {
  ForwardMap f;
  f.kind = kind;
  Eigen::MatrixXd Acopy = A;
  f.g_map = [Acopy](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return Acopy * u;
  };
  f.operator_norm_bound = A.jacobiSvd().singularValues()[0];
  f.input_dim = static_cast<int>(A.cols());
  f.output_dim = static_cast<int>(A.rows());
  return f;
}

}  // namespace

ForwardMap linear_forward(const Eigen::MatrixXd& A) {
  return linear_forward_impl(A, ForwardMap::Kind::linear_operator);
}

ForwardMap linear_forward_on_box(const Eigen::MatrixXd& A) {
  return linear_forward_impl(A, ForwardMap::Kind::linear_on_unit_box);
}

Potential gaussian_residual_potential(const ForwardMap& fwd, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian residual needs sigma > 0");
  if (!std::isfinite(fwd.operator_norm_bound))
    throw MissingEnvelope("forward map carries no boundedness metadata");

  Potential pot;
  auto fptr = std::make_shared<const ForwardMap>(fwd);
  pot.forward = fptr;
  pot.sigma = sigma;
  const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
  pot.phi = [fptr, inv_2s2](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return inv_2s2 * (fptr->g_map(u) - y).squaredNorm();
  };
  pot.envelope_f = [](const Eigen::VectorXd&) { return 1.0; };
  pot.envelope_g = [](const Eigen::VectorXd&) { return 1.0; };

  const double s2 = sigma * sigma;
  const double gnorm = fwd.operator_norm_bound;
  switch (fwd.kind) {
    case ForwardMap::Kind::tanh_saturating: {
      const double d = static_cast<double>(fwd.input_dim);
      pot.envelope_h = [d, s2](const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        return std::exp(-(d + y.squaredNorm()) / s2);
      };
      // constant field (sqrt(d) + |y|)/sigma^2
      pot.lipschitz_L = constant_lipschitz_field(std::sqrt(d) / s2, 1.0 / s2);
      pot.name = "tanh_regression";
      break;
    }
    case ForwardMap::Kind::linear_operator: {
      pot.envelope_h = [gnorm, s2](const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& y) {
        return std::exp(-(gnorm * u.squaredNorm() + y.squaredNorm()) / s2);
      };
      pot.lipschitz_L = norm_sum_lipschitz_field(gnorm / s2);
      pot.name = "linear_filter";
      break;
    }
    case ForwardMap::Kind::linear_on_unit_box: {
      pot.envelope_h = [gnorm, s2](const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& y) {
        return std::exp(-(gnorm * gnorm * u.squaredNorm() + y.squaredNorm()) / s2);
      };
      // On [0,1]^d: |phi(u;y)-phi(v;y)| <= (|G|/s2)(|G| sqrt(d) + |y|) |u-v|.
      const double diam = std::sqrt(static_cast<double>(fwd.input_dim));
      pot.lipschitz_L =
          constant_lipschitz_field(gnorm * gnorm * diam / s2, gnorm / s2);
      pot.name = "pushforward_linear";
      break;
    }
  }
  return pot;
}

Potential with_data_ball(Potential pot, const Eigen::VectorXd& y, double radius) {
  if (!pot.forward)
    throw MissingEnvelope("data-Lipschitz envelope needs a forward map");
  if (radius < 0.0) throw ConfigError("data ball radius must be >= 0");
  auto fwd = pot.forward;
  const double s2 = pot.sigma * pot.sigma;
  const double ynorm = y.norm();
  pot.data_lipschitz_b = [fwd, s2, ynorm, radius](const Eigen::VectorXd& u) {
    return (fwd->g_map(u).norm() + ynorm + radius) / s2;
  };
  pot.data_ball_radius = radius;
  return pot;
}

ScalarFn at_data(const Potential& pot, const Eigen::VectorXd& y) {
  auto phi = pot.phi;
  Eigen::VectorXd yy = y;
  return [phi, yy](const Eigen::VectorXd& u) { return phi(u, yy); };
}

MergedEnvelopes merge_envelopes(const Potential& a, const Potential& b) {
  MergedEnvelopes m;
  auto fa = a.envelope_f;
  auto fb = b.envelope_f;
  m.f = [fa, fb](const Eigen::VectorXd& u) { return std::max(fa(u), fb(u)); };
  auto ga = a.envelope_g;
  auto gb = b.envelope_g;
  m.g = [ga, gb](const Eigen::VectorXd& y) { return std::max(ga(y), gb(y)); };
  auto ha = a.envelope_h;
  auto hb = b.envelope_h;
  m.h = [ha, hb](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return std::min(ha(u, y), hb(u, y));
  };
  return m;
}

void check_envelope_sandwich(const Potential& pot, const ParticleMeasure& m,
                             const Eigen::VectorXd& y, double rel_tol) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Eigen::VectorXd u = m.points.row(i).transpose();
    const double phi = pot.phi(u, y);
    const double lo = -std::log(pot.envelope_f(u)) - std::log(pot.envelope_g(y));
    const double hi = -std::log(pot.envelope_h(u, y));
    const double slack = rel_tol * (1.0 + std::abs(phi));
    if (!(phi >= lo - slack) || !(phi <= hi + slack))
      throw InvalidMeasure("envelope sandwich violated at particle " +
                           std::to_string(i) + ": lower=" + format_double(lo) +
                           " phi=" + format_double(phi) +
                           " upper=" + format_double(hi));
  }
}

}  // namespace bipstab
