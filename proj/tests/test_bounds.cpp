#include <cmath>

#include "bipstab/bounds.hpp"
#include "bipstab/errors.hpp"
#include "bipstab/prior_factory.hpp"
#include "doctest.h"

using namespace bipstab;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

// phi + delta with the matching envelope adjustment.
Potential add_constant(const Potential& base, double delta) {
  Potential out = base;
  auto phi = base.phi;
  out.phi = [phi, delta](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return phi(u, y) + delta;
  };
  auto h = base.envelope_h;
  out.envelope_h = [h, delta](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return h(u, y) * std::exp(-delta);
  };
  if (delta < 0.0) {
    auto f = base.envelope_f;
    out.envelope_f = [f, delta](const Eigen::VectorXd& u) {
      return f(u) * std::exp(-delta);
    };
  }
  return out;
}

}  // namespace

TEST_CASE("holder pairs") {
  CHECK_NOTHROW(validate(HolderPair{kInf, 1.0}));
  CHECK_NOTHROW(validate(HolderPair{2.0, 2.0}));
  CHECK_NOTHROW(validate(HolderPair{1.0, kInf}));
  CHECK_THROWS_AS(validate(HolderPair{2.0, 3.0}), ConfigError);
  CHECK_THROWS_AS(validate(HolderPair{0.5, 1.0}), ConfigError);
}

TEST_CASE("lp norms under the prior") {
  auto prior = sample_standard_gaussian(1, 100000, {90, 0});
  SUBCASE("constant function") {
    for (double p : {1.0, 2.0, kInf}) {
      auto n = lp_norm_under_prior([](const Eigen::VectorXd&) { return 1.0; },
                                   prior, p);
      CHECK(n.value == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("dirac third power") {
    auto m = dirac(vec1(2.0));
    auto n = lp_norm_under_prior([](const Eigen::VectorXd& u) { return u[0]; }, m,
                                 3.0);
    CHECK(n.value == doctest::Approx(2.0));
  }
  SUBCASE("gaussian second moment in L1") {
    auto n = lp_norm_under_prior(
        [](const Eigen::VectorXd& u) { return u[0] * u[0]; }, prior, 1.0);
    CHECK(std::abs(n.value - 1.0) < 3.0 * n.std_error);
  }
  SUBCASE("support max for p = inf") {
    auto n = lp_norm_under_prior([](const Eigen::VectorXd& u) { return u[0]; },
                                 prior, kInf);
    CHECK(n.value == doctest::Approx(prior.points.cwiseAbs().maxCoeff()));
    CHECK(n.std_error == 0.0);
  }
}

TEST_CASE("likelihood perturbation bounds") {
  Potential phi = gaussian_residual_potential(tanh_forward(1), 1.0);
  auto prior = sample_standard_gaussian(1, 4096, {91, 0});
  const Eigen::VectorXd y = vec1(0.5);
  const HolderPair holder{kInf, 1.0};
  auto cost = norm_cost(1.0);

  SUBCASE("zero perturbation gives exactly 0/0") {
    auto report = likelihood_bound_rhs(phi, phi, prior, cost, holder, y);
    CHECK(report.lhs_estimate == 0.0);
    CHECK(report.rhs_value == 0.0);
    CHECK(report.satisfied);
  }
  SUBCASE("additive constants cancel in the posterior but not the bound") {
    for (double delta : {0.1, 0.2}) {
      auto phi_prime = add_constant(phi, delta);
      auto report =
          likelihood_bound_rhs(phi, phi_prime, prior, cost, holder, y);
      CHECK(report.lhs_estimate == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(report.rhs_value > 0.0);
      CHECK(report.satisfied);
      // q = 1 norm of a constant difference is the constant: rhs linear.
      CHECK(report.rhs_components.at("norm_dphi_Lq") == doctest::Approx(delta));
    }
  }
  SUBCASE("rhs is exactly linear in a constant likelihood offset") {
    auto r1 = likelihood_bound_rhs(phi, add_constant(phi, 0.1), prior, cost,
                                   holder, y);
    auto r2 = likelihood_bound_rhs(phi, add_constant(phi, 0.2), prior, cost,
                                   holder, y);
    // envelope merge inflates h with the offset, so compare the dphi factors
    const double ratio = r2.rhs_components.at("norm_dphi_Lq") /
                         r1.rhs_components.at("norm_dphi_Lq");
    CHECK(ratio == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("data-shift perturbations satisfy the bound across seeds") {
    for (int rep = 0; rep < 10; ++rep) {
      auto p =
          sample_standard_gaussian(1, 2048, {92, static_cast<std::uint64_t>(rep)});
      Potential phi_prime = gaussian_residual_potential(tanh_forward(1), 1.0);
      auto shifted = [&phi_prime](const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& yy) {
        return phi_prime.phi(u, yy + vec1(0.1));
      };
      Potential moved = phi_prime;
      moved.phi = shifted;
      auto h = phi_prime.envelope_h;
      moved.envelope_h = [h](const Eigen::VectorXd& u, const Eigen::VectorXd& yy) {
        return h(u, yy + vec1(0.1));
      };
      auto report = likelihood_bound_rhs(phi, moved, p, cost, holder, y);
      CHECK(report.satisfied);
      CHECK(report.lhs_estimate <= report.rhs_value + 1e-12);
    }
  }
}

TEST_CASE("explicit-evidence likelihood bound") {
  Potential phi = gaussian_residual_potential(tanh_forward(1), 1.0);
  auto prior = sample_standard_gaussian(1, 8192, {93, 0});
  const Eigen::VectorXd y = vec1(0.5);
  const HolderPair holder{kInf, 1.0};
  auto cost = norm_cost(1.0);

  SUBCASE("zero perturbation") {
    auto z = evidence_with_se(prior, at_data(phi, y));
    auto report =
        likelihood_bound_rhs_explicit(phi, phi, prior, cost, holder, y, z, z);
    CHECK(report.rhs_value == 0.0);
    CHECK(report.lhs_estimate == 0.0);
  }
  SUBCASE("explicit variant is tighter than the envelope variant") {
    auto phi_prime = add_constant(phi, 0.15);
    auto z = evidence_with_se(prior, at_data(phi, y));
    auto zp = evidence_with_se(prior, at_data(phi_prime, y));
    auto envelope =
        likelihood_bound_rhs(phi, phi_prime, prior, cost, holder, y);
    auto explicit_z = likelihood_bound_rhs_explicit(phi, phi_prime, prior, cost,
                                                    holder, y, z, zp);
    const double slack = 3.0 * (envelope.mc_standard_errors.at("combined") +
                                explicit_z.mc_standard_errors.at("combined"));
    CHECK(explicit_z.rhs_value <= envelope.rhs_value + slack);
  }
  SUBCASE("shrinking evidence inflates the bound") {
    double prev = 0.0;
    for (double yy : {1.0, 2.0, 3.0}) {
      auto phi_prime = add_constant(phi, 0.1);
      auto z = evidence_with_se(prior, at_data(phi, vec1(yy)));
      auto zp = evidence_with_se(prior, at_data(phi_prime, vec1(yy)));
      auto report = likelihood_bound_rhs_explicit(phi, phi_prime, prior, cost,
                                                  holder, vec1(yy), z, zp);
      CHECK(report.rhs_value > prev);
      prev = report.rhs_value;
    }
  }
  SUBCASE("vanished evidence is rejected") {
    CHECK_THROWS_AS(
        likelihood_bound_rhs_explicit(phi, phi, prior, cost, holder, y,
                                      EvidenceEstimate{0.0, 0.0},
                                      EvidenceEstimate{1.0, 0.0}),
        EvidenceUnderflow);
  }
}

TEST_CASE("data perturbation bound") {
  const double r = 0.5;
  const Eigen::VectorXd y = vec1(0.5);
  Potential phi =
      with_data_ball(gaussian_residual_potential(tanh_forward(1), 1.0), y, r);
  auto prior = sample_standard_gaussian(1, 4096, {94, 0});
  const HolderPair holder{kInf, 1.0};
  auto cost = norm_cost(1.0);

  SUBCASE("zero shift gives 0/0 in the Lipschitz variant") {
    auto report = data_perturbation_bound(phi, prior, cost, holder, y, y, r);
    CHECK(report.lhs_estimate == 0.0);
    CHECK(report.rhs_value == 0.0);
    CHECK(report.satisfied);
  }
  SUBCASE("rhs is linear in the data shift by construction") {
    auto r1 = data_perturbation_bound(phi, prior, cost, holder, y, vec1(0.55), r);
    auto r2 = data_perturbation_bound(phi, prior, cost, holder, y, vec1(0.6), r);
    CHECK(r2.rhs_value == doctest::Approx(2.0 * r1.rhs_value).epsilon(1e-12));
  }
  SUBCASE("slope of lhs against the shift stays below the rhs coefficient") {
    for (double eps : {0.01, 0.05, 0.1}) {
      auto report =
          data_perturbation_bound(phi, prior, cost, holder, y, vec1(y[0] + eps), r);
      CHECK(report.satisfied);
      const double coefficient = report.rhs_value / eps;
      CHECK(report.lhs_estimate / eps <= coefficient + 1e-12);
    }
  }
  SUBCASE("shift outside the ball is rejected") {
    CHECK_THROWS_AS(
        data_perturbation_bound(phi, prior, cost, holder, y, vec1(2.0), r),
        ConfigError);
  }
}

TEST_CASE("prior perturbation bound") {
  Potential phi = gaussian_residual_potential(tanh_forward(1), 1.0);
  auto prior = sample_standard_gaussian(1, 1024, {95, 0});
  const Eigen::VectorXd y = vec1(0.5);
  auto cost = norm_cost(1.0);

  SUBCASE("identical priors give 0/0 in both variants") {
    auto reports = prior_bound_rhs(phi, prior, prior, cost, y);
    CHECK(reports.envelope.lhs_estimate == 0.0);
    CHECK(reports.envelope.rhs_value == 0.0);
    CHECK(reports.explicit_z.rhs_value == 0.0);
    CHECK(reports.envelope.satisfied);
    CHECK(reports.explicit_z.satisfied);
  }
  SUBCASE("mean shift satisfies both variants") {
    ParticleMeasure shifted{prior.points.array() + 0.1, prior.weights};
    auto reports = prior_bound_rhs(phi, prior, shifted, cost, y);
    CHECK(reports.envelope.satisfied);
    CHECK(reports.explicit_z.satisfied);
    CHECK(reports.envelope.lhs_estimate > 0.0);
  }
  SUBCASE("coupling route is also an upper bound route") {
    ParticleMeasure shifted{prior.points.array() + 0.1, prior.weights};
    auto pairs = std::make_pair(prior.points, shifted.points);
    auto coupled = prior_bound_rhs(phi, prior, shifted, cost, y, pairs);
    auto exact = prior_bound_rhs(phi, prior, shifted, cost, y);
    CHECK(coupled.envelope.satisfied);
    // any explicit coupling dominates the optimal one
    CHECK(coupled.envelope.rhs_components.at("ipm_prior_cy") >=
          exact.envelope.rhs_components.at("ipm_prior_cy") - 1e-10);
  }
  SUBCASE("missing Lipschitz field is rejected") {
    Potential bare = phi;
    bare.lipschitz_L.reset();
    CHECK_THROWS_AS(prior_bound_rhs(bare, prior, prior, cost, y), ConfigError);
  }
}

TEST_CASE("product coupling bound") {
  SUBCASE("all perturbations vanish") {
    Eigen::VectorXd lam = Eigen::VectorXd::Constant(4, 0.3);
    CHECK(product_coupling_bound(lam, lam, Eigen::VectorXd::Zero(4), 0.0, 1.0,
                                 1.0, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("single-mode hand evaluation") {
    // prefactor 2^{3/2}, moment sqrt(2), inner sqrt((1-2)^2) = 1  ->  4
    Eigen::VectorXd lam = vec1(1.0);
    Eigen::VectorXd lam_star = vec1(4.0);
    const double value = product_coupling_bound(lam, lam_star, vec1(0.0), 0.0,
                                                0.0, 1.0, 1.0);
    CHECK(value == doctest::Approx(4.0).epsilon(1e-12));
    // cross-check: W2 between N(0,1) and N(0,4) in 1D is |1-2| = 1 <= 4
    auto a = sample_standard_gaussian(1, 100000, {96, 0});
    ParticleMeasure b{2.0 * a.points, a.weights};
    const double w2 = std::sqrt(quantile_coupling_cost(a, b, 2.0));
    CHECK(w2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(w2 <= value);
  }
  SUBCASE("monotone in every perturbation input") {
    Eigen::VectorXd lam = Eigen::VectorXd::Constant(3, 0.5);
    Eigen::VectorXd lam_star = lam;
    lam_star[0] = 0.7;
    Eigen::VectorXd gram = Eigen::VectorXd::Zero(3);
    const double base =
        product_coupling_bound(lam, lam_star, gram, 0.1, 1.0, 2.0, 2.0);
    Eigen::VectorXd lam_star2 = lam_star;
    lam_star2[1] = 0.9;
    CHECK(product_coupling_bound(lam, lam_star2, gram, 0.1, 1.0, 2.0, 2.0) >=
          base);
    Eigen::VectorXd gram2 = gram;
    gram2[2] = 0.25;
    CHECK(product_coupling_bound(lam, lam_star, gram2, 0.1, 1.0, 2.0, 2.0) >=
          base);
    CHECK(product_coupling_bound(lam, lam_star, gram, 0.2, 1.0, 2.0, 2.0) >=
          base);
  }
  SUBCASE("matern mean-value chain at J = 32") {
    const double gamma = 1.0, tau = 1.0, eps = 0.1;
    const int alpha = 2, J = 32;
    KLSpec spec{gamma, tau, alpha, J};
    KLSpec spec_star{gamma + eps, tau + eps, alpha, J};
    Eigen::VectorXd lam = kl_eigenvalues(spec);
    Eigen::VectorXd lam_star = kl_eigenvalues(spec_star);
    auto spectrum = laplacian_spectrum_1d(J);
    double sum_sq = 0.0;
    double chain_sq = 0.0;
    for (int j = 0; j < J; ++j) {
      const double diff = std::abs(std::sqrt(lam[j]) - std::sqrt(lam_star[j]));
      const double lt = spectrum.eigenvalues[j] + tau;
      const double lt_star = spectrum.eigenvalues[j] + spec_star.tau;
      const double bound =
          std::pow(lt, -alpha) * eps +
          alpha * spec_star.gamma *
              std::max(std::pow(lt, -alpha - 1.0), std::pow(lt_star, -alpha - 1.0)) *
              eps;
      CHECK(diff <= bound * (1.0 + 1e-12));
      sum_sq += diff * diff;
      chain_sq += bound * bound;
    }
    CHECK(std::sqrt(sum_sq) <= std::sqrt(chain_sq));
    // the chain is linear in (|dgamma| + |dtau|) with a computable constant
    double c_sq = 0.0;
    for (int j = 0; j < J; ++j) {
      const double lt = spectrum.eigenvalues[j] + tau;
      const double per_eps = std::pow(lt, -alpha) + alpha * spec_star.gamma *
                                                        std::pow(lt, -alpha - 1.0);
      c_sq += per_eps * per_eps;
    }
    CHECK(std::sqrt(chain_sq) <=
          std::sqrt(c_sq) * (eps + eps) * (1.0 + 1e-12));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(product_coupling_bound(Eigen::VectorXd::Ones(2),
                                           Eigen::VectorXd::Ones(3),
                                           Eigen::VectorXd::Zero(2), 0.0, 0.0,
                                           1.0, 1.0),
                    DimensionMismatch);
  }
}

TEST_CASE("empirical-measure rate envelope") {
  CHECK(fournier_rate_envelope(2, 100.0, 1.0) ==
        doctest::Approx(0.1 + std::pow(100.0, -1.0 / 3.0)).epsilon(1e-12));
  CHECK(fournier_rate_envelope(4, 1.0, 1.0) ==
        doctest::Approx(std::log(2.0) + 1.0));
  SUBCASE("decreasing in N for every dimension up to 8") {
    for (int d = 1; d <= 8; ++d) {
      double prev = kInf;
      for (double N = 10.0; N <= 1e5; N *= 2.0) {
        const double v = fournier_rate_envelope(d, N, 1.0);
        CHECK(v < prev);
        prev = v;
      }
    }
  }
  SUBCASE("infinite third moment is rejected") {
    CHECK_THROWS_AS(fournier_rate_envelope(2, 100.0, kInf), ConfigError);
  }
}

TEST_CASE("rhs assembly is permutation invariant") {
  Potential phi = gaussian_residual_potential(tanh_forward(1), 1.0);
  auto prior = sample_standard_gaussian(1, 512, {97, 0});
  const Eigen::VectorXd y = vec1(0.5);
  auto phi_prime = add_constant(phi, 0.1);
  auto base = likelihood_bound_rhs(phi, phi_prime, prior, norm_cost(1.0),
                                   HolderPair{kInf, 1.0}, y);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(prior.size());
  perm.setIdentity();
  CounterRng rng({97, 1});
  for (Eigen::Index i = prior.size() - 1; i > 0; --i) {
    const Eigen::Index j =
        static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(perm.indices()[i], perm.indices()[j]);
  }
  ParticleMeasure shuffled{perm * prior.points, perm * prior.weights};
  auto shuffled_report = likelihood_bound_rhs(phi, phi_prime, shuffled,
                                              norm_cost(1.0), HolderPair{kInf, 1.0},
                                              y);
  CHECK(shuffled_report.rhs_value ==
        doctest::Approx(base.rhs_value).epsilon(1e-12));
}
