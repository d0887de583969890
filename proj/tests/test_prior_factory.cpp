#include <algorithm>
#include <cmath>
#include <numeric>

#include "bipstab/errors.hpp"
#include "bipstab/prior_factory.hpp"
#include "bipstab/transport.hpp"
#include "doctest.h"

using namespace bipstab;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Systematic resampling to an equal-weight cloud, for two-sample tests.
ParticleMeasure resample_equal(const ParticleMeasure& m, Eigen::Index k) {
  Eigen::MatrixXd pts(k, m.dim());
  Eigen::Index i = 0;
  double cum = m.weights[0];
  for (Eigen::Index r = 0; r < k; ++r) {
    const double target = (static_cast<double>(r) + 0.5) / static_cast<double>(k);
    while (cum < target && i + 1 < m.size()) cum += m.weights[++i];
    pts.row(r) = m.points.row(i);
  }
  return make_equal_weight(std::move(pts));
}

double energy_statistic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  auto mean_cross = [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < Y.rows(); ++j)
        acc += (X.row(i) - Y.row(j)).norm();
    return acc / static_cast<double>(X.rows() * Y.rows());
  };
  return 2.0 * mean_cross(A, B) - mean_cross(A, A) - mean_cross(B, B);
}

}  // namespace

TEST_CASE("laplacian spectrum on [0,1]") {
  auto s = laplacian_spectrum_1d(8);
  CHECK(s.eigenvalues[0] == doctest::Approx(kPi * kPi));
  SUBCASE("boundary values vanish") {
    for (int j = 1; j <= 8; ++j) {
      CHECK(s.eigenfunction(j, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(std::abs(s.eigenfunction(j, 1.0)) < 1e-12);
    }
  }
  SUBCASE("orthonormality by quadrature") {
    Quadrature q = gauss_legendre(64, 0.0, 1.0);
    for (int j = 1; j <= 8; ++j) {
      for (int k = j; k <= 8; ++k) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < q.nodes.size(); ++i)
          acc += q.weights[i] * s.eigenfunction(j, q.nodes[i]) *
                 s.eigenfunction(k, q.nodes[i]);
        CHECK(acc == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("gauss-legendre quadrature") {
  Quadrature q = gauss_legendre(16, 0.0, 1.0);
  double cubic = 0.0;
  double expo = 0.0;
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) {
    cubic += q.weights[i] * std::pow(q.nodes[i], 3.0);
    expo += q.weights[i] * std::exp(q.nodes[i]);
  }
  CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(expo == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("kl eigenvalues and samplers") {
  SUBCASE("single-mode closed form") {
    KLSpec spec{1.0, 0.0, 1, 1};
    CHECK(kl_eigenvalues(spec)[0] == doctest::Approx(std::pow(kPi, -4.0)));
  }
  SUBCASE("eigenvalues positive and decreasing") {
    KLSpec spec{1.0, 1.0, 2, 32};
    Eigen::VectorXd lam = kl_eigenvalues(spec);
    for (int j = 0; j < 31; ++j) {
      CHECK(lam[j] > 0.0);
      CHECK(lam[j + 1] < lam[j]);
    }
  }
  SUBCASE("degenerate gamma gives the zero measure") {
    KLSpec spec{0.0, 1.0, 2, 4};
    auto m = kl_gaussian_sampler(spec, 16, {80, 0});
    CHECK(m.points.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("coefficient variances match the spectrum within 5%") {
    KLSpec spec{1.0, 1.0, 1, 4};
    Eigen::VectorXd lam = kl_eigenvalues(spec);
    auto m = kl_gaussian_sampler(spec, 100000, {81, 0});
    for (int j = 0; j < 4; ++j) {
      const double var = m.points.col(j).squaredNorm() / m.size();
      CHECK(std::abs(var - lam[j]) < 0.05 * lam[j]);
    }
  }
  SUBCASE("coefficients are uncorrelated within monte-carlo error") {
    KLSpec spec{1.0, 1.0, 1, 4};
    const Eigen::Index n = 100000;
    auto m = kl_gaussian_sampler(spec, n, {82, 0});
    for (int j = 0; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        const double corr =
            (m.points.col(j).dot(m.points.col(k)) / n) /
            std::sqrt((m.points.col(j).squaredNorm() / n) *
                      (m.points.col(k).squaredNorm() / n));
        CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
      }
    }
  }
  SUBCASE("default truncation leaves negligible tail mass") {
    KLSpec spec{1.0, 1.0, 2, 32};
    CHECK(kl_tail_mass_ratio(spec) < 1e-6);
  }
}

TEST_CASE("empirical subsamples") {
  auto sampler = standard_gaussian_sampler(1);
  SUBCASE("single draw is a dirac") {
    auto m = empirical_subsample(sampler, 1, {83, 0});
    CHECK(m.size() == 1);
    CHECK(m.weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("distinct seeds give distinct realizations") {
    auto m1 = empirical_subsample(sampler, 64, {83, 1});
    auto m2 = empirical_subsample(sampler, 64, {83, 2});
    CHECK(m1.points != m2.points);
  }
  SUBCASE("expected squared W2 to the base decreases in N") {
    auto reference = sampler(16384, {84, 0});
    double prev = std::numeric_limits<double>::infinity();
    for (Eigen::Index N : {32, 128, 512}) {
      double acc = 0.0;
      for (int rep = 0; rep < 20; ++rep) {
        auto m = empirical_subsample(sampler, N,
                                      {84, 100 + static_cast<std::uint64_t>(rep) +
                                               static_cast<std::uint64_t>(N)});
        acc += quantile_coupling_cost(reference, m, 2.0);
      }
      acc /= 20.0;
      CHECK(acc < prev);
      prev = acc;
    }
  }
}

TEST_CASE("pushforward sampler") {
  auto reference = uniform_box_sampler(1);

  SUBCASE("identity returns the reference draws") {
    PushforwardSpec spec{make_transport_map("identity"), reference, 1};
    auto m = pushforward_sampler(spec, 128, {85, 0});
    auto ref = reference(128, {85, 0});
    CHECK(m.points == ref.points);
  }
  SUBCASE("constant map gives a dirac cloud") {
    PushforwardSpec spec{make_transport_map("affine", 0.25, 0.0), reference, 1};
    auto m = pushforward_sampler(spec, 64, {85, 1});
    CHECK((m.points.array() - 0.25).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("square map matches the sqrt law within a DKW band") {
    PushforwardSpec spec{make_transport_map("poly2"), reference, 1};
    const Eigen::Index n = 10000;
    auto m = pushforward_sampler(spec, n, {85, 2});
    std::vector<double> xs(m.points.data(), m.points.data() + n);
    std::sort(xs.begin(), xs.end());
    // 99.9% DKW band.
    const double band = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double emp = (static_cast<double>(i) + 1.0) / n;
      worst = std::max(worst, std::abs(emp - std::sqrt(xs[i])));
    }
    CHECK(worst < band);
  }
  SUBCASE("escape beyond the tolerance throws") {
    PushforwardSpec spec{make_transport_map("affine", 0.5, 1.0), reference, 1};
    CHECK_THROWS_AS(pushforward_sampler(spec, 64, {85, 3}), DomainEscape);
  }
  SUBCASE("hairline overshoot is clamped") {
    PushforwardSpec spec{
        make_transport_map("affine", 0.0, 1.0 + 5e-14), reference, 1};
    auto m = pushforward_sampler(spec, 256, {85, 4});
    CHECK(m.points.maxCoeff() <= 1.0);
  }
  SUBCASE("unknown registry name") {
    CHECK_THROWS_AS(make_transport_map("spline"), ConfigError);
  }
}

TEST_CASE("lp map distance") {
  auto reference = uniform_box_sampler(1);
  auto T = make_transport_map("identity");

  SUBCASE("identical maps") {
    auto est = lp_map_distance(T, T, reference, 2.0, 4096, {86, 0});
    CHECK(est.value == doctest::Approx(0.0));
  }
  SUBCASE("constant offset") {
    auto T_eps = make_transport_map("perturbed_affine", 0.0, 1.0, 0.125, 0.0);
    auto est = lp_map_distance(T, T_eps, reference, 2.0, 2048, {86, 1});
    CHECK(est.value == doctest::Approx(0.125).epsilon(1e-12));
  }
  SUBCASE("linear perturbation closed form") {
    const double eps = 0.2;
    auto T_eps = make_transport_map("perturbed_affine", 0.0, 1.0, 0.0, eps);
    auto est = lp_map_distance(T, T_eps, reference, 2.0, 200000, {86, 2});
    CHECK(std::abs(est.value - eps / std::sqrt(3.0)) < 3.0 * est.std_error);
  }
}

TEST_CASE("pushforward coupling dominates the exact transport cost") {
  // Common random numbers realize the coupling (T(x), T*(x)); its cost bounds
  // W_p from above, per draw.
  auto reference = uniform_box_sampler(1);
  auto T = make_transport_map("affine", 0.1, 0.6);
  auto T_star = make_transport_map("perturbed_affine", 0.1, 0.6, 0.05, 0.1);
  PushforwardSpec sp{T, reference, 1};
  PushforwardSpec sp_star{T_star, reference, 1};
  for (int rep = 0; rep < 5; ++rep) {
    SeedSpec seed{87, static_cast<std::uint64_t>(rep)};
    auto mu = pushforward_sampler(sp, 2048, seed);
    auto mu_star = pushforward_sampler(sp_star, 2048, seed);
    const double w2 = std::sqrt(quantile_coupling_cost(mu, mu_star, 2.0));
    auto lp = lp_map_distance(T, T_star, reference, 2.0, 2048, seed);
    CHECK(w2 <= lp.value + 3.0 * lp.std_error + 1e-12);
  }
}

TEST_CASE("pushforward commutes with reference reweighting in distribution") {
  // Pushing a reweighted reference equals reweighting the pushforward; with
  // independent draws the laws agree, checked by a permutation energy test.
  auto reference = uniform_box_sampler(1);
  auto T = make_transport_map("poly2");
  auto weight_on_image = [](const Eigen::VectorXd& u) { return 2.0 * u[0]; };

  PushforwardSpec spec{T, reference, 1};
  auto route_a = [&](SeedSpec seed) {
    auto pushed = pushforward_sampler(spec, 4096, seed);
    auto [post, z] = reweight(pushed, weight_on_image);
    return resample_equal(post, 256);
  };
  auto route_b = [&](SeedSpec seed) {
    auto ref = reference(4096, seed);
    auto [post, z] =
        reweight(ref, [&](const Eigen::VectorXd& x) { return weight_on_image(T(x)); });
    auto resampled = resample_equal(post, 256);
    Eigen::MatrixXd mapped(resampled.size(), 1);
    for (Eigen::Index i = 0; i < resampled.size(); ++i)
      mapped.row(i) = T(resampled.points.row(i).transpose()).transpose();
    return make_equal_weight(std::move(mapped));
  };

  auto A = route_a({88, 1});
  auto B = route_b({88, 2});
  const double observed = energy_statistic(A.points, B.points);

  // Permutation null at the 5% level.
  Eigen::MatrixXd pooled(A.size() + B.size(), 1);
  pooled << A.points, B.points;
  CounterRng rng({88, 3});
  std::vector<double> null_stats;
  for (int perm = 0; perm < 99; ++perm) {
    std::vector<Eigen::Index> idx(pooled.rows());
    std::iota(idx.begin(), idx.end(), 0);
    for (Eigen::Index i = pooled.rows() - 1; i > 0; --i) {
      const Eigen::Index j =
          static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(idx[i], idx[j]);
    }
    Eigen::MatrixXd PA(A.size(), 1), PB(B.size(), 1);
    for (Eigen::Index i = 0; i < A.size(); ++i) PA.row(i) = pooled.row(idx[i]);
    for (Eigen::Index i = 0; i < B.size(); ++i)
      PB.row(i) = pooled.row(idx[A.size() + i]);
    null_stats.push_back(energy_statistic(PA, PB));
  }
  std::sort(null_stats.begin(), null_stats.end());
  const double threshold = null_stats[94];  // 95th percentile of 99 draws
  CHECK(observed <= threshold);
}
