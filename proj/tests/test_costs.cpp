#include <cmath>

#include "bipstab/costs.hpp"
#include "bipstab/errors.hpp"
#include "bipstab/seed.hpp"
#include "doctest.h"

using namespace bipstab;

namespace {

Eigen::VectorXd rand_vec(CounterRng& rng, int d, double scale = 2.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace

TEST_CASE("norm cost values") {
  auto c1 = norm_cost(1.0);
  Eigen::VectorXd u(2), v(2);
  u << 0.0, 0.0;
  v << 3.0, 4.0;
  CHECK(c1(u, v) == doctest::Approx(5.0));
  CHECK(c1.is_metric);

  auto c2 = norm_cost(2.0);
  CHECK(c2(v, v) == 0.0);
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  CHECK(c2(Eigen::VectorXd::Zero(2), w) == doctest::Approx(2.0));
  CHECK_FALSE(c2.is_metric);
}

TEST_CASE("growth cost values") {
  auto c0 = weighted_growth_cost(0.0);
  auto cn = norm_cost(1.0);
  CounterRng rng({31, 0});
  for (int k = 0; k < 100; ++k) {
    auto u = rand_vec(rng, 3);
    auto v = rand_vec(rng, 3);
    CHECK(c0(u, v) == doctest::Approx(cn(u, v)).epsilon(1e-15));
  }

  auto c1 = weighted_growth_cost(1.0);
  Eigen::VectorXd a(1), b(1);
  a << 1.0;
  b << -1.0;
  CHECK(c1(a, b) == doctest::Approx(4.0));

  auto c2 = weighted_growth_cost(2.0);
  Eigen::VectorXd p(2), q(2);
  p << 1.0, 0.0;
  q << 0.0, 1.0;
  CHECK(c2(p, q) == doctest::Approx(4.0 * std::sqrt(2.0)));
  CHECK(c2.weak_triangle_constant == doctest::Approx(8.0));  // 2^(2s-1)
  CHECK(weighted_growth_cost(0.5).weak_triangle_constant == doctest::Approx(2.0));
}

TEST_CASE("distance-like axioms on random pairs") {
  CounterRng rng({32, 0});
  auto base = std::make_shared<const DistanceLikeCost>(norm_cost(1.0));
  AdaptedCostSpec spec;
  spec.base = base;
  spec.growth_f = nullptr;  // f == 1
  spec.lipschitz = constant_lipschitz_field(1.0, 1.0);
  spec.data_y = Eigen::VectorXd::Zero(1);
  std::vector<DistanceLikeCost> costs = {norm_cost(1.0), norm_cost(2.0),
                                         weighted_growth_cost(1.0),
                                         offset_growth_cost(1.5, 2.0),
                                         adapted_cost(spec)};
  for (const auto& c : costs) {
    for (int k = 0; k < 1000; ++k) {
      auto u = rand_vec(rng, 2);
      auto v = rand_vec(rng, 2);
      const double cuv = c(u, v);
      CHECK(cuv >= 0.0);
      CHECK(c(u, v) == doctest::Approx(c(v, u)).epsilon(1e-12));
      CHECK(c(u, u) == 0.0);
      if ((u - v).norm() > 1e-12) CHECK(cuv > 0.0);
    }
  }
}

TEST_CASE("metric costs satisfy the triangle inequality") {
  CounterRng rng({33, 0});
  auto c = norm_cost(1.0);
  for (int k = 0; k < 1000; ++k) {
    auto u = rand_vec(rng, 3);
    auto v = rand_vec(rng, 3);
    auto w = rand_vec(rng, 3);
    CHECK(c(u, w) <= c(u, v) + c(v, w) + 1e-12);
  }
}

TEST_CASE("adapted cost") {
  auto base = std::make_shared<const DistanceLikeCost>(norm_cost(1.0));

  SUBCASE("clamps inactive leaves the base cost") {
    AdaptedCostSpec spec;
    spec.base = base;
    spec.lipschitz = constant_lipschitz_field(0.5);
    spec.data_y = Eigen::VectorXd::Zero(1);
    auto cy = adapted_cost(spec);
    Eigen::VectorXd u(1), v(1);
    u << 0.3;
    v << -0.4;
    CHECK(cy(u, v) == doctest::Approx((*base)(u, v)));
  }

  SUBCASE("tanh regression spec hand value") {
    // f == 1, L(y) = (sqrt(d) + |y|)/sigma^2, d=1, sigma=1, y=0, u=2, v=0 -> 4
    AdaptedCostSpec spec;
    spec.base = base;
    spec.lipschitz = constant_lipschitz_field(1.0, 1.0);
    spec.data_y = Eigen::VectorXd::Zero(1);
    auto cy = adapted_cost(spec);
    Eigen::VectorXd u(1), v(1);
    u << 2.0;
    v << 0.0;
    CHECK(cy(u, v) == doctest::Approx(4.0));
    CHECK(cy(u, u) == 0.0);
  }

  SUBCASE("dominates the base cost when f >= 1") {
    CounterRng rng({34, 0});
    AdaptedCostSpec spec;
    spec.base = base;
    spec.growth_f = [](const Eigen::VectorXd& u) { return 1.0 + u.squaredNorm(); };
    spec.lipschitz = constant_lipschitz_field(2.0);
    spec.data_y = Eigen::VectorXd::Zero(2);
    auto cy = adapted_cost(spec);
    for (int k = 0; k < 1000; ++k) {
      auto u = rand_vec(rng, 2);
      auto v = rand_vec(rng, 2);
      CHECK(cy(u, v) >= (*base)(u, v) * (1.0 - 1e-12));
    }
  }

  SUBCASE("monotone in the clamp factors") {
    CounterRng rng({35, 0});
    auto make = [&](double fscale, double lip) {
      AdaptedCostSpec spec;
      spec.base = base;
      spec.growth_f = [fscale](const Eigen::VectorXd& u) {
        return fscale * (1.0 + u.norm());
      };
      spec.lipschitz = constant_lipschitz_field(lip);
      spec.data_y = Eigen::VectorXd::Zero(2);
      return adapted_cost(spec);
    };
    auto small = make(1.0, 0.5);
    auto big_f = make(2.0, 0.5);
    auto big_l = make(1.0, 3.0);
    for (int k = 0; k < 500; ++k) {
      auto u = rand_vec(rng, 2);
      auto v = rand_vec(rng, 2);
      CHECK(big_f(u, v) >= small(u, v) * (1.0 - 1e-12));
      CHECK(big_l(u, v) >= small(u, v) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("uniform Lipschitz field over the data ball") {
  SUBCASE("monotone field maximized on the boundary") {
    auto field = constant_lipschitz_field(1.0, 1.0);  // (sqrt d + |y|)/sigma^2 shape
    Eigen::VectorXd y(1);
    y << 0.7;
    auto uni = uniform_over_data_ball(field, 2.0, y);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
    CHECK(uni.eval(u, u, y) == doctest::Approx(3.0));
  }
  SUBCASE("degenerate ball keeps the fixed-data field") {
    auto field = constant_lipschitz_field(1.0, 2.0);
    Eigen::VectorXd y(1);
    y << 0.5;
    auto uni = uniform_over_data_ball(field, 0.0, y);
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd other(1);
    other << 99.0;  // ignored by the pinned field
    CHECK(uni.eval(probe, probe, other) == doctest::Approx(field.eval(probe, probe, y)));
  }
  SUBCASE("y-independent field unchanged") {
    auto field = constant_lipschitz_field(1.7, 0.0);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    auto uni = uniform_over_data_ball(field, 5.0, y);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
    CHECK(uni.eval(u, u, y) == doctest::Approx(1.7));
  }
  SUBCASE("non-monotone without maximizer throws") {
    LipschitzField f;
    f.kind = LipschitzField::Kind::generic;
    f.generic = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                   const Eigen::VectorXd& y) { return std::cos(y.norm()); };
    f.y_norm_monotone = false;
    CHECK_THROWS_AS(uniform_over_data_ball(f, 1.0, Eigen::VectorXd::Zero(1)),
                    NotMonotone);
  }
}

TEST_CASE("config cost registry") {
  Eigen::VectorXd u(1), v(1);
  u << 0.0;
  v << 2.0;
  CHECK(cost_from_config("norm_p", 2.0)(u, v) == doctest::Approx(4.0));
  CHECK(cost_from_config("growth_s", 1.0)(u, v) == doctest::Approx(4.0));
  CHECK_THROWS_AS(cost_from_config("adapted", 1.0), ConfigError);
  CHECK_THROWS_AS(cost_from_config("mahalanobis", 1.0), ConfigError);
}

TEST_CASE("cost matrix matches pointwise evaluation") {
  CounterRng rng({36, 0});
  Eigen::MatrixXd A(7, 2), B(5, 2);
  for (int i = 0; i < 7; ++i) A.row(i) = rand_vec(rng, 2).transpose();
  for (int j = 0; j < 5; ++j) B.row(j) = rand_vec(rng, 2).transpose();
  auto ma = make_equal_weight(A);
  auto mb = make_equal_weight(B);

  auto base = std::make_shared<const DistanceLikeCost>(norm_cost(1.0));
  AdaptedCostSpec spec;
  spec.base = base;
  spec.growth_f = [](const Eigen::VectorXd& u) { return 1.0 + u.norm(); };
  spec.lipschitz = norm_sum_lipschitz_field(0.7);
  spec.data_y = rand_vec(rng, 2);

  for (const auto& c : {norm_cost(2.0), weighted_growth_cost(1.5),
                        offset_growth_cost(2.0, 2.0), adapted_cost(spec)}) {
    auto M = cost_matrix(c, ma, mb);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(M(i, j) ==
              doctest::Approx(c(A.row(i).transpose(), B.row(j).transpose()))
                  .epsilon(1e-12));
  }
}
