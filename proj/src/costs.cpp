#include "bipstab/costs.hpp"

#include <cmath>

#include "bipstab/errors.hpp"

namespace bipstab {

namespace {

double pow_fast(double base, double e) {
  if (e == 1.0) return base;
  if (e == 2.0) return base * base;
  if (e == 0.0) return 1.0;
  return std::pow(base, e);
}

}  // namespace

double LipschitzField::eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& y) const {
  switch (kind) {
    case Kind::constant_of_y:
      return c0 + c1 * y.norm();
    case Kind::norm_sum_of_y:
      return k * (u.norm() + v.norm() + y.norm());
    case Kind::generic:
      return generic(u, v, y);
  }
  return 0.0;
}

LipschitzField constant_lipschitz_field(double c0, double c1) {
  LipschitzField f;
  f.kind = LipschitzField::Kind::constant_of_y;
  f.c0 = c0;
  f.c1 = c1;
  f.y_norm_monotone = c1 >= 0.0;
  return f;
}

LipschitzField norm_sum_lipschitz_field(double k) {
  LipschitzField f;
  f.kind = LipschitzField::Kind::norm_sum_of_y;
  f.k = k;
  f.y_norm_monotone = k >= 0.0;
  return f;
}

namespace {

// Field with |y| replaced by the fixed value yn.
LipschitzField pin_y_norm(const LipschitzField& field, double yn) {
  switch (field.kind) {
    case LipschitzField::Kind::constant_of_y:
      return constant_lipschitz_field(field.c0 + field.c1 * yn, 0.0);
    case LipschitzField::Kind::norm_sum_of_y: {
      LipschitzField out;
      out.kind = LipschitzField::Kind::generic;
      const double kk = field.k;
      out.generic = [kk, yn](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                             const Eigen::VectorXd&) {
        return kk * (u.norm() + v.norm() + yn);
      };
      out.y_norm_monotone = true;
      return out;
    }
    case LipschitzField::Kind::generic:
      break;
  }
  return field;
}

}  // namespace

LipschitzField uniform_over_data_ball(const LipschitzField& field, double radius,
                                      const Eigen::VectorXd& data_y) {
  if (radius == 0.0) {
    // Degenerate ball: pin the field at the supplied data.
    if (field.kind == LipschitzField::Kind::generic) {
      auto inner = field.generic;
      Eigen::VectorXd y = data_y;
      LipschitzField out;
      out.kind = LipschitzField::Kind::generic;
      out.generic = [inner, y](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                               const Eigen::VectorXd&) { return inner(u, v, y); };
      out.y_norm_monotone = true;
      return out;
    }
    return pin_y_norm(field, data_y.norm());
  }

  if (field.ball_maximizer) {
    auto inner = field;
    Eigen::VectorXd ystar = field.ball_maximizer(radius);
    LipschitzField out;
    out.kind = LipschitzField::Kind::generic;
    out.generic = [inner, ystar](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd&) {
      return inner.eval(u, v, ystar);
    };
    out.y_norm_monotone = true;
    return out;
  }
  if (!field.y_norm_monotone)
    throw NotMonotone(
        "Lipschitz field declares no |y|-monotonicity and no maximizer rule");

  // Monotone in |y|: the sup over the ball sits on the boundary |y| = r.
  if (field.kind == LipschitzField::Kind::generic) {
    auto inner = field.generic;
    const double r = radius;
    LipschitzField out;
    out.kind = LipschitzField::Kind::generic;
    out.generic = [inner, r](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                             const Eigen::VectorXd& y) {
      Eigen::VectorXd ystar = Eigen::VectorXd::Zero(y.size());
      ystar[0] = r;
      return inner(u, v, ystar);
    };
    out.y_norm_monotone = true;
    return out;
  }
  return pin_y_norm(field, radius);
}

double DistanceLikeCost::operator()(const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v) const {
  switch (kind) {
    case Kind::norm_power:
      return pow_fast((u - v).norm(), power);
    case Kind::growth:
      return pow_fast(offset + u.norm() + v.norm(), power) * (u - v).norm();
    case Kind::adapted: {
      const auto& s = *adapted;
      const double base_uv = (*s.base)(u, v);
      if (base_uv == 0.0) return 0.0;
      const double cu0 = s.base->to_origin(u);
      const double cv0 = s.base->to_origin(v);
      const double fu = s.growth_f ? s.growth_f(u) : 1.0;
      const double fv = s.growth_f ? s.growth_f(v) : 1.0;
      const double lip = s.lipschitz.eval(u, v, s.data_y);
      return std::max({1.0, cu0, cv0}) * std::max(fu, fv) * std::max(1.0, lip) *
             base_uv;
    }
    case Kind::generic:
      return generic_eval(u, v);
  }
  return 0.0;
}

double DistanceLikeCost::to_origin(const Eigen::VectorXd& u) const {
  switch (kind) {
    case Kind::norm_power:
      return pow_fast(u.norm(), power);
    case Kind::growth:
      return pow_fast(offset + u.norm(), power) * u.norm();
    default:
      return (*this)(u, Eigen::VectorXd::Zero(u.size()));
  }
}

DistanceLikeCost norm_cost(double p_power) {
  if (p_power < 1.0) throw ConfigError("norm cost needs p >= 1");
  DistanceLikeCost c;
  c.kind = DistanceLikeCost::Kind::norm_power;
  c.power = p_power;
  c.is_metric = p_power == 1.0;
  c.weak_triangle_constant = p_power == 1.0 ? 1.0 : std::pow(2.0, p_power - 1.0);
  c.description = "|u-v|^" + format_double(p_power);
  return c;
}

DistanceLikeCost weighted_growth_cost(double s) {
  if (s < 0.0) throw ConfigError("growth cost needs s >= 0");
  DistanceLikeCost c;
  c.kind = DistanceLikeCost::Kind::growth;
  c.power = s;
  c.offset = 0.0;
  c.is_metric = s == 0.0;
  c.weak_triangle_constant = std::pow(2.0, std::max(1.0, 2.0 * s - 1.0));
  c.description = "(|u|+|v|)^" + format_double(s) + " |u-v|";
  return c;
}

DistanceLikeCost offset_growth_cost(double offset, double power) {
  if (offset < 0.0 || power < 0.0)
    throw ConfigError("offset growth cost needs offset, power >= 0");
  DistanceLikeCost c;
  c.kind = DistanceLikeCost::Kind::growth;
  c.power = power;
  c.offset = offset;
  c.is_metric = power == 0.0;
  c.weak_triangle_constant = std::pow(2.0, std::max(1.0, 2.0 * power - 1.0));
  c.description = "(" + format_double(offset) + "+|u|+|v|)^" +
                  format_double(power) + " |u-v|";
  return c;
}

DistanceLikeCost cost_from_config(const std::string& name, double param) {
  if (name == "norm_p") return norm_cost(param);
  if (name == "growth_s") return weighted_growth_cost(param);
  if (name == "adapted")
    throw ConfigError(
        "the adapted cost needs a potential; build it where one is in scope");
  throw ConfigError("unknown cost key: " + name);
}

DistanceLikeCost adapted_cost(AdaptedCostSpec spec) {
  if (!spec.base) throw ConfigError("adapted cost needs a base cost");
  DistanceLikeCost c;
  c.kind = DistanceLikeCost::Kind::adapted;
  c.is_metric = false;
  c.weak_triangle_constant = spec.base->weak_triangle_constant;
  c.description = "adapted(" + spec.base->description + ")";
  c.adapted = std::make_shared<const AdaptedCostSpec>(std::move(spec));
  return c;
}

namespace {

// Pairwise Euclidean distances by direct row differences. The gemm identity
// |a|^2 - 2ab + |b|^2 cancels catastrophically on near-identical points and
// would leave ~1e-8 noise where the distance is exactly zero.
Eigen::MatrixXd pairwise_distance(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B) {
  Eigen::MatrixXd d(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      d(i, j) = (A.row(i) - B.row(j)).norm();
  return d;
}

}  // namespace

CostMatrix cost_matrix(const DistanceLikeCost& cost, const ParticleMeasure& a,
                       const ParticleMeasure& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("cost matrix between measures of different dims");
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  switch (cost.kind) {
    case DistanceLikeCost::Kind::norm_power: {
      Eigen::MatrixXd d = pairwise_distance(a.points, b.points);
      if (cost.power == 1.0) return d;
      if (cost.power == 2.0) return d.array().square();
      return d.array().pow(cost.power);
    }
    case DistanceLikeCost::Kind::growth: {
      Eigen::MatrixXd d = pairwise_distance(a.points, b.points);
      Eigen::VectorXd na = a.points.rowwise().norm();
      Eigen::VectorXd nb = b.points.rowwise().norm();
      CostMatrix out(n, m);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double base = cost.offset + na[i];
        for (Eigen::Index j = 0; j < m; ++j)
          out(i, j) = pow_fast(base + nb[j], cost.power) * d(i, j);
      }
      return out;
    }
    case DistanceLikeCost::Kind::adapted: {
      const auto& s = *cost.adapted;
      CostMatrix base = cost_matrix(*s.base, a, b);
      Eigen::VectorXd ca0(n), cb0(m), fa(n), fb(m);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd u = a.points.row(i).transpose();
        ca0[i] = s.base->to_origin(u);
        fa[i] = s.growth_f ? s.growth_f(u) : 1.0;
      }
      for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd v = b.points.row(j).transpose();
        cb0[j] = s.base->to_origin(v);
        fb[j] = s.growth_f ? s.growth_f(v) : 1.0;
      }
      const double ynorm = s.data_y.norm();
      CostMatrix out(n, m);
      if (s.lipschitz.kind == LipschitzField::Kind::generic) {
        for (Eigen::Index i = 0; i < n; ++i) {
          Eigen::VectorXd u = a.points.row(i).transpose();
          for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::VectorXd v = b.points.row(j).transpose();
            const double lip = s.lipschitz.generic(u, v, s.data_y);
            out(i, j) = std::max({1.0, ca0[i], cb0[j]}) * std::max(fa[i], fb[j]) *
                        std::max(1.0, lip) * base(i, j);
          }
        }
      } else {
        Eigen::VectorXd na = a.points.rowwise().norm();
        Eigen::VectorXd nb = b.points.rowwise().norm();
        const bool constant = s.lipschitz.kind == LipschitzField::Kind::constant_of_y;
        const double lconst = s.lipschitz.c0 + s.lipschitz.c1 * ynorm;
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < m; ++j) {
            const double lip =
                constant ? lconst : s.lipschitz.k * (na[i] + nb[j] + ynorm);
            out(i, j) = std::max({1.0, ca0[i], cb0[j]}) * std::max(fa[i], fb[j]) *
                        std::max(1.0, lip) * base(i, j);
          }
        }
      }
      return out;
    }
    case DistanceLikeCost::Kind::generic: {
      CostMatrix out(n, m);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd u = a.points.row(i).transpose();
        for (Eigen::Index j = 0; j < m; ++j)
          out(i, j) = cost.generic_eval(u, b.points.row(j).transpose());
      }
      return out;
    }
  }
  return CostMatrix::Zero(n, m);
}

}  // namespace bipstab
