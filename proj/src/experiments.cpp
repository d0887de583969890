#include "bipstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "bipstab/errors.hpp"
#include "bipstab/prior_factory.hpp"
#include "bipstab/relu_net.hpp"
#include "json.hpp"

namespace bipstab {

namespace {

const std::set<std::string> kExperiments = {
    "empirical_prior", "matern_hyper",      "pushforward",
    "surrogate",       "data_perturbation", "likelihood_perturbation"};

template <typename T>
void require_increasing(const std::vector<T>& grid, const std::string& name) {
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError(name + " grid must be strictly increasing");
}

double holder_to_double(const nlohmann::json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    throw ConfigError("holder exponent must be a number or \"inf\"");
  }
  return v.get<double>();
}

nlohmann::ordered_json holder_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (kExperiments.find(experiment) == kExperiments.end())
    throw ConfigError("unknown experiment: " + experiment);
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (particles < 64) throw ConfigError("particles must be >= 64");
  if (d < 1) throw ConfigError("d must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  require_increasing(eps_grid, "eps");
  require_increasing(n_grid, "N");
  bipstab::validate(holder);
  if (experiment == "empirical_prior" && d > 3)
    throw ConfigError("empirical_prior runs at d <= 3");
  if (experiment == "matern_hyper" && J > 128)
    throw ConfigError("matern_hyper runs at J <= 128");
  if ((experiment == "pushforward" || experiment == "surrogate") && d > 2)
    throw ConfigError(experiment + " runs at d <= 2");
  if (solver != "exact" && solver != "sinkhorn")
    throw ConfigError("solver must be exact or sinkhorn");
  if (!(sinkhorn_epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  const bool study = experiment == "empirical_prior" ||
                     experiment == "matern_hyper" ||
                     experiment == "pushforward" || experiment == "surrogate";
  if (study && (cost_name != "norm_p" || cost_param != 1.0))
    throw ConfigError(
        experiment + "'s assembled bound chain is specific to the |u-v| cost");
  if (cost_name != "adapted") cost_from_config(cost_name, cost_param);
}

ExperimentConfig config_from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.experiment = j.at("experiment").get<std::string>();
  cfg.seed = j.value("seed", 0ull);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.particles = j.value("particles", static_cast<long>(cfg.particles));
  if (j.contains("holder")) {
    cfg.holder.p = holder_to_double(j["holder"].at("p"));
    cfg.holder.q = holder_to_double(j["holder"].at("q"));
  }
  cfg.d = j.value("d", cfg.d);
  cfg.sigma = j.value("sigma", cfg.sigma);
  if (j.contains("y")) {
    auto yv = j["y"].get<std::vector<double>>();
    cfg.y = Eigen::Map<const Eigen::VectorXd>(yv.data(),
                                              static_cast<Eigen::Index>(yv.size()));
  }
  if (j.contains("eps_grid")) cfg.eps_grid = j["eps_grid"].get<std::vector<double>>();
  if (j.contains("n_grid")) cfg.n_grid = j["n_grid"].get<std::vector<long>>();
  if (j.contains("width_grid"))
    cfg.width_grid = j["width_grid"].get<std::vector<std::vector<int>>>();
  cfg.J = j.value("J", cfg.J);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.filters = j.value("filters", cfg.filters);
  cfg.filter_width = j.value("filter_width", cfg.filter_width);
  if (j.contains("hyper_dir")) {
    auto dir = j["hyper_dir"].get<std::vector<double>>();
    if (dir.size() != 2) throw ConfigError("hyper_dir must have two entries");
    cfg.hyper_dir_gamma = dir[0];
    cfg.hyper_dir_tau = dir[1];
  }
  cfg.base_map = j.value("base_map", cfg.base_map);
  cfg.map_a = j.value("map_a", cfg.map_a);
  cfg.map_b = j.value("map_b", cfg.map_b);
  if (j.contains("forward_matrix") && !j["forward_matrix"].empty()) {
    auto rows = j["forward_matrix"].get<std::vector<std::vector<double>>>();
    cfg.forward_matrix.resize(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size())
        throw ConfigError("forward_matrix rows must have equal length");
      for (size_t c = 0; c < rows[r].size(); ++c)
        cfg.forward_matrix(static_cast<Eigen::Index>(r),
                           static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  cfg.perturbation_count = j.value("perturbation_count", cfg.perturbation_count);
  cfg.data_ball_radius = j.value("data_ball_radius", cfg.data_ball_radius);
  cfg.fit_grid = j.value("fit_grid", cfg.fit_grid);
  if (j.contains("cost")) {
    cfg.cost_name = j["cost"].value("name", cfg.cost_name);
    cfg.cost_param = j["cost"].value("param", cfg.cost_param);
  }
  cfg.solver = j.value("solver", cfg.solver);
  cfg.sinkhorn_epsilon = j.value("epsilon", cfg.sinkhorn_epsilon);
  cfg.sinkhorn_max_iter = j.value("max_iter", cfg.sinkhorn_max_iter);
  cfg.sinkhorn_tol = j.value("tol", cfg.sinkhorn_tol);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.validate();
  return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json_string(ss.str());
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  j["particles"] = cfg.particles;
  j["holder"] = {{"p", holder_to_json(cfg.holder.p)},
                 {"q", holder_to_json(cfg.holder.q)}};
  j["d"] = cfg.d;
  j["sigma"] = cfg.sigma;
  j["y"] = std::vector<double>(cfg.y.data(), cfg.y.data() + cfg.y.size());
  j["eps_grid"] = cfg.eps_grid;
  j["n_grid"] = cfg.n_grid;
  j["width_grid"] = cfg.width_grid;
  j["J"] = cfg.J;
  j["gamma"] = cfg.gamma;
  j["tau"] = cfg.tau;
  j["alpha"] = cfg.alpha;
  j["filters"] = cfg.filters;
  j["filter_width"] = cfg.filter_width;
  j["hyper_dir"] = {cfg.hyper_dir_gamma, cfg.hyper_dir_tau};
  j["base_map"] = cfg.base_map;
  j["map_a"] = cfg.map_a;
  j["map_b"] = cfg.map_b;
  std::vector<std::vector<double>> fm;
  for (Eigen::Index r = 0; r < cfg.forward_matrix.rows(); ++r) {
    std::vector<double> row(static_cast<size_t>(cfg.forward_matrix.cols()));
    for (Eigen::Index c = 0; c < cfg.forward_matrix.cols(); ++c)
      row[static_cast<size_t>(c)] = cfg.forward_matrix(r, c);
    fm.push_back(std::move(row));
  }
  j["forward_matrix"] = fm;
  j["perturbation_count"] = cfg.perturbation_count;
  j["data_ball_radius"] = cfg.data_ball_radius;
  j["fit_grid"] = cfg.fit_grid;
  j["cost"] = {{"name", cfg.cost_name}, {"param", cfg.cost_param}};
  j["solver"] = cfg.solver;
  j["epsilon"] = cfg.sinkhorn_epsilon;
  j["max_iter"] = cfg.sinkhorn_max_iter;
  j["tol"] = cfg.sinkhorn_tol;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2);
}

ExperimentConfig with_defaults(ExperimentConfig cfg) {
  if (cfg.y.size() == 0) {
    if (cfg.experiment == "matern_hyper") {
      cfg.y = Eigen::VectorXd::Zero(cfg.filters);
      for (int i = 0; i < cfg.filters; ++i)
        cfg.y[i] = 0.05 * ((i % 2 == 0) ? 1.0 : -1.0) / (1.0 + i);
    } else {
      cfg.y = Eigen::VectorXd::Constant(cfg.d, 0.5);
    }
  }
  if (cfg.eps_grid.empty()) cfg.eps_grid = {0.02, 0.04, 0.08, 0.16};
  if (cfg.n_grid.empty()) cfg.n_grid = {64, 128, 256, 512, 1024, 2048, 4096};
  if (cfg.width_grid.empty()) cfg.width_grid = {{4}, {8}, {16}, {32}};
  if (cfg.forward_matrix.size() == 0 &&
      (cfg.experiment == "pushforward" || cfg.experiment == "surrogate")) {
    cfg.forward_matrix = Eigen::MatrixXd::Constant(1, cfg.d, 0.8);
  }
  return cfg;
}

RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw NonPositiveInput("rate fit needs >= 3 paired points");
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  RateFit fit;
  fit.log_x.resize(n);
  fit.log_y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(xs[static_cast<size_t>(i)] > 0.0) || !(ys[static_cast<size_t>(i)] > 0.0))
      throw NonPositiveInput("rate fit needs positive data");
    fit.log_x[i] = std::log(xs[static_cast<size_t>(i)]);
    fit.log_y[i] = std::log(ys[static_cast<size_t>(i)]);
  }
  const double mx = fit.log_x.mean();
  const double my = fit.log_y.mean();
  const double sxx = (fit.log_x.array() - mx).square().sum();
  const double sxy = ((fit.log_x.array() - mx) * (fit.log_y.array() - my)).sum();
  if (sxx == 0.0) throw NonPositiveInput("rate fit needs distinct x values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double syy = (fit.log_y.array() - my).square().sum();
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

namespace {

Potential tanh_potential(const ExperimentConfig& cfg) {
  return gaussian_residual_potential(tanh_forward(cfg.d), cfg.sigma);
}

// Perturbed-data potential phi'(u; y) = phi(u; y + delta) with its envelopes
// shifted the same way.
Potential shift_data(const Potential& base, const Eigen::VectorXd& delta) {
  Potential out = base;
  auto phi = base.phi;
  auto g = base.envelope_g;
  auto h = base.envelope_h;
  Eigen::VectorXd dd = delta;
  out.phi = [phi, dd](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return phi(u, y + dd);
  };
  out.envelope_g = [g, dd](const Eigen::VectorXd& y) { return g(y + dd); };
  out.envelope_h = [h, dd](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return h(u, y + dd);
  };
  if (base.lipschitz_L) {
    LipschitzField lf;
    lf.kind = LipschitzField::Kind::generic;
    auto inner = *base.lipschitz_L;
    lf.generic = [inner, dd](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                             const Eigen::VectorXd& y) {
      return inner.eval(u, v, y + dd);
    };
    lf.y_norm_monotone = false;
    out.lipschitz_L = lf;
  }
  out.name = base.name + "+data_shift";
  return out;
}

// phi' = scale * phi for a nonnegative potential; envelopes follow exactly.
Potential scale_potential(const Potential& base, double scale) {
  if (!(scale > 0.0)) throw ConfigError("potential scale must be positive");
  Potential out = base;
  auto phi = base.phi;
  out.phi = [phi, scale](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return scale * phi(u, y);
  };
  auto h = base.envelope_h;
  out.envelope_h = [h, scale](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return std::pow(h(u, y), scale);
  };
  if (base.lipschitz_L) {
    LipschitzField lf = *base.lipschitz_L;
    switch (lf.kind) {
      case LipschitzField::Kind::constant_of_y:
        lf.c0 *= scale;
        lf.c1 *= scale;
        break;
      case LipschitzField::Kind::norm_sum_of_y:
        lf.k *= scale;
        break;
      case LipschitzField::Kind::generic: {
        auto inner = lf.generic;
        lf.generic = [inner, scale](const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& y) {
          return scale * inner(u, v, y);
        };
        break;
      }
    }
    out.lipschitz_L = lf;
  }
  out.name = base.name + "+scaled";
  return out;
}

// The configured LHS cost; the "adapted" key resolves against the potential.
DistanceLikeCost lhs_cost(const ExperimentConfig& cfg, const Potential& phi) {
  if (cfg.cost_name == "adapted") {
    if (!phi.lipschitz_L)
      throw ConfigError("adapted cost needs the potential's Lipschitz field");
    AdaptedCostSpec spec;
    spec.base =
        std::make_shared<const DistanceLikeCost>(norm_cost(cfg.cost_param));
    spec.growth_f = phi.envelope_f;
    spec.lipschitz = *phi.lipschitz_L;
    spec.data_y = cfg.y;
    return adapted_cost(spec);
  }
  return cost_from_config(cfg.cost_name, cfg.cost_param);
}

struct OtValue {
  double value = 0.0;
  IpmMode mode = IpmMode::exact;
};

// Runner-level OT dispatch honoring the solver config. Sinkhorn plans are
// feasible couplings, so their cost is an upper bound on the OT value.
OtValue runner_ot(const ExperimentConfig& cfg, const ParticleMeasure& a,
                  const ParticleMeasure& b, const DistanceLikeCost& cost) {
  if (cfg.solver == "sinkhorn") {
    SinkhornOptions opts{cfg.sinkhorn_epsilon, cfg.sinkhorn_max_iter,
                         cfg.sinkhorn_tol};
    return {sinkhorn(a, b, cost, opts).primal_cost, IpmMode::coupling};
  }
  auto v = ipm_value(a, b, cost);
  return {v.value, v.mode};
}

struct RowAccumulator {
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> margin;
  int satisfied_count = 0;

  void add(const BoundReport& r) {
    lhs.push_back(r.lhs_estimate);
    rhs.push_back(r.rhs_value);
    margin.push_back(r.margin);
    if (r.satisfied) ++satisfied_count;
  }
  double mean_lhs() const {
    return std::accumulate(lhs.begin(), lhs.end(), 0.0) /
           static_cast<double>(lhs.size());
  }
  double mean_rhs() const {
    return std::accumulate(rhs.begin(), rhs.end(), 0.0) /
           static_cast<double>(rhs.size());
  }
  double mean_margin() const {
    return std::accumulate(margin.begin(), margin.end(), 0.0) /
           static_cast<double>(margin.size());
  }
  double fraction() const {
    return lhs.empty() ? 1.0
                       : static_cast<double>(satisfied_count) /
                             static_cast<double>(lhs.size());
  }
};

constexpr double kSatisfactionLevel = 0.95;

}  // namespace

ExperimentResult run_likelihood_perturbation(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "likelihood_perturbation";
  Potential phi = tanh_potential(cfg);
  const DistanceLikeCost cost = lhs_cost(cfg, phi);

  int satisfied = 0;
  int total = 0;
  int explicit_not_looser = 0;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    SeedSpec base{cfg.seed, static_cast<std::uint64_t>(rep)};
    ParticleMeasure prior =
        sample_standard_gaussian(cfg.d, cfg.particles, base.stream(0));
    check_envelope_sandwich(phi, prior, cfg.y);
    CounterRng perturb_rng(base.stream(1));

    for (int k = 0; k <= cfg.perturbation_count; ++k) {
      Potential phi_prime = phi;
      double magnitude = 0.0;
      if (k > 0 && k % 2 == 1) {
        Eigen::VectorXd delta(cfg.d);
        for (int c = 0; c < cfg.d; ++c) delta[c] = perturb_rng.uniform(-0.25, 0.25);
        phi_prime = shift_data(phi, delta);
        magnitude = delta.norm();
      } else if (k > 0) {
        const double rho = perturb_rng.uniform(-0.3, 0.3);
        phi_prime = scale_potential(phi, 1.0 + rho);
        magnitude = std::abs(rho);
      }

      BoundReport rep_env =
          likelihood_bound_rhs(phi, phi_prime, prior, cost, cfg.holder, cfg.y);
      EvidenceEstimate z = evidence_with_se(prior, at_data(phi, cfg.y));
      EvidenceEstimate zp = evidence_with_se(prior, at_data(phi_prime, cfg.y));
      BoundReport rep_exp = likelihood_bound_rhs_explicit(
          phi, phi_prime, prior, cost, cfg.holder, cfg.y, z, zp);
      const double combined_se_sum = rep_env.mc_standard_errors.at("combined") +
                                     rep_exp.mc_standard_errors.at("combined");
      if (rep_exp.rhs_value <= rep_env.rhs_value + 3.0 * combined_se_sum)
        ++explicit_not_looser;

      ++total;
      if (rep_env.satisfied) ++satisfied;
      result.reports.push_back(rep_env);
      result.reports.push_back(rep_exp);
      result.rows.push_back({result.experiment, "perturbation", magnitude,
                             rep_env.lhs_estimate, rep_env.rhs_value,
                             rep_env.satisfied, rep_env.margin});
    }
  }
  result.summary["satisfied_fraction"] =
      static_cast<double>(satisfied) / static_cast<double>(total);
  result.summary["explicit_not_looser_fraction"] =
      static_cast<double>(explicit_not_looser) / static_cast<double>(total);
  result.all_satisfied = result.summary["satisfied_fraction"] >= kSatisfactionLevel;
  return result;
}

ExperimentResult run_data_perturbation(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "data_perturbation";
  const double r = cfg.data_ball_radius;
  Potential phi = with_data_ball(tanh_potential(cfg), cfg.y, r);
  const DistanceLikeCost cost = lhs_cost(cfg, phi);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(cfg.d);
  dir[0] = 1.0;

  std::vector<double> eps_for_fit, lhs_for_fit;
  {
    ParticleMeasure prior = sample_standard_gaussian(
        cfg.d, cfg.particles, SeedSpec{cfg.seed, 0}.stream(0));
    BoundReport zero =
        data_perturbation_bound(phi, prior, cost, cfg.holder, cfg.y, cfg.y, r);
    result.reports.push_back(zero);
    result.rows.push_back({result.experiment, "data_shift", 0.0,
                           zero.lhs_estimate, zero.rhs_value, zero.satisfied,
                           zero.margin});
  }
  for (double eps : cfg.eps_grid) {
    if (eps > r) throw ConfigError("data shift exceeds the declared ball radius");
    RowAccumulator acc;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      SeedSpec base{cfg.seed, static_cast<std::uint64_t>(rep)};
      ParticleMeasure prior =
          sample_standard_gaussian(cfg.d, cfg.particles, base.stream(0));
      BoundReport report = data_perturbation_bound(
          phi, prior, cost, cfg.holder, cfg.y, cfg.y + eps * dir, r);
      acc.add(report);
      result.reports.push_back(report);
    }
    result.rows.push_back({result.experiment, "data_shift", eps, acc.mean_lhs(),
                           acc.mean_rhs(), acc.fraction() >= kSatisfactionLevel,
                           acc.mean_margin()});
    eps_for_fit.push_back(eps);
    lhs_for_fit.push_back(acc.mean_lhs());
  }
  RateFit fit = fit_rate(eps_for_fit, lhs_for_fit);
  result.summary["slope"] = fit.slope;
  result.summary["r_squared"] = fit.r_squared;
  bool rows_ok = true;
  for (const auto& row : result.rows) rows_ok = rows_ok && row.satisfied;
  result.all_satisfied = rows_ok && std::abs(fit.slope - 1.0) <= 0.2;
  return result;
}

ExperimentResult run_prior_shift(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "prior_shift";
  Potential phi = tanh_potential(cfg);
  const DistanceLikeCost cost = lhs_cost(cfg, phi);
  Eigen::VectorXd dir = Eigen::VectorXd::Ones(cfg.d).normalized();

  std::vector<double> eps_for_fit, lhs_for_fit;
  int satisfied = 0;
  int total = 0;
  for (double eps : cfg.eps_grid) {
    RowAccumulator acc;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      SeedSpec base{cfg.seed, static_cast<std::uint64_t>(rep)};
      ParticleMeasure prior =
          sample_standard_gaussian(cfg.d, cfg.particles, base.stream(0));
      // Mean shift under common random numbers.
      ParticleMeasure prior_star{prior.points.rowwise() + (eps * dir).transpose(),
                                 prior.weights};
      auto reports = prior_bound_rhs(phi, prior, prior_star, cost, cfg.y);
      acc.add(reports.explicit_z);
      result.reports.push_back(reports.envelope);
      result.reports.push_back(reports.explicit_z);
      ++total;
      if (reports.explicit_z.satisfied) ++satisfied;
    }
    result.rows.push_back({result.experiment, "mean_shift", eps, acc.mean_lhs(),
                           acc.mean_rhs(), acc.fraction() >= kSatisfactionLevel,
                           acc.mean_margin()});
    eps_for_fit.push_back(eps);
    lhs_for_fit.push_back(acc.mean_lhs());
  }
  RateFit fit = fit_rate(eps_for_fit, lhs_for_fit);
  result.summary["slope"] = fit.slope;
  result.summary["r_squared"] = fit.r_squared;
  result.summary["satisfied_fraction"] =
      static_cast<double>(satisfied) / static_cast<double>(total);
  result.all_satisfied = std::abs(fit.slope - 1.0) <= 0.2 &&
                         fit.r_squared >= 0.9 &&
                         result.summary["satisfied_fraction"] >= kSatisfactionLevel;
  return result;
}

ExperimentResult run_empirical_prior(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "empirical_prior";
  Potential phi = tanh_potential(cfg);
  const DistanceLikeCost w1 = norm_cost(1.0);
  auto phi_y = at_data(phi, cfg.y);
  auto sampler = standard_gaussian_sampler(cfg.d);

  const long n_max = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
  const Eigen::Index n_ref = 8 * n_max;
  ParticleMeasure prior_ref = sampler(n_ref, SeedSpec{cfg.seed, 1});
  check_envelope_sandwich(phi, prior_ref, cfg.y);
  auto [nu_ref, z_ref] = reweight(prior_ref, phi_y);

  // Split-half self-distance audits the reference discretization error.
  {
    const Eigen::Index half = n_ref / 2;
    ParticleMeasure a{prior_ref.points.topRows(half),
                      Eigen::VectorXd::Constant(half, 1.0 / half)};
    ParticleMeasure b{
        prior_ref.points.bottomRows(n_ref - half),
        Eigen::VectorXd::Constant(n_ref - half, 1.0 / (n_ref - half))};
    auto [nu_a, za] = reweight(a, phi_y);
    auto [nu_b, zb] = reweight(b, phi_y);
    result.summary["reference_self_distance"] = ipm_value(nu_a, nu_b, w1).value;
  }

  const double mu_abs =
      weighted_moment(prior_ref, [](const Eigen::VectorXd& u) { return u.norm(); });
  const double mu_sq = weighted_moment(
      prior_ref, [](const Eigen::VectorXd& u) { return u.squaredNorm(); });
  const double mu_cube = weighted_moment(
      prior_ref, [](const Eigen::VectorXd& u) { return std::pow(u.norm(), 3.0); });
  result.summary["prior_moment_1"] = mu_abs;
  result.summary["prior_moment_2"] = mu_sq;
  result.summary["prior_moment_3"] = mu_cube;

  const double dd = static_cast<double>(cfg.d);
  const double y2 = cfg.y.squaredNorm();
  const double s2 = cfg.sigma * cfg.sigma;
  const double lips = std::max(1.0, (std::sqrt(dd) + cfg.y.norm()) / s2);
  const double h_floor = std::exp(-2.0 * (dd + y2) / s2);

  std::vector<double> n_for_fit, lhs_for_fit, env_for_fit;
  bool rows_ok = true;
  double per_seed_min = 1.0;
  for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    const long N = cfg.n_grid[gi];
    RowAccumulator acc;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      // Stream ids 100+ keep the subsample draws disjoint from the
      // reference stream.
      SeedSpec stream{cfg.seed,
                      100 + static_cast<std::uint64_t>(rep) * cfg.n_grid.size() +
                          gi};
      ParticleMeasure mu_N = empirical_subsample(sampler, N, stream);
      auto [nu_N, z_N] = reweight(mu_N, phi_y);
      const OtValue lhs_ot = runner_ot(cfg, nu_ref, nu_N, w1);
      const double lhs = lhs_ot.value;

      auto m2N = weighted_moment_se(
          mu_N, [](const Eigen::VectorXd& u) { return u.squaredNorm(); });
      const double w2 =
          cfg.d == 1
              ? std::sqrt(quantile_coupling_cost(prior_ref, mu_N, 2.0))
              : std::sqrt(exact_ot(prior_ref, mu_N, norm_cost(2.0)).primal_cost);
      const double moment_factor = std::sqrt(1.0 + mu_sq + m2N.value);
      const double rhs = lips * (1.0 + mu_abs) * moment_factor / h_floor * w2;
      const double rhs_se =
          m2N.std_error > 0.0
              ? rhs * 0.5 * m2N.std_error / (1.0 + mu_sq + m2N.value)
              : 0.0;

      BoundReport report;
      report.label = "empirical_prior_chain";
      report.lhs_estimate = lhs;
      report.lhs_mode = lhs_ot.mode;
      report.rhs_value = rhs;
      report.rhs_components = {{"lipschitz_factor", lips},
                               {"moment_1_plus", 1.0 + mu_abs},
                               {"moment_factor", moment_factor},
                               {"h_floor", h_floor},
                               {"w2_prior", w2},
                               {"evidence_z", z_N}};
      report.mc_standard_errors["combined"] = rhs_se;
      finalize_report(report);
      acc.add(report);
      result.reports.push_back(report);
    }
    const double mean_lhs = acc.mean_lhs();
    result.rows.push_back({result.experiment, "N", static_cast<double>(N),
                           mean_lhs, acc.mean_rhs(),
                           acc.fraction() >= kSatisfactionLevel,
                           acc.mean_margin()});
    rows_ok = rows_ok && result.rows.back().satisfied;
    per_seed_min = std::min(per_seed_min, acc.fraction());
    n_for_fit.push_back(static_cast<double>(N));
    lhs_for_fit.push_back(mean_lhs);
    env_for_fit.push_back(
        fournier_rate_envelope(cfg.d, static_cast<double>(N), mu_cube));
  }
  // Per-seed satisfaction and the in-mean envelope check are both reported;
  // the in-mean one is the operative pass criterion for the squared-mean rate.
  result.summary["per_seed_satisfaction_min"] = per_seed_min;

  RateFit fit = fit_rate(n_for_fit, lhs_for_fit);
  result.summary["slope"] = fit.slope;
  result.summary["r_squared"] = fit.r_squared;

  bool decreasing = true;
  for (size_t i = 1; i < lhs_for_fit.size(); ++i)
    decreasing = decreasing && lhs_for_fit[i] < lhs_for_fit[i - 1];
  result.summary["strictly_decreasing"] = decreasing ? 1.0 : 0.0;

  // Calibrate the unknown constant on the smallest N, then freeze it.
  const double coef = std::pow(std::sqrt(dd) + cfg.y.norm(), 2.0) / (s2 * s2) *
                      std::exp(4.0 * (dd + y2) / s2);
  const double c_fit = lhs_for_fit[0] * lhs_for_fit[0] / (coef * env_for_fit[0]);
  result.summary["fournier_constant"] = c_fit;
  bool envelope_ok = true;
  for (size_t i = 0; i < lhs_for_fit.size(); ++i)
    envelope_ok = envelope_ok && lhs_for_fit[i] * lhs_for_fit[i] <=
                                     c_fit * coef * env_for_fit[i] * (1.0 + 1e-9);
  result.summary["fournier_envelope_ok"] = envelope_ok ? 1.0 : 0.0;

  result.all_satisfied = rows_ok && decreasing && fit.slope <= -0.2 && envelope_ok;
  return result;
}

ExperimentResult run_matern_hyper(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "matern_hyper";

  KLSpec spec{cfg.gamma, cfg.tau, cfg.alpha, cfg.J};
  result.summary["kl_tail_ratio"] = kl_tail_mass_ratio(spec);
  if (result.summary["kl_tail_ratio"] >= 1e-6)
    std::cerr << "matern_hyper: KL tail mass ratio "
              << result.summary["kl_tail_ratio"] << " exceeds 1e-6\n";

  Eigen::MatrixXd G = bump_filter_matrix(cfg.filters, cfg.J, cfg.filter_width);
  ForwardMap fwd = linear_forward(G);
  Potential phi = gaussian_residual_potential(fwd, cfg.sigma);
  if (cfg.y.size() != cfg.filters)
    throw ConfigError("matern data vector must have one entry per filter");
  auto phi_y = at_data(phi, cfg.y);
  const DistanceLikeCost w1 = norm_cost(1.0);
  const double y_norm = cfg.y.norm();
  const DistanceLikeCost c_prime = offset_growth_cost(1.0 + y_norm, 2.0);
  const Eigen::VectorXd lam = kl_eigenvalues(spec);

  // c_y <= K c'_y with K = 1 v (|G|/sigma^2): every adapted-cost clamp factor
  // is dominated by (1 + |u| + |v| + |y|) up to that constant.
  const double K_equiv =
      std::max(1.0, fwd.operator_norm_bound / (cfg.sigma * cfg.sigma));

  std::vector<double> eps_for_fit, lhs_for_fit;
  bool rows_ok = true;
  bool coupling_dominates = true;
  for (double eps : cfg.eps_grid) {
    KLSpec spec_star{cfg.gamma + eps * cfg.hyper_dir_gamma,
                     cfg.tau + eps * cfg.hyper_dir_tau, cfg.alpha, cfg.J};
    const Eigen::VectorXd lam_star = kl_eigenvalues(spec_star);
    const double param = std::abs(spec_star.gamma - cfg.gamma) +
                         std::abs(spec_star.tau - cfg.tau);
    RowAccumulator acc;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      SeedSpec stream{cfg.seed, static_cast<std::uint64_t>(rep)};
      // Common xi draws realize the product coupling.
      ParticleMeasure mu = kl_gaussian_sampler(spec, cfg.particles, stream);
      ParticleMeasure mu_star =
          kl_gaussian_sampler(spec_star, cfg.particles, stream);
      if (rep == 0 && eps == cfg.eps_grid.front())
        check_envelope_sandwich(phi, mu, cfg.y);
      auto [nu, z] = reweight(mu, phi_y);
      auto [nu_star, z_star] = reweight(mu_star, phi_y);

      const OtValue lhs_ot = runner_ot(cfg, nu, nu_star, w1);
      const double lhs = lhs_ot.value;
      const double w_cy = exact_ot(mu, mu_star, c_prime).primal_cost;

      // Lemma-route bound on the c'_y discrepancy: split the squared factor
      // into the s = 0 and s = 2 growth costs.
      auto m4 = weighted_moment_se(mu, [](const Eigen::VectorXd& u) {
        return std::pow(u.squaredNorm(), 2.0);
      });
      auto m4_star = weighted_moment_se(mu_star, [](const Eigen::VectorXd& u) {
        return std::pow(u.squaredNorm(), 2.0);
      });
      const Eigen::VectorXd zero_gram = Eigen::VectorXd::Zero(cfg.J);
      const double pcb0 =
          product_coupling_bound(lam, lam_star, zero_gram, 0.0, 0.0, 1.0, 1.0);
      const double pcb2 = product_coupling_bound(lam, lam_star, zero_gram, 0.0,
                                                 2.0, m4.value, m4_star.value);
      const double lemma_rhs =
          2.0 * (1.0 + y_norm) * (1.0 + y_norm) * pcb0 + 2.0 * pcb2;
      double lemma_se = 0.0;
      if (m4.value + m4_star.value > 0.0)
        lemma_se = pcb2 * 0.5 * std::hypot(m4.std_error, m4_star.std_error) /
                   (m4.value + m4_star.value);
      auto coupled = coupling_cost(mu.points, mu_star.points, c_prime);
      if (w_cy > lemma_rhs + 3.0 * (lemma_se + coupled.std_error))
        coupling_dominates = false;

      // Posterior chain prefactor with f = g = 1.
      auto h_at_y = [&phi, &cfg](const Eigen::VectorXd& u) {
        return phi.envelope_h(u, cfg.y);
      };
      LpNorm h_mu = lp_norm_under_prior(h_at_y, mu, 1.0);
      LpNorm h_mustar = lp_norm_under_prior(h_at_y, mu_star, 1.0);
      const double mu_abs =
          weighted_moment(mu, [](const Eigen::VectorXd& u) { return u.norm(); });
      const double prefactor = (1.0 + mu_abs) / (h_mu.value * h_mustar.value);
      const double rhs = prefactor * K_equiv * lemma_rhs;
      const double rhs_se = prefactor * K_equiv * lemma_se;

      BoundReport report;
      report.label = "matern_chain";
      report.lhs_estimate = lhs;
      report.lhs_mode = lhs_ot.mode;
      report.rhs_value = rhs;
      report.rhs_components = {{"prefactor", prefactor},
                               {"cost_equivalence", K_equiv},
                               {"lemma_rhs_cprime", lemma_rhs},
                               {"ipm_prior_cy", w_cy},
                               {"coupling_cprime", coupled.value},
                               {"evidence_z", z},
                               {"evidence_z_star", z_star},
                               {"norm_h_L1_mu", h_mu.value},
                               {"norm_h_L1_mustar", h_mustar.value}};
      report.mc_standard_errors["combined"] = rhs_se;
      report.mc_standard_errors["coupling_cprime"] = coupled.std_error;
      finalize_report(report);
      acc.add(report);
      result.reports.push_back(report);
    }
    result.rows.push_back({result.experiment, "hyper_shift", param,
                           acc.mean_lhs(), acc.mean_rhs(),
                           acc.fraction() >= kSatisfactionLevel,
                           acc.mean_margin()});
    rows_ok = rows_ok && result.rows.back().satisfied;
    eps_for_fit.push_back(param);
    lhs_for_fit.push_back(acc.mean_lhs());
  }

  RateFit fit = fit_rate(eps_for_fit, lhs_for_fit);
  result.summary["slope"] = fit.slope;
  result.summary["r_squared"] = fit.r_squared;
  result.summary["coupling_dominates"] = coupling_dominates ? 1.0 : 0.0;
  result.all_satisfied =
      rows_ok && coupling_dominates && std::abs(fit.slope - 1.0) <= 0.2;
  return result;
}

ExperimentResult run_pushforward(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "pushforward";

  ForwardMap fwd = linear_forward_on_box(cfg.forward_matrix);
  Potential phi = gaussian_residual_potential(fwd, cfg.sigma);
  auto phi_y = at_data(phi, cfg.y);
  const DistanceLikeCost w1 = norm_cost(1.0);
  auto reference = uniform_box_sampler(cfg.d);
  TransportMap T = make_transport_map(cfg.base_map, cfg.map_a, cfg.map_b);

  const double s2 = cfg.sigma * cfg.sigma;
  const double gnorm = fwd.operator_norm_bound;
  const double lips = std::max(
      1.0,
      gnorm * (gnorm * std::sqrt(static_cast<double>(cfg.d)) + cfg.y.norm()) / s2);

  std::vector<double> lp_for_fit, lhs_for_fit;
  bool rows_ok = true;
  double translation_gap = 0.0;
  bool sagiv_ok = true;
  for (double eps : cfg.eps_grid) {
    TransportMap T_star =
        make_transport_map("perturbed_affine", cfg.map_a, cfg.map_b, eps, 0.0);
    RowAccumulator acc;
    double lp_mean = 0.0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      SeedSpec stream{cfg.seed, static_cast<std::uint64_t>(rep)};
      PushforwardSpec ps{T, reference, cfg.d};
      PushforwardSpec ps_star{T_star, reference, cfg.d};
      ParticleMeasure mu = pushforward_sampler(ps, cfg.particles, stream);
      ParticleMeasure mu_star = pushforward_sampler(ps_star, cfg.particles, stream);
      if (rep == 0 && eps == cfg.eps_grid.front())
        check_envelope_sandwich(phi, mu, cfg.y);
      auto [nu, z] = reweight(mu, phi_y);
      auto [nu_star, z_star] = reweight(mu_star, phi_y);
      const OtValue lhs_ot = runner_ot(cfg, nu, nu_star, w1);
      const double lhs = lhs_ot.value;
      auto lp = lp_map_distance(T, T_star, reference, 2.0, cfg.particles, stream);
      lp_mean += lp.value;

      // Translation coupling: the prior W1 must equal the shift itself.
      const double w1_prior = ipm_value(mu, mu_star, w1).value;
      translation_gap = std::max(
          translation_gap,
          std::abs(w1_prior - eps * std::sqrt(static_cast<double>(cfg.d))));
      const double w2_prior =
          cfg.d == 1 ? std::sqrt(quantile_coupling_cost(mu, mu_star, 2.0))
                     : std::sqrt(exact_ot(mu, mu_star, norm_cost(2.0)).primal_cost);
      if (w2_prior > lp.value + 3.0 * lp.std_error + 1e-12) sagiv_ok = false;

      auto h_at_y = [&phi, &cfg](const Eigen::VectorXd& u) {
        return phi.envelope_h(u, cfg.y);
      };
      LpNorm h_mu = lp_norm_under_prior(h_at_y, mu, 1.0);
      LpNorm h_mustar = lp_norm_under_prior(h_at_y, mu_star, 1.0);
      const double mu_abs =
          weighted_moment(mu, [](const Eigen::VectorXd& u) { return u.norm(); });
      const double mu_sq = weighted_moment(
          mu, [](const Eigen::VectorXd& u) { return u.squaredNorm(); });
      const double mus_sq = weighted_moment(
          mu_star, [](const Eigen::VectorXd& u) { return u.squaredNorm(); });
      const double moment_factor = std::sqrt(1.0 + mu_sq + mus_sq);
      const double rhs = lips * (1.0 + mu_abs) * moment_factor /
                         (h_mu.value * h_mustar.value) * lp.value;
      const double rhs_se = lips * (1.0 + mu_abs) * moment_factor /
                            (h_mu.value * h_mustar.value) * lp.std_error;

      BoundReport report;
      report.label = "pushforward_chain";
      report.lhs_estimate = lhs;
      report.lhs_mode = lhs_ot.mode;
      report.rhs_value = rhs;
      report.rhs_components = {{"lipschitz_factor", lips},
                               {"moment_1_plus", 1.0 + mu_abs},
                               {"moment_factor", moment_factor},
                               {"norm_h_L1_mu", h_mu.value},
                               {"norm_h_L1_mustar", h_mustar.value},
                               {"lp_map_distance", lp.value},
                               {"w1_prior", w1_prior},
                               {"evidence_z", z},
                               {"evidence_z_star", z_star}};
      report.mc_standard_errors["combined"] = rhs_se;
      report.mc_standard_errors["lp_map_distance"] = lp.std_error;
      finalize_report(report);
      acc.add(report);
      result.reports.push_back(report);
    }
    lp_mean /= cfg.replications;
    result.rows.push_back({result.experiment, "lp_map_distance", lp_mean,
                           acc.mean_lhs(), acc.mean_rhs(),
                           acc.fraction() >= kSatisfactionLevel,
                           acc.mean_margin()});
    rows_ok = rows_ok && result.rows.back().satisfied;
    lp_for_fit.push_back(lp_mean);
    lhs_for_fit.push_back(acc.mean_lhs());
  }

  RateFit fit = fit_rate(lp_for_fit, lhs_for_fit);
  result.summary["slope"] = fit.slope;
  result.summary["r_squared"] = fit.r_squared;
  result.summary["translation_gap"] = translation_gap;
  result.summary["sagiv_ok"] = sagiv_ok ? 1.0 : 0.0;
  result.all_satisfied = rows_ok && sagiv_ok && std::abs(fit.slope - 1.0) <= 0.2 &&
                         translation_gap <= 1e-9;
  return result;
}

ExperimentResult run_surrogate(const ExperimentConfig& raw) {
  ExperimentConfig cfg = with_defaults(raw);
  ExperimentResult result;
  result.experiment = "surrogate";

  Potential phi = tanh_potential(cfg);
  auto phi_y = at_data(phi, cfg.y);
  const DistanceLikeCost w1 = norm_cost(1.0);
  auto reference = uniform_box_sampler(cfg.d);

  // Fit every width first; the envelope inflation freezes at the worst
  // achieved sup error, so the bound coefficient is one constant across the
  // sweep and each width's rhs is exactly linear in its sup error.
  std::vector<SurrogateFit> fits;
  double worst_sup = 0.0;
  for (size_t wi = 0; wi < cfg.width_grid.size(); ++wi) {
    SurrogateFit fit = fit_surrogate(phi, cfg.y, cfg.fit_grid, cfg.width_grid[wi],
                                     SeedSpec{cfg.seed, 1000 + wi});
    worst_sup = std::max(worst_sup, fit.sup_error);
    fits.push_back(std::move(fit));
  }
  result.summary["worst_sup_error"] = worst_sup;

  bool rows_ok = true;
  std::vector<double> sup_for_fit, lhs_for_fit;
  double linearity_dev = 0.0;
  double rhs_coef_ref = -1.0;
  for (size_t wi = 0; wi < cfg.width_grid.size(); ++wi) {
    const SurrogateFit& fit = fits[wi];
    RowAccumulator acc;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      SeedSpec stream{cfg.seed, static_cast<std::uint64_t>(rep)};
      ParticleMeasure mu = reference(cfg.particles, stream);
      auto [nu, z] = reweight(mu, phi_y);
      Potential phi_n = surrogate_potential(fit.net, phi, worst_sup);
      auto [nu_n, z_n] = reweight(mu, at_data(phi_n, cfg.y));
      const OtValue lhs_ot = runner_ot(cfg, nu, nu_n, w1);
      const double lhs = lhs_ot.value;

      // Bound coefficient at q = inf, p = 1 with the frozen inflation.
      LpNorm c0 = lp_norm_under_prior(
          [&w1](const Eigen::VectorXd& u) { return w1.to_origin(u); }, mu, 1.0);
      auto h_at_y = [&phi, &cfg](const Eigen::VectorXd& u) {
        return phi.envelope_h(u, cfg.y);
      };
      LpNorm h1 = lp_norm_under_prior(h_at_y, mu, 1.0);
      const double coef =
          2.0 * std::exp(4.0 * worst_sup) * c0.value / (h1.value * h1.value);
      const double rhs = coef * fit.sup_error;
      const double rel_se = std::sqrt(
          std::pow(c0.value > 0 ? c0.std_error / c0.value : 0.0, 2.0) +
          std::pow(h1.value > 0 ? 2.0 * h1.std_error / h1.value : 0.0, 2.0));
      const double rhs_se = rhs * rel_se;
      if (rep == 0) {
        if (rhs_coef_ref < 0.0) rhs_coef_ref = coef;
        linearity_dev =
            std::max(linearity_dev, std::abs(coef - rhs_coef_ref) / rhs_coef_ref);
      }

      BoundReport report;
      report.label = "surrogate_chain";
      report.lhs_estimate = lhs;
      report.lhs_mode = lhs_ot.mode;
      report.rhs_value = rhs;
      report.rhs_components = {{"sup_error", fit.sup_error},
                               {"envelope_inflation", std::exp(worst_sup)},
                               {"norm_c0_L1", c0.value},
                               {"norm_h_L1", h1.value},
                               {"rhs_per_sup_error", coef},
                               {"evidence_z", z},
                               {"evidence_z_surrogate", z_n}};
      report.mc_standard_errors["combined"] = rhs_se;
      finalize_report(report);
      acc.add(report);
      result.reports.push_back(report);
    }
    result.rows.push_back(
        {result.experiment, "width",
         static_cast<double>(cfg.width_grid[wi].front()), acc.mean_lhs(),
         acc.mean_rhs(), acc.satisfied_count == static_cast<int>(acc.lhs.size()),
         acc.mean_margin()});
    rows_ok = rows_ok && result.rows.back().satisfied;
    if (fit.sup_error > 0.0 && acc.mean_lhs() > 0.0) {
      sup_for_fit.push_back(fit.sup_error);
      lhs_for_fit.push_back(acc.mean_lhs());
    }
  }

  if (sup_for_fit.size() >= 3) {
    // Reported, not gated: least-squares surrogate errors oscillate around
    // zero, so posterior discrepancies cancel partially and the observed
    // exponent sits near 3/2 rather than the bound's linear rate.
    RateFit fit = fit_rate(sup_for_fit, lhs_for_fit);
    result.summary["slope_vs_sup_error"] = fit.slope;
    result.summary["r_squared"] = fit.r_squared;
  }
  result.summary["rhs_linearity_deviation"] = linearity_dev;
  result.all_satisfied = rows_ok && linearity_dev <= 1e-12;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "empirical_prior") return run_empirical_prior(cfg);
  if (cfg.experiment == "matern_hyper") return run_matern_hyper(cfg);
  if (cfg.experiment == "pushforward") return run_pushforward(cfg);
  if (cfg.experiment == "surrogate") return run_surrogate(cfg);
  if (cfg.experiment == "data_perturbation") return run_data_perturbation(cfg);
  if (cfg.experiment == "likelihood_perturbation")
    return run_likelihood_perturbation(cfg);
  throw ConfigError("unknown experiment: " + cfg.experiment);
}

std::string rates_csv_string(const ExperimentResult& result) {
  std::ostringstream os;
  os << "experiment,param,N_or_eps,lhs,rhs,satisfied,margin\n";
  for (const auto& row : result.rows) {
    os << row.experiment << "," << row.param << "," << format_double(row.n_or_eps)
       << "," << format_double(row.lhs) << "," << format_double(row.rhs) << ","
       << (row.satisfied ? 1 : 0) << "," << format_double(row.margin) << "\n";
  }
  return os.str();
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream os(out_dir + "/rates.csv", std::ios::binary);
    os << rates_csv_string(result);
  }
  {
    std::ofstream os(out_dir + "/bounds.jsonl", std::ios::binary);
    for (const auto& report : result.reports) os << report.to_json_line() << "\n";
  }
  {
    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = nlohmann::ordered_json::parse(config_to_json_string(cfg));
    manifest["seed"] = cfg.seed;
    manifest["summary"] = result.summary;
    manifest["all_satisfied"] = result.all_satisfied;
    std::ofstream os(out_dir + "/manifest.json", std::ios::binary);
    os << manifest.dump(2) << "\n";
  }
}

}  // namespace bipstab
