// Seeded, replicated experiment harness: each runner sweeps a perturbation
// grid, assembles the matching stability bound per replication, and reports a
// rate table plus per-run bound reports. Runs are bit-reproducible given
// (config, seed).
#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "bipstab/bounds.hpp"

namespace bipstab {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string experiment;  // empirical_prior | matern_hyper | pushforward |
                           // surrogate | data_perturbation | likelihood_perturbation
  std::uint64_t seed = 0;
  int replications = 1;
  Eigen::Index particles = 2048;
  HolderPair holder{kInf, 1.0};

  // model
  int d = 1;
  double sigma = 1.0;
  Eigen::VectorXd y;  // defaults per experiment when empty

  // sweeps
  std::vector<double> eps_grid;
  std::vector<long> n_grid;
  std::vector<std::vector<int>> width_grid;

  // matern
  int J = 32;
  double gamma = 1.0;
  double tau = 1.0;
  int alpha = 2;
  int filters = 4;
  double filter_width = 0.1;
  double hyper_dir_gamma = 1.0;
  double hyper_dir_tau = 1.0;

  // pushforward
  std::string base_map = "affine";
  double map_a = 0.2;
  double map_b = 0.5;
  Eigen::MatrixXd forward_matrix;  // linear forward; default per experiment

  // likelihood / data perturbation
  int perturbation_count = 10;
  double data_ball_radius = 0.5;

  // surrogate
  int fit_grid = 257;

  // LHS cost for the perturbation harnesses: "norm_p" | "growth_s" | "adapted"
  std::string cost_name = "norm_p";
  double cost_param = 1.0;

  // OT solver for the runner-level discrepancy columns
  std::string solver = "exact";  // exact | sinkhorn
  double sinkhorn_epsilon = 0.01;
  int sinkhorn_max_iter = 20000;
  double sinkhorn_tol = 1e-9;

  std::string out_dir;

  void validate() const;
};

ExperimentConfig config_from_json_string(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json_string(const ExperimentConfig& cfg);

// Fills experiment-specific defaults (data vector, grids, forward matrix).
ExperimentConfig with_defaults(ExperimentConfig cfg);

struct RateFit {
  Eigen::VectorXd log_x;
  Eigen::VectorXd log_y;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// OLS on (log x, log y); throws NonPositiveInput on nonpositive data or
// fewer than 3 points.
RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

struct RateRow {
  std::string experiment;
  std::string param;  // sweep variable name
  double n_or_eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = true;
  double margin = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<RateRow> rows;
  std::vector<BoundReport> reports;
  std::map<std::string, double> summary;
  bool all_satisfied = true;
};

ExperimentResult run_empirical_prior(const ExperimentConfig& cfg);
ExperimentResult run_matern_hyper(const ExperimentConfig& cfg);
ExperimentResult run_pushforward(const ExperimentConfig& cfg);
ExperimentResult run_surrogate(const ExperimentConfig& cfg);
ExperimentResult run_data_perturbation(const ExperimentConfig& cfg);
ExperimentResult run_likelihood_perturbation(const ExperimentConfig& cfg);

// Mean-shift Gaussian prior study; drives the prior-perturbation bound with
// the evidence-explicit variant. Not part of the CLI experiment enum.
ExperimentResult run_prior_shift(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string rates_csv_string(const ExperimentResult& result);

// Writes rates.csv, bounds.jsonl and manifest.json into out_dir.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                   const std::string& out_dir);

}  // namespace bipstab
