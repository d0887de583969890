// Small feed-forward ReLU networks used as likelihood surrogates on [0,1]^d,
// together with a deterministic least-squares + gradient-descent fit.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bipstab/potential.hpp"
#include "bipstab/seed.hpp"

namespace bipstab {

struct ReluSurrogate {
  std::vector<Eigen::MatrixXd> weights;  // W_l : d_{l+1} x d_l
  std::vector<Eigen::VectorXd> biases;   // b_l : d_{l+1}
  int depth() const { return static_cast<int>(weights.size()); }
  int input_dim() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().cols());
  }
};

// W_L relu(... relu(W_1 u + b_1) ...) + b_L. Throws DimensionMismatch.
double relu_forward(const ReluSurrogate& net, const Eigen::VectorXd& u);

// Batched forward over rows of U.
Eigen::VectorXd relu_forward_batch(const ReluSurrogate& net,
                                   const Eigen::MatrixXd& U);

std::string to_json_string(const ReluSurrogate& net);
ReluSurrogate relu_from_json_string(const std::string& text);

struct FitOptions {
  int adam_iters = 400;
  double learning_rate = 2e-3;
  int test_grid_per_axis = 512;  // sup-error measurement grid
};

struct SurrogateFit {
  ReluSurrogate net;
  double sup_error = 0.0;  // measured on the dense test grid
};

// Fits a surrogate of phi(.; y) over [0,1]^d: hinge-feature initialization of
// the first layer, exact least squares for the output layer, and an Adam
// refinement of all layers in between. The better of the initialized and
// refined nets is returned. Throws FitDiverged when the tracked training loss
// fails to decrease.
SurrogateFit fit_surrogate(const Potential& phi, const Eigen::VectorXd& y,
                           int grid_per_axis, const std::vector<int>& hidden_widths,
                           SeedSpec seed, const FitOptions& opts = {});

// Wraps the fitted net as a Potential: phi'(u; y) = max(net(u), 0) when
// clamp_at_zero (valid whenever the base potential is nonnegative), with
// envelopes f' = exp(sup_error) constant, g' = g, h' = h * exp(-sup_error).
Potential surrogate_potential(const ReluSurrogate& net, const Potential& base,
                              double sup_error, bool clamp_at_zero = true);

}  // namespace bipstab
