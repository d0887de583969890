#include "bipstab/relu_net.hpp"

#include <cmath>

#include "bipstab/errors.hpp"
#include "json.hpp"

namespace bipstab {

double relu_forward(const ReluSurrogate& net, const Eigen::VectorXd& u) {
  if (net.weights.empty()) throw DimensionMismatch("empty network");
  if (u.size() != net.weights.front().cols())
    throw DimensionMismatch("input dimension does not match first layer");
  Eigen::VectorXd h = u;
  const int L = net.depth();
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd z = net.weights[static_cast<size_t>(l)] * h +
                        net.biases[static_cast<size_t>(l)];
    h = (l + 1 < L) ? z.cwiseMax(0.0).eval() : z;
  }
  if (h.size() != 1) throw DimensionMismatch("network output is not scalar");
  return h[0];
}

Eigen::VectorXd relu_forward_batch(const ReluSurrogate& net,
                                   const Eigen::MatrixXd& U) {
  if (net.weights.empty()) throw DimensionMismatch("empty network");
  if (U.cols() != net.weights.front().cols())
    throw DimensionMismatch("input dimension does not match first layer");
  Eigen::MatrixXd h = U;
  const int L = net.depth();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (h * net.weights[static_cast<size_t>(l)].transpose()).rowwise() +
        net.biases[static_cast<size_t>(l)].transpose();
    h = (l + 1 < L) ? z.cwiseMax(0.0).eval() : z;
  }
  return h.col(0);
}

std::string to_json_string(const ReluSurrogate& net) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (int l = 0; l < net.depth(); ++l) {
    const auto& W = net.weights[static_cast<size_t>(l)];
    const auto& b = net.biases[static_cast<size_t>(l)];
    nlohmann::json layer;
    layer["rows"] = W.rows();
    layer["cols"] = W.cols();
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(W.size()));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat.push_back(W(r, c));
    layer["w"] = flat;
    layer["b"] = std::vector<double>(b.data(), b.data() + b.size());
    j["layers"].push_back(layer);
  }
  return j.dump();
}

ReluSurrogate relu_from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ReluSurrogate net;
  for (const auto& layer : j.at("layers")) {
    const Eigen::Index rows = layer.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = layer.at("cols").get<Eigen::Index>();
    const auto flat = layer.at("w").get<std::vector<double>>();
    const auto bv = layer.at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols ||
        static_cast<Eigen::Index>(bv.size()) != rows)
      throw DimensionMismatch("layer payload does not match declared shape");
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        W(r, c) = flat[static_cast<size_t>(r * cols + c)];
    net.weights.push_back(std::move(W));
    net.biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(bv.data(), rows).eval());
  }
  return net;
}

namespace {

// Tensor grid over [0,1]^d, per-axis count k, endpoints included.
Eigen::MatrixXd unit_grid(int d, int k) {
  const long total = static_cast<long>(std::pow(static_cast<double>(k), d));
  Eigen::MatrixXd U(total, d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int a = 0; a < d; ++a) {
      const long pos = rem % k;
      rem /= k;
      U(idx, a) = k == 1 ? 0.5 : static_cast<double>(pos) / (k - 1);
    }
  }
  return U;
}

// Hidden activations of all layers for backprop.
struct ForwardPass {
  std::vector<Eigen::MatrixXd> z;  // pre-activations per layer
  std::vector<Eigen::MatrixXd> h;  // h[0] = input, h[l] = activation of layer l
  Eigen::VectorXd out;
};

ForwardPass forward_all(const ReluSurrogate& net, const Eigen::MatrixXd& U) {
  ForwardPass fp;
  fp.h.push_back(U);
  const int L = net.depth();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (fp.h.back() * net.weights[static_cast<size_t>(l)].transpose())
            .rowwise() +
        net.biases[static_cast<size_t>(l)].transpose();
    fp.z.push_back(z);
    fp.h.push_back(l + 1 < L ? z.cwiseMax(0.0).eval() : z);
  }
  fp.out = fp.h.back().col(0);
  return fp;
}

// Exact least squares for the output layer on the last hidden features.
void solve_output_layer(ReluSurrogate& net, const Eigen::MatrixXd& U,
                        const Eigen::VectorXd& targets) {
  auto fp = forward_all(net, U);
  const Eigen::MatrixXd& feats = fp.h[fp.h.size() - 2];
  Eigen::MatrixXd design(feats.rows(), feats.cols() + 1);
  design << feats, Eigen::VectorXd::Ones(feats.rows());
  Eigen::VectorXd theta = design.colPivHouseholderQr().solve(targets);
  net.weights.back() = theta.head(feats.cols()).transpose();
  net.biases.back()[0] = theta[feats.cols()];
}

double train_mse(const ReluSurrogate& net, const Eigen::MatrixXd& U,
                 const Eigen::VectorXd& t) {
  return (relu_forward_batch(net, U) - t).squaredNorm() /
         static_cast<double>(U.rows());
}

ReluSurrogate init_net(int d, const std::vector<int>& hidden_widths,
                       CounterRng& rng) {
  ReluSurrogate net;
  int prev = d;
  for (size_t l = 0; l < hidden_widths.size(); ++l) {
    const int w = hidden_widths[l];
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(w, prev);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(w);
    if (l == 0) {
      // Hinge features: unit r reads axis r % d with a knot walking [0, 1).
      const int knots = (w + d - 1) / d;
      for (int r = 0; r < w; ++r) {
        const int axis = r % d;
        const int k = r / d;
        W(r, axis) = 1.0;
        b[r] = -static_cast<double>(k) / std::max(1, knots);
      }
    } else {
      // Identity passthrough plus a small seeded perturbation; activations of
      // the previous layer are nonnegative, so the passthrough is exact.
      for (int r = 0; r < w; ++r) W(r, r % prev) = 1.0;
      for (int r = 0; r < w; ++r)
        for (int c = 0; c < prev; ++c) W(r, c) += 1e-4 * rng.normal();
    }
    net.weights.push_back(std::move(W));
    net.biases.push_back(std::move(b));
    prev = w;
  }
  net.weights.push_back(Eigen::MatrixXd::Zero(1, prev));
  net.biases.push_back(Eigen::VectorXd::Zero(1));
  return net;
}

}  // namespace

SurrogateFit fit_surrogate(const Potential& phi, const Eigen::VectorXd& y,
                           int grid_per_axis, const std::vector<int>& hidden_widths,
                           SeedSpec seed, const FitOptions& opts) {
  if (grid_per_axis < 2) throw ConfigError("fit grid needs at least 2 points");
  if (hidden_widths.empty()) throw ConfigError("at least one hidden layer");
  const int d = phi.forward ? phi.forward->input_dim : 1;

  const Eigen::MatrixXd U = unit_grid(d, grid_per_axis);
  Eigen::VectorXd targets(U.rows());
  for (Eigen::Index i = 0; i < U.rows(); ++i)
    targets[i] = phi.phi(U.row(i).transpose(), y);
  if (!targets.allFinite())
    throw FitDiverged("potential is not finite on the training grid");

  const Eigen::MatrixXd Utest = unit_grid(d, opts.test_grid_per_axis);
  Eigen::VectorXd test_targets(Utest.rows());
  for (Eigen::Index i = 0; i < Utest.rows(); ++i)
    test_targets[i] = phi.phi(Utest.row(i).transpose(), y);
  auto sup_err = [&](const ReluSurrogate& net) {
    return (relu_forward_batch(net, Utest) - test_targets)
        .cwiseAbs()
        .maxCoeff();
  };

  CounterRng rng(seed);
  ReluSurrogate init = init_net(d, hidden_widths, rng);
  solve_output_layer(init, U, targets);
  const double init_mse = train_mse(init, U, targets);
  const double init_sup = sup_err(init);
  if (init_sup <= 1e-9)
    return SurrogateFit{init, init_sup};  // already at grid resolution

  // Adam refinement of every layer, then a final output-layer solve.
  ReluSurrogate net = init;
  const int L = net.depth();
  std::vector<Eigen::MatrixXd> mW(static_cast<size_t>(L)),
      vW(static_cast<size_t>(L));
  std::vector<Eigen::VectorXd> mb(static_cast<size_t>(L)),
      vb(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    mW[l] = Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols());
    vW[l] = mW[l];
    mb[l] = Eigen::VectorXd::Zero(net.biases[l].size());
    vb[l] = mb[l];
  }
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  const double invN = 1.0 / static_cast<double>(U.rows());
  for (int it = 1; it <= opts.adam_iters; ++it) {
    auto fp = forward_all(net, U);
    Eigen::MatrixXd delta = (fp.out - targets) * (2.0 * invN);
    for (int l = L - 1; l >= 0; --l) {
      if (l < L - 1) delta = delta.cwiseProduct((fp.z[l].array() > 0.0).cast<double>().matrix());
      Eigen::MatrixXd gW = delta.transpose() * fp.h[static_cast<size_t>(l)];
      Eigen::VectorXd gb = delta.colwise().sum().transpose();
      if (l > 0) delta = delta * net.weights[static_cast<size_t>(l)];
      const double c1 = 1.0 - std::pow(beta1, it);
      const double c2 = 1.0 - std::pow(beta2, it);
      mW[l] = beta1 * mW[l] + (1.0 - beta1) * gW;
      vW[l] = beta2 * vW[l] + (1.0 - beta2) * gW.cwiseProduct(gW);
      mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb;
      vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb.cwiseProduct(gb);
      net.weights[l] -=
          (opts.learning_rate / c1) *
          (mW[l].array() / ((vW[l].array() / c2).sqrt() + adam_eps)).matrix();
      net.biases[l] -=
          (opts.learning_rate / c1) *
          (mb[l].array() / ((vb[l].array() / c2).sqrt() + adam_eps)).matrix();
    }
  }
  solve_output_layer(net, U, targets);
  const double refined_mse = train_mse(net, U, targets);

  const bool keep_refined = refined_mse <= init_mse && std::isfinite(refined_mse);
  const ReluSurrogate& chosen = keep_refined ? net : init;
  const double chosen_mse = keep_refined ? refined_mse : init_mse;
  if (!(chosen_mse <= init_mse * (1.0 + 1e-12)) || !std::isfinite(chosen_mse))
    throw FitDiverged("training loss failed to decrease");
  return SurrogateFit{chosen, sup_err(chosen)};
}

Potential surrogate_potential(const ReluSurrogate& net, const Potential& base,
                              double sup_error, bool clamp_at_zero) {
  if (!(sup_error >= 0.0)) throw ConfigError("sup error must be >= 0");
  Potential pot;
  auto net_copy = std::make_shared<const ReluSurrogate>(net);
  pot.phi = [net_copy, clamp_at_zero](const Eigen::VectorXd& u,
                                      const Eigen::VectorXd&) {
    const double v = relu_forward(*net_copy, u);
    return clamp_at_zero ? std::max(v, 0.0) : v;
  };
  const double inflate = std::exp(sup_error);
  auto base_f = base.envelope_f;
  pot.envelope_f = [base_f, inflate](const Eigen::VectorXd& u) {
    return base_f(u) * inflate;
  };
  pot.envelope_g = base.envelope_g;
  auto base_h = base.envelope_h;
  const double deflate = std::exp(-sup_error);
  pot.envelope_h = [base_h, deflate](const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& y) {
    return base_h(u, y) * deflate;
  };
  pot.name = "surrogate";
  pot.forward = base.forward;
  pot.sigma = base.sigma;
  return pot;
}

}  // namespace bipstab
