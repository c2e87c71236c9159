#include "refnet/network.hpp"

#include <cmath>
#include <string>

#include "refnet/error.hpp"

namespace refnet {

namespace {

std::string Shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void RequireDim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    Fail(ErrorCode::kDimensionMismatch, std::string(what) + ": expected length " +
                                            std::to_string(want) + ", got " +
                                            std::to_string(got));
}

}  // namespace

Network::Network(std::vector<LayerOp> layers) : layers_(std::move(layers)) {
  for (std::size_t j = 0; j < layers_.size(); ++j) {
    const LayerOp& layer = layers_[j];
    if (layer.bias.size() != layer.weights.rows())
      Fail(ErrorCode::kDimensionMismatch,
           "layer " + std::to_string(j) + ": W is " +
               Shape(layer.weights.rows(), layer.weights.cols()) + " but b has " +
               std::to_string(layer.bias.size()) + " entries");
    if (j > 0 && layer.in_dim() != layers_[j - 1].out_dim())
      Fail(ErrorCode::kDimensionMismatch,
           "layer " + std::to_string(j) + " expects " + std::to_string(layer.in_dim()) +
               " inputs but layer " + std::to_string(j - 1) + " produces " +
               std::to_string(layers_[j - 1].out_dim()));
  }
}

std::size_t Network::input_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.front().in_dim();
}

std::size_t Network::output_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

std::vector<std::size_t> Network::widths() const {
  std::vector<std::size_t> out;
  if (layers_.empty()) return out;
  out.push_back(input_dim());
  for (const LayerOp& layer : layers_) out.push_back(layer.out_dim());
  return out;
}

Vector Affine(const LayerOp& layer, std::span<const double> x) {
  RequireDim(x.size(), layer.in_dim(), "layer input");
  Vector z(layer.bias);
  for (std::size_t r = 0; r < z.size(); ++r) {
    const auto row = layer.weights.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    z[r] += acc;
  }
  return z;
}

Vector ForwardLayer(const LayerOp& layer, std::span<const double> x) {
  Vector z = Affine(layer, x);
  for (double& v : z) v = layer.activation.Evaluate(v);
  return z;
}

Vector Forward(const Network& net, std::span<const double> x) {
  Vector y(x.begin(), x.end());
  for (const LayerOp& layer : net.layers()) y = ForwardLayer(layer, y);
  return y;
}

namespace {

double ActivationSlope(const Activation& act, double pre, double post,
                       DerivativeMode mode) {
  if (mode == DerivativeMode::kValue && act.kind() == Activation::Kind::kSpline &&
      act.degree() <= 2)
    return SigmaPrimeFromValue(act.degree(), post);
  return act.Derivative(pre);
}

}  // namespace

Gradients Backprop(const Network& net, std::span<const double> x,
                   std::span<const double> target, DerivativeMode mode) {
  const auto& layers = net.layers();
  if (!layers.empty()) RequireDim(x.size(), net.input_dim(), "network input");

  // activations[j] is the input of layer j; pre[j] its pre-activation.
  std::vector<Vector> activations{Vector(x.begin(), x.end())};
  std::vector<Vector> pre;
  for (const LayerOp& layer : layers) {
    pre.push_back(Affine(layer, activations.back()));
    Vector out = pre.back();
    for (double& v : out) v = layer.activation.Evaluate(v);
    activations.push_back(std::move(out));
  }

  const Vector& y = activations.back();
  RequireDim(target.size(), y.size(), "target");
  Gradients grads;
  Vector delta(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    delta[i] = y[i] - target[i];
    grads.loss += 0.5 * delta[i] * delta[i];
  }

  grads.layers.resize(layers.size());
  for (std::size_t j = layers.size(); j-- > 0;) {
    const LayerOp& layer = layers[j];
    for (std::size_t r = 0; r < delta.size(); ++r)
      delta[r] *= ActivationSlope(layer.activation, pre[j][r], activations[j + 1][r], mode);

    LayerGradient& g = grads.layers[j];
    g.bias = delta;
    g.weights = Matrix(layer.out_dim(), layer.in_dim());
    const Vector& input = activations[j];
    for (std::size_t r = 0; r < layer.out_dim(); ++r)
      for (std::size_t c = 0; c < layer.in_dim(); ++c) g.weights(r, c) = delta[r] * input[c];

    Vector upstream(layer.in_dim(), 0.0);
    for (std::size_t r = 0; r < layer.out_dim(); ++r)
      for (std::size_t c = 0; c < layer.in_dim(); ++c)
        upstream[c] += layer.weights(r, c) * delta[r];
    delta = std::move(upstream);
  }
  return grads;
}

Network InitRandom(std::span<const std::size_t> dims, const Activation& hidden,
                   std::uint64_t seed, const std::optional<Activation>& output) {
  if (dims.size() < 2)
    Fail(ErrorCode::kEmptyArchitecture, "need at least two dims");
  for (std::size_t n : dims)
    if (n == 0) Fail(ErrorCode::kInvalidArgument, "layer widths must be positive");

  Rng rng(seed);
  std::vector<LayerOp> layers;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    const std::size_t n_in = dims[j];
    const std::size_t n_out = dims[j + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    LayerOp layer;
    layer.weights = Matrix(n_out, n_in);
    for (double& w : layer.weights.data()) w = rng.Uniform(-limit, limit);
    layer.bias.assign(n_out, 0.0);
    const bool last = j + 2 == dims.size();
    layer.activation = (last && output) ? *output : hidden;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

std::vector<Vector> RandomInputs(std::uint64_t seed, std::size_t count,
                                 std::size_t dim, double range) {
  Rng rng(seed);
  std::vector<Vector> out(count, Vector(dim));
  for (Vector& x : out)
    for (double& v : x) v = rng.Uniform(-range, range);
  return out;
}

namespace {

void RequireTrainable(const Network& net, const Dataset& data) {
  if (data.empty()) Fail(ErrorCode::kEmptyDataset, "dataset has no samples");
  if (!net.empty()) {
    RequireDim(data.input_dim, net.input_dim(), "dataset inputs");
    RequireDim(data.target_dim, net.output_dim(), "dataset targets");
  }
}

}  // namespace

double MeanLoss(const Network& net, const Dataset& data) {
  RequireTrainable(net, data);
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Vector y = Forward(net, data.inputs[k]);
    RequireDim(data.targets[k].size(), y.size(), "target");
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = y[i] - data.targets[k][i];
      total += 0.5 * e * e;
    }
  }
  return total / static_cast<double>(data.size());
}

TrainResult Train(const Network& net, const Dataset& data, std::size_t epochs,
                  double learning_rate, DerivativeMode mode) {
  RequireTrainable(net, data);
  if (!std::isfinite(learning_rate) || learning_rate < 0.0)
    Fail(ErrorCode::kInvalidArgument, "learning rate must be finite and >= 0");

  std::vector<LayerOp> layers = net.layers();
  TrainResult result;
  result.losses.push_back(MeanLoss(net, data));
  const double scale = learning_rate / static_cast<double>(data.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const Network current(layers);
    std::vector<LayerGradient> sum;
    for (const LayerOp& layer : layers)
      sum.push_back({Matrix(layer.out_dim(), layer.in_dim()), Vector(layer.out_dim(), 0.0)});
    for (std::size_t k = 0; k < data.size(); ++k) {
      const Gradients g = Backprop(current, data.inputs[k], data.targets[k], mode);
      for (std::size_t j = 0; j < layers.size(); ++j) {
        auto dst = sum[j].weights.data();
        auto src = g.layers[j].weights.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        for (std::size_t i = 0; i < sum[j].bias.size(); ++i) sum[j].bias[i] += g.layers[j].bias[i];
      }
    }
    for (std::size_t j = 0; j < layers.size(); ++j) {
      auto w = layers[j].weights.data();
      auto gw = sum[j].weights.data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * gw[i];
      for (std::size_t i = 0; i < layers[j].bias.size(); ++i)
        layers[j].bias[i] -= scale * sum[j].bias[i];
    }
    result.losses.push_back(MeanLoss(Network(layers), data));
  }
  result.network = Network(std::move(layers));
  return result;
}

}  // namespace refnet
