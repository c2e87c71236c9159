#include "refnet/transform.hpp"

#include <algorithm>
#include <cmath>

#include "refnet/error.hpp"

namespace refnet {

const char* ToString(InsertVariant variant) {
  return variant == InsertVariant::kPre ? "pre" : "post";
}

namespace {

void RequireWidenable(const Network& net, std::size_t layer) {
  if (layer >= net.size())
    Fail(ErrorCode::kPositionOutOfRange,
         "layer " + std::to_string(layer) + " does not exist (network has " +
             std::to_string(net.size()) + " layers)");
  if (layer + 1 == net.size())
    Fail(ErrorCode::kNoFollowingLayer,
         "layer " + std::to_string(layer) + " is the last layer; splitting needs a following layer");
}

RefinabilityData Refinability(const Activation& act) {
  try {
    return RefinabilityParams(act);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotRefinable) throw;
    Fail(ErrorCode::kNotRefinable, act.Describe() + ": " + e.what());
  }
}

Network WidenMarked(const Network& net, std::size_t layer, const std::vector<bool>& split) {
  const LayerOp& l0 = net.layer(layer);
  const LayerOp& l1 = net.layer(layer + 1);
  const RefinabilityData ref = Refinability(l0.activation);
  const auto copies = static_cast<std::size_t>(ref.split_count);

  const std::size_t n0 = l0.in_dim();
  const std::size_t n1 = l0.out_dim();
  const std::size_t n2 = l1.out_dim();
  const auto marked = static_cast<std::size_t>(std::count(split.begin(), split.end(), true));
  const std::size_t grown = n1 + marked * (copies - 1);

  LayerOp w0{Matrix(grown, n0), Vector(grown), l0.activation};
  LayerOp w1{Matrix(n2, grown), l1.bias, l1.activation};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n1; ++i) {
    const std::size_t reps = split[i] ? copies : 1;
    for (std::size_t l = 0; l < reps; ++l, ++k) {
      const double scale = split[i] ? 2.0 : 1.0;
      for (std::size_t c = 0; c < n0; ++c) w0.weights(k, c) = scale * l0.weights(i, c);
      w0.bias[k] = split[i] ? 2.0 * l0.bias[i] + ref.shift - static_cast<double>(l)
                            : l0.bias[i];
      const double weight = split[i] ? ref.coeffs[l] : 1.0;
      for (std::size_t r = 0; r < n2; ++r) w1.weights(r, k) = weight * l1.weights(r, i);
    }
  }

  std::vector<LayerOp> layers = net.layers();
  layers[layer] = std::move(w0);
  layers[layer + 1] = std::move(w1);
  return Network(std::move(layers));
}

}  // namespace

Network SplitNeuron(const Network& net, std::size_t layer, std::size_t neuron) {
  const std::size_t one[] = {neuron};
  return WidenLayer(net, layer, one);
}

Network WidenLayer(const Network& net, std::size_t layer,
                   std::span<const std::size_t> neurons) {
  RequireWidenable(net, layer);
  if (neurons.empty()) Fail(ErrorCode::kInvalidArgument, "neuron subset is empty");
  const std::size_t n1 = net.layer(layer).out_dim();
  std::vector<bool> split(n1, false);
  for (std::size_t i : neurons) {
    if (i >= n1)
      Fail(ErrorCode::kPositionOutOfRange,
           "neuron " + std::to_string(i) + " does not exist (layer width " +
               std::to_string(n1) + ")");
    split[i] = true;
  }
  return WidenMarked(net, layer, split);
}

Network WidenLayerAll(const Network& net, std::size_t layer) {
  RequireWidenable(net, layer);
  return WidenMarked(net, layer, std::vector<bool>(net.layer(layer).out_dim(), true));
}

namespace {

void RequirePosition(const Network& net, std::size_t position) {
  if (position < 1 || position > net.size())
    Fail(ErrorCode::kPositionOutOfRange,
         "insertion position " + std::to_string(position) + " outside [1, " +
             std::to_string(net.size()) + "]");
}

// Data propagated through layers[0 .. position-2].
Vector PropagateToPosition(const Network& net, std::size_t position, std::span<const double> x) {
  if (x.size() != net.input_dim())
    Fail(ErrorCode::kDimensionMismatch,
         "input has " + std::to_string(x.size()) + " components, network expects " +
             std::to_string(net.input_dim()));
  Vector y(x.begin(), x.end());
  for (std::size_t j = 0; j + 1 < position; ++j) y = ForwardLayer(net.layer(j), y);
  return y;
}

double BetaFromSup(double delta, double sup) {
  if (std::isinf(delta) || sup == 0.0) return 1.0;
  return delta / (2.0 * sup);
}

template <class Values>
double ComputeBeta(const Network& net, std::size_t position,
                   std::span<const Vector> inputs, double delta, Values values) {
  RequirePosition(net, position);
  if (inputs.empty()) Fail(ErrorCode::kEmptyDataset, "no data to choose beta from");
  if (!(delta > 0.0)) Fail(ErrorCode::kInvalidArgument, "delta must be positive");
  double sup = 0.0;
  for (const Vector& x : inputs)
    for (double v : values(PropagateToPosition(net, position, x)))
      sup = std::max(sup, std::abs(v));
  return BetaFromSup(delta, sup);
}

}  // namespace

double ComputeBetaPre(const Network& net, std::size_t position,
                      std::span<const Vector> inputs, double delta) {
  return ComputeBeta(net, position, inputs, delta, [](Vector y) { return y; });
}

double ComputeBetaPost(const Network& net, std::size_t position,
                       std::span<const Vector> inputs, double delta) {
  const LayerOp* split = position >= 1 && position <= net.size() ? &net.layer(position - 1) : nullptr;
  return ComputeBeta(net, position, inputs, delta,
                     [split](const Vector& y) { return Affine(*split, y); });
}

Insertion InsertLayer(const Network& net, std::size_t position, const Activation& sigma0,
                      int copies, InsertVariant variant, const Dataset& data) {
  RequirePosition(net, position);
  if (data.empty()) Fail(ErrorCode::kEmptyDataset, "insertion needs data to choose beta");
  if (data.input_dim != net.input_dim())
    Fail(ErrorCode::kDimensionMismatch,
         "dataset has " + std::to_string(data.input_dim) + " inputs, network expects " +
             std::to_string(net.input_dim()));
  const IdentitySumData params = IdentitySumParams(sigma0, copies);
  const auto B = static_cast<std::size_t>(params.copies);

  double beta = 1.0;
  if (!params.global())
    beta = variant == InsertVariant::kPre
               ? ComputeBetaPre(net, position, data.inputs, params.delta)
               : ComputeBetaPost(net, position, data.inputs, params.delta);

  const LayerOp& split = net.layer(position - 1);
  const std::size_t n0 = split.in_dim();
  const std::size_t n1 = split.out_dim();
  LayerOp first;
  LayerOp second;
  first.activation = sigma0;
  second.activation = split.activation;

  if (variant == InsertVariant::kPre) {
    const std::size_t width = B * n0;
    first.weights = Matrix(width, n0);
    first.bias.assign(width, 0.0);
    second.weights = Matrix(n1, width);
    second.bias = split.bias;
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t l = 0; l < B; ++l) {
        const std::size_t k = l + i * B;
        first.weights(k, i) = beta;
        first.bias[k] = params.shift - static_cast<double>(l);
        for (std::size_t r = 0; r < n1; ++r) second.weights(r, k) = split.weights(r, i) / beta;
      }
  } else {
    const std::size_t width = B * n1;
    first.weights = Matrix(width, n0);
    first.bias.assign(width, 0.0);
    second.weights = Matrix(n1, width);
    second.bias.assign(n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t l = 0; l < B; ++l) {
        const std::size_t k = i + l * n1;
        for (std::size_t c = 0; c < n0; ++c) first.weights(k, c) = beta * split.weights(i, c);
        first.bias[k] = beta * split.bias[i] + params.shift - static_cast<double>(l);
        second.weights(i, k) = 1.0 / beta;
      }
  }

  std::vector<LayerOp> layers;
  layers.reserve(net.size() + 1);
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (j + 1 == position) {
      layers.push_back(std::move(first));
      layers.push_back(std::move(second));
    } else {
      layers.push_back(net.layer(j));
    }
  }

  Insertion out{Network(std::move(layers)), {}};
  out.report.beta = beta;
  out.report.widths = out.network.widths();
  const std::string target = variant == InsertVariant::kPre
                                 ? "beta * x_i"
                                 : "beta * (W_i x + b_i)";
  if (params.global()) {
    out.report.omega_desc = std::string(ToString(variant)) + " insertion at position " +
                            std::to_string(position) + ": Omega = all inputs (" +
                            sigma0.Describe() + " sums the identity everywhere)";
  } else {
    out.report.omega_desc = std::string(ToString(variant)) + " insertion at position " +
                            std::to_string(position) + ": Omega = {x : |" + target +
                            "| < " + FormatNumber(params.delta) + " at the inputs of layer " +
                            std::to_string(position - 1) + "}, beta = " + FormatNumber(beta);
  }
  out.report.max_abs_deviation = MeasureDeviation(net, out.network, data.inputs).max_abs;
  return out;
}

bool CheckDomain(const Network& net, std::size_t position, InsertVariant variant,
                 double beta, const IdentitySumData& sigma0_params,
                 std::span<const double> x) {
  RequirePosition(net, position);
  const Vector y = PropagateToPosition(net, position, x);
  if (sigma0_params.global()) return true;
  const Vector values = variant == InsertVariant::kPre ? y : Affine(net.layer(position - 1), y);
  return std::all_of(values.begin(), values.end(), [&](double v) {
    return std::abs(beta * v) < sigma0_params.delta;
  });
}

DeviationStats MeasureDeviation(const Network& a, const Network& b,
                                std::span<const Vector> inputs) {
  if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim())
    Fail(ErrorCode::kDimensionMismatch,
         "networks map R^" + std::to_string(a.input_dim()) + " -> R^" +
             std::to_string(a.output_dim()) + " and R^" + std::to_string(b.input_dim()) +
             " -> R^" + std::to_string(b.output_dim()));
  DeviationStats stats;
  std::size_t count = 0;
  double total = 0.0;
  for (const Vector& x : inputs) {
    const Vector ya = Forward(a, x);
    const Vector yb = Forward(b, x);
    for (std::size_t i = 0; i < ya.size(); ++i) {
      const double e = std::abs(ya[i] - yb[i]);
      stats.max_abs = std::max(stats.max_abs, e);
      total += e;
      ++count;
    }
  }
  if (count > 0) stats.mean_abs = total / static_cast<double>(count);
  return stats;
}

}  // namespace refnet
