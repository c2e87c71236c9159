#pragma once

// Dense multilayer perceptron: a chain of layer operators
//     L(x) = sigma(W x + b)
// applied left to right. Networks are values; every operation here returns
// a new object and leaves its inputs untouched.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "refnet/activation.hpp"

namespace refnet {

using Vector = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LayerOp {
  Matrix weights;  // n_out x n_in
  Vector bias;     // n_out
  Activation activation = Activation::Identity();

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const LayerOp&, const LayerOp&) = default;
};

class Network {
 public:
  Network() = default;
  // Throws kDimensionMismatch if a bias length differs from its row count
  // or consecutive layers do not chain.
  explicit Network(std::vector<LayerOp> layers);

  const std::vector<LayerOp>& layers() const noexcept { return layers_; }
  const LayerOp& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t size() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }

  // Zero for an empty network (any input is accepted and returned as is).
  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  // n_0, n_1, ..., n_{m_L}.
  std::vector<std::size_t> widths() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<LayerOp> layers_;
};

Vector ForwardLayer(const LayerOp& layer, std::span<const double> x);
Vector Forward(const Network& net, std::span<const double> x);
// Pre-activation W x + b.
Vector Affine(const LayerOp& layer, std::span<const double> x);

// How backprop differentiates the activations. kValue uses the closed form
// in terms of the activation output for spline degrees 1 and 2 and falls
// back to kArgument for everything else.
enum class DerivativeMode { kArgument, kValue };

struct LayerGradient {
  Matrix weights;
  Vector bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  double loss = 0.0;
};

// Gradients of 0.5 * ||forward(net, x) - target||^2.
Gradients Backprop(const Network& net, std::span<const double> x,
                   std::span<const double> target,
                   DerivativeMode mode = DerivativeMode::kArgument);

// Seedable generator with a fixed algorithm: std::mt19937_64, with doubles
// drawn as (next() >> 11) * 2^-53 so streams match across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  std::uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Weights uniform on +-sqrt(6 / (n_in + n_out)), zero biases. Every layer
// uses `hidden`, except the last one when `output` is given. Throws
// kEmptyArchitecture for fewer than two dims.
Network InitRandom(std::span<const std::size_t> dims, const Activation& hidden,
                   std::uint64_t seed,
                   const std::optional<Activation>& output = std::nullopt);

// count points uniform in [-range, range]^dim.
std::vector<Vector> RandomInputs(std::uint64_t seed, std::size_t count,
                                 std::size_t dim, double range);

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<Vector> inputs;
  std::vector<Vector> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  bool empty() const noexcept { return inputs.empty(); }
};

// Mean over samples of 0.5 * ||forward(x) - y||^2.
double MeanLoss(const Network& net, const Dataset& data);

struct TrainResult {
  Network network;
  // losses[0] is the loss before training, losses[e] after epoch e.
  std::vector<double> losses;
};

// Full-batch gradient descent on MeanLoss.
TrainResult Train(const Network& net, const Dataset& data, std::size_t epochs,
                  double learning_rate,
                  DerivativeMode mode = DerivativeMode::kArgument);

}  // namespace refnet
