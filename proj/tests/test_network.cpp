#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "refnet/error.hpp"
#include "refnet/network.hpp"

using refnet::Activation;
using refnet::Dataset;
using refnet::DerivativeMode;
using refnet::ErrorCode;
using refnet::LayerOp;
using refnet::Matrix;
using refnet::Network;
using refnet::Vector;

namespace {

ErrorCode CodeOf(auto&& f) {
  try {
    f();
  } catch (const refnet::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

LayerOp Layer(std::vector<std::vector<double>> w, Vector b, Activation act) {
  Matrix m(w.size(), w.empty() ? 0 : w.front().size());
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t c = 0; c < w[r].size(); ++c) m(r, c) = w[r][c];
  return LayerOp{std::move(m), std::move(b), std::move(act)};
}

std::vector<oracle::PlainLayer> ToPlain(const Network& net, double (*act)(double)) {
  std::vector<oracle::PlainLayer> out;
  for (const LayerOp& layer : net.layers()) {
    oracle::PlainLayer p{{}, layer.bias, act};
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      const auto row = layer.weights.row(r);
      p.w.emplace_back(row.begin(), row.end());
    }
    out.push_back(std::move(p));
  }
  return out;
}

double Loss(const Network& net, const Vector& x, const Vector& t) {
  const Vector y = refnet::Forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - t[i]) * (y[i] - t[i]);
  return s;
}

Network WithParam(const Network& net, std::size_t j, bool bias, std::size_t idx, double delta) {
  std::vector<LayerOp> layers = net.layers();
  if (bias)
    layers[j].bias[idx] += delta;
  else
    layers[j].weights.data()[idx] += delta;
  return Network(std::move(layers));
}

struct GradCheck {
  double worst = 0.0;
  int checked = 0;
  int skipped = 0;
};

// Compares backprop with central differences. Parameters whose one-sided
// differences disagree sit on a kink of the activation and are skipped.
GradCheck CheckGradients(const Network& net, const Vector& x, const Vector& t,
                         DerivativeMode mode, double h) {
  const refnet::Gradients g = refnet::Backprop(net, x, t, mode);
  const double base = Loss(net, x, t);
  GradCheck out;
  for (std::size_t j = 0; j < net.size(); ++j)
    for (bool bias : {false, true}) {
      const std::size_t count = bias ? net.layer(j).bias.size() : net.layer(j).weights.data().size();
      for (std::size_t i = 0; i < count; ++i) {
        const double up = Loss(WithParam(net, j, bias, i, h), x, t);
        const double down = Loss(WithParam(net, j, bias, i, -h), x, t);
        const double right = (up - base) / h;
        const double left = (base - down) / h;
        if (std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(right) + std::abs(left))) {
          ++out.skipped;
          continue;
        }
        const double fd = (up - down) / (2 * h);
        const double analytic = bias ? g.layers[j].bias[i] : g.layers[j].weights.data()[i];
        const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-2});
        out.worst = std::max(out.worst, rel);
        ++out.checked;
      }
    }
  return out;
}

}  // namespace

TEST_CASE("network construction") {
  CHECK(CodeOf([] { Network({Layer({{1, 2}}, {0, 0}, Activation::Identity())}); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([] {
          Network({Layer({{1, 2}}, {0}, Activation::Identity()),
                   Layer({{1, 2}}, {0}, Activation::Identity())});
        }) == ErrorCode::kDimensionMismatch);
  const Network net({Layer({{1, 2}, {3, 4}, {5, 6}}, {0, 0, 0}, Activation::Identity()),
                     Layer({{1, 1, 1}}, {0}, Activation::Spline(2))});
  CHECK(net.widths() == std::vector<std::size_t>{2, 3, 1});
  CHECK(net.input_dim() == 2);
  CHECK(net.output_dim() == 1);
  CHECK(Network().widths().empty());
}

TEST_CASE("forward pass") {
  CHECK(refnet::ForwardLayer(Layer({{0.0, 0.0}}, {0}, Activation::Spline(2)), Vector{3.0, -7.0}) ==
        Vector{0.0});
  CHECK(refnet::ForwardLayer(Layer({{1}}, {0}, Activation::Spline(1)), Vector{0.25}) ==
        Vector{0.25});
  CHECK(refnet::ForwardLayer(Layer({{2, 0}, {0, 2}}, {-1, 1}, Activation::Identity()),
                             Vector{1, 1}) == Vector{1, 3});
  CHECK(refnet::Forward(Network(), Vector{1.5, -2.0}) == Vector{1.5, -2.0});
  const LayerOp single = Layer({{0.5, -1}}, {0.25}, Activation::Spline(2));
  CHECK(refnet::Forward(Network({single}), Vector{1, 0.5}) ==
        refnet::ForwardLayer(single, Vector{1, 0.5}));
  CHECK(CodeOf([&] { refnet::ForwardLayer(single, Vector{1.0}); }) == ErrorCode::kDimensionMismatch);

  SUBCASE("identity layers compose to one affine map") {
    const std::size_t dims[] = {3, 5, 4, 2};
    const Network net = refnet::InitRandom(dims, Activation::Identity(), 99);
    std::vector<LayerOp> layers = net.layers();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (LayerOp& l : layers)
      for (double& b : l.bias) b = u(rng);
    const Network biased(layers);
    // Collapse W2 W1 W0 and the bias chain by hand.
    std::vector<std::vector<double>> m{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<double> c(3, 0.0);
    for (const LayerOp& l : biased.layers()) {
      std::vector<std::vector<double>> next(l.out_dim(), std::vector<double>(3, 0.0));
      std::vector<double> nc(l.bias);
      for (std::size_t r = 0; r < l.out_dim(); ++r)
        for (std::size_t k = 0; k < l.in_dim(); ++k) {
          for (std::size_t col = 0; col < 3; ++col) next[r][col] += l.weights(r, k) * m[k][col];
          nc[r] += l.weights(r, k) * c[k];
        }
      m = std::move(next);
      c = std::move(nc);
    }
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x{u(rng) * 5, u(rng) * 5, u(rng) * 5};
      const Vector y = refnet::Forward(biased, x);
      for (std::size_t r = 0; r < 2; ++r) {
        double expect = c[r];
        for (std::size_t col = 0; col < 3; ++col) expect += m[r][col] * x[col];
        CHECK(std::abs(y[r] - expect) <= 1e-12);
      }
    }
  }

  SUBCASE("matches a plain reference implementation") {
    const std::size_t dims[] = {4, 6, 6, 3};
    for (int d = 1; d <= 2; ++d) {
      const Network net = refnet::InitRandom(dims, Activation::Spline(d), 17 + d);
      const auto plain = ToPlain(net, d == 1 ? oracle::SigmaB1 : oracle::SigmaB2);
      for (const Vector& x : refnet::RandomInputs(5, 200, 4, 3.0)) {
        const Vector a = refnet::Forward(net, x);
        const Vector b = oracle::PlainForward(plain, x);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);
      }
    }
  }
}

TEST_CASE("backprop") {
  SUBCASE("all zero") {
    const Network net({Layer({{0, 0}, {0, 0}}, {0, 0}, Activation::Spline(2)),
                       Layer({{0, 0}}, {0}, Activation::Spline(2))});
    const refnet::Gradients g = refnet::Backprop(net, Vector{0.3, -0.2}, Vector{0.0});
    CHECK(g.loss == 0.0);
    for (const auto& l : g.layers) {
      for (double v : l.weights.data()) CHECK(v == 0.0);
      for (double v : l.bias) CHECK(v == 0.0);
    }
  }
  SUBCASE("hand chain rule") {
    const Network net({Layer({{1}}, {0}, Activation::Identity())});
    const refnet::Gradients g = refnet::Backprop(net, Vector{1}, Vector{0});
    CHECK(g.loss == 0.5);
    CHECK(g.layers[0].weights(0, 0) == 1.0);
    CHECK(g.layers[0].bias[0] == 1.0);
  }
  SUBCASE("dimension checks") {
    const Network net({Layer({{1}}, {0}, Activation::Identity())});
    CHECK(CodeOf([&] { refnet::Backprop(net, Vector{1, 2}, Vector{0}); }) ==
          ErrorCode::kDimensionMismatch);
    CHECK(CodeOf([&] { refnet::Backprop(net, Vector{1}, Vector{0, 0}); }) ==
          ErrorCode::kDimensionMismatch);
  }
  SUBCASE("finite differences") {
    const Activation kinds[] = {Activation::Identity(), Activation::Spline(1),
                                Activation::Spline(2), Activation::Spline(3),
                                Activation::Tabulated(refnet::Mask::BSpline(2), 10)};
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> width(1, 4);
    for (const Activation& act : kinds) {
      GradCheck total;
      for (int trial = 0; trial < 10; ++trial) {
        const std::size_t dims[] = {width(rng), width(rng), width(rng)};
        const Network net = refnet::InitRandom(dims, act, 100 + trial);
        const Vector x = refnet::RandomInputs(200 + trial, 1, dims[0], 1.5).front();
        const Vector t = refnet::RandomInputs(300 + trial, 1, dims[2], 0.5).front();
        for (DerivativeMode mode : {DerivativeMode::kArgument, DerivativeMode::kValue}) {
          const GradCheck c = CheckGradients(net, x, t, mode, 1e-6);
          total.worst = std::max(total.worst, c.worst);
          total.checked += c.checked;
          total.skipped += c.skipped;
        }
      }
      INFO(act.Describe());
      CHECK(total.worst <= 1e-5);
      CHECK(total.checked > 4 * total.skipped);
    }
  }
  SUBCASE("value form agrees with argument form") {
    const std::size_t dims[] = {3, 5, 2};
    for (int d = 1; d <= 2; ++d) {
      const Network net = refnet::InitRandom(dims, Activation::Spline(d), 44);
      for (const Vector& x : refnet::RandomInputs(45, 50, 3, 2.0)) {
        const auto a = refnet::Backprop(net, x, Vector{0.1, -0.1}, DerivativeMode::kArgument);
        const auto b = refnet::Backprop(net, x, Vector{0.1, -0.1}, DerivativeMode::kValue);
        for (std::size_t j = 0; j < net.size(); ++j)
          for (std::size_t i = 0; i < a.layers[j].weights.data().size(); ++i)
            CHECK(std::abs(a.layers[j].weights.data()[i] - b.layers[j].weights.data()[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("random initialization") {
  const std::size_t dims[] = {2, 3, 1};
  const Network a = refnet::InitRandom(dims, Activation::Spline(2), 1);
  CHECK(a == refnet::InitRandom(dims, Activation::Spline(2), 1));
  CHECK_FALSE(a == refnet::InitRandom(dims, Activation::Spline(2), 2));
  CHECK(a.layer(0).weights.rows() == 3);
  CHECK(a.layer(0).weights.cols() == 2);
  CHECK(a.layer(1).weights.rows() == 1);
  CHECK(a.layer(1).weights.cols() == 3);
  for (const LayerOp& l : a.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    for (double w : l.weights.data()) CHECK(std::abs(w) <= limit);
    for (double b : l.bias) CHECK(b == 0.0);
  }
  const Network mixed = refnet::InitRandom(dims, Activation::Spline(2), 1, Activation::Identity());
  CHECK(mixed.layer(0).activation == Activation::Spline(2));
  CHECK(mixed.layer(1).activation == Activation::Identity());

  const std::size_t one[] = {5};
  CHECK(CodeOf([&] { refnet::InitRandom(one, Activation::Spline(2), 0); }) ==
        ErrorCode::kEmptyArchitecture);
  const std::size_t zero[] = {2, 0, 1};
  CHECK(CodeOf([&] { refnet::InitRandom(zero, Activation::Spline(2), 0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("generator") {
  // First output of the standard 64-bit Mersenne Twister with its default seed.
  refnet::Rng rng(5489);
  CHECK(rng.Next() == 14514284786278117030ULL);
  refnet::Rng r2(5489);
  CHECK(r2.Uniform01() == static_cast<double>(14514284786278117030ULL >> 11) * 0x1.0p-53);
  const auto xs = refnet::RandomInputs(3, 1000, 2, 10.0);
  CHECK(xs == refnet::RandomInputs(3, 1000, 2, 10.0));
  for (const Vector& x : xs)
    for (double v : x) CHECK(std::abs(v) <= 10.0);
}

TEST_CASE("training") {
  Dataset data{1, 1, {}, {}};
  for (int k = 0; k < 64; ++k) {
    const double x = -2.0 + 4.0 * k / 63.0;
    data.inputs.push_back({x});
    data.targets.push_back({0.4 * std::sin(1.5 * x)});
  }
  const std::size_t dims[] = {1, 8, 1};
  const Network net = refnet::InitRandom(dims, Activation::Spline(2), 4, Activation::Identity());

  SUBCASE("loss decreases") {
    const refnet::TrainResult r = refnet::Train(net, data, 50, 0.5);
    REQUIRE(r.losses.size() == 51);
    CHECK(r.losses.front() == refnet::MeanLoss(net, data));
    CHECK(r.losses.back() < r.losses.front());
    CHECK(r.losses.back() == refnet::MeanLoss(r.network, data));
  }
  SUBCASE("zero learning rate") {
    const refnet::TrainResult r = refnet::Train(net, data, 10, 0.0);
    for (double l : r.losses) CHECK(std::abs(l - r.losses.front()) <= 1e-15);
    CHECK(r.network == net);
  }
  SUBCASE("zero epochs") {
    const refnet::TrainResult r = refnet::Train(net, data, 0, 0.5);
    CHECK(r.network == net);
    CHECK(r.losses.size() == 1);
  }
  SUBCASE("deterministic") {
    CHECK(refnet::Train(net, data, 5, 0.3).network == refnet::Train(net, data, 5, 0.3).network);
  }
  SUBCASE("errors") {
    CHECK(CodeOf([&] { refnet::Train(net, Dataset{1, 1, {}, {}}, 1, 0.1); }) ==
          ErrorCode::kEmptyDataset);
    CHECK(CodeOf([&] { refnet::Train(net, data, 1, -0.1); }) == ErrorCode::kInvalidArgument);
    Dataset wide = data;
    wide.input_dim = 2;
    CHECK(CodeOf([&] { refnet::MeanLoss(net, wide); }) == ErrorCode::kDimensionMismatch);
  }
}
