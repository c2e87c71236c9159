// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and time limits are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "refnet/activation.hpp"
#include "refnet/network.hpp"
#include "refnet/subdivision.hpp"
#include "refnet/transform.hpp"

using refnet::Activation;
using refnet::Dataset;
using refnet::DerivativeMode;
using refnet::InsertVariant;
using refnet::LayerOp;
using refnet::Mask;
using refnet::Network;
using refnet::Vector;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string Sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double MaxDeviation(const Network& a, const Network& b, const std::vector<Vector>& xs) {
  double worst = 0.0;
  for (const Vector& x : xs) {
    const Vector ya = refnet::Forward(a, x);
    const Vector yb = refnet::Forward(b, x);
    for (std::size_t i = 0; i < ya.size(); ++i) worst = std::max(worst, std::abs(ya[i] - yb[i]));
  }
  return worst;
}

// Random MLP no larger than 5-8-8-3, with random biases so that shifts and
// clamps of every neuron come into play.
Network RandomNet(std::mt19937_64& rng, const Activation& act) {
  std::uniform_int_distribution<std::size_t> n0(1, 5), hidden(1, 8), out(1, 3);
  std::vector<std::size_t> dims{n0(rng), hidden(rng)};
  if (rng() % 2) dims.push_back(hidden(rng));
  dims.push_back(out(rng));
  const Network net = refnet::InitRandom(dims, act, rng());
  std::vector<LayerOp> layers = net.layers();
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (LayerOp& l : layers)
    for (double& b : l.bias) b = u(rng);
  return Network(std::move(layers));
}

// ---- 1 --------------------------------------------------------------------

Outcome Refinability() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  bool coeffs_exact = true;
  for (int d = 1; d <= 4; ++d) {
    const Activation act = Activation::Spline(d);
    const refnet::RefinabilityData r = refnet::RefinabilityParams(act);
    coeffs_exact = coeffs_exact && r.split_count == d + 1 && r.shift == d / 2.0;
    for (int l = 0; l <= d; ++l)
      coeffs_exact = coeffs_exact &&
                     r.coeffs[static_cast<std::size_t>(l)] == std::ldexp(static_cast<double>(oracle::Choose(d, l)), -d);
    for (double t : oracle::Grid(-d - 1.0, d + 1.0, 2001)) {
      double s = 0.0;
      for (int l = 0; l <= d; ++l)
        s += std::ldexp(static_cast<double>(oracle::Choose(d, l)), -d) * act.Evaluate(2 * t + d / 2.0 - l);
      worst = std::max(worst, std::abs(act.Evaluate(t) - s));
    }
  }
  return {worst <= kTol && coeffs_exact,
          "max residual " + Sci(worst) + " <= " + Sci(kTol) +
              (coeffs_exact ? ", a_l = 2^-d C(d,l)" : ", coefficients differ from 2^-d C(d,l)")};
}

// ---- 2 --------------------------------------------------------------------

Outcome SumIdentity() {
  constexpr double kTol = 1e-10;
  const std::pair<int, int> cases[] = {{1, 1}, {2, 2}, {2, 4}, {3, 3}};
  double worst = 0.0;
  bool params_ok = true;
  for (auto [d, b] : cases) {
    const Activation act = Activation::Spline(d);
    const refnet::IdentitySumData p = refnet::IdentitySumParams(act, b);
    const double mu = (b - 1) / 2.0;
    const double half = (b - d + 1) / 2.0;
    params_ok = params_ok && p.copies == b && p.shift == mu && p.half_width == half;
    for (double t : oracle::Grid(-half, half, 2001)) {
      double s = 0.0;
      for (int l = 0; l < b; ++l) s += act.Evaluate(t + mu - l);
      worst = std::max(worst, std::abs(s - t));
    }
  }
  return {worst <= kTol && params_ok,
          "max |sum - t| " + Sci(worst) + " <= " + Sci(kTol) +
              (params_ok ? "" : ", mu or I differ from (B-1)/2, (B-d+1)/2")};
}

// ---- 3 --------------------------------------------------------------------

Outcome Widening() {
  constexpr double kTol = 1e-11;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  bool widths_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 + 1;
    const Network net = RandomNet(rng, Activation::Spline(d));
    Network wide = net;
    for (std::size_t j = 0; j + 1 < net.size(); ++j) wide = refnet::WidenLayerAll(wide, j);
    for (std::size_t j = 0; j + 1 < net.size(); ++j)
      widths_ok = widths_ok && wide.layer(j).out_dim() == static_cast<std::size_t>(d + 1) * net.layer(j).out_dim();
    worst = std::max(worst, MaxDeviation(net, wide, refnet::RandomInputs(rng(), 1000, net.input_dim(), 10.0)));
  }
  return {worst <= kTol && widths_ok,
          "20 nets, max deviation " + Sci(worst) + " <= " + Sci(kTol) + " over 1000 inputs in [-10,10]^n"};
}

// ---- 4 --------------------------------------------------------------------

Outcome Insertion() {
  constexpr double kTol = 1e-11;
  std::mt19937_64 rng(4);
  double worst = 0.0;
  int insertions = 0;
  bool inside = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = RandomNet(rng, trial % 2 ? Activation::Spline(1) : Activation::Spline(2));
    Dataset data{net.input_dim(), 1, refnet::RandomInputs(rng(), 64, net.input_dim(), 3.0), {}};
    data.targets.assign(64, Vector{0.0});
    for (int d = 1; d <= 2; ++d)
      for (int b : {d, d + 2})
        for (InsertVariant v : {InsertVariant::kPre, InsertVariant::kPost})
          for (std::size_t pos = 1; pos <= net.size(); ++pos) {
            const Activation sigma0 = Activation::Spline(d);
            const refnet::Insertion ins = refnet::InsertLayer(net, pos, sigma0, b, v, data);
            worst = std::max(worst, MaxDeviation(net, ins.network, data.inputs));
            const auto params = refnet::IdentitySumParams(sigma0, b);
            for (const Vector& x : data.inputs)
              inside = inside && refnet::CheckDomain(net, pos, v, ins.report.beta, params, x);
            ++insertions;
          }
  }

  // Contract boundary: the 1-1 net sigma_B2(x) with data {0.1} gets beta =
  // 2.5 from a spline:1, B=1 pre insertion, so Omega = {|x| < 0.2}. At
  // x = 0.4 the inserted layer clamps while the original does not.
  const Network one({LayerOp{refnet::Matrix(1, 1, 1.0), {0.0}, Activation::Spline(2)}});
  const Dataset tiny{1, 1, {{0.1}}, {{0.0}}};
  const refnet::Insertion ins = refnet::InsertLayer(one, 1, Activation::Spline(1), 1, InsertVariant::kPre, tiny);
  const bool outside = !refnet::CheckDomain(one, 1, InsertVariant::kPre, ins.report.beta,
                                            refnet::IdentitySumParams(Activation::Spline(1), 1), Vector{0.4});
  const double boundary = MaxDeviation(one, ins.network, {Vector{0.4}});

  return {worst <= kTol && inside && outside,
          std::to_string(insertions) + " insertions, max deviation on data " + Sci(worst) + " <= " +
              Sci(kTol) + (inside ? "" : ", some data outside Omega") +
              "; out-of-Omega x=0.4 (beta=" + Sci(ins.report.beta) + ") deviates by " + Sci(boundary) +
              " as allowed"};
}

// ---- 5 --------------------------------------------------------------------

Outcome Derivatives() {
  constexpr double kFdTol = 1e-5;
  constexpr double kValueTol = 1e-12;
  constexpr double kH = 1e-6;
  double worst_fd = 0.0;
  for (int d = 1; d <= 6; ++d)
    for (double t : oracle::Grid(-d / 2.0 - 1.0, d / 2.0 + 1.0, 2001)) {
      // Knots sit at t + d/2 in Z; differences straddling one see a kink in
      // sigma (d=1) or in sigma' (d=2).
      const double u = t + d / 2.0;
      if (std::abs(u - std::round(u)) < 10 * kH) continue;
      const double fd = (refnet::SplineSigma(d, t + kH) - refnet::SplineSigma(d, t - kH)) / (2 * kH);
      const double a = refnet::SplineSigmaPrime(d, t);
      worst_fd = std::max(worst_fd, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-2}));
    }
  double worst_value = 0.0;
  for (int d = 1; d <= 2; ++d)
    for (double t : oracle::Grid(-2.0, 2.0, 2001)) {
      if (std::abs(std::abs(t) - d / 2.0) < 1e-12) continue;
      worst_value = std::max(worst_value, std::abs(refnet::SigmaPrimeFromValue(d, refnet::SplineSigma(d, t)) -
                                                   refnet::SplineSigmaPrime(d, t)));
    }
  return {worst_fd <= kFdTol && worst_value <= kValueTol,
          "finite-difference rel " + Sci(worst_fd) + " <= " + Sci(kFdTol) + ", value vs argument form " +
              Sci(worst_value) + " <= " + Sci(kValueTol)};
}

// ---- 6 --------------------------------------------------------------------

double Loss(const Network& net, const Vector& x, const Vector& t) {
  const Vector y = refnet::Forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - t[i]) * (y[i] - t[i]);
  return s;
}

Network Nudge(const Network& net, std::size_t j, bool bias, std::size_t i, double delta) {
  std::vector<LayerOp> layers = net.layers();
  if (bias)
    layers[j].bias[i] += delta;
  else
    layers[j].weights.data()[i] += delta;
  return Network(std::move(layers));
}

Outcome Gradients() {
  constexpr double kTol = 1e-5;
  constexpr double kH = 1e-6;
  const Activation kinds[] = {Activation::Identity(), Activation::Spline(1), Activation::Spline(2),
                              Activation::Spline(3), Activation::Tabulated(Mask::BSpline(2), 10)};
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> width(1, 4);
  double worst = 0.0;
  int checked = 0, skipped = 0;
  for (const Activation& act : kinds)
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t dims[] = {width(rng), width(rng), width(rng)};
      const Network net = refnet::InitRandom(dims, act, rng());
      const Vector x = refnet::RandomInputs(rng(), 1, dims[0], 1.5).front();
      const Vector t = refnet::RandomInputs(rng(), 1, dims[2], 0.5).front();
      const refnet::Gradients g = refnet::Backprop(net, x, t);
      const double base = Loss(net, x, t);
      for (std::size_t j = 0; j < net.size(); ++j)
        for (bool bias : {false, true}) {
          const std::size_t count = bias ? net.layer(j).bias.size() : net.layer(j).weights.data().size();
          for (std::size_t i = 0; i < count; ++i) {
            const double up = Loss(Nudge(net, j, bias, i, kH), x, t);
            const double down = Loss(Nudge(net, j, bias, i, -kH), x, t);
            // One-sided slopes that disagree mean the step crossed a kink.
            const double right = (up - base) / kH, left = (base - down) / kH;
            if (std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(right) + std::abs(left))) {
              ++skipped;
              continue;
            }
            const double fd = (up - down) / (2 * kH);
            const double a = bias ? g.layers[j].bias[i] : g.layers[j].weights.data()[i];
            worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-2}));
            ++checked;
          }
        }
    }
  return {worst <= kTol && checked > 4 * skipped,
          "50 nets, " + std::to_string(checked) + " parameters (" + std::to_string(skipped) +
              " on kinks skipped), max rel error " + Sci(worst) + " <= " + Sci(kTol)};
}

// ---- 7 --------------------------------------------------------------------

double TableError(const Activation& act, double (*exact)(double)) {
  const refnet::DyadicTable& t = *act.table();
  double worst = 0.0;
  for (std::size_t i = 0; i < t.values.size(); ++i)
    worst = std::max(worst, std::abs(t.values[i] - exact(t.Abscissa(i))));
  return worst;
}

Outcome Cascade() {
  constexpr double kLinearTol = 1e-12;
  constexpr double kQuadraticTol = 1e-2;
  const double e1 = TableError(Activation::Tabulated(Mask::BSpline(1), 8), oracle::SigmaB1);
  const double e10 = TableError(Activation::Tabulated(Mask::BSpline(2), 10), oracle::SigmaB2);
  const double e11 = TableError(Activation::Tabulated(Mask::BSpline(2), 11), oracle::SigmaB2);
  return {e1 <= kLinearTol && e10 <= kQuadraticTol && e11 < e10,
          "d=1 level 8 " + Sci(e1) + " <= " + Sci(kLinearTol) + "; d=2 level 10 " + Sci(e10) + " <= " +
              Sci(kQuadraticTol) + ", level 11 " + Sci(e11) + " < level 10"};
}

// ---- 8 --------------------------------------------------------------------

Outcome Structure() {
  constexpr double kExact = 1e-12;
  constexpr double kQuadrature = 1e-9;
  const oracle::GaussRule rule = oracle::GaussLegendre(64);
  double difference = 0.0, conv_sigma = 0.0, conv_phi = 0.0, refinement = 0.0, generation = 0.0;
  for (int d = 1; d <= 6; ++d) {
    for (double t : oracle::Grid(-d - 1.0, d + 1.0, 1501))
      difference = std::max(difference, std::abs(refnet::SplineSigma(d, t) - refnet::SplineSigma(d, t - 1.0) -
                                                 refnet::SplinePhi(d, t + d / 2.0)));
    for (double t : oracle::Grid(-0.5, d + 1.5, 101))
      conv_phi = std::max(conv_phi, std::abs(refnet::SplinePhi(d, t) -
                                             oracle::Integrate(rule, [d](double s) { return refnet::SplinePhi(d - 1, s); },
                                                               t - 1.0, t)));
    for (double t : oracle::Grid(-0.5, d + 1.5, 1003)) {
      double s = 0.0;
      for (int l = 0; l <= d + 1; ++l)
        s += std::ldexp(static_cast<double>(oracle::Choose(d + 1, l)), -d) * refnet::SplinePhi(d, 2 * t - l);
      refinement = std::max(refinement, std::abs(refnet::SplinePhi(d, t) - s));
    }
    for (double t : oracle::Grid(-3.0, 3.0, 601)) {
      double ones = 0.0, lin = 0.0;
      for (int i = static_cast<int>(std::floor(t)) - d - 2; i <= static_cast<int>(std::ceil(t)) + 1; ++i) {
        ones += refnet::SplinePhi(d, t - i);
        lin += i * refnet::SplinePhi(d, t - i);
      }
      generation = std::max({generation, std::abs(ones - 1.0), std::abs(lin - (t - (d + 1) / 2.0))});
    }
  }
  for (int d = 1; d <= 5; ++d)
    for (double t : oracle::Grid(-d / 2.0 - 1.0, d / 2.0 + 1.0, 97))
      conv_sigma = std::max(conv_sigma, std::abs(refnet::SplineSigma(d + 1, t) -
                                                 oracle::Integrate(rule, [d](double s) { return refnet::SplineSigma(d, s); },
                                                                   t - 0.5, t + 0.5)));
  const bool ok = difference <= kExact && refinement <= kExact && generation <= kExact &&
                  conv_phi <= kQuadrature && conv_sigma <= kQuadrature;
  return {ok, "difference " + Sci(difference) + ", phi refinement " + Sci(refinement) +
                  ", polynomial generation " + Sci(generation) + " (<= " + Sci(kExact) +
                  "); B-spline convolution " + Sci(conv_phi) + ", sigma convolution " + Sci(conv_sigma) +
                  " (<= " + Sci(kQuadrature) + ")"};
}

// ---- 9 --------------------------------------------------------------------

Outcome Algebra() {
  bool factor_ok = true;
  for (int d = 0; d <= 6; ++d) {
    // Exact division of 2^-d (1+z)^{d+1} by (1+z).
    oracle::RationalPoly a;
    for (int l = 0; l <= d + 1; ++l)
      a.emplace_back(static_cast<std::int64_t>(oracle::Choose(d + 1, l)), std::int64_t{1} << d);
    const auto [q, r] = oracle::DivideByOnePlusZ(a);
    const std::vector<double> b = refnet::FactorDifferenceScheme(Mask::BSpline(d));
    factor_ok = factor_ok && r.IsZero() && b.size() == q.size();
    for (std::size_t l = 0; factor_ok && l < b.size(); ++l)
      factor_ok = b[l] == q[l].ToDouble() &&
                  q[l] == oracle::Rational(static_cast<std::int64_t>(oracle::Choose(d, static_cast<int>(l))),
                                           std::int64_t{1} << d);
  }

  // a = (1+z)^k b and c_m = C(m+k-1, k-1) satisfy a(z) c(z^2) = b(z) c(z).
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> num(-8, 8), len(1, 5), power(1, 3);
  constexpr int kN = 24;
  int lemma_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = power(rng);
    oracle::RationalPoly b(static_cast<std::size_t>(len(rng)));
    for (auto& x : b) x = oracle::Rational(num(rng), 4);
    oracle::RationalPoly a = b;
    for (int p = 0; p < k; ++p) a = oracle::Multiply(a, {1, 1});
    oracle::RationalPoly c(kN);
    for (int m = 0; m < kN; ++m) c[m] = static_cast<std::int64_t>(oracle::Choose(m + k - 1, k - 1));
    auto to_laurent = [](const oracle::RationalPoly& p) {
      refnet::LaurentPoly out{{}, 0};
      for (const auto& x : p) out.coeffs.push_back(x.ToDouble());
      return out;
    };
    const refnet::LaurentPoly lhs = refnet::LaurentMul(to_laurent(a), to_laurent(c).Dilated());
    const refnet::LaurentPoly rhs = refnet::LaurentMul(to_laurent(b), to_laurent(c));
    for (int i = 0; i < kN; ++i) {
      oracle::Rational direct_l, direct_r;
      for (int m = 0; m < kN; ++m) {
        const int ia = i - 2 * m;
        if (ia >= 0 && ia < static_cast<int>(a.size())) direct_l = direct_l + c[m] * a[ia];
        if (m < static_cast<int>(b.size()) && i - m >= 0) direct_r = direct_r + b[m] * c[i - m];
      }
      if (!(direct_l == direct_r) || lhs.At(i) != direct_l.ToDouble() || rhs.At(i) != direct_r.ToDouble())
        ++lemma_failures;
    }
  }
  return {factor_ok && lemma_failures == 0,
          std::string(factor_ok ? "b = 2^-d C(d,l) exactly for d <= 6" : "factorization differs from 2^-d C(d,l)") +
              "; lemma identity on 100 triples, " + std::to_string(lemma_failures) + " mismatches"};
}

// ---- 10 -------------------------------------------------------------------

Outcome Trainability() {
  constexpr double kTol = 1e-9;
  Dataset data{1, 1, {}, {}};
  for (int k = 0; k < 64; ++k) {
    const double x = -1.0 + 2.0 * k / 63.0;
    data.inputs.push_back({x});
    data.targets.push_back({0.4 * std::sin(3.0 * x)});
  }
  const std::size_t dims[] = {1, 8, 1};
  const Network start = refnet::InitRandom(dims, Activation::Spline(2), 10, Activation::Identity());
  const refnet::TrainResult first = refnet::Train(start, data, 50, 0.1);
  const Network wide = refnet::WidenLayerAll(first.network, 0);
  const double before = refnet::MeanLoss(first.network, data);
  const double after = refnet::MeanLoss(wide, data);
  const refnet::TrainResult second = refnet::Train(wide, data, 50, 0.1);
  const double jump = std::abs(after - before);
  const bool ok = jump <= kTol && first.losses.back() <= first.losses.front() &&
                  second.losses.front() <= first.losses.back() + kTol &&
                  second.losses.back() <= second.losses.front();
  return {ok, "loss " + Sci(first.losses.front()) + " -> " + Sci(before) + " | widen 8 -> " +
                  std::to_string(wide.layer(0).out_dim()) + ", jump " + Sci(jump) + " <= " + Sci(kTol) +
                  " | -> " + Sci(second.losses.back())};
}

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "refinability identities", 1.0, Refinability},
      {2, "sum identity", 1.0, SumIdentity},
      {3, "widening preservation", 5.0, Widening},
      {4, "insertion preservation", 5.0, Insertion},
      {5, "derivative correctness", 1.0, Derivatives},
      {6, "backprop gradients", 2.0, Gradients},
      {7, "subdivision cascade", 2.0, Cascade},
      {8, "structural identities", 3.0, Structure},
      {9, "difference-scheme algebra", 1.0, Algebra},
      {10, "trainability across growth", 10.0, Trainability},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = out.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %s: %s; %.3f s < %.0f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                seconds, c.limit_seconds, in_time ? "" : " (too slow)");
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
