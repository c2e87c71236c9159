#include "refnet/activation.hpp"

#include <cmath>

#include "combinatorics.hpp"
#include "refnet/error.hpp"

namespace refnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSymmetryTolerance = 1e-9;

void RequireSplineDegree(int degree, int min_degree) {
  if (degree < min_degree || degree > kMaxDegree)
    Fail(ErrorCode::kUnsupportedDegree,
         "spline degree " + std::to_string(degree) + " outside [" +
             std::to_string(min_degree) + ", " + std::to_string(kMaxDegree) + "]");
}

// Truncated-power sum: (1/d!) sum_{l < bound} (-1)^l C(n, l) max{x - l, 0}^d.
double TruncatedPowerSum(int d, int n, double x) {
  double acc = 0.0;
  for (int l = 0; l <= n && l < x; ++l) {
    const double term = Binomial(n, l) * std::pow(x - l, d);
    acc += (l % 2 == 0) ? term : -term;
  }
  return acc / Factorial(d);
}

// sigma_{B^d} for t <= 0, where fewer and smaller terms are involved.
double SigmaLeftHalf(int d, double t) {
  const double half = 0.5 * d;
  if (t <= -half) return -0.5;
  return -0.5 + TruncatedPowerSum(d, d, t + half);
}

}  // namespace

double SplinePhi(int degree, double t) {
  RequireSplineDegree(degree, 0);
  if (degree == 0) return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
  const double right = degree + 1.0;
  if (t <= 0.0 || t >= right) return 0.0;
  // Symmetric about (d+1)/2; evaluate on the left half.
  if (t > 0.5 * right) t = right - t;
  return TruncatedPowerSum(degree, degree + 1, t);
}

double SplineSigma(int degree, double t) {
  RequireSplineDegree(degree, 1);
  if (t == 0.0) return 0.0;
  return t < 0.0 ? SigmaLeftHalf(degree, t) : -SigmaLeftHalf(degree, -t);
}

double SplineSigmaPrime(int degree, double t) {
  RequireSplineDegree(degree, 1);
  if (degree == 1) return std::abs(t) < 0.5 ? 1.0 : 0.0;
  return SplinePhi(degree - 1, t + 0.5 * degree);
}

double SigmaPrimeFromValue(int degree, double y) {
  if (degree != 1 && degree != 2)
    Fail(ErrorCode::kUnsupportedDegree,
         "value-form derivative only exists for degrees 1 and 2, got " +
             std::to_string(degree));
  if (!(std::abs(y) <= 0.5 + kAlgebraicTolerance))
    Fail(ErrorCode::kDomain, "activation value " + FormatNumber(y) +
                                 " outside [-1/2, 1/2]");
  if (degree == 1) return std::abs(y) < 0.5 ? 1.0 : 0.0;
  return std::sqrt(std::max(0.0, 1.0 - 2.0 * std::abs(y)));
}

struct Activation::TableData {
  Mask mask;
  int levels;
  DyadicTable sigma;
  bool phi_symmetric;
};

namespace {

bool TabulatedPhiIsSymmetric(const Mask& mask, int levels) {
  const DyadicTable phi = TabulateBasicLimit(mask, levels);
  const double h = phi.spacing();
  const long n = static_cast<long>(phi.values.size());
  const long mirror_sum =
      std::lround((mask.degree() + 1 - 2.0 * phi.origin) / h);
  for (long j = 0; j < n; ++j) {
    const long m = mirror_sum - j;
    const double mirrored = (m >= 0 && m < n) ? phi.values[static_cast<std::size_t>(m)] : 0.0;
    if (std::abs(phi.values[static_cast<std::size_t>(j)] - mirrored) > kSymmetryTolerance)
      return false;
  }
  return true;
}

}  // namespace

Activation Activation::Spline(int degree) {
  RequireSplineDegree(degree, 1);
  return Activation(Kind::kSpline, degree, nullptr);
}

Activation Activation::Identity() { return Activation(Kind::kIdentity, 0, nullptr); }

Activation Activation::Tabulated(Mask mask, int levels) {
  if (mask.degree() < 1)
    Fail(ErrorCode::kInvalidArgument,
         "tabulated activations need a mask of degree >= 1 (length >= 3)");
  if (mask.degree() > kMaxDegree)
    Fail(ErrorCode::kUnsupportedDegree, "mask degree exceeds " + std::to_string(kMaxDegree));
  DyadicTable sigma = TabulateSigmaFromStep(mask, levels);
  const bool symmetric = TabulatedPhiIsSymmetric(mask, levels);
  const int degree = mask.degree();
  auto data = std::make_shared<const TableData>(
      TableData{std::move(mask), levels, std::move(sigma), symmetric});
  return Activation(Kind::kTabulated, degree, std::move(data));
}

const Mask* Activation::mask() const { return table_ ? &table_->mask : nullptr; }
const DyadicTable* Activation::table() const { return table_ ? &table_->sigma : nullptr; }
int Activation::levels() const { return table_ ? table_->levels : 0; }
bool Activation::phi_symmetric() const { return table_ ? table_->phi_symmetric : true; }

double Activation::Evaluate(double t) const {
  switch (kind_) {
    case Kind::kSpline:
      return SplineSigma(degree_, t);
    case Kind::kIdentity:
      return t;
    case Kind::kTabulated: {
      const DyadicTable& tab = table_->sigma;
      if (t <= tab.front_abscissa()) return -0.5;
      if (t >= tab.back_abscissa()) return 0.5;
      const double pos = (t - tab.origin) / tab.spacing();
      auto j = static_cast<std::size_t>(pos);
      if (j + 1 >= tab.values.size()) j = tab.values.size() - 2;
      const double frac = pos - static_cast<double>(j);
      return tab.values[j] + frac * (tab.values[j + 1] - tab.values[j]);
    }
  }
  return 0.0;
}

double Activation::Derivative(double t) const {
  switch (kind_) {
    case Kind::kSpline:
      return SplineSigmaPrime(degree_, t);
    case Kind::kIdentity:
      return 1.0;
    case Kind::kTabulated: {
      const DyadicTable& tab = table_->sigma;
      if (t < tab.front_abscissa() || t >= tab.back_abscissa()) return 0.0;
      auto j = static_cast<std::size_t>((t - tab.origin) / tab.spacing());
      if (j + 1 >= tab.values.size()) j = tab.values.size() - 2;
      return (tab.values[j + 1] - tab.values[j]) / tab.spacing();
    }
  }
  return 0.0;
}

std::string Activation::Describe() const {
  switch (kind_) {
    case Kind::kSpline:
      return "spline:" + std::to_string(degree_);
    case Kind::kIdentity:
      return "identity";
    case Kind::kTabulated:
      return "tabulated:d=" + std::to_string(degree_) +
             ",levels=" + std::to_string(table_->levels);
  }
  return "unknown";
}

bool operator==(const Activation& a, const Activation& b) {
  if (a.kind_ != b.kind_ || a.degree_ != b.degree_) return false;
  if (a.kind_ != Activation::Kind::kTabulated) return true;
  return a.table_->mask == b.table_->mask && a.table_->levels == b.table_->levels;
}

RefinabilityData RefinabilityParams(const Activation& act) {
  return RefinabilityParams(act, 2);
}

RefinabilityData RefinabilityParams(const Activation& act, int identity_split) {
  RefinabilityData out;
  switch (act.kind()) {
    case Activation::Kind::kSpline: {
      const int d = act.degree();
      out.split_count = d + 1;
      out.shift = 0.5 * d;
      out.coeffs.resize(static_cast<std::size_t>(d) + 1);
      for (int l = 0; l <= d; ++l)
        out.coeffs[static_cast<std::size_t>(l)] = std::ldexp(Binomial(d, l), -d);
      break;
    }
    case Activation::Kind::kIdentity: {
      if (identity_split < 1)
        Fail(ErrorCode::kInvalidArgument, "identity split count must be >= 1");
      out.split_count = identity_split;
      out.shift = 0.5 * (identity_split - 1);
      out.coeffs.assign(static_cast<std::size_t>(identity_split), 0.5 / identity_split);
      break;
    }
    case Activation::Kind::kTabulated: {
      out.coeffs = FactorDifferenceScheme(*act.mask());
      out.split_count = act.degree() + 1;
      out.shift = 0.5 * act.degree();
      break;
    }
  }
  return out;
}

IdentitySumData IdentitySumParams(const Activation& act, int copies) {
  if (copies < 1) Fail(ErrorCode::kInvalidArgument, "B must be >= 1");
  if (act.kind() == Activation::Kind::kIdentity) return {1, 0.0, kInf, kInf};
  const int d = act.degree();
  if (copies < d)
    Fail(ErrorCode::kDegreeTooSmall,
         "B = " + std::to_string(copies) + " but " + act.Describe() +
             " needs B >= " + std::to_string(d));
  const double half_width = 0.5 * (copies - d + 1);
  return {copies, 0.5 * (copies - 1), half_width, half_width};
}

}  // namespace refnet
