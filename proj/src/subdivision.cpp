#include "refnet/subdivision.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

#include "refnet/error.hpp"
#include "combinatorics.hpp"

namespace refnet {

Mask::Mask(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 2)
    Fail(ErrorCode::kInvalidArgument, "mask needs at least two coefficients");
  if (coeffs_.front() == 0.0 || coeffs_.back() == 0.0)
    Fail(ErrorCode::kInvalidArgument,
         "mask must have nonzero first and last coefficients");
  for (double c : coeffs_)
    if (!std::isfinite(c))
      Fail(ErrorCode::kInvalidArgument, "mask coefficients must be finite");
}

double Mask::Evaluate(double z) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Mask Mask::BSpline(int degree) {
  if (degree < 0 || degree > kMaxDegree)
    Fail(ErrorCode::kUnsupportedDegree,
         "B-spline degree must be in [0, " + std::to_string(kMaxDegree) + "]");
  std::vector<double> coeffs(static_cast<std::size_t>(degree) + 2);
  const double scale = std::ldexp(1.0, -degree);
  for (int l = 0; l <= degree + 1; ++l)
    coeffs[static_cast<std::size_t>(l)] = scale * Binomial(degree + 1, l);
  return Mask(std::move(coeffs));
}

double LaurentPoly::Evaluate(double z) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc * std::pow(z, offset);
}

double LaurentPoly::At(int exponent) const {
  const long idx = static_cast<long>(exponent) - offset;
  if (idx < 0 || idx >= static_cast<long>(coeffs.size())) return 0.0;
  return coeffs[static_cast<std::size_t>(idx)];
}

LaurentPoly LaurentPoly::Dilated() const {
  LaurentPoly out;
  out.offset = 2 * offset;
  if (coeffs.empty()) return out;
  out.coeffs.assign(2 * coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) out.coeffs[2 * i] = coeffs[i];
  return out;
}

LaurentPoly LaurentPoly::FromMask(const Mask& mask) {
  return LaurentPoly{mask.coeffs(), 0};
}

LaurentPoly LaurentMul(const LaurentPoly& p, const LaurentPoly& q) {
  LaurentPoly out;
  out.offset = p.offset + q.offset;
  if (p.coeffs.empty() || q.coeffs.empty()) return out;
  out.coeffs.assign(p.coeffs.size() + q.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs.size(); ++j)
      out.coeffs[i + j] += p.coeffs[i] * q.coeffs[j];
  return out;
}

double DyadicTable::spacing() const { return std::ldexp(1.0, -level); }

std::string FormatNumber(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

void WriteTable(std::ostream& out, const DyadicTable& table) {
  for (std::size_t i = 0; i < table.values.size(); ++i)
    out << FormatNumber(table.Abscissa(i)) << ' ' << FormatNumber(table.values[i])
        << '\n';
}

bool CheckConvergenceNecessary(const Mask& mask) {
  return std::abs(mask.Evaluate(1.0) - 2.0) <= kAlgebraicTolerance &&
         std::abs(mask.Evaluate(-1.0)) <= kAlgebraicTolerance;
}

std::vector<double> FactorDifferenceScheme(const Mask& mask) {
  const auto& a = mask.coeffs();
  std::vector<double> b(a.size() - 1);
  double carry = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) {
    b[l] = a[l] - carry;
    carry = b[l];
  }
  const double remainder = a.back() - carry;
  if (std::abs(remainder) > kAlgebraicTolerance)
    Fail(ErrorCode::kNotFactorable,
         "(1+z) does not divide the mask symbol: remainder " +
             FormatNumber(remainder));
  return b;
}

bool IsMonotoneScheme(const Mask& mask) {
  for (double bl : FactorDifferenceScheme(mask))
    if (bl < -kAlgebraicTolerance) return false;
  return true;
}

DyadicTable Subdivide(const Mask& mask, const DyadicTable& table) {
  const auto& a = mask.coeffs();
  const long n = static_cast<long>(table.values.size());
  const long support = static_cast<long>(a.size()) - 1;  // d + 1
  const long first = support;
  const long last = 2 * (n - 1);
  if (last < first)
    Fail(ErrorCode::kInvalidArgument,
         "table too short to subdivide with a mask of length " +
             std::to_string(a.size()));

  DyadicTable out;
  out.level = table.level + 1;
  out.origin = table.origin + 0.25 * static_cast<double>(support) * table.spacing();
  out.values.resize(static_cast<std::size_t>(last - first + 1));
  for (long i = first; i <= last; ++i) {
    // j ranges over ceil((i - d - 1)/2) .. floor(i/2), all inside [0, n-1].
    const long j_lo = (i - support + 1) / 2;
    const long j_hi = i / 2;
    double acc = 0.0;
    for (long j = j_lo; j <= j_hi; ++j)
      acc += a[static_cast<std::size_t>(i - 2 * j)] * table.values[static_cast<std::size_t>(j)];
    out.values[static_cast<std::size_t>(i - first)] = acc;
  }
  return out;
}

namespace {

void RequireCascadable(const Mask& mask, int levels) {
  if (!CheckConvergenceNecessary(mask))
    Fail(ErrorCode::kNotConvergent,
         "mask violates a(1) = 2, a(-1) = 0 (a(1) = " + FormatNumber(mask.Evaluate(1.0)) +
             ", a(-1) = " + FormatNumber(mask.Evaluate(-1.0)) + ")");
  if (levels < 1 || levels > 20)
    Fail(ErrorCode::kInvalidArgument, "cascade levels must be in [1, 20]");
}

DyadicTable Cascade(const Mask& mask, DyadicTable table, int levels) {
  for (int k = 0; k < levels; ++k) table = Subdivide(mask, table);
  return table;
}

}  // namespace

DyadicTable TabulateBasicLimit(const Mask& mask, int levels) {
  RequireCascadable(mask, levels);
  const int d = mask.degree();
  const long pad = d + 2;
  const double center = 0.5 * (d + 1);
  DyadicTable initial;
  initial.level = 0;
  initial.origin = center - static_cast<double>(pad);
  initial.values.assign(static_cast<std::size_t>(2 * pad + 1), 0.0);
  initial.values[static_cast<std::size_t>(pad)] = 1.0;
  return Cascade(mask, std::move(initial), levels);
}

DyadicTable TabulateSigmaFromStep(const Mask& mask, int levels) {
  RequireCascadable(mask, levels);
  const int d = mask.degree();
  const long pad = d + 2;
  // f^0_l sits at parameter l + (d+1)/2 and the limit is sigma(t - d/2),
  // so on the sigma axis sample l lands at l + 1/2.
  DyadicTable initial;
  initial.level = 0;
  initial.origin = 0.5 - static_cast<double>(pad);
  initial.values.resize(static_cast<std::size_t>(2 * pad));
  for (long l = -pad; l < pad; ++l)
    initial.values[static_cast<std::size_t>(l + pad)] = l < 0 ? -0.5 : 0.5;
  return Cascade(mask, std::move(initial), levels);
}

namespace {

// Sum over integer shifts of a tabulated phi: weight(l) * phi(t_j - l).
template <class Weight>
double ShiftedSum(const DyadicTable& phi, std::size_t j, Weight weight) {
  const long stride = 1L << phi.level;
  const long n = static_cast<long>(phi.values.size());
  double acc = 0.0;
  // Index of t_j - l is j - l * stride.
  const long l_lo = -((n - 1 - static_cast<long>(j)) / stride) - 1;
  const long l_hi = static_cast<long>(j) / stride + 1;
  for (long l = l_lo; l <= l_hi; ++l) {
    const long idx = static_cast<long>(j) - l * stride;
    if (idx < 0 || idx >= n) continue;
    acc += weight(l) * phi.values[static_cast<std::size_t>(idx)];
  }
  return acc;
}

}  // namespace

bool CheckPolynomialGeneration(const Mask& mask, int levels, double tol) {
  const DyadicTable phi = TabulateBasicLimit(mask, levels);
  const double center = 0.5 * (mask.degree() + 1);
  double worst = 0.0;
  for (std::size_t j = 0; j < phi.values.size(); ++j) {
    const double s = ShiftedSum(phi, j, [](long l) { return static_cast<double>(l); });
    worst = std::max(worst, std::abs(s - (phi.Abscissa(j) - center)));
  }
  return worst <= tol;
}

double PartitionOfUnityError(const DyadicTable& phi_table) {
  double worst = 0.0;
  for (std::size_t j = 0; j < phi_table.values.size(); ++j)
    worst = std::max(worst,
                     std::abs(ShiftedSum(phi_table, j, [](long) { return 1.0; }) - 1.0));
  return worst;
}

}  // namespace refnet
