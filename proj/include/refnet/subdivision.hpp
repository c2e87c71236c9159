#pragma once

// Mask algebra and the subdivision cascade.
//
// A mask a_0..a_{d+1} drives the refinement rule
//     f^{k+1}_i = sum_j a_{i-2j} f^k_j
// whose limit for delta data is the basic limit function phi, supported in
// (0, d+1). Everything here is a pure function of its inputs.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace refnet {

// Tolerance for algebraic identities on masks (evaluations at z = +-1,
// division remainders, sign tests).
inline constexpr double kAlgebraicTolerance = 1e-12;

class Mask {
 public:
  // Throws kInvalidArgument unless there are at least two coefficients and
  // the first and last are nonzero.
  explicit Mask(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  double operator[](std::size_t i) const { return coeffs_[i]; }

  // Support is [0, d+1].
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 2; }

  // a-hat(z) = sum_l a_l z^l
  double Evaluate(double z) const;

  // 2^{-d} C(d+1, l), l = 0..d+1. The mask of the degree-d B-spline.
  static Mask BSpline(int degree);

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::vector<double> coeffs_;
};

struct LaurentPoly {
  std::vector<double> coeffs;
  int offset = 0;  // exponent of coeffs[0]

  double Evaluate(double z) const;
  // Coefficient of z^exponent (zero outside the stored range).
  double At(int exponent) const;
  // p(z) -> p(z^2).
  LaurentPoly Dilated() const;

  static LaurentPoly FromMask(const Mask& mask);

  friend bool operator==(const LaurentPoly&, const LaurentPoly&) = default;
};

LaurentPoly LaurentMul(const LaurentPoly& p, const LaurentPoly& q);

// Samples at origin + i * 2^{-level}.
struct DyadicTable {
  int level = 0;
  double origin = 0.0;
  std::vector<double> values;

  double spacing() const;
  double Abscissa(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }
  double front_abscissa() const { return origin; }
  double back_abscissa() const { return Abscissa(values.size() - 1); }
};

// Two columns "abscissa value", one pair per line.
void WriteTable(std::ostream& out, const DyadicTable& table);
std::string FormatNumber(double value);

// a-hat(1) == 2 and a-hat(-1) == 0 within kAlgebraicTolerance.
bool CheckConvergenceNecessary(const Mask& mask);

// b with a-hat(z) = (1 + z) b-hat(z), by synthetic division. Length d+1.
// Throws kNotFactorable when the remainder exceeds kAlgebraicTolerance.
std::vector<double> FactorDifferenceScheme(const Mask& mask);

// True iff every difference-scheme coefficient is >= -kAlgebraicTolerance.
bool IsMonotoneScheme(const Mask& mask);

// One refinement step. Only outputs whose whole stencil lies on stored
// samples are kept, so each step trims (d+1)/4 coarse spacings from both
// ends; callers pad the data with its (constant) boundary values. Sample j
// of level k sits at parameter (j + (d+1)/2) h_k relative to the table,
// which keeps the abscissas of the limit fixed across levels.
DyadicTable Subdivide(const Mask& mask, const DyadicTable& table);

// Cascade from delta data. Approximates phi on its support (0, d+1);
// samples beyond the stored range are zero. Throws kNotConvergent when the
// necessary condition fails and kInvalidArgument for levels < 1.
DyadicTable TabulateBasicLimit(const Mask& mask, int levels);

// Cascade from step data (-1/2 left of zero, +1/2 from zero on), shifted
// so the table samples the associated activation sigma directly. The first
// and last stored values are the clamps.
DyadicTable TabulateSigmaFromStep(const Mask& mask, int levels);

// sum_l l phi(t - l) == t - (d+1)/2 on the interior of the tabulated phi,
// with sup error <= tol.
bool CheckPolynomialGeneration(const Mask& mask, int levels, double tol);

// sup over the tabulated nodes of |sum_l phi(t - l) - 1|.
double PartitionOfUnityError(const DyadicTable& phi_table);

}  // namespace refnet
