#pragma once

// Refinable activations that sum the identity.
//
// sigma_{B^d} is -1/2 plus the cumulative sum of shifted degree-d B-splines:
// odd, non-decreasing, C^{d-1}, and clamped to +-1/2 outside [-d/2, d/2].
// Tabulated activations come from an arbitrary convergent mask through the
// subdivision cascade and are evaluated by linear interpolation.

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "refnet/subdivision.hpp"

namespace refnet {

// B-spline phi_{B^d}; the box indicator of [0, 1) for d = 0.
double SplinePhi(int degree, double t);

// sigma_{B^d}, degree >= 1.
double SplineSigma(int degree, double t);

// phi_{B^{d-1}}(t + d/2). For d = 1 the kinks |t| = 1/2 get slope 0.
double SplineSigmaPrime(int degree, double t);

// Derivative of sigma_{B^d} expressed through y = sigma_{B^d}(t), for the
// two degrees where a closed form exists (1 and 2). Throws
// kUnsupportedDegree otherwise and kDomain when |y| > 1/2.
double SigmaPrimeFromValue(int degree, double y);

// sigma(t) = sum_l coeffs[l] * sigma(2t + shift - l).
struct RefinabilityData {
  int split_count = 0;
  double shift = 0.0;
  std::vector<double> coeffs;
};

// sum_{l < copies} sigma(t + shift - l) = t on [-half_width, half_width].
// `delta` is the largest value with (-delta, delta) inside that interval;
// both are +infinity when the identity holds on the whole line.
struct IdentitySumData {
  int copies = 0;
  double shift = 0.0;
  double half_width = 0.0;
  double delta = 0.0;

  bool global() const { return delta == std::numeric_limits<double>::infinity(); }
};

inline constexpr int kDefaultTableLevels = 12;

class Activation {
 public:
  enum class Kind { kSpline, kIdentity, kTabulated };

  static Activation Spline(int degree);
  static Activation Identity();
  // Requires a convergent mask of degree >= 1; throws kNotConvergent or
  // kInvalidArgument.
  static Activation Tabulated(Mask mask, int levels = kDefaultTableLevels);

  Kind kind() const noexcept { return kind_; }
  // Zero for the identity.
  int degree() const noexcept { return degree_; }

  // Tabulated only; nullptr otherwise.
  const Mask* mask() const;
  const DyadicTable* table() const;
  int levels() const;
  // Whether the tabulated phi passed the phi(t) = phi(d+1-t) check.
  bool phi_symmetric() const;

  double Evaluate(double t) const;
  double Derivative(double t) const;

  // "spline:2", "identity", "tabulated:d=3,levels=12".
  std::string Describe() const;

  friend bool operator==(const Activation& a, const Activation& b);

 private:
  struct TableData;

  Activation(Kind kind, int degree, std::shared_ptr<const TableData> table)
      : kind_(kind), degree_(degree), table_(std::move(table)) {}

  Kind kind_;
  int degree_;
  std::shared_ptr<const TableData> table_;
};

// Identity defaults to A = 2 split copies.
RefinabilityData RefinabilityParams(const Activation& act);
// `identity_split` is the A to use when `act` is the identity; ignored for
// other kinds.
RefinabilityData RefinabilityParams(const Activation& act, int identity_split);

// Throws kDegreeTooSmall when copies < degree. The identity always reports
// a single copy on the whole line.
IdentitySumData IdentitySumParams(const Activation& act, int copies);

}  // namespace refnet
