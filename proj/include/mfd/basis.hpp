#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace mfd {

// Compactly supported falloff phi(t) taken as the y component of a degree-n
// Bezier curve whose x control coordinates are i/n (so x = t). The first three
// ordinates are 1 and the last three 0, which zeroes phi' and phi'' at both
// ends; phi is extended by 1 for t <= 0 and by 0 for t >= 1.
class BezierBasis {
 public:
  int degree() const noexcept { return static_cast<int>(control_y_.size()) - 1; }
  std::span<const double> control_y() const noexcept { return control_y_; }

  friend bool operator==(const BezierBasis&, const BezierBasis&) = default;

 private:
  friend BezierBasis make_bezier_basis(int n, std::optional<std::span<const double>> interior);
  std::vector<double> control_y_;
};

// Global falloff exp(-(c t)^2). An unset c means "auto": the width is half
// the handle's separation, i.e. c = 2 against t normalized by that separation.
struct GaussianBasis {
  std::optional<double> c;

  double width_constant() const { return c.value_or(2.0); }
  friend bool operator==(const GaussianBasis&, const GaussianBasis&) = default;
};

using Basis = std::variant<BezierBasis, GaussianBasis>;

// Interior ordinates (indices 3..n-3) default to a linear ramp from b_2 = 1
// to b_{n-2} = 0. Throws DegreeTooLow or NonMonotoneControls.
BezierBasis make_bezier_basis(int n, std::optional<std::span<const double>> interior = std::nullopt);

inline BezierBasis quintic_basis() { return make_bezier_basis(5); }

// Throws InvalidArgument unless c is finite and positive.
GaussianBasis make_gaussian_basis(std::optional<double> c = std::nullopt);

double eval_bezier(const BezierBasis& basis, double t);

// order is 1 or 2. Zero outside [0, 1] (constant extension).
double eval_bezier_derivative(const BezierBasis& basis, double t, int order);

double eval_gaussian(const GaussianBasis& basis, double t);

double eval_basis(const Basis& basis, double t);

inline bool is_compact(const Basis& basis) { return std::holds_alternative<BezierBasis>(basis); }

}  // namespace mfd
