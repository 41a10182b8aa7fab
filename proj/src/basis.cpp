#include "mfd/basis.hpp"

#include <array>
#include <cmath>
#include <string>

#include "mfd/error.hpp"

namespace mfd {
namespace {

// In-place de Casteljau on a scratch buffer of coefficients.
double de_casteljau(std::span<const double> coeffs, double t) {
  constexpr std::size_t kStack = 32;
  std::array<double, kStack> stack_buf;
  std::vector<double> heap_buf;
  double* b = stack_buf.data();
  if (coeffs.size() > kStack) {
    heap_buf.resize(coeffs.size());
    b = heap_buf.data();
  }
  std::copy(coeffs.begin(), coeffs.end(), b);
  const double s = 1.0 - t;
  for (std::size_t level = coeffs.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) b[i] = s * b[i] + t * b[i + 1];
  }
  return b[0];
}

}  // namespace

BezierBasis make_bezier_basis(int n, std::optional<std::span<const double>> interior) {
  if (n < 5) {
    throw Error(ErrorCode::DegreeTooLow, "Bezier basis degree must be >= 5, got " + std::to_string(n));
  }
  const std::size_t free = static_cast<std::size_t>(n - 5);
  BezierBasis basis;
  auto& y = basis.control_y_;
  y.assign(static_cast<std::size_t>(n) + 1, 0.0);
  y[0] = y[1] = y[2] = 1.0;
  if (interior) {
    if (interior->size() != free) {
      throw Error(ErrorCode::InvalidArgument, "degree " + std::to_string(n) + " takes " +
                                                  std::to_string(free) + " interior controls");
    }
    for (std::size_t i = 0; i < free; ++i) y[3 + i] = (*interior)[i];
  } else {
    for (std::size_t i = 0; i < free; ++i) {
      y[3 + i] = 1.0 - static_cast<double>(i + 1) / static_cast<double>(n - 4);
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) {
      throw Error(ErrorCode::NonMonotoneControls, "control ordinates must lie in [0, 1]");
    }
    if (i > 0 && y[i] > y[i - 1]) {
      throw Error(ErrorCode::NonMonotoneControls, "control ordinates must be non-increasing");
    }
  }
  return basis;
}

GaussianBasis make_gaussian_basis(std::optional<double> c) {
  if (c && !(std::isfinite(*c) && *c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian width constant must be finite and positive");
  }
  return GaussianBasis{c};
}

double eval_bezier(const BezierBasis& basis, double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return de_casteljau(basis.control_y(), t);
}

double eval_bezier_derivative(const BezierBasis& basis, double t, int order) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::InvalidArgument, "derivative order must be 1 or 2");
  }
  if (t < 0.0 || t > 1.0) return 0.0;
  std::vector<double> diff(basis.control_y().begin(), basis.control_y().end());
  double scale = 1.0;
  for (int o = 0; o < order; ++o) {
    const std::size_t m = diff.size() - 1;
    for (std::size_t i = 0; i < m; ++i) diff[i] = diff[i + 1] - diff[i];
    diff.pop_back();
    scale *= static_cast<double>(m);
  }
  return scale * de_casteljau(diff, t);
}

double eval_gaussian(const GaussianBasis& basis, double t) {
  const double ct = basis.width_constant() * t;
  return std::exp(-ct * ct);
}

double eval_basis(const Basis& basis, double t) {
  if (const auto* bezier = std::get_if<BezierBasis>(&basis)) return eval_bezier(*bezier, t);
  return eval_gaussian(std::get<GaussianBasis>(basis), t);
}

}  // namespace mfd
